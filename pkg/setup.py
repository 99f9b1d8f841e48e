# -*- coding: utf-8 -*-
# The sidalign library provides training-free inference-time alignment for
# semantic-ID generative recommenders that reason before they recommend.
#
# Copyright (C) 2026 The sidalign Development Team
#
# This file is part of sidalign.
#
# sidalign is free software; you can redistribute it and/or
# modify it under the terms of the GNU General Public License
# as published by the Free Software Foundation; either version 3
# of the License, or (at your option) any later version.
#
# sidalign is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program; if not, see <http://www.gnu.org/licenses/>
#
# --
"""Setup and Install Script."""


import io
from os import path

from setuptools import find_packages, setup

here = path.abspath(path.dirname(__file__))

# Get the long description from the README file
with io.open(path.join(here, "README.md"), encoding="utf-8") as f:
    long_description = f.read()


setup(
    name="sidalign",
    version="0.0.1-alpha",
    description="Training-free subspace alignment for reasoning semantic-ID recommenders",
    long_description=long_description,
    long_description_content_type='text/markdown',
    license="GNU (Version 3)",
    author="The sidalign Development Team",
    packages=find_packages(exclude=["docs", "*.test"]),
    package_data={"sidalign": ["data/*.txt", "data/fixtures/*.json"]},
    python_requires=">=3.9",
    install_requires=["numpy>=1.21", "scipy>=1.7", "httpx>=0.24", "fastapi>=0.100",
                      "pydantic>=2.0", "uvicorn>=0.22"],
    extras_require={"test": ["pytest>=7.0", "hypothesis>=6.0"], "doc": ["sphinx>=4.0"]},
    entry_points={"console_scripts": ["sidalign=sidalign.cli:main",
                                      "sidalign-mock-server=sidalign.mock_server:main"]},
)
