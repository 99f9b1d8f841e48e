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
#
# sidalign documentation build configuration file, created by
# sphinx-quickstart.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys
sys.path.insert(0, os.path.abspath('../'))


# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'numpydoc',
    'sphinx.ext.doctest']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
numfig = True

# General information about the project.
project = 'sidalign'
copyright = '2026, The sidalign Development Team'
author = 'The sidalign Development Team'

# The short X.Y version.
version = '0.0.1'
# The full version, including alpha/beta/rc tags.
release = '0.0.1-alpha'

language = 'en'
exclude_patterns = ['_build', 'Thumbs.db', '_themes/*', '.DS_Store']
pygments_style = 'sphinx'


# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = []
htmlhelp_basename = 'sidaligndoc'


# -- Options for LaTeX and manual page output -----------------------------

latex_documents = [
    (master_doc, 'sidalign.tex', 'sidalign Documentation', author, 'manual'),
]
man_pages = [
    (master_doc, 'sidalign', 'sidalign Documentation', [author], 1)
]


# -- Custom sidalign-specific settings ------------------------------------

autoclass_content = 'both'
autodoc_member_order = 'bysource'
autodoc_default_options = {'members': True, 'undoc-members': True, 'show-inheritance': True}
numpydoc_show_class_members = False
