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
"""Package for Training-Free Subspace Alignment of Semantic-ID Recommenders."""


from sidalign.utils import *
from sidalign.vocab import *
from sidalign.compress import *
from sidalign.backend import *
from sidalign.decode import *
from sidalign.align import *
from sidalign.diagnose import *
from sidalign.evalx import *
