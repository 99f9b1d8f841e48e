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
"""Test sidalign.decode module."""

import math
import warnings

import numpy as np
from numpy.testing import assert_almost_equal, assert_equal, assert_raises
import pytest

from sidalign.backend import next_token_dist, RemoteBackend, SyntheticModel, SyntheticModelConfig
from sidalign.decode import _beam_levels, beam_search_sid, BeamConfig, enumerate_all_sids
from sidalign.utils import ContextNotSidReady, InvalidConfig, SpaceTooLarge, UnsupportedCapability
from sidalign.vocab import COT_BEGIN, COT_END, HIST_BEGIN, HIST_EMPTY, HIST_END, SemanticId, \
    SID_BEGIN, Vocabulary


def _context(history, n_filler=0):
    tokens = [HIST_BEGIN]
    for sid in history:
        tokens.extend("<s_{0}_{1}>".format(level, code) for level, code in enumerate(sid))
    tokens.append(HIST_END)
    if n_filler:
        tokens += [COT_BEGIN] + ["w{0}".format(j % 5) for j in range(n_filler)] + [COT_END]
    return tokens + [SID_BEGIN]


def _small_model(seed, gamma=0.6):
    return SyntheticModel(SyntheticModelConfig(levels=2, codes_per_level=4, k_clusters=3,
                                               gamma=gamma, seed=seed))


def test_beam_config():
    r"""Test BeamConfig range checks."""
    assert_raises(InvalidConfig, BeamConfig, 0, 0)
    assert_raises(InvalidConfig, BeamConfig, 4, 5)
    assert_equal(BeamConfig().num_beams, 32)
    assert BeamConfig.from_dict({"num_beams": 8, "num_return": 2}) == BeamConfig(8, 2)


def test_enumerate_closed_form():
    r"""Test enumeration of a one-cluster, one-level model."""
    model = SyntheticModel(SyntheticModelConfig(levels=1, codes_per_level=2, k_clusters=1,
                                                gamma=0.0), clusters=np.array([[0.75, 0.25]]))
    ranking = enumerate_all_sids(model, _context([(0,)]))
    assert_equal([sid.codes for sid, _ in ranking], [(0,), (1,)])
    assert_almost_equal([score for _, score in ranking], [math.log(0.75), math.log(0.25)],
                        decimal=12)


def test_enumerate_uniform_is_lexicographic():
    r"""Test ties of the uniform model are broken in lexicographic order."""
    model = _small_model(0, gamma=0.0)
    ranking = enumerate_all_sids(model, [HIST_BEGIN, HIST_EMPTY, HIST_END, SID_BEGIN])
    assert_equal([sid for sid, _ in ranking], list(model.vocab.all_sids()))
    assert_almost_equal([score for _, score in ranking], [math.log(1 / 16)] * 16, decimal=12)


def test_enumerate_normalized():
    r"""Test exhaustive probabilities sum to one."""
    model = _small_model(4)
    ranking = enumerate_all_sids(model, _context([(1, 1), (1, 2)], 30))
    assert_almost_equal(sum(math.exp(score) for _, score in ranking), 1.0, decimal=9)
    scores = [score for _, score in ranking]
    assert scores == sorted(scores, reverse=True)


def test_enumerate_too_large():
    r"""Test enumeration refuses item spaces above 4096."""
    model = SyntheticModel(SyntheticModelConfig(levels=5, codes_per_level=8, k_clusters=1))
    assert_raises(SpaceTooLarge, enumerate_all_sids, model, [SID_BEGIN])


def test_beam_equals_enumeration_when_exhaustive():
    r"""Test a 16-wide beam reproduces enumeration exactly over 50 seeds, C=4, L=2."""
    for seed in range(50):
        model = _small_model(seed)
        context = _context([(seed % 4, 1), (2, seed % 3)], 10 + seed)
        beam = beam_search_sid(model, context, BeamConfig(16, 16))
        oracle = enumerate_all_sids(model, context)
        assert_equal([sid for sid, _ in beam], [sid for sid, _ in oracle])
        assert_almost_equal([s for _, s in beam], [s for _, s in oracle], decimal=9)


def test_narrow_beam_against_oracle():
    r"""Test a 3-wide beam returns valid, sorted, chain-rule scores close to the oracle."""
    agree = 0
    for seed in range(50):
        model = _small_model(seed)
        context = _context([(1, seed % 4)], seed)
        beam = beam_search_sid(model, context, BeamConfig(3, 3))
        oracle = enumerate_all_sids(model, context)
        scores = dict((sid, score) for sid, score in oracle)
        assert_equal(len(beam), 3)
        for sid, score in beam:
            assert_almost_equal(score, scores[sid], decimal=9)
        assert [s for _, s in beam] == sorted((s for _, s in beam), reverse=True)
        agree += [sid for sid, _ in beam] == [sid for sid, _ in oracle[:3]]
    assert agree > 0


def test_greedy_beam():
    r"""Test a width-one beam follows the per-level argmax."""
    model = _small_model(7)
    context = _context([(3, 3), (0, 1)], 8)
    prefix = []
    for level in range(2):
        dist = next_token_dist(model, context + prefix)
        prefix.append(max(sorted(dist), key=lambda token: dist[token]))
    (sid, _), = beam_search_sid(model, context, BeamConfig(1, 1))
    assert_equal(["<s_{0}_{1}>".format(lvl, code) for lvl, code in enumerate(sid.codes)],
                 prefix)


def test_beam_pruning_is_prefix_monotone():
    r"""Test survivors of every level have a top-ranked prefix at each earlier level."""
    model = SyntheticModel(SyntheticModelConfig(levels=3, codes_per_level=4, seed=13))
    levels = _beam_levels(model, _context([(1, 2, 3)], 25), 5)
    for depth in range(1, len(levels)):
        kept = set(codes for codes, _ in levels[depth - 1])
        for codes, _ in levels[depth]:
            assert codes[:depth] in kept


def test_beam_errors_and_warnings():
    r"""Test beam search capability, context and size checks."""
    model = _small_model(1)
    assert_raises(ContextNotSidReady, beam_search_sid, model, [HIST_BEGIN], BeamConfig(2, 2))
    remote = RemoteBackend("http://127.0.0.1:9", Vocabulary(2, 4))
    assert_raises(UnsupportedCapability, beam_search_sid, remote, [SID_BEGIN], BeamConfig(2, 2))
    remote.close()
    with pytest.warns(UserWarning):
        ranking = beam_search_sid(model, _context([(0, 0)]), BeamConfig(32, 20))
    assert_equal(len(ranking), 16)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        beam_search_sid(model, _context([(0, 0)]), BeamConfig(16, 16))
    assert all(isinstance(sid, SemanticId) for sid, _ in ranking)
