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
"""Constrained semantic-ID decoding: beam search and exhaustive enumeration."""

import dataclasses
import logging
import math
import warnings

from sidalign.backend import next_token_dist, score_candidates
from sidalign.utils import check_positive_int, config_from_dict, ContextNotSidReady, \
    InvalidConfig, SpaceTooLarge
from sidalign.vocab import parse_sid_token, SemanticId, SID_BEGIN

__all__ = [
    "BeamConfig",
    "MAX_ENUMERATION",
    "beam_search_sid",
    "enumerate_all_sids",
]

logger = logging.getLogger(__name__)

MAX_ENUMERATION = 4096


@dataclasses.dataclass(frozen=True)
class BeamConfig:
    """
    Beam search width and result count.

    Parameters
    ----------
    num_beams : int
        Number of prefixes kept after every level. Default=32.
    num_return : int
        Number of sequences returned, at most ``num_beams``. Default=32.

    """

    num_beams: int = 32
    num_return: int = 32

    def __post_init__(self):
        check_positive_int(self.num_beams, "num_beams")
        check_positive_int(self.num_return, "num_return")
        if self.num_return > self.num_beams:
            raise InvalidConfig("num_return ({0}) should not exceed num_beams ({1}).".format(
                self.num_return, self.num_beams))

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        return config_from_dict(cls, data)


def _rank_key(entry):
    codes, score = entry
    return -score, codes


def _check_context(context):
    context = list(context)
    if not context or context[-1] != SID_BEGIN:
        raise ContextNotSidReady("Decoding context should end with {0}.".format(SID_BEGIN))
    return context


def _beam_levels(backend, context, num_beams):
    """Return the surviving ``(codes, score)`` beams after every level."""
    context = _check_context(context)
    beams = [((), 0.0)]
    history = []
    for level in range(backend.vocab.levels):
        expanded = []
        for codes, score in beams:
            prefix = ["<s_{0}_{1}>".format(depth, code) for depth, code in enumerate(codes)]
            dist = next_token_dist(backend, context + prefix)
            for token, prob in dist.items():
                pair = parse_sid_token(token)
                if pair is None or pair[0] != level or prob <= 0.0:
                    continue
                expanded.append((codes + (pair[1],), score + math.log(prob)))
        beams = sorted(expanded, key=_rank_key)[:num_beams]
        logger.debug("Level %d: kept %d of %d prefixes", level, len(beams), len(expanded))
        history.append(beams)
    return history


def beam_search_sid(backend, context, cfg):
    """
    Beam search over the :math:`L` code levels of a semantic ID.

    Every level expands each surviving prefix with all legal codes of that level and keeps the
    ``cfg.num_beams`` best prefixes. No length normalization is applied since all sequences
    have length :math:`L`.

    Parameters
    ----------
    backend : ScoringBackend
        Backend exposing full next-token distributions.
    context : sequence of str
        Context tokens ending with ``<|sid_begin|>``.
    cfg : BeamConfig
        Beam width and result count.

    Returns
    -------
    ranking : list of (SemanticId, float)
        ``cfg.num_return`` sequences (fewer if the item space is smaller) sorted by score
        descending, ties broken by lexicographic SID order. Scores are sums of step
        log-probabilities.

    Raises
    ------
    UnsupportedCapability
        If the backend lacks full distributions.
    ContextNotSidReady
        If the context does not end with ``<|sid_begin|>``.

    """
    if cfg.num_return > backend.vocab.n_items:
        warnings.warn("num_return={0} exceeds the {1} items; all items are returned.".format(
            cfg.num_return, backend.vocab.n_items))
    beams = _beam_levels(backend, context, cfg.num_beams)[-1]
    return [(SemanticId(codes), score) for codes, score in beams[:cfg.num_return]]


def enumerate_all_sids(backend, context):
    """
    Score every item exhaustively.

    Parameters
    ----------
    backend : ScoringBackend
        Any scoring backend.
    context : sequence of str
        Context tokens ending with ``<|sid_begin|>``.

    Returns
    -------
    ranking : list of (SemanticId, float)
        All :math:`C^L` items sorted by score descending, ties broken lexicographically.

    Raises
    ------
    SpaceTooLarge
        If the vocabulary has more than 4096 items.

    """
    vocab = backend.vocab
    if vocab.n_items > MAX_ENUMERATION:
        raise SpaceTooLarge("Cannot enumerate {0} items (limit {1}).".format(
            vocab.n_items, MAX_ENUMERATION))
    context = _check_context(context)
    sids = list(vocab.all_sids())
    scores = score_candidates(backend, context, sids)
    ranked = sorted(zip((sid.codes for sid in sids), scores), key=_rank_key)
    return [(SemanticId(codes), score) for codes, score in ranked]
