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
r"""
Subspace Alignment Module.

Candidates are scored under three contexts built from the same episode:

    - Expert: history and the compressed preference statement :math:`\hat{c}`, giving
      :math:`z_E`.
    - Amateur: an empty history and the raw reasoning chain :math:`c`, giving :math:`z_A`.
    - Baseline: history only, giving :math:`z_B`.

Each score vector is standardized over the candidate set and combined as

.. math::
    S(y) = (1 + \alpha) \tilde{z}_E(y) - \alpha \left(\tilde{z}_A(y) - \tilde{z}_B(y)\right)

so that only the excess promotion of a candidate by the reasoning text, relative to the
history alone, is penalized.

"""

import dataclasses
import enum
import logging

import numpy as np

from sidalign.backend import score_candidates
from sidalign.decode import beam_search_sid, BeamConfig
from sidalign.utils import check_finite_scores, check_positive_int, check_real, config_from_dict, \
    EmptyHistory, EmptyInput, InvalidConfig, NegativeAlpha, UnsupportedCapability
from sidalign.vocab import COT_BEGIN, COT_END, HIST_BEGIN, HIST_EMPTY, HIST_END, SID_BEGIN

__all__ = [
    "ContextKind",
    "CandidatePolicy",
    "AlignConfig",
    "ScoredCandidate",
    "CandidateScores",
    "build_context",
    "build_think_context",
    "zscore_normalize",
    "contrastive_score",
    "amateur_score",
    "cpmi_decompose",
    "generate_candidates",
    "score_candidate_set",
    "assemble",
    "rerank",
    "ranking_record",
]

logger = logging.getLogger(__name__)

EPSILON_FLOOR = 1e-12


class ContextKind(enum.Enum):
    """The three scoring contexts."""

    EXPERT = "Expert"
    AMATEUR = "Amateur"
    BASELINE = "Baseline"


class CandidatePolicy(enum.Enum):
    """Source of the candidate set when an episode does not carry one."""

    EXPERT_BEAM = "ExpertBeam"
    UNION_EXPERT_BASELINE = "UnionExpertBaseline"


_PENALTIES = ("drift", "amateur")


@dataclasses.dataclass(frozen=True)
class AlignConfig:
    r"""
    Parameters of the aligned reranker.

    Parameters
    ----------
    alpha : float
        Correction strength :math:`\alpha \geq 0`. Default=0.5.
    epsilon : float
        Standardization stabilizer :math:`\epsilon > 0`. Default=1e-6.
    candidate_policy : CandidatePolicy or str
        Candidate source. Default=UnionExpertBaseline.
    num_beams : int
        Beam width of candidate generation. Default=32.
    num_return : int
        Candidates taken from each beam, at most ``num_beams``. Default=32.
    penalty : {"drift", "amateur"}
        ``"drift"`` subtracts :math:`\tilde{z}_A - \tilde{z}_B`; ``"amateur"`` subtracts
        :math:`\tilde{z}_A` alone (ablation). Default="drift".

    """

    alpha: float = 0.5
    epsilon: float = 1e-6
    candidate_policy: CandidatePolicy = CandidatePolicy.UNION_EXPERT_BASELINE
    num_beams: int = 32
    num_return: int = 32
    penalty: str = "drift"

    def __post_init__(self):
        object.__setattr__(self, "candidate_policy", CandidatePolicy(self.candidate_policy))
        check_real(self.alpha, "alpha")
        check_real(self.epsilon, "epsilon")
        if not self.alpha >= 0:
            raise NegativeAlpha("alpha should be non-negative, got {0}.".format(self.alpha))
        if not self.epsilon > 0:
            raise InvalidConfig("epsilon should be positive, got {0}.".format(self.epsilon))
        check_positive_int(self.num_beams, "num_beams")
        check_positive_int(self.num_return, "num_return")
        if self.num_return > self.num_beams:
            raise InvalidConfig("num_return should not exceed num_beams.")
        if self.penalty not in _PENALTIES:
            raise InvalidConfig("penalty should be one of {0}, got {1!r}.".format(
                _PENALTIES, self.penalty))

    @property
    def beam(self):
        return BeamConfig(self.num_beams, self.num_return)

    def to_dict(self):
        data = dataclasses.asdict(self)
        data["candidate_policy"] = self.candidate_policy.value
        return data

    @classmethod
    def from_dict(cls, data):
        return config_from_dict(cls, data)


@dataclasses.dataclass(frozen=True)
class ScoredCandidate:
    """Raw, standardized and combined scores of one candidate."""

    sid: object
    z_E: float
    z_A: float
    z_B: float
    zt_E: float
    zt_A: float
    zt_B: float
    drift: float
    final: float

    def to_dict(self):
        """Return the JSON form used in rerank output, SID rendered as text."""
        return {"sid": _render(self.sid), "zE": self.z_E, "zA": self.z_A, "zB": self.z_B,
                "ztE": self.zt_E, "ztA": self.zt_A, "ztB": self.zt_B, "drift": self.drift,
                "final": self.final}


@dataclasses.dataclass(frozen=True)
class CandidateScores:
    """Raw scores of a candidate set under the three contexts; see :func:`assemble`."""

    sids: tuple
    z_E: tuple
    z_A: tuple
    z_B: tuple
    compressed: str = ""


def _sid_token_list(sid):
    return ["<s_{0}_{1}>".format(level, code) for level, code in enumerate(sid.codes)]


def _render(sid):
    return "".join(_sid_token_list(sid))


def _history_tokens(history):
    tokens = []
    for sid in history:
        tokens.extend(_sid_token_list(sid))
    return tokens


def build_context(kind, history, cot_tokens, compressed):
    """
    Lay out one of the three scoring contexts.

    Parameters
    ----------
    kind : ContextKind
        Which context to build.
    history : sequence of SemanticId
        Interaction history, oldest first. Ignored by the Amateur context.
    cot_tokens : sequence of str
        Raw reasoning chain tokens, used by the Amateur context.
    compressed : sequence of str
        Compressed statement tokens, used by the Expert context.

    Returns
    -------
    context : list of str
        The token sequence, ending with ``<|sid_begin|>``.

    Raises
    ------
    EmptyHistory
        If an Expert or Baseline context receives an empty history.
    EmptyInput
        If an Expert context receives an empty compressed statement.

    """
    kind = ContextKind(kind)
    if kind is ContextKind.AMATEUR:
        return [HIST_BEGIN, HIST_EMPTY, HIST_END, COT_BEGIN] + list(cot_tokens) \
            + [COT_END, SID_BEGIN]
    if not history:
        raise EmptyHistory("{0} context needs a non-empty history.".format(kind.value))
    hist = [HIST_BEGIN] + _history_tokens(history) + [HIST_END]
    if kind is ContextKind.BASELINE:
        return hist + [SID_BEGIN]
    compressed = list(compressed)
    if not compressed:
        raise EmptyInput("Expert context needs a non-empty compressed statement.")
    return hist + [COT_BEGIN] + compressed + [COT_END, SID_BEGIN]


def build_think_context(history, cot_tokens):
    """Expert layout carrying the raw chain; the think-on decoding context."""
    if not history:
        raise EmptyHistory("Think-on context needs a non-empty history.")
    return [HIST_BEGIN] + _history_tokens(history) + [HIST_END, COT_BEGIN] + list(cot_tokens) \
        + [COT_END, SID_BEGIN]


def zscore_normalize(scores, epsilon=1e-6):
    r"""
    Standardize scores over a candidate set.

    Parameters
    ----------
    scores : sequence of float
        Non-empty raw scores.
    epsilon : float, optional
        Stabilizer added to the population standard deviation; values below 1e-12 are
        raised to 1e-12. Default=1e-6.

    Returns
    -------
    normalized : list of float
        :math:`(s_i - \mu) / (\sigma + \epsilon)`.

    Raises
    ------
    EmptyInput
        If ``scores`` is empty.
    ValueError
        If ``epsilon`` is negative or a score is NaN or infinite.

    Examples
    --------
    >>> zscore_normalize([0.0, 1.0], 0.0)
    [-1.0, 1.0]

    """
    if epsilon < 0:
        raise ValueError("epsilon should be non-negative, got {0}.".format(epsilon))
    array = check_finite_scores(scores)
    centered = array - array.mean()
    return list(centered / (array.std() + max(epsilon, EPSILON_FLOOR)))


def contrastive_score(zt_E, zt_A, zt_B, alpha):
    r"""
    Combine standardized scores: :math:`(1+\alpha)\tilde{z}_E - \alpha(\tilde{z}_A-\tilde{z}_B)`.

    Raises
    ------
    NegativeAlpha
        If ``alpha`` is negative.

    """
    if alpha < 0:
        raise NegativeAlpha("alpha should be non-negative, got {0}.".format(alpha))
    return (1.0 + alpha) * zt_E - alpha * (zt_A - zt_B)


def amateur_score(zt_E, zt_A, alpha):
    r"""
    Penalize the CoT-only score itself: :math:`(1+\alpha)\tilde{z}_E - \alpha\tilde{z}_A`.

    Ablation of :func:`contrastive_score` without the Baseline correction.

    """
    if alpha < 0:
        raise NegativeAlpha("alpha should be non-negative, got {0}.".format(alpha))
    return (1.0 + alpha) * zt_E - alpha * zt_A


def cpmi_decompose(backend, history, cot_tokens, y):
    """
    Split the think-on score of an item into history information gain and text prior.

    Parameters
    ----------
    backend : ScoringBackend
        The scorer.
    history : sequence of SemanticId
        Interaction history.
    cot_tokens : sequence of str
        Raw reasoning chain tokens.
    y : SemanticId
        The item.

    Returns
    -------
    cpmi : float
        ``total - prior``, the pointwise mutual information of history and item given the chain.
    prior : float
        Score of ``y`` under the Amateur (chain only) context.
    total : float
        Score of ``y`` under the think-on context (history and raw chain).

    """
    total = score_candidates(backend, build_think_context(history, cot_tokens), [y])[0]
    prior = score_candidates(
        backend, build_context(ContextKind.AMATEUR, (), cot_tokens, ()), [y])[0]
    return total - prior, prior, total


def _beam_sids(backend, context, beam):
    return [sid for sid, _ in beam_search_sid(backend, context, beam)]


def generate_candidates(backend, episode, cfg, compressed):
    """
    Build the candidate set of an episode.

    Episodes that carry ``candidates`` use them as given. Otherwise the candidates are the top
    ``cfg.num_return`` beams under the Expert context, followed (for the union policy) by the
    unseen top beams under the Baseline context.

    Parameters
    ----------
    backend : ScoringBackend
        The scorer.
    episode : EpisodeRecord
        The episode.
    cfg : AlignConfig
        Policy and beam sizes.
    compressed : sequence of str
        Compressed statement tokens.

    Returns
    -------
    candidates : list of SemanticId
        Deduplicated candidates.

    Raises
    ------
    UnsupportedCapability
        If the episode has no candidates and the backend cannot decode.

    """
    if episode.candidates:
        return list(episode.candidates)
    if not backend.supports_full_distribution:
        raise UnsupportedCapability("Backend cannot decode; the episode needs candidates.")
    expert = build_context(ContextKind.EXPERT, episode.history, (), compressed)
    candidates = _beam_sids(backend, expert, cfg.beam)
    if cfg.candidate_policy is CandidatePolicy.UNION_EXPERT_BASELINE:
        seen = set(candidates)
        baseline = build_context(ContextKind.BASELINE, episode.history, (), ())
        for sid in _beam_sids(backend, baseline, cfg.beam):
            if sid not in seen:
                seen.add(sid)
                candidates.append(sid)
    return candidates


def score_candidate_set(backend, episode, cfg, compressor):
    """
    Compress the chain, generate candidates and score them under the three contexts.

    Parameters
    ----------
    backend : ScoringBackend
        The scorer.
    episode : EpisodeRecord
        Episode with a non-empty history.
    cfg : AlignConfig
        Candidate generation parameters.
    compressor : callable
        Maps the raw chain (str) to a compressed statement (str).

    Returns
    -------
    scores : CandidateScores
        Raw scores, order-aligned with the candidates.

    """
    if not episode.history:
        raise EmptyHistory("Episode {0!r} has an empty history.".format(episode.user))
    compressed = compressor(episode.cot)
    compressed_tokens = compressed.split()
    cot_tokens = episode.cot.split()
    candidates = generate_candidates(backend, episode, cfg, compressed_tokens)
    contexts = [build_context(ContextKind.EXPERT, episode.history, cot_tokens, compressed_tokens),
                build_context(ContextKind.AMATEUR, episode.history, cot_tokens, compressed_tokens),
                build_context(ContextKind.BASELINE, episode.history, cot_tokens, ())]
    z_E, z_A, z_B = (tuple(score_candidates(backend, context, candidates))
                     for context in contexts)
    logger.debug("Episode %s: %d candidates, compressed to %r", episode.user, len(candidates),
                 compressed)
    return CandidateScores(tuple(candidates), z_E, z_A, z_B, compressed)


def assemble(scores, alpha, epsilon=1e-6, penalty="drift"):
    """
    Standardize raw scores and rank candidates by the combined score.

    Parameters
    ----------
    scores : CandidateScores
        Output of :func:`score_candidate_set`.
    alpha : float
        Correction strength.
    epsilon : float, optional
        Standardization stabilizer. Default=1e-6.
    penalty : {"drift", "amateur"}, optional
        Penalty form. Default="drift".

    Returns
    -------
    ranking : list of ScoredCandidate
        Sorted by ``final`` descending, ties broken by lexicographic SID order.

    """
    zt_E = zscore_normalize(scores.z_E, epsilon)
    zt_A = zscore_normalize(scores.z_A, epsilon)
    zt_B = zscore_normalize(scores.z_B, epsilon)
    ranked = []
    for index, sid in enumerate(scores.sids):
        drift = zt_A[index] - zt_B[index]
        if penalty == "amateur":
            final = amateur_score(zt_E[index], zt_A[index], alpha)
        else:
            final = contrastive_score(zt_E[index], zt_A[index], zt_B[index], alpha)
        ranked.append(ScoredCandidate(sid, scores.z_E[index], scores.z_A[index],
                                      scores.z_B[index], float(zt_E[index]), float(zt_A[index]),
                                      float(zt_B[index]), float(drift), float(final)))
    ranked.sort(key=lambda cand: (-cand.final, cand.sid.codes))
    return ranked


def rerank(backend, episode, cfg, compressor):
    """
    Run the full aligned pipeline on one episode.

    Compress the chain, generate candidates, score them under the Expert, Amateur and Baseline
    contexts, standardize per context and rank by the combined score.

    Parameters
    ----------
    backend : ScoringBackend
        The scorer.
    episode : EpisodeRecord
        Episode with history and raw chain.
    cfg : AlignConfig
        Alignment parameters.
    compressor : callable
        Maps the raw chain to a compressed statement.

    Returns
    -------
    ranking : list of ScoredCandidate
        Candidates sorted by combined score descending.

    Raises
    ------
    EmptyHistory
        If the episode history is empty.

    """
    scores = score_candidate_set(backend, episode, cfg, compressor)
    return assemble(scores, cfg.alpha, cfg.epsilon, cfg.penalty)


def ranking_record(episode, ranking):
    """Return the rerank output line of an episode as a dict."""
    return {"user": episode.user,
            "ranking": [_render(cand.sid) for cand in ranking],
            "scores": [cand.to_dict() for cand in ranking]}
