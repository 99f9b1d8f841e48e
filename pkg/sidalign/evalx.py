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
"""
Evaluation Module.

Episodes are read from (or written to) JSONL, one object per line::

    {"user": "u1", "history": ["<s_0_3><s_1_7><s_2_1>"], "cot": "...",
     "target": "<s_0_2><s_1_0><s_2_5>", "candidates": [...]}

``candidates`` is optional. Rankings are scored with single-target Recall@K and NDCG@K and
aggregated as unweighted means over episodes.

"""

import concurrent.futures
import contextlib
import csv
import dataclasses
import functools
import json
import logging
import math

import numpy as np

from sidalign.align import AlignConfig, assemble, build_context, build_think_context, ContextKind, \
    score_candidate_set
from sidalign.backend import CUE_TOKENS, load_backend, score_candidates, SyntheticModel
from sidalign.compress import compress_rule_based, CompressorConfig, RemoteCompressor
from sidalign.decode import beam_search_sid, BeamConfig
from sidalign.utils import check_positive_int, check_real, check_sequence, config_from_dict, \
    DuplicateInRanking, EmptyHistory, EmptyInput, InvalidConfig, InvalidSid, MalformedSid, \
    MissingField, ParseError
from sidalign.vocab import parse_sid, render_sid, SemanticId

__all__ = [
    "EpisodeRecord",
    "ReportRow",
    "ReportTable",
    "ExperimentConfig",
    "COT_STYLES",
    "recall_at_k",
    "ndcg_at_k",
    "load_dataset",
    "dump_dataset",
    "synth_dataset",
    "rank_episode",
    "run_experiment",
]

logger = logging.getLogger(__name__)

COT_STYLES = ("none", "short", "verbose")
_FILLER_RANGE = {"none": (0, 0), "short": (0, 8), "verbose": (64, 128)}
_CUE_CLAUSES = {"none": 0, "short": 1, "verbose": 2}
_REQUIRED = ("user", "history", "target")


@dataclasses.dataclass(frozen=True)
class EpisodeRecord:
    """
    One evaluation episode.

    Parameters
    ----------
    user : str
        User identifier.
    history : tuple of SemanticId
        Non-empty interaction history, oldest first.
    cot : str
        Raw reasoning chain; empty for think-off-only records.
    target : SemanticId
        Ground-truth next item.
    candidates : tuple of SemanticId, optional
        Fixed candidate set; non-empty and duplicate-free when given.

    Raises
    ------
    EmptyHistory
        If the history is empty.

    """

    user: str
    history: tuple
    cot: str
    target: SemanticId
    candidates: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "history", tuple(self.history))
        if not self.history:
            raise EmptyHistory("Episode {0!r} has an empty history.".format(self.user))
        if self.candidates is not None:
            candidates = tuple(self.candidates)
            if not candidates:
                raise ValueError("candidates should not be empty when given.")
            if len(set(candidates)) != len(candidates):
                raise ValueError("candidates should not contain duplicates.")
            object.__setattr__(self, "candidates", candidates)


@dataclasses.dataclass(frozen=True)
class ReportRow:
    """One ``method,metric,K,alpha,value,n`` row of a report."""

    method: str
    metric: str
    k: int
    alpha: float
    value: float
    n: int

    def to_row(self):
        alpha = "" if self.alpha is None else repr(float(self.alpha))
        return [self.method, self.metric, self.k, alpha, repr(self.value), self.n]


class ReportTable:
    """Metric values per method, metric, cutoff and correction strength."""

    columns = ("method", "metric", "K", "alpha", "value", "n")

    def __init__(self, rows):
        self.rows = list(rows)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def select(self, method=None, metric=None, k=None):
        """Return the rows matching every given field."""
        return [row for row in self.rows
                if (method is None or row.method == method)
                and (metric is None or row.metric == metric)
                and (k is None or row.k == k)]

    def value(self, method, metric, k, alpha=None):
        """Return one value; for aligned methods ``alpha=None`` means the best over the grid."""
        rows = self.select(method, metric, k)
        if alpha is not None:
            rows = [row for row in rows if row.alpha == alpha]
        if not rows:
            raise KeyError((method, metric, k, alpha))
        return max(row.value for row in rows)

    def relative_improvement(self, metric, k):
        """
        Relative gain of the best aligned value over the best of think-off and think-on.

        Returns NaN when both baselines are zero.

        """
        baseline = max(self.value("think_off", metric, k), self.value("think_on", metric, k))
        aligned = self.value("aligned", metric, k)
        if baseline == 0:
            return float("nan")
        return (aligned - baseline) / baseline

    def write_csv(self, handle):
        """Write the report as CSV to an open text handle."""
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(row.to_row())


def _target_rank(ranking, target):
    ranking = list(ranking)
    if len(set(ranking)) != len(ranking):
        raise DuplicateInRanking("Ranking lists an item more than once.")
    try:
        return ranking.index(target) + 1
    except ValueError:
        return None


def recall_at_k(ranking, target, k):
    """
    Return 1 when the target is among the first ``k`` entries of the ranking, else 0.

    Raises
    ------
    DuplicateInRanking
        If the ranking repeats an item.

    """
    k = check_positive_int(k, "K")
    rank = _target_rank(ranking, target)
    return int(rank is not None and rank <= k)


def ndcg_at_k(ranking, target, k):
    r"""
    Single-target NDCG: :math:`1 / \log_2(1 + \text{rank})` within the cutoff, else 0.

    Raises
    ------
    DuplicateInRanking
        If the ranking repeats an item.

    Examples
    --------
    >>> ndcg_at_k(["a", "b", "c"], "c", 10)
    0.5

    """
    k = check_positive_int(k, "K")
    rank = _target_rank(ranking, target)
    if rank is None or rank > k:
        return 0.0
    return 1.0 / math.log2(1 + rank)


def _parse_sid_field(value, vocab, lineno):
    try:
        return parse_sid(value, vocab)
    except MalformedSid as err:
        raise InvalidSid(lineno, str(err)) from err


def _parse_record(obj, vocab, lineno):
    for field in _REQUIRED:
        if field not in obj:
            raise MissingField(lineno, field)
    if not isinstance(obj["history"], list) or not obj["history"]:
        raise ParseError(lineno, "history should be a non-empty list")
    history = tuple(_parse_sid_field(value, vocab, lineno) for value in obj["history"])
    target = _parse_sid_field(obj["target"], vocab, lineno)
    candidates = obj.get("candidates")
    if candidates is not None:
        if not isinstance(candidates, list):
            raise ParseError(lineno, "candidates should be a list")
        candidates = tuple(_parse_sid_field(value, vocab, lineno) for value in candidates)
    cot = obj.get("cot", "")
    if not isinstance(cot, str):
        raise ParseError(lineno, "cot should be a string")
    try:
        return EpisodeRecord(str(obj["user"]), history, cot, target, candidates)
    except ValueError as err:
        raise ParseError(lineno, str(err)) from err


def load_dataset(path, vocab):
    """
    Read episodes from a JSONL file.

    Parameters
    ----------
    path : str
        Dataset path; blank lines are skipped.
    vocab : Vocabulary
        Vocabulary validating every SID.

    Returns
    -------
    episodes : list of EpisodeRecord
        The episodes, in file order.

    Raises
    ------
    ParseError
        If a line is not a JSON object or a field has the wrong type.
    MissingField
        If a line lacks ``user``, ``history`` or ``target``.
    InvalidSid
        If a SID is malformed or out of range.

    """
    episodes = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise ParseError(lineno, "invalid JSON: {0}".format(err.msg)) from err
            if not isinstance(obj, dict):
                raise ParseError(lineno, "expected a JSON object")
            episodes.append(_parse_record(obj, vocab, lineno))
    return episodes


def dump_dataset(records, path, vocab):
    """Write episodes as canonical JSONL (fixed key order, SIDs in text form)."""
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            obj = {"user": record.user,
                   "history": [render_sid(sid, vocab) for sid in record.history],
                   "cot": record.cot,
                   "target": render_sid(record.target, vocab)}
            if record.candidates is not None:
                obj["candidates"] = [render_sid(sid, vocab) for sid in record.candidates]
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")


def synth_dataset(backend, n, cot_style, seed, history_length=10):
    """
    Sample episodes from the synthetic recommender.

    Each user draws a taste cluster from the prior and ``history_length`` items from it. The
    target is drawn from the drift-free conditional given the history, so drift can only hurt.
    The chain is filler tokens followed by cue clauses ``the user repeatedly watches topic_k .``
    with clusters drawn from the history posterior.

    Parameters
    ----------
    backend : SyntheticModel
        The synthetic recommender.
    n : int
        Number of episodes, non-negative.
    cot_style : {"none", "short", "verbose"}
        ``none``: empty chain; ``short``: 0-8 filler tokens and one cue clause; ``verbose``:
        64-128 filler tokens and two cue clauses.
    seed : int
        Seed of the episode generator.
    history_length : int, optional
        History length. Default=10.

    Returns
    -------
    episodes : list of EpisodeRecord
        Deterministic for a given backend, style and seed.

    Raises
    ------
    InvalidConfig
        If the backend is not synthetic or a parameter is out of range.

    """
    if not isinstance(backend, SyntheticModel):
        raise InvalidConfig("synth_dataset needs a synthetic backend.")
    if cot_style not in COT_STYLES:
        raise InvalidConfig("cot_style should be one of {0}, got {1!r}.".format(
            COT_STYLES, cot_style))
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise InvalidConfig("n should be a non-negative integer, got {0!r}.".format(n))
    history_length = check_positive_int(history_length, "history_length")
    vocab = backend.vocab
    clusters, prior = backend.clusters, backend.prior
    rng = np.random.default_rng(seed)
    low, high = _FILLER_RANGE[cot_style]
    episodes = []
    for index in range(n):
        cluster = rng.choice(len(prior), p=prior)
        history = rng.choice(vocab.n_items, size=history_length, p=clusters[cluster])
        posterior = backend.cluster_posterior(history)
        base = posterior @ clusters
        target = rng.choice(vocab.n_items, p=base / base.sum())
        tokens = []
        if cot_style != "none":
            fillers = rng.integers(0, backend.config.n_general, size=rng.integers(low, high + 1))
            tokens.extend(backend.filler_tokens[j] for j in fillers)
            for mention in rng.choice(len(posterior), size=_CUE_CLAUSES[cot_style],
                                      p=posterior):
                tokens.extend(CUE_TOKENS + (backend.topic_tokens[mention], "."))
        episodes.append(EpisodeRecord(
            "u{0}".format(index),
            tuple(SemanticId.from_index(int(item), vocab) for item in history),
            " ".join(tokens),
            SemanticId.from_index(int(target), vocab)))
    return episodes


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """
    Description of an evaluation run.

    Parameters
    ----------
    backend : str
        Backend spec (``synth``, ``synth:PATH`` or a URL). Default="synth".
    vocab : str, optional
        Vocabulary JSON path; required for remote backends and for datasets read with a
        remote backend.
    dataset : str, optional
        JSONL dataset; when absent episodes are synthesized.
    episodes : int
        Number of synthesized episodes. Default=1000.
    cot_style : str
        Style of synthesized chains. Default="verbose".
    seed : int
        Seed of the episode generator. Default=0.
    align : AlignConfig
        Aligned reranker parameters.
    compressor : CompressorConfig
        Rule-based compressor parameters (budget also applies to remote replies).
    compressor_endpoint : str, optional
        URL of a remote compressor; the rule-based compressor is used when absent.
    beam : BeamConfig
        Decoding parameters of the think-off and think-on methods.
    k_list : tuple of int
        Cutoffs. Default=(1, 5, 10).
    alpha_grid : tuple of float, optional
        Correction strengths; defaults to ``(align.alpha,)``.
    ablations : bool
        Also report ``aligned_amateur`` rows. Default=False.
    workers : int
        Episode-level parallelism. Default=1.

    """

    backend: str = "synth"
    vocab: str = None
    dataset: str = None
    episodes: int = 1000
    cot_style: str = "verbose"
    seed: int = 0
    align: AlignConfig = AlignConfig()
    compressor: CompressorConfig = CompressorConfig()
    compressor_endpoint: str = None
    beam: BeamConfig = BeamConfig()
    k_list: tuple = (1, 5, 10)
    alpha_grid: tuple = None
    ablations: bool = False
    workers: int = 1

    def __post_init__(self):
        for name, cls in (("align", AlignConfig), ("compressor", CompressorConfig),
                          ("beam", BeamConfig)):
            value = getattr(self, name)
            if isinstance(value, dict):
                object.__setattr__(self, name, cls.from_dict(value))
            elif not isinstance(value, cls):
                raise InvalidConfig("{0} should be a {1}.".format(name, cls.__name__))
        k_list = check_sequence(self.k_list, "k_list")
        object.__setattr__(self, "k_list", tuple(check_positive_int(k, "K") for k in k_list))
        if not self.k_list:
            raise InvalidConfig("k_list should not be empty.")
        if self.alpha_grid is not None:
            grid = tuple(check_real(alpha, "alpha") for alpha in
                         check_sequence(self.alpha_grid, "alpha_grid"))
            if not grid or min(grid) < 0:
                raise InvalidConfig("alpha_grid should hold non-negative values.")
            object.__setattr__(self, "alpha_grid", grid)
        if self.cot_style not in COT_STYLES:
            raise InvalidConfig("cot_style should be one of {0}.".format(COT_STYLES))
        check_positive_int(self.workers, "workers")

    @property
    def alphas(self):
        return self.alpha_grid if self.alpha_grid is not None else (self.align.alpha,)

    def to_dict(self):
        data = dataclasses.asdict(self)
        data["align"] = self.align.to_dict()
        data["compressor"] = self.compressor.to_dict()
        data["k_list"] = list(self.k_list)
        if self.alpha_grid is not None:
            data["alpha_grid"] = list(self.alpha_grid)
        return data

    @classmethod
    def from_dict(cls, data):
        return config_from_dict(cls, data)


def _rank_by_score(backend, context, candidates):
    scores = score_candidates(backend, context, candidates)
    ranked = sorted(zip(candidates, scores), key=lambda pair: (-pair[1], pair[0].codes))
    return [sid for sid, _ in ranked]


def _decode(backend, context, episode, beam):
    if episode.candidates:
        return _rank_by_score(backend, context, list(episode.candidates))
    return [sid for sid, _ in beam_search_sid(backend, context, beam)]


def rank_episode(backend, episode, config, compressor):
    """
    Rank one episode under every method of the experiment.

    Returns
    -------
    rankings : dict
        Maps ``(method, alpha)`` to a list of SemanticId; ``alpha`` is None for the think-off
        and think-on methods.

    """
    think_off = build_context(ContextKind.BASELINE, episode.history, (), ())
    think_on = build_think_context(episode.history, episode.cot.split())
    rankings = {("think_off", None): _decode(backend, think_off, episode, config.beam),
                ("think_on", None): _decode(backend, think_on, episode, config.beam)}
    scores = score_candidate_set(backend, episode, config.align, compressor)
    penalties = [("aligned", "drift")]
    if config.ablations:
        penalties.append(("aligned_amateur", "amateur"))
    for method, penalty in penalties:
        for alpha in config.alphas:
            ranked = assemble(scores, alpha, config.align.epsilon, penalty)
            rankings[(method, alpha)] = [cand.sid for cand in ranked]
    return rankings


def _build_compressor(config):
    if config.compressor_endpoint:
        return RemoteCompressor(config.compressor_endpoint, config.compressor,
                                max_concurrency=config.workers)
    return contextlib.nullcontext(functools.partial(compress_rule_based, cfg=config.compressor))


def run_experiment(config, backend=None, episodes=None, compressor=None):
    """
    Compare think-off, think-on and aligned ranking over a dataset.

    Parameters
    ----------
    config : ExperimentConfig
        The experiment.
    backend : ScoringBackend, optional
        Overrides ``config.backend``.
    episodes : list of EpisodeRecord, optional
        Overrides ``config.dataset`` and the synthetic generator.
    compressor : callable, optional
        Overrides the compressor built from the configuration.

    Returns
    -------
    report : ReportTable
        Recall and NDCG per method and cutoff, with one aligned row per correction strength.
        Values are unweighted means over episodes and do not depend on ``config.workers``.

    Raises
    ------
    EmptyInput
        If there is no episode to evaluate.

    """
    # clients built here are closed on return; passed-in ones belong to the caller
    with contextlib.ExitStack() as stack:
        if backend is None:
            backend = stack.enter_context(load_backend(config.backend, config.vocab,
                                                       max_concurrency=config.workers))
        if episodes is None:
            if config.dataset:
                episodes = load_dataset(config.dataset, backend.vocab)
            else:
                episodes = synth_dataset(backend, config.episodes, config.cot_style, config.seed)
        if not episodes:
            raise EmptyInput("No episodes to evaluate.")
        if compressor is None:
            compressor = stack.enter_context(_build_compressor(config))
        logger.info("Evaluating %d episodes with %d worker(s)", len(episodes), config.workers)

        def evaluate(episode):
            return rank_episode(backend, episode, config, compressor)

        with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as executor:
            all_rankings = []
            for done, rankings in enumerate(executor.map(evaluate, episodes), start=1):
                all_rankings.append(rankings)
                if done % 100 == 0:
                    logger.info("Ranked %d/%d episodes", done, len(episodes))

    rows = []
    for key in all_rankings[0]:
        method, alpha = key
        for metric, fn in (("Recall", recall_at_k), ("NDCG", ndcg_at_k)):
            for k in config.k_list:
                total = math.fsum(fn(rankings[key], episode.target, k)
                                  for rankings, episode in zip(all_rankings, episodes))
                rows.append(ReportRow(method, metric, k, alpha, total / len(episodes),
                                      len(episodes)))
    report = ReportTable(rows)
    for k in config.k_list:
        logger.info("Recall@%d think_off=%.4f think_on=%.4f aligned(best)=%.4f (%+.2f%%)", k,
                    report.value("think_off", "Recall", k), report.value("think_on", "Recall", k),
                    report.value("aligned", "Recall", k),
                    100 * report.relative_improvement("Recall", k))
    return report
