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
"""Test sidalign.evalx module."""

import functools
import io
import json
import math
import re

from numpy.testing import assert_almost_equal, assert_equal, assert_raises
import pytest

from sidalign.align import AlignConfig, build_think_context, score_candidate_set
from sidalign.backend import ScoringBackend, SyntheticModel, SyntheticModelConfig
from sidalign.compress import compress_rule_based, CompressorConfig
from sidalign.decode import BeamConfig
from sidalign.evalx import dump_dataset, EpisodeRecord, ExperimentConfig, load_dataset, ndcg_at_k, \
    rank_episode, recall_at_k, ReportRow, ReportTable, run_experiment, synth_dataset
from sidalign.utils import DuplicateInRanking, EmptyInput, InvalidConfig, InvalidSid, \
    MissingField, ParseError
from sidalign.vocab import SemanticId, Vocabulary

VALID_LINE = {"user": "u1", "history": ["<s_0_3><s_1_7><s_2_1>"], "cot": "likes jazz",
              "target": "<s_0_2><s_1_0><s_2_5>"}


class TargetFirstBackend(ScoringBackend):
    """Scores the designated item highest under every context."""

    def __init__(self, vocab, favourite):
        self.vocab = vocab
        self.favourite = favourite

    def score_candidates(self, context, candidates):
        context, candidates = self._check_request(context, candidates)
        return [0.0 if sid == self.favourite else -1.0 for sid in candidates]


def _write_lines(path, *objs):
    path.write_text("".join(json.dumps(obj) + "\n" for obj in objs), encoding="utf-8")
    return str(path)


def _small_model(**kwargs):
    return SyntheticModel(SyntheticModelConfig(levels=2, codes_per_level=4, k_clusters=4,
                                               **kwargs))


def test_metrics_hand_table():
    r"""Test Recall@K and NDCG@K on hand-computed ranks."""
    ranking = ["a", "b", "c", "d", "e", "f"]
    assert_equal((recall_at_k(ranking, "a", 1), ndcg_at_k(ranking, "a", 1)), (1, 1.0))
    assert_equal((recall_at_k(ranking, "c", 10), ndcg_at_k(ranking, "c", 10)), (1, 0.5))
    assert_equal((recall_at_k(ranking, "f", 5), ndcg_at_k(ranking, "f", 5)), (0, 0.0))
    assert_equal((recall_at_k(ranking, "z", 10), ndcg_at_k(ranking, "z", 10)), (0, 0.0))
    assert_raises(DuplicateInRanking, recall_at_k, ["a", "b", "a"], "a", 1)
    assert_raises(DuplicateInRanking, ndcg_at_k, ["a", "a"], "b", 1)
    assert_raises(ValueError, recall_at_k, ranking, "a", 0)


def test_metrics_monotone_in_k():
    r"""Test both metrics are non-decreasing in the cutoff."""
    ranking = list(range(20))
    for target in (0, 4, 13, 25):
        recalls = [recall_at_k(ranking, target, k) for k in range(1, 25)]
        ndcgs = [ndcg_at_k(ranking, target, k) for k in range(1, 25)]
        assert recalls == sorted(recalls)
        assert ndcgs == sorted(ndcgs)
        assert all(0 <= value <= 1 for value in recalls + ndcgs)


def test_load_dataset(tmp_path):
    r"""Test reading a valid dataset and its line-numbered errors."""
    vocab = Vocabulary(3, 8)
    path = _write_lines(tmp_path / "ok.jsonl", VALID_LINE)
    (record,) = load_dataset(path, vocab)
    assert_equal(record.user, "u1")
    assert_equal(record.history, (SemanticId((3, 7, 1)),))
    assert_equal(record.target, SemanticId((2, 0, 5)))
    assert record.candidates is None

    missing = dict(VALID_LINE)
    del missing["target"]
    with pytest.raises(MissingField) as err:
        load_dataset(_write_lines(tmp_path / "missing.jsonl", VALID_LINE, missing), vocab)
    assert_equal((err.value.line, err.value.field), (2, "target"))

    bad = dict(VALID_LINE, history=["<s_0_9><s_1_0><s_2_0>"])
    with pytest.raises(InvalidSid) as err:
        load_dataset(_write_lines(tmp_path / "bad.jsonl", bad), vocab)
    assert_equal(err.value.line, 1)

    (tmp_path / "broken.jsonl").write_text("{\"user\": \n", encoding="utf-8")
    assert_raises(ParseError, load_dataset, str(tmp_path / "broken.jsonl"), vocab)
    empty = dict(VALID_LINE, history=[])
    assert_raises(ParseError, load_dataset, _write_lines(tmp_path / "e.jsonl", empty), vocab)
    repeated = dict(VALID_LINE, candidates=["<s_0_1><s_1_1><s_2_1>"] * 2)
    assert_raises(ParseError, load_dataset, _write_lines(tmp_path / "r.jsonl", repeated), vocab)


def test_dump_dataset_canonical(tmp_path):
    r"""Test dumped datasets load back to the same episodes with the same bytes."""
    backend = _small_model(seed=5)
    episodes = synth_dataset(backend, 12, "short", seed=7)
    first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    dump_dataset(episodes, str(first), backend.vocab)
    dump_dataset(synth_dataset(backend, 12, "short", seed=7), str(second), backend.vocab)
    assert_equal(first.read_bytes(), second.read_bytes())
    assert_equal(load_dataset(str(first), backend.vocab), episodes)


def test_synth_dataset():
    r"""Test episode synthesis shapes and styles."""
    backend = SyntheticModel(SyntheticModelConfig(seed=3))
    assert_equal(synth_dataset(backend, 0, "verbose", seed=1), [])
    episodes = synth_dataset(backend, 20, "verbose", seed=1)
    assert_equal([episode.user for episode in episodes], ["u{0}".format(i) for i in range(20)])
    for episode in episodes:
        assert_equal(len(episode.history), 10)
        n_filler = sum(bool(re.fullmatch(r"w\d+", token)) for token in episode.cot.split())
        assert 64 <= n_filler <= 128
        assert_equal(episode.cot.count("the user repeatedly watches topic_"), 2)
    for episode in synth_dataset(backend, 20, "none", seed=1):
        assert_equal(episode.cot, "")
    assert_raises(InvalidConfig, synth_dataset, backend, 3, "long", 1)
    assert_raises(InvalidConfig, synth_dataset, backend, -1, "short", 1)
    assert_raises(InvalidConfig, synth_dataset, TargetFirstBackend(Vocabulary(1, 2), None),
                  3, "short", 1)


def test_verbose_chains_drift_more():
    r"""Test verbose chains carry a larger effective drift than short ones."""
    backend = SyntheticModel(SyntheticModelConfig(gamma=0.6, seed=0))

    def mean_drift(style):
        episodes = synth_dataset(backend, 50, style, seed=2)
        return sum(backend.effective_drift(build_think_context(e.history, e.cot.split()))
                   for e in episodes) / len(episodes)

    assert mean_drift("verbose") > mean_drift("short") > 0


def test_report_table(tmp_path):
    r"""Test report lookup, relative improvement and CSV layout."""
    rows = [ReportRow("think_off", "Recall", 1, None, 0.2, 10),
            ReportRow("think_on", "Recall", 1, None, 0.1, 10),
            ReportRow("aligned", "Recall", 1, 0.0, 0.1, 10),
            ReportRow("aligned", "Recall", 1, 0.5, 0.3, 10),
            ReportRow("think_off", "NDCG", 1, None, 0.0, 10),
            ReportRow("think_on", "NDCG", 1, None, 0.0, 10),
            ReportRow("aligned", "NDCG", 1, 0.5, 0.0, 10)]
    report = ReportTable(rows)
    assert_equal(len(report), 7)
    assert_equal(report.value("aligned", "Recall", 1), 0.3)
    assert_equal(report.value("aligned", "Recall", 1, alpha=0.0), 0.1)
    assert_almost_equal(report.relative_improvement("Recall", 1), 0.5, decimal=12)
    assert math.isnan(report.relative_improvement("NDCG", 1))
    assert_raises(KeyError, report.value, "aligned", "Recall", 5)
    handle = io.StringIO()
    ReportTable(rows[:3]).write_csv(handle)
    assert_equal(handle.getvalue().splitlines(),
                 ["method,metric,K,alpha,value,n",
                  "think_off,Recall,1,,0.2,10",
                  "think_on,Recall,1,,0.1,10",
                  "aligned,Recall,1,0.0,0.1,10"])


def test_experiment_config():
    r"""Test experiment configuration validation."""
    config = ExperimentConfig(align={"alpha": 0.25}, k_list=[1, 5])
    assert_equal(config.align, AlignConfig(alpha=0.25))
    assert_equal(config.alphas, (0.25,))
    assert_equal(ExperimentConfig(alpha_grid=[0, 1]).alphas, (0.0, 1.0))
    assert_raises(InvalidConfig, ExperimentConfig, alpha_grid=[-0.5])
    assert_raises(InvalidConfig, ExperimentConfig, k_list=[])
    assert_raises(InvalidConfig, ExperimentConfig, cot_style="long")
    assert_raises(InvalidConfig, ExperimentConfig, align=3)
    assert_raises(InvalidConfig, ExperimentConfig.from_dict, {"episode": 3})


def test_run_experiment_ceiling():
    r"""Test every method scores 1.0 when the target always ranks first."""
    vocab = Vocabulary(1, 4)
    target = SemanticId((2,))
    episodes = [EpisodeRecord("u{0}".format(i), (SemanticId((i % 4,)),), "the user likes x",
                              target, candidates=(SemanticId((0,)), target, SemanticId((3,))))
                for i in range(6)]
    config = ExperimentConfig(k_list=(1, 2), alpha_grid=(0.0, 1.0), ablations=True)
    report = run_experiment(config, backend=TargetFirstBackend(vocab, target), episodes=episodes)
    assert_equal(sorted({row.method for row in report}),
                 ["aligned", "aligned_amateur", "think_off", "think_on"])
    for row in report:
        assert_equal((row.value, row.n), (1.0, 6))


def test_run_experiment_empty():
    r"""Test an experiment without episodes fails."""
    backend = _small_model()
    assert_raises(EmptyInput, run_experiment, ExperimentConfig(), backend=backend, episodes=[])


def test_alpha_zero_ranks_by_expert_score():
    r"""Test aligned rankings at alpha = 0 sort the candidate pool by the expert score."""
    backend = _small_model(seed=4)
    config = ExperimentConfig(alpha_grid=(0.0,), align=AlignConfig(num_beams=8, num_return=8),
                              beam=BeamConfig(8, 8))
    compressor = functools.partial(compress_rule_based, cfg=CompressorConfig())
    for episode in synth_dataset(backend, 30, "verbose", seed=6):
        rankings = rank_episode(backend, episode, config, compressor)
        scores = score_candidate_set(backend, episode, config.align, compressor)
        expected = sorted(zip(scores.sids, scores.z_E), key=lambda pair: (-pair[1],
                                                                          pair[0].codes))
        assert_equal(rankings[("aligned", 0.0)], [sid for sid, _ in expected])
        assert_equal(set(rankings), {("think_off", None), ("think_on", None), ("aligned", 0.0)})


def test_run_experiment_worker_invariance():
    r"""Test serial and parallel runs produce identical reports."""
    backend = _small_model(seed=2)
    episodes = synth_dataset(backend, 40, "verbose", seed=3)
    base = dict(alpha_grid=(0.0, 0.5), align=AlignConfig(num_beams=8, num_return=8),
                beam=BeamConfig(8, 8), k_list=(1, 3, 5))
    serial = run_experiment(ExperimentConfig(workers=1, **base), backend=backend,
                            episodes=episodes)
    parallel = run_experiment(ExperimentConfig(workers=8, **base), backend=backend,
                              episodes=episodes)
    assert_equal(serial.rows, parallel.rows)
    for method in ("think_off", "think_on", "aligned"):
        for row in serial.select(method, "Recall", 1):
            (ndcg,) = [other for other in serial.select(method, "NDCG", 1)
                       if other.alpha == row.alpha]
            assert_equal(row.value, ndcg.value)


def test_drift_recovery_experiment():
    r"""Test reasoning drift hurts think-on decoding and the aligned reranker recovers it."""
    backend = SyntheticModel(SyntheticModelConfig(levels=3, codes_per_level=8, k_clusters=8,
                                                  gamma=0.6))
    config = ExperimentConfig(episodes=500, cot_style="verbose", seed=0,
                              align=AlignConfig(num_beams=32, num_return=32),
                              beam=BeamConfig(32, 32), k_list=(1, 10),
                              alpha_grid=(0.0, 0.25, 0.5, 0.75, 1.0))
    report = run_experiment(config, backend=backend)
    assert report.value("think_on", "Recall", 1) < report.value("think_off", "Recall", 1)
    assert report.value("aligned", "Recall", 1) > report.value("think_on", "Recall", 1)
    assert report.value("aligned", "NDCG", 10) >= report.value("think_on", "NDCG", 10)
    for row in report.select(metric="Recall", k=1):
        assert 0.0 <= row.value <= 1.0


class ClosingModel(SyntheticModel):
    """Synthetic model that records whether it was closed."""

    closed = False

    def close(self):
        self.closed = True


def test_run_experiment_closes_owned_backend(monkeypatch):
    r"""Test a backend built from the configuration is closed and a passed-in one is not."""
    config = ExperimentConfig(episodes=3, alpha_grid=(0.5,), beam=BeamConfig(4, 4),
                              align=AlignConfig(num_beams=4, num_return=4))
    owned = ClosingModel(SyntheticModelConfig(levels=2, codes_per_level=4, k_clusters=4))
    monkeypatch.setattr("sidalign.evalx.load_backend", lambda *args, **kwargs: owned)
    run_experiment(config)
    assert owned.closed
    passed = ClosingModel(SyntheticModelConfig(levels=2, codes_per_level=4, k_clusters=4))
    run_experiment(config, backend=passed)
    assert not passed.closed
