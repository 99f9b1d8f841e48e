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
Command Line Interface.

Subcommands
-----------
synth : Sample a synthetic dataset (and write the matching model configuration).
rerank : Rank every episode of a dataset with the aligned reranker (JSONL out).
eval : Compare think-off, think-on and aligned ranking (CSV report out).
diagnose : Attention diagnostics, CPMI table and embedding projections (CSV out).
compress : Compress one reasoning chain per input line.

Configuration values come from command line flags, then from the JSON file given by
``--config`` (or the ``SIDALIGN_CONFIG`` environment variable), then from built-in defaults.

"""

import argparse
import concurrent.futures
import contextlib
import csv
import dataclasses
import functools
import json
import logging
import os
import sys

from sidalign.align import AlignConfig, ranking_record, rerank
from sidalign.backend import load_backend, SyntheticModel, SyntheticModelConfig
from sidalign.compress import compress_rule_based, CompressorConfig, RemoteCompressor
from sidalign.decode import BeamConfig
from sidalign.diagnose import cpmi_table, diagnose_episode, pca_project
from sidalign.evalx import COT_STYLES, dump_dataset, ExperimentConfig, load_dataset, \
    run_experiment, synth_dataset
from sidalign.utils import check_positive_int, check_sequence, config_from_dict, InvalidConfig, \
    parse_float_list, parse_int_list, SidAlignError, UsageError

__all__ = ["RunConfig", "build_parser", "dispatch", "main"]

logger = logging.getLogger(__name__)

CONFIG_ENV = "SIDALIGN_CONFIG"


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """
    Settings shared by the subcommands, as read from a JSON configuration file.

    Nested ``align``, ``compressor``, ``beam`` and ``model`` entries take the fields of
    :class:`AlignConfig`, :class:`CompressorConfig`, :class:`BeamConfig` and
    :class:`SyntheticModelConfig`.

    """

    backend: str = "synth"
    vocab: str = None
    dataset: str = None
    seed: int = 0
    workers: int = 1
    episodes: int = 1000
    cot_style: str = "verbose"
    k_list: tuple = (1, 5, 10)
    alpha_grid: tuple = None
    ablations: bool = False
    compressor_endpoint: str = None
    align: AlignConfig = AlignConfig()
    compressor: CompressorConfig = CompressorConfig()
    beam: BeamConfig = BeamConfig()
    model: SyntheticModelConfig = SyntheticModelConfig()

    def __post_init__(self):
        for name, cls in (("align", AlignConfig), ("compressor", CompressorConfig),
                          ("beam", BeamConfig), ("model", SyntheticModelConfig)):
            value = getattr(self, name)
            if isinstance(value, dict):
                object.__setattr__(self, name, cls.from_dict(value))
            elif not isinstance(value, cls):
                raise InvalidConfig("{0} should be a {1}.".format(name, cls.__name__))
        if not isinstance(self.backend, str) or not self.backend:
            raise InvalidConfig("Exactly one backend spec is required.")
        check_positive_int(self.workers, "workers")
        object.__setattr__(self, "k_list", check_sequence(self.k_list, "k_list"))
        if self.alpha_grid is not None:
            object.__setattr__(self, "alpha_grid", check_sequence(self.alpha_grid, "alpha_grid"))

    @classmethod
    def from_dict(cls, data):
        return config_from_dict(cls, data)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))

    def experiment(self):
        """Return the :class:`ExperimentConfig` of an ``eval`` run."""
        return ExperimentConfig(backend=self.backend, vocab=self.vocab, dataset=self.dataset,
                                episodes=self.episodes, cot_style=self.cot_style,
                                seed=self.seed, align=self.align, compressor=self.compressor,
                                compressor_endpoint=self.compressor_endpoint, beam=self.beam,
                                k_list=self.k_list, alpha_grid=self.alpha_grid,
                                ablations=self.ablations, workers=self.workers)


def _add_common(parser):
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="log progress (-v) or debug details (-vv) to stderr")
    parser.add_argument("--config", help="JSON configuration file (default: ${0})".format(
        CONFIG_ENV))
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--workers", type=int, help="episode-level parallelism")


def _add_backend(parser):
    parser.add_argument("--backend", help="synth, synth:MODEL.json or http(s)://URL")
    parser.add_argument("--vocab", help="vocabulary JSON (remote backends)")
    parser.add_argument("--data", dest="dataset", help="JSONL dataset")


def _add_align(parser):
    parser.add_argument("--alpha", type=float, help="correction strength")
    parser.add_argument("--epsilon", type=float, help="standardization stabilizer")
    parser.add_argument("--policy", choices=["ExpertBeam", "UnionExpertBaseline"],
                        help="candidate source")
    parser.add_argument("--penalty", choices=["drift", "amateur"], help="penalty form")
    parser.add_argument("--beams", type=int, help="beam width (default 32)")
    parser.add_argument("--returns", type=int, help="sequences kept per beam (default 32)")
    parser.add_argument("--budget", type=int, help="compressed statement budget (tokens)")
    parser.add_argument("--compressor-endpoint", help="remote compressor URL")


def _add_synth_source(parser):
    parser.add_argument("--episodes", type=int, help="episodes to synthesize without --data")
    parser.add_argument("--cot-style", choices=COT_STYLES, help="style of synthesized chains")


def build_parser():
    """Return the argument parser of the ``sidalign`` command."""
    parser = argparse.ArgumentParser(
        prog="sidalign",
        description="Training-free subspace alignment for reasoning semantic-ID recommenders.")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    synth = commands.add_parser("synth", help="sample a synthetic dataset")
    _add_common(synth)
    synth.add_argument("--items-levels", type=int, help="code levels L")
    synth.add_argument("--codes", type=int, help="codes per level C")
    synth.add_argument("--clusters", type=int, help="taste clusters K")
    synth.add_argument("--gamma", type=float, help="drift strength in [0, 1]")
    _add_synth_source(synth)
    synth.add_argument("--out", required=True, help="dataset JSONL path")
    synth.add_argument("--model-out", help="write the model configuration JSON here")
    synth.add_argument("--vocab-out", help="write the vocabulary JSON here")

    rerank_cmd = commands.add_parser("rerank", help="rank episodes with the aligned reranker")
    _add_common(rerank_cmd)
    _add_backend(rerank_cmd)
    _add_synth_source(rerank_cmd)
    _add_align(rerank_cmd)
    rerank_cmd.add_argument("--out", default="-", help="rankings JSONL path (default stdout)")

    evaluate = commands.add_parser("eval", help="compare think-off, think-on and aligned")
    _add_common(evaluate)
    _add_backend(evaluate)
    _add_synth_source(evaluate)
    _add_align(evaluate)
    evaluate.add_argument("--alpha-grid", help="comma separated correction strengths")
    evaluate.add_argument("--k", help="comma separated cutoffs (default 1,5,10)")
    evaluate.add_argument("--ablations", action="store_true", default=None,
                          help="also report the CoT-only penalty")
    evaluate.add_argument("--out", default="-", help="report CSV path (default stdout)")

    diagnose = commands.add_parser("diagnose", help="attention and subspace diagnostics")
    _add_common(diagnose)
    _add_backend(diagnose)
    _add_synth_source(diagnose)
    diagnose.add_argument("--out", default="-", help="diagnostics CSV path (default stdout)")
    diagnose.add_argument("--projections-out", help="token embedding projections CSV")
    diagnose.add_argument("--cpmi-out", help="per-episode CPMI CSV")

    compress = commands.add_parser("compress", help="compress reasoning chains")
    _add_common(compress)
    compress.add_argument("--in", dest="infile", required=True, help="one chain per line")
    compress.add_argument("--budget", type=int, help="token budget (default 32)")
    compress.add_argument("--endpoint", dest="compressor_endpoint",
                          help="remote compressor URL")
    compress.add_argument("--out", default="-", help="output path (default stdout)")
    return parser


def _run_config(args):
    """Merge flags over the configuration file over defaults."""
    path = args.config or os.environ.get(CONFIG_ENV)
    config = RunConfig.load(path) if path else RunConfig()
    top, align, beam = {}, {}, {}
    for name in ("backend", "vocab", "dataset", "seed", "workers", "episodes", "cot_style",
                 "ablations", "compressor_endpoint"):
        value = getattr(args, name, None)
        if value is not None:
            top[name] = value
    if getattr(args, "k", None):
        top["k_list"] = tuple(parse_int_list(args.k))
    if getattr(args, "alpha_grid", None):
        top["alpha_grid"] = tuple(parse_float_list(args.alpha_grid))
    for flag, field in (("alpha", "alpha"), ("epsilon", "epsilon"), ("policy", "candidate_policy"),
                        ("penalty", "penalty"), ("beams", "num_beams"),
                        ("returns", "num_return")):
        value = getattr(args, flag, None)
        if value is not None:
            align[field] = value
    for flag, field in (("beams", "num_beams"), ("returns", "num_return")):
        value = getattr(args, flag, None)
        if value is not None:
            beam[field] = value
    if align:
        top["align"] = dataclasses.replace(config.align, **align)
    if beam:
        top["beam"] = dataclasses.replace(config.beam, **beam)
    if getattr(args, "budget", None) is not None:
        top["compressor"] = dataclasses.replace(config.compressor, budget=args.budget)
    return dataclasses.replace(config, **top)


@contextlib.contextmanager
def _output(path, newline=None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline=newline) as handle:
            yield handle


def _backend(config):
    # a bare "synth" spec takes the model section of the configuration
    if config.backend == "synth":
        return SyntheticModel(config.model)
    return load_backend(config.backend, config.vocab, max_concurrency=config.workers)


def _episodes(config, backend):
    if config.dataset:
        return load_dataset(config.dataset, backend.vocab)
    return synth_dataset(backend, config.episodes, config.cot_style, config.seed)


def _compressor(config):
    if config.compressor_endpoint:
        return RemoteCompressor(config.compressor_endpoint, config.compressor,
                                max_concurrency=config.workers)
    return contextlib.nullcontext(functools.partial(compress_rule_based, cfg=config.compressor))


def _cmd_synth(args, config):
    overrides = {}
    for flag, field in (("items_levels", "levels"), ("codes", "codes_per_level"),
                        ("clusters", "k_clusters"), ("gamma", "gamma"), ("seed", "seed")):
        value = getattr(args, flag)
        if value is not None:
            overrides[field] = value
    model_config = dataclasses.replace(config.model, **overrides)
    model = SyntheticModel(model_config)
    episodes = synth_dataset(model, config.episodes, config.cot_style, config.seed)
    dump_dataset(episodes, args.out, model.vocab)
    if args.model_out:
        with open(args.model_out, "w", encoding="utf-8") as handle:
            json.dump(model_config.to_dict(), handle, indent=2, sort_keys=True)
            handle.write("\n")
    if args.vocab_out:
        with open(args.vocab_out, "w", encoding="utf-8") as handle:
            json.dump(model.vocab.to_dict(), handle, indent=2)
            handle.write("\n")
    logger.info("Wrote %d episodes to %s", len(episodes), args.out)


def _cmd_rerank(args, config):
    with _backend(config) as backend, _compressor(config) as compressor:
        episodes = _episodes(config, backend)

        def rank(episode):
            return ranking_record(episode, rerank(backend, episode, config.align, compressor))

        with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as executor:
            records = list(executor.map(rank, episodes))
    with _output(args.out) as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")
    logger.info("Reranked %d episodes", len(records))


def _cmd_eval(args, config):
    with _backend(config) as backend:
        report = run_experiment(config.experiment(), backend=backend)
    with _output(args.out, newline="") as handle:
        report.write_csv(handle)


def _cmd_diagnose(args, config):
    with _backend(config) as backend:
        _write_diagnostics(args, backend, _episodes(config, backend))


def _write_diagnostics(args, backend, episodes):
    with _output(args.out, newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["user", "context_label", "n_general", "n_sid", "sdi", "aei"])
        for episode in episodes:
            for report in diagnose_episode(backend, episode):
                writer.writerow([episode.user] + report.to_row())
    if args.cpmi_out:
        with open(args.cpmi_out, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["user", "cpmi", "prior", "total"])
            for user, cpmi, prior, total in cpmi_table(backend, episodes):
                writer.writerow([user, repr(cpmi), repr(prior), repr(total)])
    if args.projections_out:
        if not isinstance(backend, SyntheticModel):
            raise UsageError("--projections-out needs a synthetic backend.")
        tokens, tags, vectors = backend.token_embeddings()
        _, projections, ratios = pca_project(vectors, 2)
        logger.info("Explained variance ratios: %s", ratios)
        with open(args.projections_out, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["token", "tag", "pc1", "pc2"])
            for token, tag, point in zip(tokens, tags, projections):
                writer.writerow([token, tag.value, repr(float(point[0])), repr(float(point[1]))])


def _cmd_compress(args, config):
    with open(args.infile, encoding="utf-8") as handle:
        chains = [line.rstrip("\n") for line in handle]
    with _compressor(config) as compressor, _output(args.out) as handle:
        for chain in chains:
            handle.write(compressor(chain) + "\n")


_COMMANDS = {"synth": _cmd_synth, "rerank": _cmd_rerank, "eval": _cmd_eval,
             "diagnose": _cmd_diagnose, "compress": _cmd_compress}


def dispatch(argv=None):
    """
    Run the command line and return its exit code.

    Parameters
    ----------
    argv : list of str, optional
        Arguments without the program name; defaults to ``sys.argv[1:]``.

    Returns
    -------
    code : int
        0 on success, 2 on usage and validation errors, 1 on other failures. Errors are
        reported on stderr as ``error: <Class>: <message>``.

    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return exit_.code if isinstance(exit_.code, int) else 2
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        config = _run_config(args)
        _COMMANDS[args.command](args, config)
    except ValueError as err:
        print("error: {0}: {1}".format(type(err).__name__, err), file=sys.stderr)
        return 2
    except (SidAlignError, RuntimeError, OSError) as err:
        print("error: {0}: {1}".format(type(err).__name__, err), file=sys.stderr)
        return 1
    return 0


def main():
    """Console script entry point."""
    sys.exit(dispatch())
