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
Compression Module.

A raw reasoning chain :math:`c` is mapped to a bounded preference statement
:math:`\hat{c}` of the form ``"The current user's preference is <summary>."``. Budgets count
whitespace-separated tokens.

"""

import dataclasses
import json
import logging
import re
import threading
from importlib import resources

import httpx

from sidalign.utils import BudgetExceeded, config_from_dict, InvalidConfig, NonConformingReply, \
    RemoteUnavailable

__all__ = [
    "TEMPLATE_PREFIX",
    "FALLBACK_SUMMARY",
    "CompressorConfig",
    "ValidationResult",
    "RemoteCompressor",
    "compress_rule_based",
    "compress_remote",
    "validate_compressed",
    "load_system_prompt",
]

logger = logging.getLogger(__name__)

TEMPLATE_PREFIX = "The current user's preference is"
FALLBACK_SUMMARY = "unknown"

_TEMPLATE = re.compile(re.escape(TEMPLATE_PREFIX) + r" .+\.")
# an embedded statement ends at a period closing the line or followed by a new sentence
_EMBEDDED_TEMPLATE = re.compile(
    re.escape(TEMPLATE_PREFIX) + r" [^\n]+?"
    r"(?<!\bDr)(?<!\bMr)(?<!\bMs)(?<!\bMrs)(?<!\bSt)(?<!\be\.g)(?<!\bi\.e)"
    r"\.(?=[ \t]*(?:\n|\Z)|\s+[A-Z])")
_CLAUSE_BREAK = re.compile(r"[.!?;\n]+")
_TRAILING = ".,;:!? "

DEFAULT_CUES = (
    "repeatedly watches",
    "repeatedly buys",
    "frequently purchases",
    "is interested in",
    "is into",
    "tends to prefer",
    "prefers",
    "enjoys",
    "likes",
    "loves",
    "favors",
    TEMPLATE_PREFIX,
)

DEFAULT_FILLERS = (
    "i need to analyze the history",
    "i need to analyze",
    "let me think",
    "let me analyze",
    "looking at the history",
    "based on the history",
    "in summary",
    "to summarize",
    "therefore",
    "first",
    "finally",
    "hmm",
    "okay",
)


@dataclasses.dataclass(frozen=True)
class CompressorConfig:
    """
    Parameters of the compression operator.

    Parameters
    ----------
    budget : int
        Maximum whitespace token count of a compressed statement. The template prefix takes
        five tokens, so the budget should be at least 6. Default=32.
    cue_lexicon : tuple of str
        Phrases introducing a preference; the text after the last cue is the summary.
    filler_lexicon : tuple of str
        Reasoning artifacts removed (case-insensitively, on word boundaries) before extraction.

    """

    budget: int = 32
    cue_lexicon: tuple = DEFAULT_CUES
    filler_lexicon: tuple = DEFAULT_FILLERS

    def __post_init__(self):
        object.__setattr__(self, "cue_lexicon", tuple(self.cue_lexicon))
        object.__setattr__(self, "filler_lexicon", tuple(self.filler_lexicon))
        if isinstance(self.budget, bool) or not isinstance(self.budget, int):
            raise InvalidConfig("budget should be an integer, got {0!r}.".format(self.budget))
        if self.budget < len(TEMPLATE_PREFIX.split()) + 1:
            raise InvalidConfig("budget should be at least {0}, got {1}.".format(
                len(TEMPLATE_PREFIX.split()) + 1, self.budget))
        for phrase in self.cue_lexicon + self.filler_lexicon:
            if not isinstance(phrase, str) or not phrase.strip():
                raise InvalidConfig("Lexicon entries should be non-empty strings.")

    @property
    def template_prefix(self):
        return TEMPLATE_PREFIX

    def to_dict(self):
        return {"budget": self.budget, "cue_lexicon": list(self.cue_lexicon),
                "filler_lexicon": list(self.filler_lexicon)}

    @classmethod
    def from_dict(cls, data):
        return config_from_dict(cls, data)


@dataclasses.dataclass(frozen=True)
class ValidationResult:
    """Outcome of :func:`validate_compressed`; ``reasons`` lists failed checks."""

    accepted: bool
    reasons: tuple = ()
    n_tokens: int = 0

    def __bool__(self):
        return self.accepted


def validate_compressed(candidate, cfg):
    """
    Check a compressed statement against the template and the budget.

    Parameters
    ----------
    candidate : str
        The statement.
    cfg : CompressorConfig
        Supplies the budget.

    Returns
    -------
    result : ValidationResult
        Accepted iff the text matches ``^The current user's preference is .+\\.$`` and has at
        most ``cfg.budget`` whitespace tokens. Failures carry the reasons ``"TemplateMismatch"``
        and/or ``"BudgetExceeded"``.

    Examples
    --------
    >>> validate_compressed("The current user's preference is hiking gear.",
    ...                     CompressorConfig(budget=16)).accepted
    True
    >>> validate_compressed("User likes hiking.", CompressorConfig()).reasons
    ('TemplateMismatch',)

    """
    reasons = []
    n_tokens = len(candidate.split())
    if not _TEMPLATE.fullmatch(candidate):
        reasons.append("TemplateMismatch")
    if n_tokens > cfg.budget:
        reasons.append("BudgetExceeded")
    return ValidationResult(not reasons, tuple(reasons), n_tokens)


def _phrase_pattern(phrases):
    # longest first so that "i need to analyze the history" wins over "i need to analyze"
    ordered = sorted(set(phrase.strip() for phrase in phrases), key=lambda p: (-len(p), p))
    body = "|".join(r"\s+".join(re.escape(word) for word in phrase.split())
                    for phrase in ordered)
    return re.compile(r"(?<!\w)(?:{0})(?!\w)".format(body), re.IGNORECASE)


def _templatize(summary, cfg):
    words = summary.split()[:cfg.budget - len(TEMPLATE_PREFIX.split())]
    text = " ".join(words).rstrip(_TRAILING)
    return "{0} {1}.".format(TEMPLATE_PREFIX, text or FALLBACK_SUMMARY)


def compress_rule_based(cot, cfg):
    """
    Compress a reasoning chain into the preference template.

    The chain is cleaned of filler phrases, split into clauses, and the text following the
    last preference cue becomes the summary. Chains without a cue compress to
    ``"The current user's preference is unknown."``. Statements that already satisfy the
    template and the budget are returned unchanged.

    Parameters
    ----------
    cot : str
        Raw reasoning chain.
    cfg : CompressorConfig
        Budget and lexicons.

    Returns
    -------
    compressed : str
        A statement accepted by :func:`validate_compressed`.

    Examples
    --------
    >>> compress_rule_based("I need to analyze the history. First, the user repeatedly "
    ...                     "watches sci-fi movies.", CompressorConfig())
    "The current user's preference is sci-fi movies."
    >>> compress_rule_based("", CompressorConfig())
    "The current user's preference is unknown."

    """
    if validate_compressed(cot, cfg):
        return cot
    text = _phrase_pattern(cfg.filler_lexicon).sub(" ", cot)
    cues = _phrase_pattern(cfg.cue_lexicon)
    summary = ""
    for clause in _CLAUSE_BREAK.split(text):
        matches = list(cues.finditer(clause))
        if matches:
            summary = clause[matches[-1].end():]
    return _templatize(summary, cfg)


def load_system_prompt():
    """Return the system message sent to remote compressors."""
    return resources.files("sidalign").joinpath("data/compress_prompt.txt").read_text(
        encoding="utf-8")


def _conform(reply, cfg):
    if not isinstance(reply, str):
        raise NonConformingReply("Compressor reply should be a string, got {0!r}.".format(reply))
    reply = reply.strip()
    if not _TEMPLATE.fullmatch(reply):
        match = _EMBEDDED_TEMPLATE.search(reply)
        if match is None:
            raise NonConformingReply("No preference statement in reply {0!r}.".format(reply))
        reply = match.group(0)
    result = validate_compressed(reply, cfg)
    if "BudgetExceeded" in result.reasons:
        raise BudgetExceeded("Reply has {0} tokens, budget is {1}.".format(
            result.n_tokens, cfg.budget))
    return reply


class RemoteCompressor:
    """
    Client of the remote compression protocol.

    ``POST /v1/compress`` with ``{"system": str, "cot": str}`` answers ``{"summary": str}``.
    Instances are callable and can be passed wherever a compressor is expected.

    Parameters
    ----------
    endpoint : str
        Base URL of the server.
    cfg : CompressorConfig
        Budget used to validate replies.
    max_concurrency : int, optional
        Maximum number of in-flight requests. Default=4.
    timeout : float, optional
        Request timeout in seconds. Default=60.
    client : httpx.Client, optional
        Pre-built client; its base URL replaces ``endpoint``.

    """

    def __init__(self, endpoint, cfg, max_concurrency=4, timeout=60.0, client=None):
        self.endpoint = endpoint
        self.cfg = cfg
        self.system = load_system_prompt()
        self._owns_client = client is None
        if client is None:
            client = httpx.Client(base_url=endpoint, timeout=timeout,
                                  limits=httpx.Limits(max_connections=max_concurrency))
        self._client = client
        self._slots = threading.BoundedSemaphore(max_concurrency)

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def close(self):
        if self._owns_client:
            self._client.close()

    def __call__(self, cot):
        with self._slots:
            try:
                response = self._client.post("/v1/compress",
                                             json={"system": self.system, "cot": cot})
                response.raise_for_status()
                body = response.json()
            except (httpx.HTTPError, json.JSONDecodeError) as err:
                logger.warning("Compression request to %s failed: %s", self.endpoint, err)
                raise RemoteUnavailable("Compressor at {0} failed: {1}".format(
                    self.endpoint, err)) from err
        if not isinstance(body, dict) or "summary" not in body:
            raise NonConformingReply("Reply lacks a summary: {0!r}.".format(body))
        return _conform(body["summary"], self.cfg)


def compress_remote(cot, endpoint, cfg, client=None):
    """
    Compress a reasoning chain with a remote instruction-following model.

    Parameters
    ----------
    cot : str
        Raw reasoning chain.
    endpoint : str
        Base URL of the compression server.
    cfg : CompressorConfig
        Budget used to validate the reply.
    client : httpx.Client, optional
        Pre-built client, e.g. a test client of the mock server.

    Returns
    -------
    compressed : str
        The reply when it is exactly a template sentence, otherwise the first template
        sentence embedded in it.

    Raises
    ------
    RemoteUnavailable
        If the server cannot be reached or answers with an HTTP error.
    NonConformingReply
        If the reply contains no template sentence.
    BudgetExceeded
        If the extracted sentence is longer than the budget.

    """
    with RemoteCompressor(endpoint, cfg, client=client) as compressor:
        return compressor(cot)
