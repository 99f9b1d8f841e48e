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
Scoring Backend Module.

A scoring backend assigns log-probabilities to semantic IDs generated after ``<|sid_begin|>``.
Two implementations are provided:

    - :class:`SyntheticModel`, an exactly computable recommender whose item distribution is a
      cluster mixture contaminated by a popularity prior in proportion to the amount of general
      text in the context ("textual inertia").
    - :class:`RemoteBackend`, a JSON-over-HTTP client for real log-probability servers.

"""

import abc
import collections
import dataclasses
import functools
import json
import logging
import math
import threading

import httpx
import numpy as np
from scipy.special import softmax

from sidalign.compress import TEMPLATE_PREFIX
from sidalign.utils import BackendUnavailable, check_real, CodeRangeError, config_from_dict, \
    ContextNotSidReady, EmptyCandidates, EmptyInput, InvalidConfig, LevelOrderError, MalformedSid, \
    RemoteProtocolError, UnsupportedCapability
from sidalign.vocab import classify_token, COT_BEGIN, COT_END, HIST_BEGIN, HIST_END, \
    load_vocabulary, parse_sid, parse_sid_token, SID_BEGIN, SID_END, sid_tokens, \
    STRUCTURAL_TOKENS, SubspaceTag, Vocabulary

__all__ = [
    "ScoringBackend",
    "SyntheticModelConfig",
    "SyntheticModel",
    "RemoteBackend",
    "AttentionProfile",
    "INSTRUCTION_TOKENS",
    "CUE_TOKENS",
    "score_candidates",
    "next_token_dist",
    "attention_profile",
    "synth_model_new",
    "load_backend",
]

logger = logging.getLogger(__name__)

INSTRUCTION_TOKENS = ("Recommend", "the", "next", "item", "for", "this", "user", "based", "on",
                      "the", "history", ".")
CUE_TOKENS = ("the", "user", "repeatedly", "watches")

_TRAILING_PUNCTUATION = ".,;:!?"


@dataclasses.dataclass(frozen=True)
class AttentionProfile:
    """
    Attention mass received by each non-structural context token.

    Parameters
    ----------
    entries : tuple of (str, SubspaceTag, float)
        One ``(token, tag, mass)`` triple per token, in context order. Masses are
        non-negative and sum to one within 1e-9.

    """

    entries: tuple

    def __post_init__(self):
        entries = tuple((str(token), SubspaceTag(tag), float(mass))
                        for token, tag, mass in self.entries)
        object.__setattr__(self, "entries", entries)
        masses = self.masses
        if np.any(masses < 0):
            raise ValueError("Attention masses should be non-negative.")
        if entries and abs(masses.sum() - 1.0) > 1e-9:
            raise ValueError("Attention masses should sum to one, got {0}.".format(masses.sum()))

    @property
    def masses(self):
        return np.array([mass for _, _, mass in self.entries], dtype=float)

    @property
    def tags(self):
        return [tag for _, tag, _ in self.entries]

    def count(self, tag):
        """Number of entries tagged ``tag``."""
        return sum(1 for entry_tag in self.tags if entry_tag is tag)

    def mass(self, tag):
        """Total mass on entries tagged ``tag``."""
        return math.fsum(mass for _, entry_tag, mass in self.entries if entry_tag is tag)


class ScoringBackend(abc.ABC):
    """
    Autoregressive semantic-ID scorer.

    Subclasses set ``vocab`` and the two capability flags, and implement
    :meth:`score_candidates`. Backends are immutable after construction and deterministic:
    identical calls return identical values.

    """

    supports_attention = False
    supports_full_distribution = False
    vocab = None

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def close(self):
        """Release held resources; local backends hold none."""

    @property
    def capabilities(self):
        return {"supports_attention": self.supports_attention,
                "supports_full_distribution": self.supports_full_distribution}

    @abc.abstractmethod
    def score_candidates(self, context, candidates):
        """Return one log-probability per candidate, order-aligned with ``candidates``."""

    def next_token_dist(self, context):
        """Return the distribution over the next SID-level token."""
        raise UnsupportedCapability("{0} does not expose full next-token distributions."
                                    .format(type(self).__name__))

    def attention_profile(self, context):
        """Return the attention profile of ``context``."""
        raise UnsupportedCapability("{0} does not expose attention.".format(type(self).__name__))

    def _check_request(self, context, candidates):
        context = list(context)
        if not context or context[-1] != SID_BEGIN:
            raise ContextNotSidReady("Scoring context should end with {0}.".format(SID_BEGIN))
        candidates = list(candidates)
        if not candidates:
            raise EmptyCandidates("At least one candidate is required.")
        for sid in candidates:
            self.vocab.check_sid(sid)
        return context, candidates


@dataclasses.dataclass(frozen=True)
class SyntheticModelConfig:
    r"""
    Parameters of the synthetic recommender.

    Parameters
    ----------
    levels : int
        Code levels :math:`L`. Default=3.
    codes_per_level : int
        Codes per level :math:`C`. Default=8.
    k_clusters : int
        Number of latent taste clusters. Default=8.
    n_general : int
        Size of the filler/style vocabulary ``w0 .. w{n-1}``; cluster mentions and prompt words
        are added on top. Default=256.
    gamma : float
        Drift strength in :math:`[0, 1]`. Default=0.6.
    zipf_s : float
        Popularity exponent, positive. Default=1.1.
    lambda_sid : float
        Weight of SID tokens in the drift dilution, positive. Default=1.0.
    kappa : float
        Salience gain of general tokens, non-negative. Default=1.0.
    tau : float
        Cluster sharpness temperature, positive. Default=0.5.
    seed : int
        Unsigned 64-bit seed. Default=0.
    embedding_dim : int
        Dimension of the synthetic token embeddings. Default=16.

    """

    levels: int = 3
    codes_per_level: int = 8
    k_clusters: int = 8
    n_general: int = 256
    gamma: float = 0.6
    zipf_s: float = 1.1
    lambda_sid: float = 1.0
    kappa: float = 1.0
    tau: float = 0.5
    seed: int = 0
    embedding_dim: int = 16

    def __post_init__(self):
        for name in ("levels", "codes_per_level", "k_clusters", "n_general", "embedding_dim"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidConfig("{0} should be a positive integer, got {1!r}.".format(
                    name, value))
        if self.codes_per_level < 2:
            raise InvalidConfig("codes_per_level should be >= 2.")
        for name in ("gamma", "zipf_s", "lambda_sid", "kappa", "tau"):
            check_real(getattr(self, name), name)
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidConfig("gamma should be in [0, 1], got {0}.".format(self.gamma))
        if not self.zipf_s > 0:
            raise InvalidConfig("zipf_s should be positive, got {0}.".format(self.zipf_s))
        if not self.lambda_sid > 0:
            raise InvalidConfig("lambda_sid should be positive, got {0}.".format(self.lambda_sid))
        if not self.kappa >= 0:
            raise InvalidConfig("kappa should be non-negative, got {0}.".format(self.kappa))
        if not self.tau > 0:
            raise InvalidConfig("tau should be positive, got {0}.".format(self.tau))
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) \
                or not 0 <= self.seed < 2 ** 64:
            raise InvalidConfig("seed should be an unsigned 64-bit integer, got {0!r}.".format(
                self.seed))

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        return config_from_dict(cls, data)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


# parsed view of a context; the item distribution depends on nothing else
_ContextState = collections.namedtuple(
    "_ContextState", ["history", "mentions", "n_general", "n_sid", "cot_present"])


class SyntheticModel(ScoringBackend):
    r"""
    Exactly computable semantic-ID recommender.

    Items are the :math:`C^L` SIDs. Cluster :math:`k` has the item distribution
    :math:`Q_k = \text{softmax}(g_k / \tau)` with seeded standard-normal scores :math:`g_k`.
    Given history items :math:`h` and :math:`m_k` mentions of cluster :math:`k` in the CoT,
    the cluster posterior is

    .. math::
        u_k \propto \pi_k \prod_{i \in h} Q_k(i) \, (1 + m_k)

    with a seeded Dirichlet prior :math:`\pi`. An empty history gives :math:`u_k \propto m_k`,
    or the uniform item distribution when nothing is mentioned. With a CoT present,

    .. math::
        P(y \mid \text{context}) = (1 - \gamma_{\text{eff}}) \sum_k u_k Q_k(y)
                                   + \gamma_{\text{eff}} P_{\text{pop}}(y), \qquad
        \gamma_{\text{eff}} = \gamma \frac{n_{\text{gen}}}{n_{\text{gen}} +
                                                          \lambda_{\text{sid}} n_{\text{sid}}}

    where :math:`P_{\text{pop}}` is a seeded Zipf popularity and :math:`n_{\text{gen}}`,
    :math:`n_{\text{sid}}` count general and SID tokens of the context. Candidate scores follow
    the :math:`L`-step factorization obtained by marginalizing over code prefixes.

    Parameters
    ----------
    config : SyntheticModelConfig
        Model parameters.
    clusters : ndarray, optional
        Explicit ``(k_clusters, C**L)`` cluster item distributions replacing the seeded ones.
    prior : ndarray, optional
        Explicit cluster prior replacing the seeded Dirichlet draw.
    popularity : ndarray, optional
        Explicit popularity distribution replacing the seeded Zipf one.

    """

    supports_attention = True
    supports_full_distribution = True

    def __init__(self, config, clusters=None, prior=None, popularity=None):
        if not isinstance(config, SyntheticModelConfig):
            raise InvalidConfig("config should be a SyntheticModelConfig.")
        self.config = config
        n_items = config.codes_per_level ** config.levels
        rng = np.random.default_rng(config.seed)
        # draw order is part of the model definition
        scores = rng.standard_normal((config.k_clusters, n_items))
        seeded_prior = rng.dirichlet(np.ones(config.k_clusters))
        ranks = rng.permutation(n_items)
        zipf = (ranks + 1.0) ** (-config.zipf_s)

        self._clusters = self._check_distribution(
            softmax(scores / config.tau, axis=1) if clusters is None else clusters,
            (config.k_clusters, n_items), "clusters")
        self._prior = self._check_distribution(
            seeded_prior if prior is None else prior, (config.k_clusters,), "prior")
        self._popularity = self._check_distribution(
            zipf / zipf.sum() if popularity is None else popularity, (n_items,), "popularity")
        self._log_clusters = np.log(self._clusters)
        self._log_prior = np.log(self._prior)

        self.topic_tokens = tuple("topic_{0}".format(k) for k in range(config.k_clusters))
        self.filler_tokens = tuple("w{0}".format(j) for j in range(config.n_general))
        self._topic_index = {token: k for k, token in enumerate(self.topic_tokens)}
        words = list(INSTRUCTION_TOKENS) + list(CUE_TOKENS) + TEMPLATE_PREFIX.split() \
            + ["unknown."] + list(self.topic_tokens) \
            + [token + "." for token in self.topic_tokens] + list(self.filler_tokens)
        self.vocab = Vocabulary(config.levels, config.codes_per_level,
                                tuple(dict.fromkeys(words)))
        self._state_distribution = functools.lru_cache(maxsize=4096)(self._distribution)
        self._read_state = functools.lru_cache(maxsize=4096)(self._read)

    @staticmethod
    def _check_distribution(array, shape, name):
        array = np.asarray(array, dtype=float)
        if array.shape != shape:
            raise InvalidConfig("{0} should have shape {1}, got {2}.".format(
                name, shape, array.shape))
        if np.any(array <= 0) or not np.allclose(array.sum(axis=-1), 1.0):
            raise InvalidConfig("{0} should hold strictly positive distributions.".format(name))
        return array / array.sum(axis=-1, keepdims=True)

    @property
    def clusters(self):
        return self._clusters.copy()

    @property
    def prior(self):
        return self._prior.copy()

    @property
    def popularity(self):
        return self._popularity.copy()

    def mention_cluster(self, token):
        """Return the cluster a CoT token mentions, or None for style/filler tokens."""
        return self._topic_index.get(token.rstrip(_TRAILING_PUNCTUATION))

    def _split_prefix(self, context):
        context = list(context)
        try:
            start = len(context) - 1 - context[::-1].index(SID_BEGIN)
        except ValueError:
            return context, None
        prefix = []
        for level, token in enumerate(context[start + 1:]):
            pair = parse_sid_token(token)
            if pair is None or pair[0] != level or level >= self.vocab.levels:
                raise LevelOrderError("Invalid SID prefix token {0!r} at level {1}.".format(
                    token, level))
            if pair[1] >= self.vocab.codes_per_level:
                raise CodeRangeError("Code {0} outside [0, {1}).".format(
                    pair[1], self.vocab.codes_per_level))
            prefix.append(pair[1])
        return context[:start], tuple(prefix)

    def _read(self, body):
        levels = self.vocab.levels
        history, group = [], []
        mentions = [0] * self.config.k_clusters
        n_general = n_sid = n_cot = 0
        section = None
        for token in body:
            if token in STRUCTURAL_TOKENS:
                if group:
                    raise MalformedSid("History ends inside a SID: {0}.".format(group))
                section = {HIST_BEGIN: "hist", COT_BEGIN: "cot"}.get(token, section)
                if token in (HIST_END, COT_END):
                    section = None
                continue
            tag = classify_token(token, self.vocab, strict=False)
            if section == "cot":
                n_cot += 1
            if tag is SubspaceTag.SEMANTIC_ID:
                n_sid += 1
                if section == "hist":
                    group.append(token)
                    if len(group) == levels:
                        sid = parse_sid("".join(group), self.vocab)
                        history.append(sid.index(self.vocab.codes_per_level))
                        group = []
            else:
                n_general += 1
                cluster = self.mention_cluster(token) if section == "cot" else None
                if cluster is not None:
                    mentions[cluster] += 1
        if group:
            raise MalformedSid("Context ends inside a SID: {0}.".format(group))
        return _ContextState(tuple(history), tuple(mentions), n_general, n_sid, n_cot > 0)

    def _gamma_eff(self, state):
        weight = state.n_general + self.config.lambda_sid * state.n_sid
        if not state.cot_present or weight == 0:
            return 0.0
        return self.config.gamma * state.n_general / weight

    def cluster_posterior(self, history, mentions=None):
        """
        Return the cluster weights given history item indices and CoT mention counts.

        An empty history gives weights proportional to the mentions, or None when nothing is
        mentioned either (the item distribution is then uniform).

        """
        mentions = np.zeros(self.config.k_clusters) if mentions is None \
            else np.asarray(mentions, dtype=float)
        if len(history):
            log_weight = self._log_prior + self._log_clusters[:, list(history)].sum(axis=1)
            return softmax(log_weight + np.log1p(mentions))
        if mentions.sum() > 0:
            return mentions / mentions.sum()
        return None

    def _distribution(self, state):
        # returns (item probabilities, prefix marginals per level, step cache)
        posterior = self.cluster_posterior(state.history, state.mentions)
        if posterior is None:
            base = np.full(self.vocab.n_items, 1.0 / self.vocab.n_items)
        else:
            base = posterior @ self._clusters
        gamma_eff = self._gamma_eff(state)
        probs = (1.0 - gamma_eff) * base + gamma_eff * self._popularity
        marginals = [probs.reshape(self.vocab.codes_per_level ** level, -1).sum(axis=1)
                     for level in range(self.vocab.levels + 1)]
        return probs, marginals, {}

    def _step(self, state, level, prefix_index):
        _, marginals, steps = self._state_distribution(state)
        key = (level, prefix_index)
        if key not in steps:
            width = self.vocab.codes_per_level
            child = marginals[level + 1][prefix_index * width:(prefix_index + 1) * width]
            steps[key] = child / child.sum()
        return steps[key]

    def _context_state(self, context):
        body, prefix = self._split_prefix(context)
        return self._read_state(tuple(body)), prefix

    def effective_drift(self, context):
        r"""Return the effective drift :math:`\gamma_{\text{eff}}` of the context body."""
        state, _ = self._context_state(context)
        return self._gamma_eff(state)

    def item_distribution(self, context):
        """Return the conditional item distribution, indexed by mixed-radix item index."""
        state, _ = self._context_state(context)
        return self._state_distribution(state)[0].copy()

    def score_candidates(self, context, candidates):
        context, candidates = self._check_request(context, candidates)
        state, _ = self._context_state(context)
        width = self.vocab.codes_per_level
        scores = []
        for sid in candidates:
            total, prefix_index = 0.0, 0
            for level, code in enumerate(sid.codes):
                total += math.log(self._step(state, level, prefix_index)[code])
                prefix_index = prefix_index * width + code
            scores.append(total)
        return scores

    def next_token_dist(self, context):
        state, prefix = self._context_state(context)
        if prefix is None:
            raise ContextNotSidReady("Context has no {0}.".format(SID_BEGIN))
        if len(prefix) == self.vocab.levels:
            return {SID_END: 1.0}
        prefix_index = 0
        for code in prefix:
            prefix_index = prefix_index * self.vocab.codes_per_level + code
        step = self._step(state, len(prefix), prefix_index)
        level = len(prefix)
        return {"<s_{0}_{1}>".format(level, code): float(prob) for code, prob in enumerate(step)}

    def attention_profile(self, context):
        r"""
        Return the pseudo-attention profile of ``context``.

        Salience is 1 for SID tokens and :math:`1 + \kappa \gamma_{\text{eff}}` for general
        tokens; masses are the softmax of saliences over non-structural tokens.

        """
        context = list(context)
        state, _ = self._context_state(context)
        gain = 1.0 + self.config.kappa * self._gamma_eff(state)
        tokens, tags = [], []
        for token in context:
            if token in STRUCTURAL_TOKENS:
                continue
            tokens.append(token)
            tags.append(classify_token(token, self.vocab, strict=False))
        if not tokens:
            raise EmptyInput("Context has no non-structural tokens.")
        salience = np.array([gain if tag is SubspaceTag.GENERAL else 1.0 for tag in tags])
        masses = softmax(salience)
        return AttentionProfile(tuple(zip(tokens, tags, masses)))

    def token_embeddings(self):
        """
        Return synthetic token embeddings for subspace analysis.

        SID and general tokens form two Gaussian clouds whose centres are partially aligned
        (cosine 0.6 in expectation between the centre directions).

        Returns
        -------
        tokens : list of str
            SID tokens followed by general tokens.
        tags : list of SubspaceTag
            Subspace of each token.
        vectors : ndarray
            ``(n_tokens, embedding_dim)`` embedding matrix.

        """
        rng = np.random.default_rng([self.config.seed, 1])
        dim = self.config.embedding_dim
        centre_sid = rng.standard_normal(dim)
        centre_general = 0.6 * centre_sid + 0.8 * rng.standard_normal(dim)
        tokens = self.vocab.sid_tokens() + list(self.vocab.general_tokens)
        tags = [SubspaceTag.SEMANTIC_ID] * len(self.vocab.sid_tokens()) \
            + [SubspaceTag.GENERAL] * len(self.vocab.general_tokens)
        centres = np.array([centre_sid if tag is SubspaceTag.SEMANTIC_ID else centre_general
                            for tag in tags])
        vectors = 2.0 * centres + 0.5 * rng.standard_normal((len(tokens), dim))
        return tokens, tags, vectors


class RemoteBackend(ScoringBackend):
    """
    Client of the remote log-probability protocol.

    ``POST /v1/score`` with ``{"context_tokens": [...], "candidates": [[...], ...]}`` answers
    ``{"logprobs": [...]}``; ``POST /v1/health`` answers ``{"status": "ok"}``.

    Parameters
    ----------
    endpoint : str
        Base URL of the server, e.g. ``"http://localhost:8000"``.
    vocab : Vocabulary
        Vocabulary used to render candidate SIDs.
    max_concurrency : int, optional
        Maximum number of in-flight requests. Default=4.
    timeout : float, optional
        Request timeout in seconds. Default=30.
    client : httpx.Client, optional
        Pre-built client (for instance a ``fastapi.testclient.TestClient``). Its base URL is
        used instead of ``endpoint``.

    """

    def __init__(self, endpoint, vocab, max_concurrency=4, timeout=30.0, client=None):
        if isinstance(max_concurrency, bool) or not isinstance(max_concurrency, int) \
                or max_concurrency < 1:
            raise InvalidConfig("max_concurrency should be a positive integer.")
        self.endpoint = endpoint
        self.vocab = vocab
        self._owns_client = client is None
        if client is None:
            client = httpx.Client(base_url=endpoint, timeout=timeout,
                                  limits=httpx.Limits(max_connections=max_concurrency))
        self._client = client
        self._slots = threading.BoundedSemaphore(max_concurrency)

    def close(self):
        if self._owns_client:
            self._client.close()

    def _post(self, path, payload):
        with self._slots:
            try:
                response = self._client.post(path, json=payload)
            except httpx.HTTPError as err:
                logger.warning("Request to %s%s failed: %s", self.endpoint, path, err)
                raise BackendUnavailable("Cannot reach {0}{1}: {2}".format(
                    self.endpoint, path, err)) from err
        if response.status_code >= 500:
            raise BackendUnavailable("{0}{1} answered HTTP {2}.".format(
                self.endpoint, path, response.status_code))
        try:
            body = response.json()
        except ValueError as err:
            raise RemoteProtocolError("{0} did not answer JSON.".format(path)) from err
        if response.status_code >= 400:
            message = body.get("error") if isinstance(body, dict) else body
            raise RemoteProtocolError("{0} rejected the request (HTTP {1}): {2}".format(
                path, response.status_code, message))
        return body

    def health(self):
        """Return True when the server reports ``{"status": "ok"}``."""
        try:
            return self._post("/v1/health", {}).get("status") == "ok"
        except (BackendUnavailable, RemoteProtocolError):
            return False

    def score_candidates(self, context, candidates):
        context, candidates = self._check_request(context, candidates)
        payload = {"context_tokens": context,
                   "candidates": [sid_tokens(sid, self.vocab) for sid in candidates]}
        body = self._post("/v1/score", payload)
        logprobs = body.get("logprobs") if isinstance(body, dict) else None
        if not isinstance(logprobs, list) or len(logprobs) != len(candidates):
            raise RemoteProtocolError("Expected {0} logprobs, got {1!r}.".format(
                len(candidates), logprobs))
        scores = []
        for value in logprobs:
            if isinstance(value, bool) or not isinstance(value, (int, float)) \
                    or not math.isfinite(value) or value > 0:
                raise RemoteProtocolError("Invalid log-probability {0!r}.".format(value))
            scores.append(float(value))
        return scores


def score_candidates(backend, context, candidates):
    """
    Score candidate SIDs after a context.

    Parameters
    ----------
    backend : ScoringBackend
        The scorer.
    context : sequence of str
        Context tokens, ending with ``<|sid_begin|>``.
    candidates : sequence of SemanticId
        Non-empty list of valid candidates.

    Returns
    -------
    scores : list of float
        One finite log-probability :math:`\\leq 0` per candidate: the sum of the :math:`L`
        code-token log-probabilities.

    Raises
    ------
    EmptyCandidates
        If no candidate is given.
    ContextNotSidReady
        If the context does not end with ``<|sid_begin|>``.
    BackendUnavailable
        If a remote backend cannot be reached.

    """
    return backend.score_candidates(context, candidates)


def next_token_dist(backend, context):
    """Return ``{token: probability}`` over the next SID-level token (see the backend)."""
    if not backend.supports_full_distribution:
        raise UnsupportedCapability("Backend does not expose full distributions.")
    return backend.next_token_dist(context)


def attention_profile(backend, context):
    """Return the :class:`AttentionProfile` of ``context``."""
    if not backend.supports_attention:
        raise UnsupportedCapability("Backend does not expose attention.")
    return backend.attention_profile(context)


def synth_model_new(config):
    """Build the deterministic :class:`SyntheticModel` of ``config``."""
    return SyntheticModel(config)


def load_backend(spec, vocab=None, max_concurrency=4):
    """
    Build a backend from a spec string.

    Parameters
    ----------
    spec : str
        ``"synth"`` (default synthetic model), ``"synth:PATH"`` (SyntheticModelConfig JSON) or
        an ``http(s)://`` URL.
    vocab : Vocabulary or str, optional
        Vocabulary (or path to its JSON document); required for remote backends.
    max_concurrency : int, optional
        In-flight request limit of remote backends. Default=4.

    Returns
    -------
    backend : ScoringBackend
        The backend.

    Raises
    ------
    InvalidConfig
        If the spec is not recognised or a remote spec lacks a vocabulary.

    """
    if spec == "synth":
        return SyntheticModel(SyntheticModelConfig())
    if spec.startswith("synth:"):
        return SyntheticModel(SyntheticModelConfig.load(spec[len("synth:"):]))
    if spec.startswith(("http://", "https://")):
        if vocab is None:
            raise InvalidConfig("A remote backend needs a vocabulary.")
        if isinstance(vocab, str):
            vocab = load_vocabulary(vocab)
        return RemoteBackend(spec, vocab, max_concurrency=max_concurrency)
    raise InvalidConfig("Unknown backend spec {0!r}.".format(spec))
