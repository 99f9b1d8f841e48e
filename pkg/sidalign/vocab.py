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
Vocabulary Module.

The token universe is split into three disjoint classes:

    - Semantic-ID tokens ``<s_{level}_{code}>``, :math:`L \times C` of them.
    - General tokens, atomic whitespace-free symbols carrying instructions and reasoning text.
    - Structural tokens, the seven fixed delimiters of the prompt layout.

An item is identified by a :class:`SemanticId`, an :math:`L`-tuple of codes, and written as the
concatenation of its :math:`L` code tokens.

"""

import dataclasses
import enum
import itertools
import json
import re

from sidalign.utils import CodeRangeError, InvalidConfig, LevelOrderError, MalformedSid, \
    UnknownToken

__all__ = [
    "HIST_BEGIN",
    "HIST_END",
    "HIST_EMPTY",
    "COT_BEGIN",
    "COT_END",
    "SID_BEGIN",
    "SID_END",
    "STRUCTURAL_TOKENS",
    "SubspaceTag",
    "SemanticId",
    "Vocabulary",
    "parse_sid",
    "render_sid",
    "sid_tokens",
    "parse_sid_token",
    "classify_token",
    "load_vocabulary",
]

HIST_BEGIN = "<|hist_begin|>"
HIST_END = "<|hist_end|>"
HIST_EMPTY = "<|hist_empty|>"
COT_BEGIN = "<|cot_begin|>"
COT_END = "<|cot_end|>"
SID_BEGIN = "<|sid_begin|>"
SID_END = "<|sid_end|>"

STRUCTURAL_TOKENS = frozenset(
    [HIST_BEGIN, HIST_END, HIST_EMPTY, COT_BEGIN, COT_END, SID_BEGIN, SID_END])

_SID_TOKEN = re.compile(r"<s_(\d+)_(\d+)>")
_SID_TEXT = re.compile(r"(?:<s_\d+_\d+>)+")


class SubspaceTag(enum.Enum):
    """Subspace a vocabulary token belongs to."""

    SEMANTIC_ID = "SemanticID"
    GENERAL = "General"
    STRUCTURAL = "Structural"


@dataclasses.dataclass(frozen=True, order=True)
class SemanticId:
    """
    Hierarchical item code.

    Instances compare lexicographically by ``codes``; that order breaks every score tie in
    the library.

    Parameters
    ----------
    codes : tuple of int
        One code per level, most significant level first.

    """

    codes: tuple

    def __post_init__(self):
        object.__setattr__(self, "codes", tuple(int(code) for code in self.codes))

    def __len__(self):
        return len(self.codes)

    def index(self, codes_per_level):
        """Return the mixed-radix item index, level 0 being the most significant digit."""
        index = 0
        for code in self.codes:
            index = index * codes_per_level + code
        return index

    @classmethod
    def from_index(cls, index, vocab):
        """Inverse of :meth:`index` for ``vocab``."""
        if not 0 <= index < vocab.n_items:
            raise CodeRangeError("Item index {0} outside [0, {1}).".format(index, vocab.n_items))
        codes = []
        for _ in range(vocab.levels):
            index, code = divmod(index, vocab.codes_per_level)
            codes.append(code)
        return cls(tuple(reversed(codes)))


@dataclasses.dataclass(frozen=True)
class Vocabulary:
    r"""
    Partitioned token universe.

    Parameters
    ----------
    levels : int
        Number of code levels :math:`L \geq 1`.
    codes_per_level : int
        Codes per level :math:`C \geq 2`; the item count is :math:`C^L`.
    general_tokens : tuple of str
        Ordered, distinct general tokens. They may not contain whitespace, collide with a
        structural token, or follow the SID token grammar.

    Raises
    ------
    InvalidConfig
        If any of the invariants above is violated.

    """

    levels: int
    codes_per_level: int
    general_tokens: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "general_tokens", tuple(self.general_tokens))
        if isinstance(self.levels, bool) or not isinstance(self.levels, int) or self.levels < 1:
            raise InvalidConfig("levels should be an integer >= 1, got {0!r}.".format(self.levels))
        if isinstance(self.codes_per_level, bool) or not isinstance(self.codes_per_level, int) \
                or self.codes_per_level < 2:
            raise InvalidConfig("codes_per_level should be an integer >= 2, got {0!r}.".format(
                self.codes_per_level))
        if len(set(self.general_tokens)) != len(self.general_tokens):
            raise InvalidConfig("general_tokens should be distinct.")
        for token in self.general_tokens:
            if not isinstance(token, str) or not token or len(token.split()) != 1 \
                    or token != token.strip():
                raise InvalidConfig("General token {0!r} is not an atomic symbol.".format(token))
            if token in STRUCTURAL_TOKENS or _SID_TOKEN.fullmatch(token):
                raise InvalidConfig("General token {0!r} collides with another token class."
                                    .format(token))
        object.__setattr__(self, "_general_set", frozenset(self.general_tokens))

    @property
    def n_items(self):
        """Number of items :math:`C^L`."""
        return self.codes_per_level ** self.levels

    def sid_tokens(self):
        """Return all SID tokens ordered by (level, code)."""
        return [_render_token(level, code) for level in range(self.levels)
                for code in range(self.codes_per_level)]

    def tokens(self):
        """Return every vocabulary token: SID, then general, then structural."""
        return self.sid_tokens() + list(self.general_tokens) + sorted(STRUCTURAL_TOKENS)

    def is_general(self, token):
        """Return True when ``token`` is one of the general tokens."""
        return token in self._general_set

    def check_sid(self, sid):
        """Raise MalformedSid/CodeRangeError unless ``sid`` is valid for this vocabulary."""
        if len(sid.codes) != self.levels:
            raise MalformedSid("SID {0} has {1} levels, expected {2}.".format(
                sid.codes, len(sid.codes), self.levels))
        for code in sid.codes:
            if not 0 <= code < self.codes_per_level:
                raise CodeRangeError("Code {0} outside [0, {1}).".format(
                    code, self.codes_per_level))
        return sid

    def all_sids(self):
        """Yield every SID in lexicographic order."""
        for codes in itertools.product(range(self.codes_per_level), repeat=self.levels):
            yield SemanticId(codes)

    def to_dict(self):
        """Return the JSON document form of the vocabulary."""
        return {"levels": self.levels, "codes_per_level": self.codes_per_level,
                "general_tokens": list(self.general_tokens)}

    @classmethod
    def from_dict(cls, data):
        """Build a vocabulary from its JSON document form."""
        try:
            return cls(data["levels"], data["codes_per_level"],
                       tuple(data.get("general_tokens", ())))
        except (KeyError, TypeError) as err:
            raise InvalidConfig("Invalid vocabulary document: {0}".format(err)) from err


def load_vocabulary(path):
    """Read a vocabulary JSON document from ``path``."""
    with open(path, encoding="utf-8") as handle:
        return Vocabulary.from_dict(json.load(handle))


def _render_token(level, code):
    return "<s_{0}_{1}>".format(level, code)


def parse_sid_token(token):
    """Return ``(level, code)`` for a SID-shaped token, else None."""
    match = _SID_TOKEN.fullmatch(token)
    if match is None:
        return None
    return int(match.group(1)), int(match.group(2))


def parse_sid(text, vocab):
    r"""
    Decode the textual form of a semantic ID.

    Parameters
    ----------
    text : str
        Concatenation of :math:`L` tokens ``<s_{level}_{code}>`` with levels ``0 .. L-1`` in
        order, e.g. ``"<s_0_3><s_1_7><s_2_1>"``.
    vocab : Vocabulary
        The vocabulary fixing :math:`L` and :math:`C`.

    Returns
    -------
    sid : SemanticId
        The decoded code tuple.

    Raises
    ------
    MalformedSid
        If text does not follow the token grammar.
    LevelOrderError
        If the levels are not ``0 .. L-1`` ascending.
    CodeRangeError
        If a code is not smaller than :math:`C`.

    Examples
    --------
    >>> parse_sid("<s_0_3><s_1_7><s_2_1>", Vocabulary(3, 8)).codes
    (3, 7, 1)

    """
    if not isinstance(text, str) or not _SID_TEXT.fullmatch(text):
        raise MalformedSid("Malformed semantic ID {0!r}.".format(text))
    pairs = [(int(level), int(code)) for level, code in _SID_TOKEN.findall(text)]
    levels = [level for level, _ in pairs]
    if levels != list(range(vocab.levels)):
        raise LevelOrderError("Semantic ID {0!r} has levels {1}, expected 0..{2}.".format(
            text, levels, vocab.levels - 1))
    return vocab.check_sid(SemanticId(tuple(code for _, code in pairs)))


def sid_tokens(sid, vocab):
    """Return the :math:`L` code tokens of ``sid``."""
    vocab.check_sid(sid)
    return [_render_token(level, code) for level, code in enumerate(sid.codes)]


def render_sid(sid, vocab):
    """
    Encode a semantic ID as its canonical token string.

    ``parse_sid(render_sid(sid, vocab), vocab) == sid`` for every valid ``sid``.

    Examples
    --------
    >>> render_sid(SemanticId((3, 7, 1)), Vocabulary(3, 8))
    '<s_0_3><s_1_7><s_2_1>'

    """
    return "".join(sid_tokens(sid, vocab))


def classify_token(token, vocab, strict=True):
    """
    Return the subspace tag of a token.

    Parameters
    ----------
    token : str
        The token.
    vocab : Vocabulary
        The vocabulary.
    strict : bool, optional
        If True, a token outside the vocabulary raises UnknownToken. If False, any token that
        is neither structural nor SID-shaped is read as free text and tagged General;
        SID-shaped tokens are validated in both modes. Default=True.

    Returns
    -------
    tag : SubspaceTag
        The unique tag of the token.

    Raises
    ------
    UnknownToken
        If the token does not belong to the vocabulary.

    """
    if token in STRUCTURAL_TOKENS:
        return SubspaceTag.STRUCTURAL
    pair = parse_sid_token(token)
    if pair is not None:
        level, code = pair
        if level < vocab.levels and code < vocab.codes_per_level:
            return SubspaceTag.SEMANTIC_ID
        raise UnknownToken("SID token {0!r} is outside the vocabulary.".format(token))
    if vocab.is_general(token) or (not strict and token.strip() == token and token):
        return SubspaceTag.GENERAL
    raise UnknownToken("Token {0!r} is not in the vocabulary.".format(token))
