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
Utility Module.

Exceptions
----------
SidAlignError : Root of every error raised by the library. Input and validation errors also
                derive from ``ValueError``; capability and transport errors from
                ``RuntimeError``.

Functions
---------
check_positive_int : Validate a strictly positive integer parameter.
check_real : Validate a finite real-valued parameter.
check_sequence : Validate a list-like parameter and return it as a tuple.
check_finite_scores : Convert a score sequence to a finite one-dimensional float array.
config_from_dict : Build a configuration dataclass from a mapping, rejecting unknown keys.
parse_float_list : Parse a comma separated list of floats (``"0,0.25,0.5"``).
parse_int_list : Parse a comma separated list of integers (``"1,5,10"``).

"""

import dataclasses

import numpy as np

__all__ = [
    "SidAlignError",
    "InvalidConfig",
    "MalformedSid",
    "LevelOrderError",
    "CodeRangeError",
    "UnknownToken",
    "EmptyCandidates",
    "ContextNotSidReady",
    "BackendUnavailable",
    "UnsupportedCapability",
    "RemoteProtocolError",
    "EmptyHistory",
    "EmptyInput",
    "NegativeAlpha",
    "RemoteUnavailable",
    "NonConformingReply",
    "BudgetExceeded",
    "MissingSubspace",
    "DimensionMismatch",
    "DegenerateData",
    "SpaceTooLarge",
    "DuplicateInRanking",
    "DatasetError",
    "ParseError",
    "InvalidSid",
    "MissingField",
    "UsageError",
    "check_positive_int",
    "check_real",
    "check_sequence",
    "check_finite_scores",
    "config_from_dict",
    "parse_float_list",
    "parse_int_list",
]


class SidAlignError(Exception):
    """Base class of all sidalign errors."""


class InvalidConfig(SidAlignError, ValueError):
    """A configuration value is outside its documented range."""


class MalformedSid(SidAlignError, ValueError):
    """Text does not follow the ``<s_{level}_{code}>`` grammar."""


class LevelOrderError(MalformedSid):
    """SID tokens are not ordered by level ``0 .. L-1``."""


class CodeRangeError(MalformedSid):
    """A code is not in ``[0, C)``."""


class UnknownToken(SidAlignError, ValueError):
    """A token does not belong to the vocabulary."""


class EmptyCandidates(SidAlignError, ValueError):
    """No candidates were given to a scoring call."""


class ContextNotSidReady(SidAlignError, ValueError):
    """A scoring context does not end with ``<|sid_begin|>``."""


class EmptyHistory(SidAlignError, ValueError):
    """A context kind that conditions on history received an empty one."""


class EmptyInput(SidAlignError, ValueError):
    """A statistic was requested over an empty input."""


class NegativeAlpha(SidAlignError, ValueError):
    """The correction strength is negative."""


class BudgetExceeded(SidAlignError, ValueError):
    """A compressed statement is longer than its token budget."""


class NonConformingReply(SidAlignError, ValueError):
    """A remote compressor reply does not contain the preference template."""


class MissingSubspace(SidAlignError, ValueError):
    """An attention metric needs tokens from a subspace the profile lacks."""


class DimensionMismatch(SidAlignError, ValueError):
    """Vectors have inconsistent or insufficient dimensions."""


class DegenerateData(SidAlignError, ValueError):
    """Data carry no variance to analyse."""


class SpaceTooLarge(SidAlignError, ValueError):
    """The item space is too large for exhaustive enumeration."""


class DuplicateInRanking(SidAlignError, ValueError):
    """A ranking lists the same item twice."""


class UsageError(SidAlignError, ValueError):
    """Command line arguments are invalid."""


class DatasetError(SidAlignError, ValueError):
    """A dataset line is invalid; ``line`` is 1-based."""

    def __init__(self, line, message):
        self.line = line
        super().__init__("line {0}: {1}".format(line, message))


class ParseError(DatasetError):
    """A dataset line is not a JSON object."""


class InvalidSid(DatasetError):
    """A dataset line holds a SID that is invalid for the vocabulary."""


class MissingField(DatasetError):
    """A dataset line lacks a required field."""

    def __init__(self, line, field):
        self.field = field
        super().__init__(line, "missing field {0!r}".format(field))


class UnsupportedCapability(SidAlignError, RuntimeError):
    """The backend does not offer the requested capability."""


class BackendUnavailable(SidAlignError, RuntimeError):
    """A remote scoring backend could not be reached."""


class RemoteProtocolError(SidAlignError, RuntimeError):
    """A remote endpoint answered with a malformed or rejected payload."""


class RemoteUnavailable(SidAlignError, RuntimeError):
    """A remote compressor could not be reached."""


def check_positive_int(value, name):
    r"""
    Validate a strictly positive integer parameter.

    Parameters
    ----------
    value : int
        Value to check. Booleans are rejected.
    name : str
        Parameter name used in the error message.

    Returns
    -------
    value : int
        The validated value.

    Raises
    ------
    InvalidConfig
        If value is not an integer or is smaller than one.

    """
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidConfig("{0} should be an integer, got {1!r}.".format(name, value))
    if value < 1:
        raise InvalidConfig("{0} should be positive, got {1}.".format(name, value))
    return int(value)


def check_real(value, name):
    r"""
    Validate a finite real-valued parameter.

    Parameters
    ----------
    value : float
        Value to check. Integers are accepted, booleans and strings are not.
    name : str
        Parameter name used in the error message.

    Returns
    -------
    value : float
        The validated value.

    Raises
    ------
    InvalidConfig
        If value is not a real number or is not finite.

    """
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise InvalidConfig("{0} should be a number, got {1!r}.".format(name, value))
    if not np.isfinite(value):
        raise InvalidConfig("{0} should be finite, got {1}.".format(name, value))
    return float(value)


def check_sequence(value, name):
    r"""
    Validate a list-like parameter (a JSON array) and return it as a tuple.

    Raises
    ------
    InvalidConfig
        If value is not a list or a tuple.

    """
    if not isinstance(value, (list, tuple)):
        raise InvalidConfig("{0} should be a list, got {1!r}.".format(name, value))
    return tuple(value)


def check_finite_scores(scores, name="scores"):
    r"""
    Convert scores to a one-dimensional float array, checking for NaNs or Infs.

    Parameters
    ----------
    scores : sequence of float
        The scores.
    name : str, optional
        Name used in error messages.

    Returns
    -------
    array : ndarray
        The scores as ``float64``.

    Raises
    ------
    EmptyInput
        If there are no scores.
    ValueError
        If the scores are not one-dimensional or not finite.

    """
    array = np.asarray(scores, dtype=float)
    if array.ndim != 1:
        raise ValueError("Argument {0} should be one-dimensional.".format(name))
    if array.size == 0:
        raise EmptyInput("Argument {0} should not be empty.".format(name))
    if not np.all(np.isfinite(array)):
        raise ValueError("Argument {0} should contain finite values only.".format(name))
    return array


def config_from_dict(cls, data):
    r"""
    Build the configuration dataclass ``cls`` from a mapping.

    Parameters
    ----------
    cls : type
        A dataclass type.
    data : dict
        Field values; missing fields keep their defaults.

    Returns
    -------
    config : cls
        The configuration instance (validated by its ``__post_init__``).

    Raises
    ------
    InvalidConfig
        If data is not a mapping, names a field that ``cls`` does not define, or holds a value
        of the wrong type.

    """
    if not isinstance(data, dict):
        raise InvalidConfig("{0} expects a JSON object.".format(cls.__name__))
    known = {field.name for field in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InvalidConfig("Unknown {0} keys: {1}.".format(cls.__name__, ", ".join(unknown)))
    try:
        return cls(**data)
    except TypeError as err:
        raise InvalidConfig("Invalid {0} value: {1}".format(cls.__name__, err)) from err


def parse_float_list(text):
    """Parse ``"0,0.25,0.5"`` into ``[0.0, 0.25, 0.5]``."""
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as err:
        raise UsageError("Expected a comma separated list of numbers, got {0!r}.".format(text)) \
            from err
    if not values:
        raise UsageError("Expected at least one number, got {0!r}.".format(text))
    return values


def parse_int_list(text):
    """Parse ``"1,5,10"`` into ``[1, 5, 10]``."""
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as err:
        raise UsageError("Expected a comma separated list of integers, got {0!r}.".format(text)) \
            from err
    if not values:
        raise UsageError("Expected at least one integer, got {0!r}.".format(text))
    return values
