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
Subspace Diagnostics Module.

Instruments measuring how attention and representation split between the semantic-ID and
general token subspaces:

    - Space Dominance Index (SDI): mean attention per general token over mean attention per
      SID token.
    - Attention Efficiency Index (AEI): mean attention per general token, times 100.
    - PCA projection of token embeddings.

"""

import dataclasses

import numpy as np

from sidalign.align import build_context, build_think_context, ContextKind, cpmi_decompose
from sidalign.backend import attention_profile, INSTRUCTION_TOKENS
from sidalign.utils import check_positive_int, DegenerateData, DimensionMismatch, MissingSubspace
from sidalign.vocab import SubspaceTag

__all__ = [
    "DiagnosticsReport",
    "sdi",
    "aei",
    "pca_project",
    "diagnose_context",
    "diagnose_episode",
    "cpmi_table",
]


@dataclasses.dataclass(frozen=True)
class DiagnosticsReport:
    """Attention diagnostics of one context."""

    context_label: str
    n_general: int
    n_sid: int
    sdi: float
    aei: float

    def to_row(self):
        return [self.context_label, self.n_general, self.n_sid, repr(self.sdi), repr(self.aei)]


def _subspace_masses(profile, tag):
    masses = np.array([mass for _, entry_tag, mass in profile.entries if entry_tag is tag])
    if masses.size == 0:
        raise MissingSubspace("Profile has no {0} tokens.".format(tag.value))
    return masses


def sdi(profile):
    """
    Compute the Space Dominance Index of an attention profile.

    Parameters
    ----------
    profile : AttentionProfile
        Attention masses of a context.

    Returns
    -------
    sdi : float
        Mean mass per General token divided by mean mass per SemanticID token.

    Raises
    ------
    MissingSubspace
        If the profile lacks General or SemanticID tokens.

    """
    general = _subspace_masses(profile, SubspaceTag.GENERAL)
    sid = _subspace_masses(profile, SubspaceTag.SEMANTIC_ID)
    return float(general.mean() / sid.mean())


def aei(profile):
    """
    Compute the Attention Efficiency Index of an attention profile.

    The index is the total mass on General tokens divided by their count, scaled by 100.
    General tokens include instruction text, so the index is defined with and without a CoT.

    Raises
    ------
    MissingSubspace
        If the profile has no General token.

    """
    general = _subspace_masses(profile, SubspaceTag.GENERAL)
    return float(100.0 * general.sum() / general.size)


def pca_project(vectors, k):
    r"""
    Project vectors on their top-:math:`k` principal components.

    Components are eigenvectors of the population covariance of the mean-centred data, each
    signed so that its largest-magnitude entry is positive.

    Parameters
    ----------
    vectors : ndarray
        The :math:`n \times d` data matrix, :math:`n \geq 2`, :math:`d \geq k`.
    k : int
        Number of components.

    Returns
    -------
    components : ndarray
        The :math:`k \times d` orthonormal components.
    projections : ndarray
        The :math:`n \times k` coordinates of the centred data.
    explained_variance_ratio : ndarray
        Share of the total variance carried by each component, non-increasing.

    Raises
    ------
    DimensionMismatch
        If the data is not a matrix of at least two rows and ``k`` columns.
    DegenerateData
        If all points are identical.

    Examples
    --------
    >>> components, _, ratio = pca_project([[0, 0], [1, 1], [2, 2]], 1)
    >>> components.round(6), ratio
    (array([[0.707107, 0.707107]]), array([1.]))

    """
    try:
        array = np.asarray(vectors, dtype=float)
    except ValueError as err:
        raise DimensionMismatch("Vectors should share one dimension.") from err
    k = check_positive_int(k, "k")
    if array.ndim != 2 or array.shape[0] < 2:
        raise DimensionMismatch("Expected at least two vectors of equal dimension, got shape "
                                "{0}.".format(array.shape))
    if array.shape[1] < k:
        raise DimensionMismatch("Cannot extract {0} components from dimension {1}.".format(
            k, array.shape[1]))
    centered = array - array.mean(axis=0)
    covariance = centered.T @ centered / array.shape[0]
    total = np.trace(covariance)
    if total <= np.finfo(float).eps * max(1.0, np.abs(array).max() ** 2):
        raise DegenerateData("All vectors are identical.")
    eigvals, eigvecs = np.linalg.eigh(covariance)
    order = np.argsort(eigvals)[::-1][:k]
    components = eigvecs[:, order].T
    signs = np.sign(components[np.arange(k), np.argmax(np.abs(components), axis=1)])
    components = components * signs[:, np.newaxis]
    ratios = np.clip(eigvals[order], 0.0, None) / total
    return components, centered @ components.T, ratios


def diagnose_context(backend, context, label):
    """Return the :class:`DiagnosticsReport` of one context."""
    profile = attention_profile(backend, context)
    return DiagnosticsReport(label, profile.count(SubspaceTag.GENERAL),
                             profile.count(SubspaceTag.SEMANTIC_ID), sdi(profile), aei(profile))


def diagnose_episode(backend, episode):
    """
    Diagnose an episode with and without its reasoning chain.

    Both contexts start with the fixed instruction prompt so that General tokens exist in
    both modes.

    Returns
    -------
    think_on, think_off : DiagnosticsReport
        Reports labelled ``"think_on"`` and ``"think_off"``.

    """
    instruction = list(INSTRUCTION_TOKENS)
    think_on = instruction + build_think_context(episode.history, episode.cot.split())
    think_off = instruction + build_context(ContextKind.BASELINE, episode.history, (), ())
    return (diagnose_context(backend, think_on, "think_on"),
            diagnose_context(backend, think_off, "think_off"))


def cpmi_table(backend, episodes):
    """
    Decompose the think-on score of each ground-truth target.

    Returns
    -------
    rows : list of (str, float, float, float)
        ``(user, cpmi, prior, total)`` per episode.

    """
    rows = []
    for episode in episodes:
        cpmi, prior, total = cpmi_decompose(backend, episode.history, episode.cot.split(),
                                            episode.target)
        rows.append((episode.user, cpmi, prior, total))
    return rows
