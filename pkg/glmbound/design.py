"""
Design-matrix algebra: SVD, rank detection, trace of the inverse Gram
matrix and the orthogonal reparametrization that makes the Gram matrix
diagonal.
"""
import logging
import math
from pathlib import Path
from typing import TextIO, Union

import numpy as np

from glmbound.base.data_structures import DesignSpec
from glmbound.base.exceptions import DomainError
from glmbound.base.readers import MatrixReader, VectorReader

logger = logging.getLogger(__name__)

#: Multiplies `sigma_1 * max(n, d) * machine epsilon` in the rank cutoff
RANK_TOLERANCE_FACTOR = 1.0


def make_design(
    entries: np.ndarray, rank_tolerance_factor: float = RANK_TOLERANCE_FACTOR
) -> DesignSpec:
    """
    Builds a design from a matrix, computing its SVD.

    Parameters
    ----------
    entries:
        The n x d design matrix

    rank_tolerance_factor:
        Singular values at or below
        `factor * sigma_1 * max(n, d) * eps` count as zero, defaults to
        `1`.

    Returns
    -------
    The design
    """
    entries = np.array(entries, dtype=float)
    if entries.ndim != 2 or 0 in entries.shape:
        raise DomainError('A design must be a non-empty 2-d matrix')
    if not np.all(np.isfinite(entries)):
        raise DomainError('Design entries must be finite')
    if not rank_tolerance_factor > 0:
        raise DomainError('rank_tolerance_factor must be positive')

    n, d = entries.shape
    # A wide matrix needs the full V to span the null space
    _, singular_values, vt = np.linalg.svd(entries, full_matrices=n < d)
    right_factor = _fix_column_signs(vt.T)

    tolerance = (
        rank_tolerance_factor
        * singular_values[0]
        * max(n, d)
        * np.finfo(float).eps
    )
    rank = int(np.count_nonzero(singular_values > tolerance))

    return DesignSpec(
        entries=entries,
        singular_values=singular_values,
        right_factor=right_factor,
        rank=rank,
        trace_inv_gram=_trace_from_singular_values(singular_values, rank, d),
    )


def load_design(
    source: Union[str, Path, TextIO],
    rank_tolerance_factor: float = RANK_TOLERANCE_FACTOR,
) -> DesignSpec:
    """
    Loads a design from matrix text.

    Parameters
    ----------
    source:
        Raw text, a filepath or an open text stream

    rank_tolerance_factor:
        See `make_design`.

    Returns
    -------
    The design, entries preserved exactly as parsed
    """
    design = make_design(MatrixReader(source).read(), rank_tolerance_factor)
    logger.info(
        'Loaded %dx%d design of rank %d', design.n, design.d, design.rank
    )
    return design


def load_vector(source: Union[str, Path, TextIO]) -> np.ndarray:
    """
    Loads a vector written as a single row or column of matrix text.

    Parameters
    ----------
    source:
        Raw text, a filepath or an open text stream

    Returns
    -------
    The vector
    """
    return VectorReader(source).read()


def trace_inverse_gram(design: DesignSpec) -> float:
    """
    Computes `Tr((M^T M)^-1)` from the singular values.

    Parameters
    ----------
    design:
        The design

    Returns
    -------
    `sum_i sigma_i^-2` for a full-rank design, `inf` otherwise
    """
    return _trace_from_singular_values(
        design.singular_values, design.rank, design.d
    )


def reparametrize(design: DesignSpec) -> DesignSpec:
    """
    Rotates the parameter space by the right singular vectors, mapping
    `(theta, M)` to `(V^T theta, M V)` so that the Gram matrix of the
    result is diagonal. The minimax problem over the unit ball is
    unchanged because the ball is rotation invariant.

    Columns of `V` are ordered so that each one's dominant entry sits on
    the diagonal whenever possible, so a design whose Gram matrix is
    already diagonal keeps its column order (up to sign) and the map is
    idempotent.

    Parameters
    ----------
    design:
        The design

    Returns
    -------
    The reparametrized design, with the same singular values, rank and
    trace of the inverse Gram matrix
    """
    d = design.d
    order = _dominant_order(design.right_factor)
    permutation = np.eye(d)[:, order]
    rotation = design.right_factor @ permutation

    # M V P = U S P, whose right factor is P^T
    return DesignSpec(
        entries=design.entries @ rotation,
        singular_values=design.singular_values,
        right_factor=permutation.T,
        rank=design.rank,
        trace_inv_gram=design.trace_inv_gram,
    )


def _trace_from_singular_values(
    singular_values: np.ndarray, rank: int, d: int
) -> float:
    if rank < d:
        return math.inf
    return float(np.sum(singular_values[:d] ** -2.0))


def _fix_column_signs(v: np.ndarray) -> np.ndarray:
    """
    Flips columns so that the largest-magnitude entry of each is
    positive.
    """
    dominant = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[dominant, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def _dominant_order(v: np.ndarray) -> np.ndarray:
    """
    Column order placing each column's dominant entry on the diagonal,
    or the identity order when the dominant rows collide.
    """
    dominant = np.argmax(np.abs(v), axis=0)
    if len(set(dominant.tolist())) != v.shape[1]:
        return np.arange(v.shape[1])
    return np.argsort(dominant)
