"""Dense matrix primitives shared by every fitter.

Matrices are plain 2-D float64 numpy arrays. Everything here is a pure
function of its inputs.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NonFinite, NonSquare, RankOutOfRange


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray   # descending
    vectors: np.ndarray  # column j pairs with values[j]


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray


def as_matrix(A, name="matrix"):
    """Coerce to a finite 2-D float64 array."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite(f"{name} contains NaN or Inf")
    return A


def frobenius_norm(A):
    A = as_matrix(A)
    return float(np.sqrt(np.sum(A * A)))


def fix_signs(vectors, rel_tie=1e-12):
    """Flip columns so each one's largest-magnitude entry is positive.

    Entries within ``rel_tie`` of the column maximum count as tied and the
    first of them decides, so the result does not hinge on rounding noise.
    """
    V = np.array(vectors, dtype=np.float64, copy=True)
    mags = np.abs(V)
    peak = mags.max(axis=0, initial=0.0)
    for j in range(V.shape[1]):
        if peak[j] == 0.0:
            continue
        i = int(np.argmax(mags[:, j] >= peak[j] * (1.0 - rel_tie)))
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    return V


def top_k_eigs_sym(S, k):
    """The ``k`` largest eigenpairs of a symmetric matrix.

    The input is symmetrized as ``(S + S.T) / 2`` before the solve.
    """
    S = as_matrix(S, "S")
    n, m = S.shape
    if n != m:
        raise NonSquare(f"expected a square matrix, got {S.shape}")
    if not 1 <= k <= n:
        raise RankOutOfRange(f"k={k} outside [1, {n}]")
    S = 0.5 * (S + S.T)
    try:
        w, V = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.arange(n - 1, n - 1 - k, -1)
    return EigenResult(values=w[order].copy(), vectors=fix_signs(V[:, order]))


def full_svd(A):
    A = as_matrix(A)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return SvdResult(U=U, singular_values=s, V=Vt.T)


def check_rank(k, r, c):
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= min(r, c):
        raise RankOutOfRange(f"k={k} outside [1, {min(r, c)}]")


def tsvd_error(A, k):
    """Frobenius error of the best rank-``k`` approximation of ``A``."""
    A = as_matrix(A)
    check_rank(k, *A.shape)
    s = np.linalg.svd(A, compute_uv=False)
    tail = s[k:]
    return float(np.sqrt(np.sum(tail * tail)))


def truncate(A, k):
    """Rank-``k`` truncation ``U_k diag(s_k) V_k^T`` of ``A``."""
    A = as_matrix(A)
    check_rank(k, *A.shape)
    res = full_svd(A)
    return (res.U[:, :k] * res.singular_values[:k]) @ res.V[:, :k].T
