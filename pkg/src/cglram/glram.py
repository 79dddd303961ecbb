"""Generalized low rank approximation of a stack of matrices.

One orthonormal pair (L, R) is shared by all samples; each sample is
compressed to ``M_i = L^T A_i R`` and reconstructed as ``L M_i R^T``.
The pair is found by alternating top-k eigensolves of the two projected
Gram matrices.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import EmptyStack, NonFinite, RankOutOfRange, ShapeMismatch
from .linalg import check_rank, top_k_eigs_sym


@dataclass
class MatrixStack:
    """N real r x c matrices stored as one (N, r, c) float64 array."""

    samples: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.asarray(self.samples, dtype=np.float64)
        if A.ndim == 2:
            A = A[None]
        if A.ndim != 3:
            raise ShapeMismatch(f"stack must be (N, r, c), got {A.shape}")
        if A.shape[0] == 0:
            raise EmptyStack("stack has no samples")
        if not np.all(np.isfinite(A)):
            raise NonFinite("stack contains NaN or Inf")
        self.samples = A
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (A.shape[0],):
                raise ShapeMismatch(
                    f"labels shape {labels.shape} does not match N={A.shape[0]}")
            self.labels = labels

    @property
    def N(self):
        return self.samples.shape[0]

    @property
    def r(self):
        return self.samples.shape[1]

    @property
    def c(self):
        return self.samples.shape[2]

    def __len__(self):
        return self.N

    def subset(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        labels = None if self.labels is None else self.labels[idx]
        return MatrixStack(self.samples[idx], labels)

    def total_energy(self):
        """Sum of squared Frobenius norms of all samples."""
        return float(np.sum(self.samples * self.samples))


@dataclass(frozen=True)
class ProjectorPair:
    L: np.ndarray  # r x k, orthonormal columns
    R: np.ndarray  # c x k, orthonormal columns

    @property
    def k(self):
        return self.L.shape[1]

    def compress(self, A):
        """``L^T A R`` for one matrix or a whole (N, r, c) array."""
        return self.L.T @ A @ self.R

    def expand(self, M):
        return self.L @ M @ self.R.T


@dataclass
class CompressedSet:
    pair: ProjectorPair
    middles: np.ndarray  # (N, k, k)


@dataclass
class IterationConfig:
    max_iters: int = 100
    rel_tol: float = 1e-6

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")


@dataclass
class FitTrace:
    rmsre_history: list = field(default_factory=list)
    objective_history: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


class InitStrategy(str, Enum):
    IDENTITY_TOP = "identity"
    SEEDED_RANDOM = "random"


def glram_init(stack, k, strategy=InitStrategy.IDENTITY_TOP, seed=0):
    """Initial left factor L0 (r x k) wrapped in a pair with R unset."""
    check_rank(k, stack.r, stack.c)
    strategy = InitStrategy(strategy)
    if strategy is InitStrategy.IDENTITY_TOP:
        L0 = np.eye(stack.r, k)
    else:
        G = np.random.default_rng(seed).standard_normal((stack.r, k))
        L0, _ = np.linalg.qr(G)
    return L0


def reconstruct(pair, M):
    M = np.asarray(M, dtype=np.float64)
    if M.shape[-2:] != (pair.k, pair.k):
        raise ShapeMismatch(f"middle matrix shape {M.shape} does not match k={pair.k}")
    return pair.expand(M)


def residual_sq(samples, pair):
    """Per-sample squared reconstruction errors ``||A_i - L L^T A_i R R^T||_F^2``."""
    if samples.shape[1:] != (pair.L.shape[0], pair.R.shape[0]):
        raise ShapeMismatch(
            f"samples {samples.shape[1:]} vs pair ({pair.L.shape[0]}, {pair.R.shape[0]})")
    D = samples - pair.expand(pair.compress(samples))
    return np.einsum("nrc,nrc->n", D, D)


def rmsre(stack, pair, middles):
    M = middles.middles if isinstance(middles, CompressedSet) else np.asarray(middles)
    if M.shape[0] != stack.N or M.shape[1:] != (pair.k, pair.k):
        raise ShapeMismatch(f"middles {M.shape} inconsistent with N={stack.N}, k={pair.k}")
    D = stack.samples - pair.expand(M)
    return float(np.sqrt(np.sum(D * D) / stack.N))


def _right_gram(samples, L):
    # sum_i A_i^T L L^T A_i
    B = np.einsum("rk,nrc->nkc", L, samples)
    return np.einsum("nkc,nkd->cd", B, B)


def _left_gram(samples, R):
    # sum_i A_i R R^T A_i^T
    B = samples @ R
    return np.einsum("nrk,nsk->rs", B, B)


def glram_fit(stack, k, cfg=None, init=InitStrategy.IDENTITY_TOP, seed=0, L0=None):
    """Fit a shared projector pair to ``stack``.

    ``L0`` overrides ``init`` and warm-starts the iteration (used when
    refitting a cluster from its previous centroid). Each sweep updates R
    from the current L, then L from the new R; iteration stops once the
    relative RMSRE drop falls below ``cfg.rel_tol`` or after
    ``cfg.max_iters`` sweeps.

    Returns ``(pair, compressed, trace)``.
    """
    cfg = cfg or IterationConfig()
    if not isinstance(stack, MatrixStack):
        stack = MatrixStack(stack)
    check_rank(k, stack.r, stack.c)
    A = stack.samples
    if L0 is None:
        L = glram_init(stack, k, init, seed)
    else:
        L = np.asarray(L0, dtype=np.float64)
        if L.shape != (stack.r, k):
            raise RankOutOfRange(f"warm start L0 has shape {L.shape}, expected {(stack.r, k)}")

    trace = FitTrace()
    prev = None
    for _ in range(cfg.max_iters):
        R = top_k_eigs_sym(_right_gram(A, L), k).vectors
        L = top_k_eigs_sym(_left_gram(A, R), k).vectors
        pair = ProjectorPair(L, R)
        middles = pair.compress(A)
        err = float(np.sqrt(np.sum(residual_sq(A, pair)) / stack.N))
        trace.rmsre_history.append(err)
        trace.objective_history.append(float(np.sum(middles * middles)))
        trace.iterations += 1
        if prev is not None and (prev == 0.0 or (prev - err) / prev < cfg.rel_tol):
            trace.converged = True
            break
        if err == 0.0:
            trace.converged = True
            break
        prev = err
    return pair, CompressedSet(pair, middles), trace
