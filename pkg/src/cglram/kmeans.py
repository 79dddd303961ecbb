"""Lloyd's K-means on vectorized matrices."""
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyStack, ShapeMismatch, TooManyClusters
from .glram import IterationConfig, MatrixStack


@dataclass
class VClustering:
    K: int
    centroids: np.ndarray   # (K, r*c)
    assignment: np.ndarray  # (N,)
    sse_history: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def vectorize(stack):
    """Column-major flattening of every sample, shape (N, r*c)."""
    A = stack.samples
    return np.ascontiguousarray(A.transpose(0, 2, 1).reshape(A.shape[0], -1))


def sq_distances(X, centroids):
    # explicit differences rather than the expanded quadratic form, so that
    # equal points give exactly equal distances
    D = X[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", D, D)


def _means(X, assignment, K):
    C = np.zeros((K, X.shape[1]))
    for j in range(K):
        C[j] = X[assignment == j].mean(axis=0)
    return C


def _refill_empty(X, assignment, centroids, K):
    """Move the sample farthest from its centroid into each empty cluster."""
    assignment = assignment.copy()
    for j in range(K):
        if np.any(assignment == j):
            continue
        counts = np.bincount(assignment, minlength=K)
        d = np.einsum("nd,nd->n", X - centroids[assignment], X - centroids[assignment])
        d[counts[assignment] <= 1] = -1.0
        assignment[int(np.argmax(d))] = j
    return assignment


def kmeans_fit(stack, K, seed=0, cfg=None):
    if not isinstance(stack, MatrixStack):
        stack = MatrixStack(stack)
    cfg = cfg or IterationConfig()
    N = stack.N
    if N == 0:
        raise EmptyStack("stack has no samples")
    if not 1 <= K <= N:
        raise TooManyClusters(f"K={K} outside [1, N={N}]")

    X = vectorize(stack)
    rng = np.random.default_rng(seed)
    centroids = X[rng.choice(N, size=K, replace=False)].copy()
    assignment = None
    result = VClustering(K=K, centroids=centroids, assignment=np.zeros(N, dtype=np.int64))
    for _ in range(cfg.max_iters):
        new = np.argmin(sq_distances(X, centroids), axis=1).astype(np.int64)
        new = _refill_empty(X, new, centroids, K)
        centroids = _means(X, new, K)
        diff = X - centroids[new]
        result.sse_history.append(float(np.sum(diff * diff)))
        result.iterations += 1
        if assignment is not None and np.array_equal(new, assignment):
            assignment = new
            result.converged = True
            break
        assignment = new
    result.centroids = centroids
    result.assignment = assignment
    return result


def variance_decomposition(stack, clustering):
    """Return ``(sst, sse, ssb)`` about the global and per-cluster means."""
    X = vectorize(stack)
    a = np.asarray(clustering.assignment if hasattr(clustering, "assignment") else clustering)
    if a.shape != (X.shape[0],):
        raise ShapeMismatch(f"assignment shape {a.shape} does not match N={X.shape[0]}")
    mu = X.mean(axis=0)
    sst = float(np.sum((X - mu) ** 2))
    sse = 0.0
    ssb = 0.0
    for j in np.unique(a):
        Xj = X[a == j]
        mj = Xj.mean(axis=0)
        sse += float(np.sum((Xj - mj) ** 2))
        ssb += Xj.shape[0] * float(np.sum((mj - mu) ** 2))
    return sst, sse, ssb
