"""Clustering-based GLRAM.

K-means where the centroid of a cluster is the GLRAM projector pair of its
members and the distance of a matrix to a centroid is its two-sided
projection residual. The loop alternates nearest-centroid reassignment with
per-cluster GLRAM refits until the relative WCSSRE drop is at most ``eta``,
the assignment reaches a fixed point, or ``max_outer`` rounds have run.
"""
from dataclasses import dataclass, field
import numpy as np

from .errors import ShapeMismatch, TooManyClusters
from .glram import IterationConfig, MatrixStack, glram_fit, residual_sq
from .linalg import as_matrix, check_rank

INIT_STRATEGIES = ("partition", "seeds", "kmeans")


@dataclass
class ClusterModel:
    K: int
    centroids: list                # K ProjectorPairs
    assignment: np.ndarray         # (N,) cluster index per sample
    middles: np.ndarray            # (N, k, k) under each sample's own pair
    wcssre_history: list = field(default_factory=list)
    outer_iterations: int = 0
    inner_iterations: int = 0
    converged: bool = False
    stop_reason: str = ""

    @property
    def k(self):
        return self.centroids[0].k

    @property
    def wcssre(self):
        return self.wcssre_history[-1]

    def membership(self):
        """Indicator matrix W with ``W[i, j] = 1`` iff sample i is in cluster j."""
        W = np.zeros((len(self.assignment), self.K), dtype=np.int64)
        W[np.arange(len(self.assignment)), self.assignment] = 1
        return W


@dataclass
class CglramConfig:
    K: int
    k: int
    eta: float = 1e-4
    max_outer: int = 50
    inner: IterationConfig = field(
        default_factory=lambda: IterationConfig(max_iters=30, rel_tol=1e-6))
    seed: int = 0
    init: str = "partition"

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.init not in INIT_STRATEGIES:
            raise ValueError(f"init must be one of {INIT_STRATEGIES}, got {self.init!r}")


def generalized_distance_sq(A, pair):
    """``||A - L (L^T A R) R^T||_F^2``."""
    A = as_matrix(A)
    if A.shape != (pair.L.shape[0], pair.R.shape[0]):
        raise ShapeMismatch(f"A is {A.shape}, pair expects ({pair.L.shape[0]}, {pair.R.shape[0]})")
    return float(residual_sq(A[None], pair)[0])


def distance_table(stack, centroids):
    """(N, K) table of generalized distances."""
    if not centroids:
        raise ShapeMismatch("no centroids given")
    return np.stack([residual_sq(stack.samples, p) for p in centroids], axis=1)


def assign_clusters(stack, centroids):
    """Nearest centroid per sample; ties go to the lowest index."""
    return np.argmin(distance_table(stack, centroids), axis=1).astype(np.int64)


def compute_middles(stack, centroids, assignment):
    k = centroids[0].k
    M = np.empty((stack.N, k, k))
    for j, pair in enumerate(centroids):
        idx = assignment == j
        if np.any(idx):
            M[idx] = pair.compress(stack.samples[idx])
    return M


def wcssre(stack, model):
    a = np.asarray(model.assignment)
    if a.shape != (stack.N,) or model.middles.shape[0] != stack.N:
        raise ShapeMismatch("model does not match the stack")
    total = 0.0
    for j, pair in enumerate(model.centroids):
        idx = a == j
        if np.any(idx):
            D = stack.samples[idx] - pair.expand(model.middles[idx])
            total += float(np.sum(D * D))
    return total


def _objective(stack, centroids, assignment):
    total = 0.0
    for j, pair in enumerate(centroids):
        idx = np.flatnonzero(assignment == j)
        if idx.size:
            total += float(np.sum(residual_sq(stack.samples[idx], pair)))
    return total


def random_partition(N, K, seed):
    """Seeded partition of range(N) into K non-empty, near-equal groups."""
    perm = np.random.default_rng(seed).permutation(N)
    labels = np.empty(N, dtype=np.int64)
    labels[perm] = np.arange(N) % K
    return labels


def refill_empty(stack, centroids, assignment):
    """Give each empty cluster the sample farthest from its own centroid.

    The emptied cluster inherits a copy of the donor's centroid, so the
    objective is unchanged by the move.
    """
    K = len(centroids)
    assignment = assignment.copy()
    centroids = list(centroids)
    for j in range(K):
        if np.any(assignment == j):
            continue
        counts = np.bincount(assignment, minlength=K)
        d = np.empty(stack.N)
        for a in np.unique(assignment):
            idx = assignment == a
            d[idx] = residual_sq(stack.samples[idx], centroids[a])
        d[counts[assignment] <= 1] = -1.0
        i = int(np.argmax(d))
        centroids[j] = centroids[assignment[i]]
        assignment[i] = j
    return centroids, assignment


def _fit_clusters(stack, k, assignment, warm, inner):
    centroids = []
    iters = 0
    for j, L0 in enumerate(warm):
        members = stack.subset(np.flatnonzero(assignment == j))
        pair, _, trace = glram_fit(members, k, inner, L0=L0)
        centroids.append(pair)
        iters += trace.iterations
    return centroids, iters


def _initial_state(stack, cfg):
    N, K = stack.N, cfg.K
    if cfg.init == "partition":
        return random_partition(N, K, cfg.seed)
    if cfg.init == "kmeans":
        from .kmeans import kmeans_fit
        return kmeans_fit(stack, K, seed=cfg.seed).assignment
    # "seeds": one randomly chosen sample per cluster; everyone else joins
    # the nearest of the resulting single-sample centroids
    picks = np.random.default_rng(cfg.seed).choice(N, size=K, replace=False)
    pairs = [glram_fit(stack.subset([i]), cfg.k, cfg.inner)[0] for i in picks]
    assignment = assign_clusters(stack, pairs)
    assignment[picks] = np.arange(K)
    return assignment


def cglram_fit(stack, cfg, initial_assignment=None, initial_pairs=None):
    """Run clustering-based GLRAM on ``stack``.

    ``initial_assignment`` replaces the seeded initial partition and
    ``initial_pairs`` (K projector pairs) warm-starts the initial
    per-cluster fits; together they let a run start from another method's
    solution and only descend from there.

    ``wcssre_history[0]`` is the objective right after initialization;
    every later entry follows one reassignment + refit round.
    """
    if not isinstance(stack, MatrixStack):
        stack = MatrixStack(stack)
    N, K, k = stack.N, cfg.K, cfg.k
    if not 1 <= K <= N:
        raise TooManyClusters(f"K={K} outside [1, N={N}]")
    check_rank(k, stack.r, stack.c)

    if initial_assignment is None:
        assignment = _initial_state(stack, cfg)
    else:
        assignment = np.asarray(initial_assignment, dtype=np.int64).copy()
        if assignment.shape != (N,) or assignment.min() < 0 or assignment.max() >= K:
            raise ShapeMismatch("initial assignment must hold N indices in [0, K)")
    if initial_pairs is not None and len(initial_pairs) != K:
        raise ShapeMismatch(f"expected {K} initial pairs, got {len(initial_pairs)}")

    if np.any(np.bincount(assignment, minlength=K) == 0):
        raise ShapeMismatch("initial assignment leaves a cluster empty")
    warm = [None] * K if initial_pairs is None else [p.L for p in initial_pairs]
    centroids, inner_iters = _fit_clusters(stack, k, assignment, warm, cfg.inner)

    model = ClusterModel(K=K, centroids=centroids, assignment=assignment,
                         middles=compute_middles(stack, centroids, assignment),
                         wcssre_history=[_objective(stack, centroids, assignment)],
                         inner_iterations=inner_iters)
    for _ in range(cfg.max_outer):
        model.outer_iterations += 1
        new = assign_clusters(stack, centroids)
        centroids, new = refill_empty(stack, centroids, new)
        if np.array_equal(new, assignment):
            model.converged = True
            model.stop_reason = "fixed_point"
            break
        assignment = new
        centroids, iters = _fit_clusters(stack, k, assignment,
                                         [p.L for p in centroids], cfg.inner)
        model.inner_iterations += iters
        prev = model.wcssre_history[-1]
        cur = _objective(stack, centroids, assignment)
        model.wcssre_history.append(cur)
        if prev == 0.0 or (prev - cur) / prev <= cfg.eta:
            model.converged = True
            model.stop_reason = "eta"
            break
    else:
        model.stop_reason = "max_outer"

    model.centroids = centroids
    model.assignment = assignment
    model.middles = compute_middles(stack, centroids, assignment)
    return model
