"""Comparison methods: per-matrix truncated SVD and K-means followed by GLRAM."""
import numpy as np

from .cluster import ClusterModel, compute_middles, wcssre
from .errors import UnknownMethod
from .glram import IterationConfig, MatrixStack, ProjectorPair, glram_fit
from .kmeans import kmeans_fit
from .linalg import check_rank

METHODS = ("svd", "glram", "kmeans_glram", "cglram")


def storage_count(method, N, K, k, r, c):
    """Number of stored reals for a compressed stack.

    Every method keeps N middle matrices of size k x k; they differ in how
    many projector pairs (each ``k * (r + c)`` numbers) they keep: N for
    per-matrix SVD, K for the clustered methods, one for GLRAM.
    """
    for name, v in (("N", N), ("K", K), ("k", k), ("r", r), ("c", c)):
        if int(v) < 1:
            raise ValueError(f"{name} must be positive, got {v}")
    pairs = {"svd": N, "cglram": K, "kmeans_glram": K, "glram": 1}
    try:
        n_pairs = pairs[method]
    except KeyError:
        raise UnknownMethod(f"unknown method {method!r}") from None
    return N * k * k + n_pairs * k * (r + c)


def svd_model(stack, k):
    """Per-sample rank-k truncated SVD as a model with one cluster per sample."""
    check_rank(k, stack.r, stack.c)
    U, s, Vt = np.linalg.svd(stack.samples, full_matrices=False)
    pairs = [ProjectorPair(U[i, :, :k], Vt[i, :k, :].T) for i in range(stack.N)]
    assignment = np.arange(stack.N, dtype=np.int64)
    model = ClusterModel(K=stack.N, centroids=pairs, assignment=assignment,
                         middles=compute_middles(stack, pairs, assignment),
                         converged=True, stop_reason="closed_form")
    tail = s[:, k:]
    model.wcssre_history.append(float(np.sum(tail * tail)))
    return model


def svd_baseline(stack, k):
    """``(total_error_sq, storage)`` of rank-k truncation applied to each sample."""
    if not isinstance(stack, MatrixStack):
        stack = MatrixStack(stack)
    check_rank(k, stack.r, stack.c)
    s = np.linalg.svd(stack.samples, compute_uv=False)
    tail = s[:, k:]
    return float(np.sum(tail * tail)), storage_count("svd", stack.N, stack.N, k, stack.r, stack.c)


def glram_model(stack, k, cfg=None):
    """Plain GLRAM wrapped as a single-cluster model."""
    pair, comp, trace = glram_fit(stack, k, cfg)
    model = ClusterModel(K=1, centroids=[pair], assignment=np.zeros(stack.N, dtype=np.int64),
                         middles=comp.middles, inner_iterations=trace.iterations,
                         converged=trace.converged, stop_reason="glram")
    model.wcssre_history.append(wcssre(stack, model))
    return model


def kmeans_glram(stack, K, k, seed=0, kmeans_cfg=None, glram_cfg=None):
    """Cluster vectorized samples with K-means, then fit GLRAM inside each cluster.

    There is no reassignment afterwards, so the history has one entry.
    """
    if not isinstance(stack, MatrixStack):
        stack = MatrixStack(stack)
    check_rank(k, stack.r, stack.c)
    clustering = kmeans_fit(stack, K, seed=seed, cfg=kmeans_cfg)
    assignment = clustering.assignment
    pairs = []
    iters = 0
    for j in range(K):
        pair, _, trace = glram_fit(stack.subset(np.flatnonzero(assignment == j)), k,
                                   glram_cfg or IterationConfig())
        pairs.append(pair)
        iters += trace.iterations
    model = ClusterModel(K=K, centroids=pairs, assignment=assignment,
                         middles=compute_middles(stack, pairs, assignment),
                         outer_iterations=clustering.iterations, inner_iterations=iters,
                         converged=clustering.converged, stop_reason="kmeans")
    model.wcssre_history.append(wcssre(stack, model))
    return model
