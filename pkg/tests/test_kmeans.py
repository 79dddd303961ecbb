import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cglram import MatrixStack, kmeans_fit, variance_decomposition
from cglram.errors import TooManyClusters
from cglram.kmeans import vectorize


def scalars(values):
    return MatrixStack(np.asarray(values, dtype=float).reshape(-1, 1, 1))


def best_agreement(a, b):
    ka, kb = int(a.max()) + 1, int(b.max()) + 1
    return max(np.mean(np.array(perm)[a] == b)
               for perm in itertools.permutations(range(max(ka, kb)), ka))


def brute_sums(X, a):
    """SST, SSE, SSB by explicit loops over samples and coordinates."""
    n, d = X.shape
    mu = [sum(X[i, l] for i in range(n)) / n for l in range(d)]
    sst = sum((X[i, l] - mu[l]) ** 2 for i in range(n) for l in range(d))
    sse = ssb = 0.0
    for j in set(a.tolist()):
        members = [i for i in range(n) if a[i] == j]
        mj = [sum(X[i, l] for i in members) / len(members) for l in range(d)]
        sse += sum((X[i, l] - mj[l]) ** 2 for i in members for l in range(d))
        ssb += len(members) * sum((mj[l] - mu[l]) ** 2 for l in range(d))
    return sst, sse, ssb


def test_vectorize_is_column_major():
    A = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    np.testing.assert_array_equal(vectorize(MatrixStack(A))[0], [1, 4, 2, 5, 3, 6])


@pytest.mark.parametrize("seed", range(6))
def test_four_points(seed):
    stack = scalars([0, 1, 10, 11])
    res = kmeans_fit(stack, 2, seed=seed)
    groups = {tuple(sorted(np.flatnonzero(res.assignment == j))) for j in range(2)}
    assert groups == {(0, 1), (2, 3)}
    np.testing.assert_allclose(sorted(res.centroids.ravel()), [0.5, 10.5])
    assert res.sse_history[-1] == pytest.approx(1.0, abs=1e-12)
    sst, sse, ssb = variance_decomposition(stack, res)
    assert (sst, sse, ssb) == pytest.approx((101.0, 1.0, 100.0), abs=1e-12)


def test_k_equals_n_singletons(rng):
    stack = MatrixStack(rng.standard_normal((6, 2, 3)))
    res = kmeans_fit(stack, 6, seed=1)
    assert sorted(res.assignment) == list(range(6))
    assert res.sse_history[-1] == 0.0


def test_blobs_recovered():
    rng = np.random.default_rng(5)
    centers = np.array([0.0, 10.0])
    labels = np.repeat([0, 1], 25)
    X = centers[labels][:, None, None] + rng.standard_normal((50, 2, 2))
    stack = MatrixStack(X, labels)
    for seed in range(3):
        res = kmeans_fit(stack, 2, seed=seed)
        assert best_agreement(res.assignment, labels) == 1.0


def test_errors(rng):
    stack = MatrixStack(rng.standard_normal((3, 2, 2)))
    with pytest.raises(TooManyClusters):
        kmeans_fit(stack, 4)
    with pytest.raises(TooManyClusters):
        kmeans_fit(stack, 0)


def test_single_cluster_decomposition(rng):
    stack = MatrixStack(rng.standard_normal((9, 3, 2)))
    res = kmeans_fit(stack, 1)
    sst, sse, ssb = variance_decomposition(stack, res)
    assert ssb == pytest.approx(0.0, abs=1e-12)
    assert sst == pytest.approx(sse, rel=1e-12)


def test_duplicate_points_empty_cluster_repair():
    # three identical points and one other: some seeds pick two equal centroids
    stack = scalars([1, 1, 1, 5])
    for seed in range(10):
        res = kmeans_fit(stack, 3, seed=seed)
        assert set(res.assignment.tolist()) == {0, 1, 2}
        assert np.all(np.diff(res.sse_history) <= 1e-9)


@given(st.integers(2, 25), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_lloyd_invariants(N, K, seed):
    K = min(K, N)
    rng = np.random.default_rng(seed)
    stack = MatrixStack(rng.standard_normal((N, 2, 2)) + rng.integers(0, 3, N)[:, None, None] * 5)
    res = kmeans_fit(stack, K, seed=seed)
    a = res.assignment
    assert a.shape == (N,) and a.min() >= 0 and a.max() < K
    assert set(a.tolist()) == set(range(K))
    assert all(b <= x + 1e-9 for x, b in zip(res.sse_history, res.sse_history[1:]))
    X = vectorize(stack)
    for j in range(K):
        np.testing.assert_allclose(res.centroids[j], X[a == j].mean(axis=0), atol=1e-10)
    sst, sse, ssb = variance_decomposition(stack, res)
    assert abs(sst - sse - ssb) <= 1e-10 * max(sst, 1e-300)


def test_decomposition_matches_brute_force(rng):
    stack = MatrixStack(rng.standard_normal((12, 2, 3)))
    a = rng.integers(0, 3, 12)
    got = variance_decomposition(stack, a)
    ref = brute_sums(vectorize(stack), a)
    np.testing.assert_allclose(got, ref, rtol=1e-12)
    assert abs(got[0] - got[1] - got[2]) / got[0] < 1e-10


@given(st.integers(0, 2**32 - 1))
def test_mean_minimizes_squared_distance(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((7, 4))
    mu = X.mean(axis=0)
    base = np.sum((X - mu) ** 2)
    for _ in range(20):
        x = mu + rng.standard_normal(4) * rng.uniform(1e-3, 3)
        assert np.sum((X - x) ** 2) >= base
