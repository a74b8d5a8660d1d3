import itertools

import numpy as np
import pytest

from diarkit.errors import (
    KTooLargeError,
    NonFiniteError,
    NonSquareError,
    NotSymmetricError,
    ZeroVectorError,
)
from diarkit.linalg import (
    assignment_cost,
    cosine_similarity,
    hungarian,
    kmeans,
    kmeans_trace,
    symmetric_eig,
)
from diarkit.rng import Rng


def random_symmetric(n, seed):
    g = np.random.default_rng(seed)
    a = g.normal(size=(n, n))
    return 0.5 * (a + a.T)


class TestSymmetricEig:
    def test_identity(self):
        vals, vecs = symmetric_eig(np.eye(3))
        assert np.allclose(vals, [1.0, 1.0, 1.0])
        assert np.allclose(vecs.T @ vecs, np.eye(3), atol=1e-12)

    def test_diagonal(self):
        vals, vecs = symmetric_eig(np.diag([5.0, 2.0, -1.0]))
        assert np.allclose(vals, [5.0, 2.0, -1.0])
        # eigenvectors are a signed permutation of the standard basis
        assert np.allclose(np.abs(vecs), np.eye(3)[:, [0, 1, 2]], atol=1e-12)

    def test_reconstruction_50x50(self):
        a = random_symmetric(50, seed=7)
        vals, vecs = symmetric_eig(a)
        recon = vecs @ np.diag(vals) @ vecs.T
        assert np.abs(recon - a).max() <= 1e-8 * np.abs(a).max()

    def test_orthonormality_and_order(self):
        a = random_symmetric(80, seed=3)
        vals, vecs = symmetric_eig(a)
        assert np.abs(vecs.T @ vecs - np.eye(80)).max() <= 1e-8
        assert np.all(np.diff(vals) <= 1e-10)

    def test_matches_lapack_eigenvalues(self):
        a = random_symmetric(40, seed=12)
        vals, _ = symmetric_eig(a)
        ref = np.sort(np.linalg.eigvalsh(a))[::-1]
        assert np.abs(vals - ref).max() < 1e-9

    @pytest.mark.parametrize("n", [1, 2, 3, 17, 64])
    def test_reconstruction_sizes(self, n):
        a = random_symmetric(n, seed=100 + n)
        vals, vecs = symmetric_eig(a)
        assert np.abs(vecs @ np.diag(vals) @ vecs.T - a).max() <= 1e-8 * np.abs(a).max()

    def test_zero_matrix(self):
        vals, vecs = symmetric_eig(np.zeros((4, 4)))
        assert np.allclose(vals, 0.0)
        assert np.allclose(vecs, np.eye(4))

    def test_rejects_non_square(self):
        with pytest.raises(NonSquareError):
            symmetric_eig(np.zeros((2, 3)))

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetricError):
            symmetric_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_non_finite(self):
        a = np.eye(3)
        a[0, 1] = a[1, 0] = np.nan
        with pytest.raises(NonFiniteError):
            symmetric_eig(a)

    def test_deterministic(self):
        a = random_symmetric(30, seed=5)
        v1, e1 = symmetric_eig(a)
        v2, e2 = symmetric_eig(a)
        assert np.array_equal(v1, v2) and np.array_equal(e1, e2)


class TestKmeans:
    def test_two_separated_clusters(self):
        pts = np.array([[0.0], [0.1], [10.0], [10.1]])
        labels = kmeans(pts, 2, Rng(1))
        assert labels[0] == labels[1] and labels[2] == labels[3]
        assert labels[0] != labels[2]

    def test_k_equals_n_zero_cost(self):
        g = np.random.default_rng(2)
        pts = g.normal(size=(6, 3))
        labels, costs = kmeans_trace(pts, 6, Rng(4))
        assert sorted(labels.tolist()) == list(range(6))
        assert costs[-1] == pytest.approx(0.0, abs=1e-12)

    def test_three_blobs_match_generator(self):
        r = Rng(3)
        centers = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
        pts = np.vstack(
            [c + 0.05 * r.normal(30 * 2).reshape(30, 2) for c in centers]
        )
        truth = np.repeat([0, 1, 2], 30)
        labels = kmeans(pts, 3, Rng(3))
        # same partition up to a permutation of the label names
        mapping = {}
        for lab, t in zip(labels, truth):
            mapping.setdefault(int(lab), t)
            assert mapping[int(lab)] == t
        assert len(mapping) == 3

    def test_cost_non_increasing(self):
        g = np.random.default_rng(9)
        pts = g.normal(size=(120, 4))
        for seed in range(5):
            _, costs = kmeans_trace(pts, 7, Rng(seed))
            assert all(b <= a + 1e-9 for a, b in zip(costs, costs[1:]))

    def test_all_clusters_non_empty(self):
        g = np.random.default_rng(8)
        pts = g.normal(size=(40, 2))
        for k in (2, 5, 11):
            labels = kmeans(pts, k, Rng(k))
            assert set(labels.tolist()) == set(range(k))

    def test_identical_points(self):
        labels = kmeans(np.zeros((5, 2)), 3, Rng(0))
        assert set(labels.tolist()) == {0, 1, 2}

    def test_k_too_large(self):
        with pytest.raises(KTooLargeError):
            kmeans(np.zeros((3, 1)), 4, Rng(0))

    def test_non_finite(self):
        pts = np.full((3, 2), np.inf)
        with pytest.raises(NonFiniteError):
            kmeans(pts, 2, Rng(0))

    def test_deterministic(self):
        g = np.random.default_rng(14)
        pts = g.normal(size=(50, 3))
        a = kmeans(pts, 4, Rng(77))
        b = kmeans(pts, 4, Rng(77))
        assert np.array_equal(a, b)


def brute_force_assignment(c: np.ndarray) -> float:
    n, m = c.shape
    best = np.inf
    if n <= m:
        for perm in itertools.permutations(range(m), n):
            best = min(best, sum(c[i, perm[i]] for i in range(n)))
    else:
        for perm in itertools.permutations(range(n), m):
            best = min(best, sum(c[perm[j], j] for j in range(m)))
    return best


class TestHungarian:
    def test_diagonal_optimum(self):
        pairs = hungarian([[1.0, 2.0], [2.0, 1.0]])
        assert pairs == [(0, 0), (1, 1)]
        assert assignment_cost([[1.0, 2.0], [2.0, 1.0]], pairs) == 2.0

    def test_single_cell(self):
        assert hungarian([[5.0]]) == [(0, 0)]

    def test_random_6x6_vs_brute_force(self):
        r = Rng(11)
        c = r.integers(0, 10, 36).reshape(6, 6).astype(float)
        pairs = hungarian(c)
        assert len(pairs) == 6
        assert assignment_cost(c, pairs) == pytest.approx(brute_force_assignment(c))

    @pytest.mark.parametrize("shape", [(1, 4), (4, 1), (3, 5), (5, 3), (4, 4)])
    def test_rectangular_vs_brute_force(self, shape):
        g = np.random.default_rng(sum(shape))
        for _ in range(30):
            c = g.uniform(0, 10, size=shape)
            pairs = hungarian(c)
            assert len(pairs) == min(shape)
            rows = [i for i, _ in pairs]
            cols = [j for _, j in pairs]
            assert len(set(rows)) == len(rows) and len(set(cols)) == len(cols)
            assert assignment_cost(c, pairs) == pytest.approx(brute_force_assignment(c))

    def test_non_finite(self):
        with pytest.raises(NonFiniteError):
            hungarian([[np.nan, 1.0], [1.0, 0.0]])


class TestCosine:
    def test_parallel(self):
        assert cosine_similarity((1.0, 0.0), (1.0, 0.0)) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine_similarity((1.0, 0.0), (0.0, 1.0)) == 0.0

    def test_45_degrees(self):
        assert cosine_similarity((1.0, 1.0), (1.0, 0.0)) == 0.7071067811865475

    def test_symmetry(self):
        g = np.random.default_rng(6)
        a, b = g.normal(size=8), g.normal(size=8)
        assert cosine_similarity(a, b) == cosine_similarity(b, a)

    def test_zero_vector(self):
        with pytest.raises(ZeroVectorError):
            cosine_similarity((0.0, 0.0), (1.0, 0.0))
