"""Dense numerical primitives: symmetric eigendecomposition, k-means,
Hungarian assignment, cosine similarity.

Matrices are 2-D float64 numpy arrays (row-major).  Everything here is a
pure function of its inputs; randomized routines take an explicit Rng.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    KTooLargeError,
    NonFiniteError,
    NonSquareError,
    NotSymmetricError,
    ZeroVectorError,
)
from .rng import Rng

_SYM_RTOL = 1e-9
_JACOBI_OFF_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 100
_KMEANS_MAX_ITER = 300


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise NonSquareError(f"expected a 2-D matrix, got ndim={m.ndim}")
    return m


def _jacobi_rounds(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Round-robin schedule: n-1 rounds of disjoint index pairs covering
    every (p, q) with p < q exactly once per sweep (dummy-padded if odd)."""
    players = list(range(n))
    if n % 2 == 1:
        players.append(-1)
    m = len(players)
    rounds = []
    arr = players[:]
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a_, b_ = arr[i], arr[m - 1 - i]
            if a_ < 0 or b_ < 0:
                continue
            ps.append(min(a_, b_))
            qs.append(max(a_, b_))
        rounds.append((np.array(ps, dtype=np.int64), np.array(qs, dtype=np.int64)))
        arr = [arr[0]] + [arr[-1]] + arr[1:-1]
    return rounds


def symmetric_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues sorted descending, eigenvector matrix with
    orthonormal columns, column i pairing with eigenvalue i).

    Rotations are scheduled round-robin so each round applies n/2 disjoint
    plane rotations at once (vectorized; numerically identical to applying
    them sequentially since the planes do not interact).  Convergence:
    off-diagonal Frobenius norm below 1e-12 times the matrix Frobenius
    norm, or 100 sweeps.
    """
    m = _as_matrix(a)
    n, ncols = m.shape
    if n != ncols:
        raise NonSquareError(f"matrix is {n}x{ncols}, not square")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("matrix contains non-finite entries")
    scale = np.abs(m).max()
    if scale > 0.0 and np.abs(m - m.T).max() > _SYM_RTOL * scale:
        raise NotSymmetricError("matrix is not symmetric within 1e-9 relative tolerance")

    work = 0.5 * (m + m.T)  # exact symmetry for the rotation loop
    vecs = np.eye(n)
    if n == 1:
        return work.diagonal().copy(), vecs

    norm = np.linalg.norm(work)
    if norm == 0.0:
        return np.zeros(n), vecs
    off_target = _JACOBI_OFF_TOL * norm
    rounds = _jacobi_rounds(n)
    diag_idx = np.arange(n)

    for _ in range(_JACOBI_MAX_SWEEPS):
        off_sq = work.copy()
        off_sq[diag_idx, diag_idx] = 0.0
        off = np.linalg.norm(off_sq)
        if off < off_target:
            break
        # pivots below 1% of the entering off-norm (spread over n) cannot
        # stall convergence; leaving them saves late-sweep churn
        sweep_skip = max(off_target / n, 0.01 * off / n)
        for ps, qs in rounds:
            apq = work[ps, qs]
            active = np.abs(apq) > sweep_skip
            if not np.any(active):
                continue
            app = work[ps, ps]
            aqq = work[qs, qs]
            apq_safe = np.where(active, apq, 1.0)
            tau = (aqq - app) / (2.0 * apq_safe)
            root = np.sqrt(1.0 + tau * tau)
            with np.errstate(divide="ignore"):  # unused where-branch may hit 1/0
                t = np.where(tau >= 0.0, 1.0 / (tau + root), 1.0 / (tau - root))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            c = np.where(active, c, 1.0)
            s = np.where(active, s, 0.0)
            cc = c[:, None]
            ss = s[:, None]
            wp = work[ps]
            wq = work[qs]
            work[ps] = cc * wp - ss * wq
            work[qs] = ss * wp + cc * wq
            wp = work[:, ps]
            wq = work[:, qs]
            work[:, ps] = c * wp - s * wq
            work[:, qs] = s * wp + c * wq
            work[ps[active], qs[active]] = 0.0
            work[qs[active], ps[active]] = 0.0
            vp = vecs[:, ps]
            vq = vecs[:, qs]
            vecs[:, ps] = c * vp - s * vq
            vecs[:, qs] = s * vp + c * vq

    vals = work.diagonal().copy()
    order = np.argsort(-vals, kind="stable")
    return vals[order], vecs[:, order]


def kmeans(points, k: int, rng: Rng) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding; returns labels in [0, k).

    Ties in the nearest-centroid assignment break toward the lowest cluster
    index; an empty cluster is repaired by moving the point farthest from
    its current centroid into it.  Stops at an assignment fixpoint or after
    300 iterations.
    """
    labels, _ = kmeans_trace(points, k, rng)
    return labels


def kmeans_trace(points, k: int, rng: Rng) -> tuple[np.ndarray, list[float]]:
    """kmeans plus the per-iteration cost sequence (for monotonicity checks)."""
    x = _as_matrix(points)
    n = x.shape[0]
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("points contain non-finite entries")
    if not 1 <= k <= n:
        raise KTooLargeError(f"k={k} outside [1, {n}]")

    centroids = x[_kmeanspp_indices(x, k, rng)].copy()
    labels = None
    costs: list[float] = []
    for _ in range(_KMEANS_MAX_ITER):
        d2 = _sq_dists(x, centroids)
        new_labels = np.argmin(d2, axis=1)  # argmin takes the lowest index on ties
        for empty in range(k):
            if np.any(new_labels == empty):
                continue
            # repair: move the farthest point whose cluster can spare it
            counts = np.bincount(new_labels, minlength=k)
            assigned = d2[np.arange(n), new_labels]
            movable = np.where(counts[new_labels] >= 2, assigned, -np.inf)
            new_labels[int(np.argmax(movable))] = empty
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            centroids[j] = x[labels == j].mean(axis=0)
        # cost under the freshly updated centroids: provably non-increasing
        d2 = _sq_dists(x, centroids)
        costs.append(float(d2[np.arange(n), labels].sum()))
    return labels, costs


def _sq_dists(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (n, k) squared euclidean distances, clipped at 0 against rounding
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * x @ centroids.T
        + np.sum(centroids * centroids, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp_indices(x: np.ndarray, k: int, rng: Rng) -> list[int]:
    n = x.shape[0]
    first = rng.integers(0, n)
    chosen = [int(first)]
    d2 = _sq_dists(x, x[[first]])[:, 0]
    for _ in range(1, k):
        if d2.sum() <= 0.0:
            # all remaining points coincide with a centroid: take the
            # lowest-index unchosen point for determinism
            taken = set(chosen)
            nxt = next(i for i in range(n) if i not in taken)
        else:
            nxt = rng.choice_weighted(d2)
        chosen.append(int(nxt))
        d2 = np.minimum(d2, _sq_dists(x, x[[nxt]])[:, 0])
    return chosen


def hungarian(cost) -> list[tuple[int, int]]:
    """Minimum-cost one-to-one assignment of size min(n, m).

    Potentials-based shortest augmenting path algorithm; O(n^2 m) after
    transposing so rows <= cols.  Returns (row, col) pairs sorted by row.
    """
    c = _as_matrix(cost)
    if not np.all(np.isfinite(c)):
        raise NonFiniteError("cost matrix contains non-finite entries")
    if c.size == 0:
        return []
    transposed = c.shape[0] > c.shape[1]
    if transposed:
        c = c.T
    n, m = c.shape

    INF = np.inf
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=np.int64)  # p[j] = row matched to col j (1-based, 0 = free)
    way = np.zeros(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, INF)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            cur = c[i0 - 1] - u[i0] - v[1:]
            better = cur < minv[1:]
            minv[1:] = np.where(better, cur, minv[1:])
            way[1:][better] = j0
            masked = np.where(used[1:], INF, minv[1:])
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[1:][~used[1:]] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    pairs = [(int(p[j]) - 1, j - 1) for j in range(1, m + 1) if p[j] != 0]
    if transposed:
        pairs = [(col, row) for row, col in pairs]
    return sorted(pairs)


def assignment_cost(cost, pairs: list[tuple[int, int]]) -> float:
    c = _as_matrix(cost)
    return float(sum(c[i, j] for i, j in pairs))


def cosine_similarity(a, b) -> float:
    """Cosine similarity of two vectors; raises on zero vectors."""
    av = np.asarray(a, dtype=np.float64).ravel()
    bv = np.asarray(b, dtype=np.float64).ravel()
    na = np.linalg.norm(av)
    nb = np.linalg.norm(bv)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity undefined for zero vectors")
    return float(np.dot(av, bv) / (na * nb))
