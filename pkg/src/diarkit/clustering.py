"""Spectral clustering of speaker codes.

Affinity is cosine similarity clipped at zero.  The speaker count is the
number of eigenvalues above a threshold relative to the largest one; the
matching eigenvectors form the spectral embedding that k-means labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroVectorError
from .linalg import kmeans, symmetric_eig
from .rng import Rng


@dataclass
class ClusterConfig:
    eigen_threshold: float = 0.25
    max_speakers: int = 20
    min_speakers: int = 1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.eigen_threshold < 1.0:
            raise ValueError("eigen_threshold must be in (0, 1)")
        if self.min_speakers < 1 or self.min_speakers > self.max_speakers:
            raise ValueError("need 1 <= min_speakers <= max_speakers")


def build_affinity(codes) -> np.ndarray:
    """Pairwise cosine similarity clipped at 0, unit diagonal."""
    x = np.asarray(codes, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVectorError("affinity undefined: zero code row")
    unit = x / norms[:, None]
    a = unit @ unit.T
    a = np.clip(a, 0.0, None)
    a = 0.5 * (a + a.T)
    np.fill_diagonal(a, 1.0)
    return a


def count_above_threshold(eigenvalues: np.ndarray, cfg: ClusterConfig, n: int) -> int:
    top = eigenvalues[0]
    count = int(np.sum(eigenvalues / top > cfg.eigen_threshold)) if top > 0 else 1
    return min(max(count, cfg.min_speakers), cfg.max_speakers, n)


def estimate_num_speakers(affinity, cfg: ClusterConfig) -> int:
    """Count eigenvalues above ``eigen_threshold`` relative to the largest,
    clamped to [min_speakers, min(max_speakers, n)]."""
    a = np.asarray(affinity, dtype=np.float64)
    vals, _ = symmetric_eig(a)
    return count_above_threshold(vals, cfg, a.shape[0])


def spectral_cluster(codes, cfg: ClusterConfig) -> tuple[np.ndarray, int]:
    """Cluster code rows; returns (labels, estimated speaker count)."""
    x = np.asarray(codes, dtype=np.float64)
    affinity = build_affinity(x)
    vals, vecs = symmetric_eig(affinity)
    k = count_above_threshold(vals, cfg, affinity.shape[0])
    emb = vecs[:, :k].copy()
    norms = np.linalg.norm(emb, axis=1)
    nz = norms > 0.0
    emb[nz] /= norms[nz, None]
    labels = kmeans(emb, k, Rng(cfg.seed))
    return labels, k
