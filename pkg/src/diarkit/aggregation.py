"""Attention-based aggregation: pull codes that are close in latent space
closer together using session-global context before clustering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteError


@dataclass
class AaConfig:
    enabled: bool = True
    temperature: float | None = None  # None -> sqrt(code dim)
    iterations: int = 1
    self_weight: float = 0.5

    def __post_init__(self):
        if self.temperature is not None and not self.temperature > 0.0:
            raise ValueError("temperature must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 <= self.self_weight <= 1.0:
            raise ValueError("self_weight must be in [0, 1]")


def attention_matrix(codes: np.ndarray, temperature: float) -> np.ndarray:
    """Row-stochastic self-attention weights over dot-product scores."""
    scores = codes @ codes.T / temperature
    scores -= scores.max(axis=1, keepdims=True)
    w = np.exp(scores)
    return w / w.sum(axis=1, keepdims=True)


def attention_aggregate(codes, cfg: AaConfig) -> np.ndarray:
    """One or more residual self-attention passes over the code rows.

    out = self_weight * codes + (1 - self_weight) * softmax(C C^T / T) C,
    repeated ``cfg.iterations`` times. Disabled config returns the input
    unchanged (a copy).
    """
    x = np.asarray(codes, dtype=np.float64).copy()
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("codes must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("codes contain non-finite values")
    if not cfg.enabled:
        return x
    temp = cfg.temperature if cfg.temperature is not None else float(np.sqrt(x.shape[1]))
    for _ in range(cfg.iterations):
        attn = attention_matrix(x, temp)
        x = cfg.self_weight * x + (1.0 - cfg.self_weight) * attn @ x
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("aggregation produced non-finite values")
    return x
