import numpy as np
import pytest

from diarkit.aggregation import AaConfig, attention_aggregate, attention_matrix
from diarkit.errors import NonFiniteError


def unit(v):
    return v / np.linalg.norm(v)


def test_single_row_is_identity():
    x = np.array([[1.0, 2.0, 3.0]])
    out = attention_aggregate(x, AaConfig())
    assert np.allclose(out, x)


def test_identical_rows_are_fixpoint():
    x = np.tile([0.3, -0.7, 1.1], (5, 1))
    out = attention_aggregate(x, AaConfig())
    assert np.allclose(out, x, atol=1e-12)


def test_disabled_is_identity():
    g = np.random.default_rng(1)
    x = g.normal(size=(7, 4))
    out = attention_aggregate(x, AaConfig(enabled=False))
    assert np.array_equal(out, x)


def test_attention_rows_sum_to_one():
    g = np.random.default_rng(2)
    x = g.normal(size=(9, 5))
    attn = attention_matrix(x, temperature=np.sqrt(5.0))
    assert np.allclose(attn.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(attn >= 0.0)


def test_two_clusters_tighten():
    # two well-separated clusters of near-duplicate unit rows: one pass must
    # not decrease within-cluster cosine similarity
    e1 = np.zeros(8)
    e1[0] = 1.0
    e2 = np.zeros(8)
    e2[4] = 1.0
    jitter = np.zeros(8)
    jitter[1] = 0.1
    rows = np.array([unit(e1 + jitter), unit(e1 - jitter), unit(e2 + jitter), unit(e2 - jitter)])
    cfg = AaConfig(temperature=0.5)
    out = attention_aggregate(rows, cfg)

    def within_cos(m):
        a = unit(m[0]) @ unit(m[1])
        b = unit(m[2]) @ unit(m[3])
        return min(a, b)

    assert within_cos(out) >= within_cos(rows) - 1e-12


def test_permutation_equivariance():
    g = np.random.default_rng(5)
    x = g.normal(size=(11, 6))
    cfg = AaConfig(temperature=1.0, iterations=2)
    perm = g.permutation(11)
    out_perm = attention_aggregate(x[perm], cfg)
    out = attention_aggregate(x, cfg)
    assert np.allclose(out_perm, out[perm], atol=1e-12)


def test_iterations_compose():
    g = np.random.default_rng(6)
    x = g.normal(size=(5, 3))
    once = attention_aggregate(x, AaConfig(temperature=1.0, iterations=1))
    twice = attention_aggregate(once, AaConfig(temperature=1.0, iterations=1))
    both = attention_aggregate(x, AaConfig(temperature=1.0, iterations=2))
    assert np.allclose(twice, both, atol=1e-12)


def test_self_weight_one_is_identity():
    g = np.random.default_rng(7)
    x = g.normal(size=(6, 4))
    out = attention_aggregate(x, AaConfig(self_weight=1.0))
    assert np.allclose(out, x)


def test_rejects_non_finite():
    x = np.array([[np.inf, 0.0]])
    with pytest.raises(NonFiniteError):
        attention_aggregate(x, AaConfig())


def test_row_count_preserved():
    g = np.random.default_rng(8)
    x = g.normal(size=(13, 2))
    assert attention_aggregate(x, AaConfig()).shape == (13, 2)


def test_config_validation():
    with pytest.raises(ValueError):
        AaConfig(temperature=0.0)
    with pytest.raises(ValueError):
        AaConfig(iterations=0)
    with pytest.raises(ValueError):
        AaConfig(self_weight=1.5)
