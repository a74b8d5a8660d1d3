import numpy as np

from diarkit.rng import Rng, mix_seed


def test_same_seed_same_stream():
    a = Rng(123).u64(100)
    b = Rng(123).u64(100)
    assert np.array_equal(a, b)


def test_different_seeds_differ():
    a = Rng(1).u64(64)
    b = Rng(2).u64(64)
    assert not np.array_equal(a, b)


def test_stream_depends_on_counter_not_call_shape():
    r1 = Rng(9)
    chunks = np.concatenate([r1.u64(3), r1.u64(5)])
    r2 = Rng(9)
    assert np.array_equal(chunks, r2.u64(8))


def test_uniform_range_and_mean():
    u = Rng(7).random(20000)
    assert np.all(u >= 0.0) and np.all(u < 1.0)
    assert abs(u.mean() - 0.5) < 0.01
    assert abs(u.var() - 1.0 / 12.0) < 0.005


def test_normal_moments():
    z = Rng(11).normal(20000)
    assert abs(z.mean()) < 0.03
    assert abs(z.std() - 1.0) < 0.03


def test_integers_in_range():
    v = Rng(5).integers(2, 9, 1000)
    assert v.min() >= 2 and v.max() < 9
    assert set(np.unique(v)) == set(range(2, 9))


def test_permutation_is_permutation():
    p = Rng(3).permutation(50)
    assert sorted(p.tolist()) == list(range(50))


def test_spawn_streams_independent():
    base = Rng(42)
    a = base.spawn(1).u64(32)
    b = base.spawn(2).u64(32)
    assert not np.array_equal(a, b)
    # spawning does not advance the parent
    assert np.array_equal(Rng(42).u64(4), base.u64(4))


def test_mix_seed_deterministic():
    assert mix_seed(10, 3) == mix_seed(10, 3)
    assert mix_seed(10, 3) != mix_seed(10, 4)


def test_choice_weighted_degenerate():
    r = Rng(0)
    assert r.choice_weighted(np.zeros(4)) == 0
    assert r.choice_weighted(np.array([0.0, 0.0, 1.0])) == 2


def test_choice_weighted_distribution():
    r = Rng(17)
    w = np.array([1.0, 3.0])
    picks = np.array([r.choice_weighted(w) for _ in range(4000)])
    assert abs(picks.mean() - 0.75) < 0.03
