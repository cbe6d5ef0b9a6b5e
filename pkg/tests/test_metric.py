import numpy as np
import pytest
from oracles import metric_bruteforce

from utphd import metric
from utphd.core import TrajectoryEstimate
from utphd.metric import rms_tm, trajectory_metric


def track(birth, xy):
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    return TrajectoryEstimate(birth, len(xy), np.hstack([xy, np.zeros_like(xy)]))


def random_set(rng, n, k, spread=12.0, noise=4.0):
    out = []
    for _ in range(n):
        b = int(rng.integers(1, k + 1))
        L = int(rng.integers(1, k - b + 2))
        base = rng.uniform(0, spread, 2)
        out.append(track(b, base + rng.normal(0, noise, (L, 2))))
    return out


def test_identity_and_empty_cases():
    X = [track(1, [[0, 0], [1, 1]]), track(2, [[5, 5]])]
    assert trajectory_metric(X, X, k=2).total == 0.0
    r = trajectory_metric([], [track(1, [[0, 0]])], k=1)
    assert r.total == pytest.approx(np.sqrt(50))
    assert r.missed == pytest.approx(np.sqrt(50)) and r.false_ == 0 and r.localization == 0
    assert trajectory_metric([], [], k=3).total == 0.0


def test_switch_is_charged():
    # the estimate hops from one truth to the other between scans 2 and 3
    Y = [track(1, [[0, 0]] * 4), track(1, [[8, 0]] * 4)]
    X = [track(1, [[0, 0], [0, 0], [8, 0], [8, 0]]), track(1, [[8, 0], [8, 0], [0, 0], [0, 0]])]
    r = trajectory_metric(X, Y, k=4)
    assert r.switch_ == pytest.approx(np.sqrt(2.0))
    assert r.total == pytest.approx(np.sqrt(2.0))


@pytest.mark.parametrize("method", ["dp", "lp"])
def test_matches_bruteforce(method):
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(200):
        k = int(rng.integers(1, 5))
        X = random_set(rng, int(rng.integers(0, 4)), k)
        Y = random_set(rng, int(rng.integers(0, 4)), k)
        worst = max(worst, abs(trajectory_metric(X, Y, k=k, method=method).total
                               - metric_bruteforce(X, Y, k)))
    assert worst <= 1e-9


def test_decomposition_and_symmetry():
    rng = np.random.default_rng(1)
    for _ in range(100):
        k = int(rng.integers(1, 6))
        X = random_set(rng, int(rng.integers(0, 5)), k)
        Y = random_set(rng, int(rng.integers(0, 5)), k)
        r = trajectory_metric(X, Y, k=k)
        parts = r.localization**2 + r.missed**2 + r.false_**2 + r.switch_**2
        assert parts == pytest.approx(r.total**2, rel=1e-9, abs=1e-12)
        assert trajectory_metric(Y, X, k=k).total == pytest.approx(r.total, abs=1e-9)


def test_triangle_inequality():
    rng = np.random.default_rng(2)
    for _ in range(100):
        k = int(rng.integers(1, 4))
        A, B, C = (random_set(rng, int(rng.integers(0, 3)), k) for _ in range(3))
        ab = trajectory_metric(A, B, k=k).total
        bc = trajectory_metric(B, C, k=k).total
        ac = trajectory_metric(A, C, k=k).total
        assert ac <= ab + bc + 1e-9


def test_adding_false_estimate_never_decreases():
    rng = np.random.default_rng(3)
    for _ in range(50):
        k = int(rng.integers(1, 5))
        X = random_set(rng, int(rng.integers(0, 3)), k)
        Y = random_set(rng, int(rng.integers(0, 3)), k)
        base = trajectory_metric(X, Y, k=k).total
        # false: farther than the cutoff from every true position
        extra = X + [track(int(rng.integers(1, k + 1)), rng.uniform(500, 600, (1, 2)))]
        assert trajectory_metric(extra, Y, k=k).total >= base - 1e-12


def test_large_component_falls_back_to_integer_program(monkeypatch):
    rng = np.random.default_rng(4)
    X = random_set(rng, 6, 8, spread=6, noise=2)
    Y = random_set(rng, 5, 8, spread=6, noise=2)
    dp = trajectory_metric(X, Y, k=8, method="dp").total
    monkeypatch.setattr(metric, "DP_LIMIT", 3)
    assert trajectory_metric(X, Y, k=8).total == pytest.approx(dp, abs=1e-9)


def test_rejects_unknown_method():
    with pytest.raises(ValueError):
        trajectory_metric([], [], k=1, method="greedy")


def test_rms_tm():
    assert rms_tm([16.0], 4) == 2.0
    assert rms_tm([0.0, 0.0], 3) == 0.0
    assert rms_tm([9.0, 25.0], 1) == pytest.approx(np.sqrt(17))
    with pytest.raises(ValueError):
        rms_tm([], 1)
