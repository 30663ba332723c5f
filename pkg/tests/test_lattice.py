from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_d2, brute_force_d3
from weylflat import lattice, lie
from weylflat.lattice import EnumConfig


def near_origin(rng, d: int, radius: float) -> np.ndarray:
    """exp of a traceless symmetric matrix: a basepoint at distance `radius` from o."""
    s = rng.normal(size=(d, d))
    s = s + s.T
    s -= np.trace(s) / d * np.eye(d)
    w, v = np.linalg.eigh(s)
    w = w / np.linalg.norm(w) * radius
    return (v * np.exp(w)) @ v.T


def as_set(config: EnumConfig) -> set[tuple[int, ...]]:
    return {tuple(m.ravel().tolist()) for m in lattice.enumerate_array(config)}


def test_tiny_ball_is_the_integral_rotations():
    got = as_set(EnumConfig(2, 1e-6))
    assert got == {(1, 0, 0, 1), (-1, 0, 0, -1), (0, -1, 1, 0), (0, 1, -1, 0)}


@pytest.mark.parametrize("t", [0.5, 1.5, 2.2, 3.0])
def test_d2_matches_brute_force(t):
    assert as_set(EnumConfig(2, t)) == brute_force_d2(t)


@pytest.mark.parametrize("t", [0.8, 1.5])
def test_d3_matches_brute_force(t):
    assert as_set(EnumConfig(3, t)) == brute_force_d3(t)


def test_d2_off_basepoint_matches_brute_force():
    hx = np.array([[1.3, 0.4], [0.2, 0.83]])
    hx = hx / math.sqrt(np.linalg.det(hx))
    assert as_set(EnumConfig(2, 2.5, basepoint=hx)) == brute_force_d2(2.5, hx)


def test_canonical_order_and_exact_determinants():
    arr = lattice.enumerate_array(EnumConfig(3, 1.2))
    flat = [tuple(m.ravel()) for m in arr]
    assert flat == sorted(flat)
    dets = np.rint(np.linalg.det(arr.astype(float))).astype(int)
    assert np.all(dets == 1)


@pytest.mark.parametrize("d,t", [(2, 5.0), (3, 1.3)])
def test_shards_partition_the_output(d, t):
    whole = sorted(tuple(m.ravel()) for m in lattice.enumerate_array(EnumConfig(d, t)))
    parts = []
    for k in range(3):
        parts += [tuple(m.ravel()) for m in lattice.enumerate_array(EnumConfig(d, t, shard=k, shards=3))]
    assert sorted(parts) == whole


@pytest.mark.parametrize("d,t", [(2, 6.0), (3, 1.5)])
def test_closed_under_inverse(d, t):
    mats = lattice.enumerate_array(EnumConfig(d, t))
    got = {tuple(m.ravel()) for m in mats}
    for m in mats:
        inv = np.rint(np.linalg.inv(m.astype(float))).astype(np.int64)
        assert tuple(inv.ravel()) in got


def test_strip_counts_partition_and_decay():
    fracs = []
    for t in (6.0, 8.0, 10.0):
        c = lattice.count_strip(EnumConfig(2, t, strip=0.1 * t))
        assert c.total == len(lattice.enumerate_array(EnumConfig(2, t)))
        assert 0 < c.regular <= c.total and c.strip < c.total
        fracs.append(c.strip / c.total)
    assert fracs[0] > fracs[1] > fracs[2]


def test_counts_off_basepoint_bracketed_by_shifted_origin_counts():
    rng = np.random.default_rng(3)
    for _ in range(3):
        hx = near_origin(rng, 2, 0.4)
        r = 2 * lie.dX(np.eye(2), hx)
        assert r == pytest.approx(0.8)
        t = 6.0
        mid = lattice.count_strip(EnumConfig(2, t, basepoint=hx)).total
        lo = lattice.count_strip(EnumConfig(2, max(t - r, 1e-6))).total
        hi = lattice.count_strip(EnumConfig(2, t + r)).total
        assert lo <= mid <= hi


def test_congruence_level_filters():
    full = lattice.enumerate_array(EnumConfig(2, 4.0))
    sub = lattice.enumerate_array(EnumConfig(2, 4.0, level=3))
    expect = [m for m in full if np.all((m - np.eye(2, dtype=np.int64)) % 3 == 0)]
    assert sorted(map(lambda m: tuple(m.ravel()), sub)) == sorted(map(lambda m: tuple(m.ravel()), expect))


def test_entry_bound_refused():
    with pytest.raises(lattice.EnumerationBoundError):
        lattice.count_strip(EnumConfig(3, 40.0))


def test_log_count_slope():
    slope, counts = lattice.log_count_slope([8.0, 9.0, 10.0, 11.0])
    assert 1.30 <= slope <= 1.55
    assert counts == sorted(counts)


def test_angular_examples():
    res = lattice.angular_statistic(EnumConfig(2, 8.0), ("one", "cos2_plus"))
    # psi = 1 is the regular count over the volume
    from weylflat import volume
    assert res.empirical[0] == pytest.approx(res.regular_count / volume.vol_Dt(8.0, 2))
    assert res.reference[1] == 0.0
    assert lattice.angular_statistic_callable(EnumConfig(2, 3.0), lambda a, b: 0.0) == 0.0


def test_angular_fast_path_matches_generic_path():
    cfg = EnumConfig(2, 4.0)
    fast = lattice.angular_statistic(cfg, ("cos2_plus", "cos4_minus"))

    def angle(f):
        return math.atan2(f.frame[1, 0], f.frame[0, 0])

    slow_plus = lattice.angular_statistic_callable(cfg, lambda p, m: math.cos(2 * angle(p)))
    slow_minus = lattice.angular_statistic_callable(cfg, lambda p, m: math.cos(4 * angle(m)))
    assert fast.empirical[0] == pytest.approx(slow_plus, abs=1e-9)
    assert fast.empirical[1] == pytest.approx(slow_minus, abs=1e-9)


def test_normalized_count_bounded():
    vals = [lattice.angular_statistic(EnumConfig(2, t), ("one",)).empirical[0] for t in (6.0, 8.0, 10.0)]
    assert max(vals) < 2 * min(vals)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_off_basepoint_membership_exact(seed):
    hx = near_origin(np.random.default_rng(seed), 2, 0.6)
    mats = lattice.enumerate_array(EnumConfig(2, 3.0, basepoint=hx))
    for m in mats:
        assert np.linalg.norm(lie.a_x(m.astype(float), hx)) <= 3.0 + 1e-9
