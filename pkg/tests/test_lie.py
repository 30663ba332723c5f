from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weylflat import lie

seeds = st.integers(0, 2**32 - 1)


def test_rho_coefficients():
    assert np.allclose(lie.rho_vector(2), [0.5, -0.5])
    assert np.allclose(lie.rho_vector(3), [1.0, 0.0, -1.0])
    # rho(v) = sum_{i<j} (v_i - v_j) / 2
    v = np.array([3.0, 1.0, -4.0])
    assert lie.rho(v) == pytest.approx(((3 - 1) + (3 + 4) + (1 + 4)) / 2)


def test_chi_round_trip_and_roots():
    v = lie.cartan_vector([2.0, 0.5, -1.0, 7.0])
    assert abs(v.sum()) < 1e-15
    assert np.allclose(lie.from_chi(lie.chi_all(v)), v)
    assert lie.alpha_i(v, 1) == pytest.approx(v[0] - v[1])
    assert lie.chi_i(v, 2) == pytest.approx(v[0] + v[1])


def test_chambers_and_opposition():
    assert lie.in_open_chamber([1.0, 0.0, -1.0])
    assert not lie.in_open_chamber([1.0, 1.0, -2.0])
    assert lie.in_closed_chamber([1.0, 1.0, -2.0])
    assert np.allclose(lie.opposition([2.0, 0.5, -2.5]), [2.5, -0.5, -2.0])
    assert lie.wall_distance([1.0, -1.0]) == pytest.approx(math.sqrt(2.0))


def test_chi_comparison_constant_d2():
    # in d = 2: chi^1(v) = v_1 and ||v|| = sqrt(2) |v_1|
    assert lie.chi_comparison_constant(2) == pytest.approx(2.0)


def test_degenerate_inputs():
    with pytest.raises(lie.DegenerateInput):
        lie.as_group_element([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(lie.DegenerateInput):
        lie.cartan_projection(np.diag([1e8, 1e-8]))


def test_known_projections():
    g = np.array([[2.0, 1.0], [1.0, 1.0]])
    phi = (1 + math.sqrt(5)) / 2
    assert np.allclose(lie.jordan_lambda(g), [2 * math.log(phi), -2 * math.log(phi)])
    assert np.allclose(lie.cartan_projection(np.diag([3.0, 1 / 3.0])), [math.log(3), -math.log(3)])
    unip = np.array([[1.0, 5.0], [0.0, 1.0]])
    assert not lie.is_loxodromic(unip)
    assert lie.jordan_projection(unip).eigenbasis is None


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from([2, 3, 4]))
def test_decompositions_round_trip(seed, d):
    rng = np.random.default_rng(seed)
    g = lie.random_sl(rng, d)
    kak = lie.cartan_kak(g)
    assert np.linalg.norm(kak.reconstruct() - g) <= 1e-8 * np.linalg.norm(g)
    assert np.allclose(kak.k.T @ kak.k, np.eye(d), atol=1e-12)
    assert np.linalg.det(kak.k) > 0 and np.linalg.det(kak.l) > 0
    assert lie.in_closed_chamber(kak.a)
    for order in ("KAN", "NAK"):
        iw = lie.iwasawa(g, order)
        assert np.linalg.norm(iw.reconstruct() - g) <= 1e-8 * np.linalg.norm(g)
        assert np.allclose(np.tril(iw.n, -1), 0.0) and np.allclose(np.diag(iw.n), 1.0)


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_inverse_projection_is_opposition(seed, d):
    g = lie.random_sl(np.random.default_rng(seed), d)
    a = lie.cartan_projection(g)
    assert np.allclose(lie.cartan_projection(np.linalg.inv(g)), lie.opposition(a), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_cartan_points_factor_two(seed, d):
    rng = np.random.default_rng(seed)
    g, hx, hy = (lie.random_sl(rng, d) for _ in range(3))
    gap = np.linalg.norm(lie.a_x(g, hx) - lie.a_x(g, hy))
    assert gap <= 2 * lie.dX(hx, hy) + 1e-9


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_subadditivity(seed, d):
    rng = np.random.default_rng(seed)
    h, h2 = lie.random_sl(rng, d), lie.random_sl(rng, d)
    lhs = np.linalg.norm(lie.cartan_projection(h @ h2) - lie.cartan_projection(h))
    assert lhs <= np.linalg.norm(lie.cartan_projection(h2)) + 1e-9


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_cartan_jordan_convergence(seed, d):
    rng = np.random.default_rng(seed)
    # chamber gaps at least 0.3 keep g^8 well conditioned and the limit well separated
    lam = lie.cartan_vector(np.cumsum(rng.uniform(0.3, 1.0, d))[::-1])
    h = lie.random_sl(rng, d, 0.5)
    g = h @ lie.exp_diag(lam) @ np.linalg.inv(h)
    jd = lie.jordan_projection(g)
    assert jd.loxodromic and np.allclose(jd.lam, lam, atol=1e-8)
    errs = [np.linalg.norm(jd.lam - lie.cartan_projection(np.linalg.matrix_power(g, n)) / n) for n in (1, 2, 4, 8)]
    assert all(b <= a + 1e-9 for a, b in zip(errs, errs[1:]))


def test_eigenbasis_columns_are_eigenvectors():
    g = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 1.0]])
    g = g / np.linalg.det(g) ** (1 / 3)
    jd = lie.jordan_projection(g)
    v = jd.eigenbasis
    assert np.allclose(g @ v, v * jd.eigenvalues, atol=1e-10)
    assert np.all(np.diff(np.abs(jd.eigenvalues)) < 0)
