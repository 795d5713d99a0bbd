"""Adaptive polar quadrature, the disc integrator, and the oscillatory path."""

import math

import numpy as np
import pytest

from bergops import quadrature as q


def test_disc_has_unit_measure():
    res = q.integrate_disc(lambda r, p: np.ones_like(r), 1e-12)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert res.converged


def test_box_polynomial_exactness():
    # (1/pi) * int r^2 cos(phi) * r dr dphi over [0,1]x[0,pi/2] = 1/(4 pi)
    res = q.integrate_box(lambda r, p: r ** 2 * np.cos(p),
                          (0.0, 0.999999, 0.0, math.pi / 2), 1e-12)
    assert res.value.real == pytest.approx(1 / (4 * math.pi), rel=1e-5)


def test_box_annulus_area():
    res = q.integrate_box(lambda r, p: np.ones_like(r),
                          (0.25, 0.5, 0.0, 2 * math.pi), 1e-13)
    assert res.value == pytest.approx(0.5 ** 2 - 0.25 ** 2, abs=1e-12)


def test_monomial_moments_on_disc():
    # (1/pi) int z^k conj(z)^k dA = 1/(k+1) on |z| <= 1
    for k in (0, 1, 4):
        res = q.integrate_disc(lambda r, p, k=k: r ** (2 * k), 1e-12)
        assert res.value == pytest.approx(1 / (k + 1), abs=1e-10)


def test_vector_integrand_matches_scalar():
    ks = np.array([0, 1, 2, 5])

    def vec(r, p):
        return (r[:, None] ** (2 * ks[None, :])) * np.exp(1j * p)[:, None]

    res = q.integrate_box(vec, (0.1, 0.9, 0.0, 1.3), 1e-11)
    for i, k in enumerate(ks):
        ref = q.integrate_box(lambda r, p, k=k: r ** (2 * k) * np.exp(1j * p),
                              (0.1, 0.9, 0.0, 1.3), 1e-11)
        assert res.value[i] == pytest.approx(ref.value, abs=1e-10)


def test_breakpoints_capture_kinks():
    # |r - 1/2| has a kink; a breakpoint there makes the rule exact
    f = lambda r, p: np.abs(r - 0.5)
    res = q.integrate_box(f, (0.0, 0.999, 0.0, 2 * math.pi), 1e-12,
                          radial_breakpoints=[0.5])

    def piece(a, b, sign):
        # int_a^b sign*(r - 1/2) r dr
        return sign * ((b ** 3 - a ** 3) / 3 - (b ** 2 - a ** 2) / 4)

    exact = 2 * (piece(0.0, 0.5, -1.0) + piece(0.5, 0.999, 1.0))
    assert res.converged
    assert res.value.real == pytest.approx(exact, abs=1e-12)


def test_integrable_boundary_singularity():
    # (1/pi) int (1-r)^(-1/2) dA = 2 * int_0^1 u^(-1/2) (1-u) du = 8/3
    res = q.integrate_disc(lambda r, p: (1 - r) ** -0.5, 1e-9)
    assert res.converged
    assert res.value.real == pytest.approx(8.0 / 3.0, abs=1e-7)


def test_dyadic_radial_edges():
    edges = q.dyadic_radial_edges(0.0, 0.99)
    assert edges[0] == 0.5
    assert all(e < 0.99 for e in edges)
    assert q.dyadic_radial_edges(0.6, 0.7) == []


def test_oscillatory_matches_adaptive():
    g = lambda r: np.sin(1 / (1 - r)) * (1 - r) ** -0.25
    breaks = [1 - 1 / (k * math.pi) for k in range(1, 200)]
    ref = q.integrate_interval(g, 0.5, 0.99, 1e-13,
                               breakpoints=[b for b in breaks if 0.5 < b < 0.99])
    res = q.integrate_radial_oscillatory(g, 0.5, 0.99, 1e-12)
    assert res.value == pytest.approx(ref.value, abs=1e-12)


def test_oscillatory_domain_checks():
    g = lambda r: np.sin(1 / (1 - r))
    with pytest.raises(ValueError, match="improper"):
        q.integrate_radial_oscillatory(g, 0.5, 1.0, 1e-8)
    with pytest.raises(ValueError):
        q.integrate_radial_oscillatory(g, 0.2, 0.9, 1e-8)
    with pytest.raises(q.ResourceError):
        q.integrate_radial_oscillatory(g, 0.5, 1 - 1e-9, 1e-8)


def test_interval_rule():
    res = q.integrate_interval(lambda x: np.exp(x), 0.0, 1.0, 1e-13)
    assert res.value.real == pytest.approx(math.e - 1.0, abs=1e-12)
    res = q.integrate_interval(lambda x: np.abs(x), -1.0, 1.0, 1e-12,
                               breakpoints=[0.0])
    assert res.value.real == pytest.approx(1.0, abs=1e-12)


def test_invalid_inputs():
    f = lambda r, p: np.ones_like(r)
    with pytest.raises(ValueError):
        q.integrate_box(f, (0.0, 0.5, 0.0, 1.0), -1.0)
    with pytest.raises(ValueError):
        q.integrate_box(f, (0.5, 0.2, 0.0, 1.0), 1e-8)
    with pytest.raises(ValueError, match="r_out < 1"):
        q.integrate_box(f, (0.0, 1.0, 0.0, 1.0), 1e-8)
    with pytest.raises(ValueError):
        q.integrate_disc(f, 1e-8, radius=1.5)
    with pytest.raises(ValueError):
        q.integrate_interval(lambda x: x, 1.0, 0.0, 1e-8)


def test_node_budget_reported():
    # a needle the budget cannot resolve: flagged, not raised
    f = lambda r, p: 1.0 / ((r - 0.5) ** 2 + 1e-16)
    res = q.integrate_box(f, (0.0, 0.999, 0.0, 2 * math.pi), 1e-14,
                          max_nodes=50_000)
    assert not res.converged
    assert res.nodes_used <= 60_000
