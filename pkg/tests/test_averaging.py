"""Averaging functionals, Carleson means, and scaling fits on dyadic boxes."""

import csv
import math

import numpy as np
import pytest

from bergops import averaging as av
from bergops import symbols as sym
from bergops.geometry import box_from_index, box_area


def test_avg_hat_constant_symbol_is_area_ratio():
    a = sym.const_symbol(1)
    box = box_from_index(3, 2)
    # full sub-rectangle: ratio 1
    full = av.avg_hat(a, box, (box.r_out, box.theta_out))
    assert full == pytest.approx(1.0, abs=1e-10)
    # empty sub-rectangle at the inner corner
    assert av.avg_hat(a, box, (box.r_in, box.theta_in)) == 0.0
    # generic cut: exact area ratio
    rho = 0.5 * (box.r_in + box.r_out)
    phi = box.theta_in + 0.25 * (box.theta_out - box.theta_in)
    got = av.avg_hat(a, box, (rho, phi))
    ratio = ((rho ** 2 - box.r_in ** 2) / (box.r_out ** 2 - box.r_in ** 2)) * 0.25
    assert got.real == pytest.approx(ratio, abs=1e-10)


def test_avg_hat_rejects_outside_zeta():
    a = sym.const_symbol(1)
    box = box_from_index(3, 1)
    with pytest.raises(ValueError, match="radius"):
        av.avg_hat(a, box, (0.99, box.theta_in))
    with pytest.raises(ValueError, match="arc"):
        av.avg_hat(a, box, (box.r_out, box.theta_out + 0.5))


def test_avg_hat_radial_and_general_paths_agree():
    radial = sym.power_symbol(0.25)
    # same profile but declared non-radial: exercises the 2-d path
    general = sym.Symbol(lambda r, p: radial.fn(r, p), is_radial=False,
                         description="pow-again")
    box = box_from_index(4, 3)
    zeta = (0.5 * (box.r_in + box.r_out),
            0.5 * (box.theta_in + box.theta_out))
    x = av.avg_hat(radial, box, zeta, tol=1e-11)
    y = av.avg_hat(general, box, zeta, tol=1e-11)
    assert x == pytest.approx(y, abs=1e-9)


def test_sup_avg_constant():
    a = sym.const_symbol(2.0)
    box = box_from_index(2, 1)
    rep = av.sup_avg(a, box, zeta_grid=(8, 8))
    assert rep.sup_over_zeta == pytest.approx(2.0, abs=1e-9)
    # the maximum sits at the outer corner
    assert rep.argmax_zeta[0] == pytest.approx(box.r_out)
    assert rep.argmax_zeta[1] == pytest.approx(box.theta_out)


def test_sup_avg_lower_bounds_pointwise_values():
    a = sym.make_ab(0.25)
    box = box_from_index(6, 1)
    rep = av.sup_avg(a, box, zeta_grid=(8, 8), tol=1e-10)
    # any grid value of |avg_hat| is at most the reported sup
    for fr in (0.25, 0.75, 1.0):
        rho = box.r_in + fr * (box.r_out - box.r_in)
        val = abs(av.avg_hat(a, box, (rho, box.theta_out), tol=1e-10))
        assert val <= rep.sup_over_zeta + 1e-8


def test_sup_avg_grid_validation():
    with pytest.raises(ValueError):
        av.sup_avg(sym.const_symbol(1), box_from_index(2, 1), zeta_grid=(1, 8))


def test_carleson_mean_constant_and_sign():
    box = box_from_index(3, 4)
    assert av.carleson_mean(sym.const_symbol(-3), box) == pytest.approx(3.0, abs=1e-9)


def test_carleson_mean_power_symbol_scaling():
    # M_a over the ladder grows like delta^-b for a = (1-r)^-b
    a = sym.power_symbol(0.5)
    pts = [(2.0 ** -m, av.carleson_mean(a, box_from_index(m, 1), tol=1e-9))
           for m in range(4, 11)]
    slope = av.scaling_fit(pts)[0]
    assert slope == pytest.approx(-0.5, abs=0.02)


def test_scaling_fit_exact_power_law():
    pts = [(d, 3.5 * d ** 1.75) for d in (0.1, 0.05, 0.02, 0.01)]
    slope, intercept, resid = av.scaling_fit(pts)
    assert slope == pytest.approx(1.75, abs=1e-12)
    assert math.exp(intercept) == pytest.approx(3.5, rel=1e-10)
    assert resid < 1e-12


def test_scaling_fit_validation():
    with pytest.raises(ValueError, match="at least 3"):
        av.scaling_fit([(0.1, 1.0), (0.2, 2.0)])
    with pytest.raises(ValueError, match="positive"):
        av.scaling_fit([(0.1, 1.0), (0.2, -2.0), (0.3, 1.0)])


def test_reports_to_csv(tmp_path):
    a = sym.const_symbol(1)
    reports = [av.sup_avg(a, box_from_index(m, 1), zeta_grid=(4, 4))
               for m in (2, 3)]
    path = tmp_path / "avg.csv"
    av.reports_to_csv(reports, path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert float(rows[0]["sup_avg"]) == pytest.approx(1.0, abs=1e-9)
    assert int(rows[1]["m"]) == 3
