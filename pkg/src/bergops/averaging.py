"""Averaging-condition analysis on dyadic boxes.

The averaging functional of a symbol on a box D, evaluated at an interior
point zeta = rho*e^{i phi}, is the normalized integral of the symbol over the
sub-rectangle of D cut at zeta.  Both the numerator and |D| use the
normalized measure (1/pi) * r dr dphi, so a constant symbol 1 gives exactly
the area ratio of the sub-rectangle (at most 1).  Its sup over the box family
is the boundedness functional; the Carleson mean of |a| is the classical
comparison quantity.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import quadrature
from .geometry import DyadicBox, box_area
from .symbols import Symbol

DEFAULT_ZETA_GRID = (16, 16)

_EPS = 1e-12


@dataclass(frozen=True)
class AveragingReport:
    box: DyadicBox
    sup_over_zeta: float
    argmax_zeta: tuple  # (rho, phi)
    carleson_mean: float
    zeta_grid_size: tuple
    tol: float


def _unwrap_angle(phi: float, theta_in: float, theta_out: float) -> float:
    two_pi = 2.0 * math.pi
    d = (phi - theta_in) % two_pi
    if d > (theta_out - theta_in) + _EPS:
        raise ValueError(f"angle {phi} outside box arc [{theta_in}, {theta_out}]")
    return theta_in + d


def avg_hat(a: Symbol, box: DyadicBox, zeta, tol: float = 1e-10) -> complex:
    """The averaging functional at a single zeta = (rho, phi) in the box."""
    rho, phi = zeta
    if not (box.r_in - _EPS <= rho <= box.r_out + _EPS):
        raise ValueError(f"zeta radius {rho} outside box [{box.r_in}, {box.r_out}]")
    phi_u = _unwrap_angle(phi, box.theta_in, box.theta_out)
    area = box_area(box)
    if rho <= box.r_in + _EPS or phi_u <= box.theta_in + _EPS:
        return 0.0 + 0.0j  # empty sub-rectangle
    breaks = a.radial_breakpoints(box.r_in, rho)
    if a.is_radial:
        res = quadrature.integrate_interval(lambda r: a(r, np.zeros_like(r)) * r,
                                            box.r_in, rho, tol * area,
                                            breakpoints=breaks)
        return complex(res.value) * (phi_u - box.theta_in) / math.pi / area
    res = quadrature.integrate_box(lambda r, p: a(r, p),
                                   (box.r_in, rho, box.theta_in, phi_u),
                                   tol * area, radial_breakpoints=breaks)
    return complex(res.value) / area


def sup_avg(a: Symbol, box: DyadicBox, zeta_grid=DEFAULT_ZETA_GRID,
            tol: float = 1e-10) -> AveragingReport:
    """Maximize |avg_hat| over a tensor grid of zeta including all corners.

    The box is partitioned into the grid cells, each cell is integrated once
    and the functional at every grid node is the 2-d cumulative sum, so a
    g x g grid costs one box integration.  Any finite grid yields a lower
    bound for the sup over the continuous family.
    """
    gr, gt = zeta_grid
    if gr < 2 or gt < 2:
        raise ValueError(f"zeta grid must be at least 2x2, got {zeta_grid}")
    r_edges = np.linspace(box.r_in, box.r_out, gr + 1)
    t_edges = np.linspace(box.theta_in, box.theta_out, gt + 1)
    area = box_area(box)
    cell_tol = tol * area / (gr * gt)
    cells = np.zeros((gr, gt), dtype=complex)
    dtheta = (box.theta_out - box.theta_in) / gt
    for i in range(gr):
        breaks = a.radial_breakpoints(r_edges[i], r_edges[i + 1])
        if a.is_radial:
            # one radial strip integral serves the whole row of cells
            strip = quadrature.integrate_interval(
                lambda r: a(r, np.zeros_like(r)) * r,
                r_edges[i], r_edges[i + 1], cell_tol * math.pi / dtheta,
                breakpoints=breaks)
            cells[i, :] = complex(strip.value) * dtheta / math.pi
            continue
        for j in range(gt):
            res = quadrature.integrate_box(
                lambda r, p: a(r, p),
                (r_edges[i], r_edges[i + 1], t_edges[j], t_edges[j + 1]),
                cell_tol, radial_breakpoints=breaks)
            cells[i, j] = res.value
    nodes = np.zeros((gr + 1, gt + 1), dtype=complex)
    nodes[1:, 1:] = np.cumsum(np.cumsum(cells, axis=0), axis=1)
    mags = np.abs(nodes) / area
    i, j = np.unravel_index(int(np.argmax(mags)), mags.shape)
    return AveragingReport(
        box=box,
        sup_over_zeta=float(mags[i, j]),
        argmax_zeta=(float(r_edges[i]), float(t_edges[j])),
        carleson_mean=carleson_mean(a, box, tol),
        zeta_grid_size=(gr, gt),
        tol=tol,
    )


def carleson_mean(a: Symbol, box: DyadicBox, tol: float = 1e-10) -> float:
    """M_a(D): mean of |a| over the box in normalized measure."""
    area = box_area(box)
    breaks = a.radial_breakpoints(box.r_in, box.r_out)
    res = quadrature.integrate_box(lambda r, p: np.abs(a(r, p)), box,
                                   tol * area, radial_breakpoints=breaks)
    return float(res.value.real) / area


def scaling_fit(values: Sequence[tuple]) -> tuple:
    """Least-squares fit of log y against log delta.

    Returns (slope, intercept, residual); residual is the RMS of the log
    residuals.
    """
    pts = list(values)
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points for a scaling fit, got {len(pts)}")
    d = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    if np.any(d <= 0) or np.any(y <= 0):
        raise ValueError("scaling fit requires strictly positive delta and y")
    X = np.log(d)
    Y = np.log(y)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2)))


def reports_to_csv(reports: Sequence[AveragingReport], path) -> None:
    """CSV report: m, r_in, theta_in, sup_avg, argmax_rho, argmax_phi,
    carleson_mean, tol."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "r_in", "theta_in", "sup_avg", "argmax_rho",
                    "argmax_phi", "carleson_mean", "tol"])
        for r in reports:
            w.writerow([r.box.m if r.box.m is not None else "",
                        repr(r.box.r_in), repr(r.box.theta_in),
                        repr(r.sup_over_zeta), repr(r.argmax_zeta[0]),
                        repr(r.argmax_zeta[1]), repr(r.carleson_mean),
                        repr(r.tol)])
