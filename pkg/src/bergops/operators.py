"""Kernels and the operator calculus on the unit disc.

Truncated Toeplitz and little Hankel operators, per-box partial operators,
their generation series, the radial-limit evaluation with convergence logs,
transposes, the majorant diagnostic G_D and the subharmonic bound check.

The generalized operators are exposed only through finite proxies (series up
to a generation, truncation to a radius) with explicit convergence logs; the
limit is diagnosed, never assumed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import geometry, quadrature
from .symbols import Symbol, transform

# tensor grid: radii x equispaced angles; small enough for CI, dense enough
# to see boundary behaviour
DEFAULT_GRID_RADII = (0.0, 0.3, 0.6, 0.8, 0.9)
DEFAULT_GRID_ANGLES = 8

# grid points per vectorized quadrature pass; bounds panel memory
GRID_CHUNK = 2048

TOEPLITZ = "T"
HANKEL = "H"
_KINDS = (TOEPLITZ, HANKEL)


def default_grid(radii=DEFAULT_GRID_RADII, n_angles=DEFAULT_GRID_ANGLES) -> np.ndarray:
    pts = []
    for r in radii:
        if r == 0.0:
            pts.append(0.0 + 0.0j)
            continue
        for k in range(n_angles):
            phi = 2.0 * math.pi * k / n_angles
            pts.append(r * complex(math.cos(phi), math.sin(phi)))
    return np.array(pts, dtype=complex)


class TestFunction:
    """Analytic test input with exact first and second derivatives.

    Either a polynomial (coefficients c_0..c_d, evaluated by Horner
    recurrences) or a callable triple (f, f', f'')."""

    def __init__(self, coeffs=None, funcs=None):
        if (coeffs is None) == (funcs is None):
            raise ValueError("provide exactly one of coeffs or funcs")
        if coeffs is not None:
            self.coeffs = np.asarray(coeffs, dtype=complex)
            if self.coeffs.ndim != 1 or len(self.coeffs) == 0:
                raise ValueError("coeffs must be a non-empty 1-d sequence")
            self.funcs = None
        else:
            self.coeffs = None
            self.funcs = tuple(funcs)
            if len(self.funcs) not in (1, 3):
                raise ValueError("funcs must be (f,) or (f, f', f'')")

    @classmethod
    def from_coeffs(cls, coeffs):
        return cls(coeffs=coeffs)

    @classmethod
    def from_callables(cls, f, df=None, d2f=None):
        if df is None or d2f is None:
            return cls(funcs=(f,))
        return cls(funcs=(f, df, d2f))

    @classmethod
    def monomial(cls, n: int):
        c = np.zeros(n + 1, dtype=complex)
        c[n] = 1.0
        return cls(coeffs=c)

    @property
    def is_polynomial(self) -> bool:
        return self.coeffs is not None

    @property
    def has_derivatives(self) -> bool:
        return self.coeffs is not None or len(self.funcs) == 3

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.is_polynomial else None

    def _horner(self, coeffs, z):
        out = np.zeros(np.shape(z), dtype=complex)
        for c in coeffs[::-1]:
            out = out * z + c
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.coeffs is not None:
            return self._horner(self.coeffs, z)
        return np.asarray(self.funcs[0](z), dtype=complex)

    def deriv(self, z, order=1):
        z = np.asarray(z, dtype=complex)
        if self.coeffs is not None:
            c = self.coeffs
            for _ in range(order):
                c = c[1:] * np.arange(1, len(c), dtype=float) if len(c) > 1 \
                    else np.zeros(1, dtype=complex)
            return self._horner(c, z)
        if len(self.funcs) != 3:
            raise ValueError("this test function carries no derivatives")
        return np.asarray(self.funcs[order](z), dtype=complex)


@dataclass
class FieldSample:
    """Operator output sampled on a finite grid in the disc."""
    grid: np.ndarray
    values: np.ndarray
    per_point_error: np.ndarray
    meta: dict = field(default_factory=dict)
    convergence_log: Optional[list] = None

    def __post_init__(self):
        if not (len(self.grid) == len(self.values) == len(self.per_point_error)):
            raise ValueError("grid, values and per_point_error lengths differ")

    @property
    def converged(self) -> bool:
        return bool(self.meta.get("converged", True))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z_re", "z_im", "value_re", "value_im", "err"])
            for z, v, e in zip(self.grid, self.values, self.per_point_error):
                w.writerow([repr(float(z.real)), repr(float(z.imag)),
                            repr(float(v.real)), repr(float(v.imag)),
                            repr(float(e))])

    def log_to_csv(self, path):
        if self.convergence_log is None:
            raise ValueError("no convergence log attached")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rho", "grid_l2_diff"])
            for rho, diff in self.convergence_log:
                w.writerow([repr(rho), repr(diff)])


def _check_interior(z, name):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError(f"{name} must lie strictly inside the unit disc")
    return z


def kernel_eval(kind: str, lam: complex, z: complex):
    """K (reproducing kernel), k (unit-norm kernel), W (standard weight) or
    the Mobius transform."""
    z = _check_interior(z, "z")
    if kind == "W":
        return 1.0 - np.abs(z) ** 2
    lam = complex(lam)
    if abs(lam) >= 1.0:
        raise ValueError("lam must lie strictly inside the unit disc")
    if kind == "K":
        return (1.0 - z * np.conj(lam)) ** (-2.0)
    if kind == "k":
        return (1.0 - abs(lam) ** 2) * (1.0 - z * np.conj(lam)) ** (-2.0)
    if kind == "mobius":
        return (lam - z) / (1.0 - z * np.conj(lam))
    raise ValueError(f"unknown kernel kind {kind!r}; expected K, k, W or mobius")


def _kernel_matrix(kind, zeta, zgrid):
    # rows: integration nodes, columns: evaluation points
    if kind == TOEPLITZ:
        return (1.0 - np.conj(zeta)[:, None] * zgrid[None, :]) ** (-2.0)
    return (1.0 - zeta[:, None] * np.conj(zgrid)[None, :]) ** (-2.0)


def _field_over_region(kind, a, f, grid, cells_builder, tol, max_nodes):
    """Vectorized field integral, chunked over grid points.

    cells_builder(integrand) -> QuadratureResult for the region at hand.
    """
    grid = _check_interior(grid, "grid")
    values = np.zeros(len(grid), dtype=complex)
    errors = np.zeros(len(grid), dtype=float)
    converged = True
    nodes = 0
    for lo in range(0, len(grid), GRID_CHUNK):
        zg = grid[lo:lo + GRID_CHUNK]

        def integrand(rho, phi):
            zeta = rho * np.exp(1j * phi)
            base = a(rho, phi) * f(zeta)
            return base[:, None] * _kernel_matrix(kind, zeta, zg)

        res = cells_builder(integrand, tol, max_nodes)
        values[lo:lo + GRID_CHUNK] = np.asarray(res.value)
        errors[lo:lo + GRID_CHUNK] = res.error_estimate
        converged = converged and res.converged
        nodes += res.nodes_used
    return values, errors, converged, nodes


def _annulus_builder(a, r_lo, r_hi):
    breaks = quadrature.dyadic_radial_edges(r_lo, r_hi)
    breaks += a.radial_breakpoints(r_lo, r_hi)

    def build(integrand, tol, max_nodes):
        if r_lo == 0.0:
            return quadrature.integrate_disc(integrand, tol, radius=r_hi,
                                             max_nodes=max_nodes,
                                             radial_breakpoints=breaks)
        return quadrature.integrate_box(integrand, (r_lo, r_hi, 0.0, 2.0 * math.pi),
                                        tol, max_nodes=max_nodes,
                                        radial_breakpoints=breaks)

    return build


def _check_kind(kind):
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")


def toeplitz_truncated(a: Symbol, rho: float, f: TestFunction, grid,
                       tol: float = 1e-8,
                       max_nodes=quadrature.DEFAULT_NODE_BUDGET) -> FieldSample:
    """T_{a_rho} f on the grid: integral of a f against the reproducing
    kernel over |zeta| <= rho."""
    return _truncated(TOEPLITZ, a, rho, f, grid, tol, max_nodes)


def hankel_truncated(a: Symbol, rho: float, f: TestFunction, grid,
                     tol: float = 1e-8,
                     max_nodes=quadrature.DEFAULT_NODE_BUDGET) -> FieldSample:
    """h_{a_rho} f on the grid; the output field is anti-analytic."""
    return _truncated(HANKEL, a, rho, f, grid, tol, max_nodes)


def _truncated(kind, a, rho, f, grid, tol, max_nodes):
    _check_kind(kind)
    if not (0.0 < rho < 1.0):
        raise ValueError(f"truncation radius must lie in (0, 1), got {rho}")
    grid = np.asarray(grid, dtype=complex)
    values, errors, conv, nodes = _field_over_region(
        kind, a, f, grid, _annulus_builder(a, 0.0, rho), tol, max_nodes)
    meta = {"kind": kind, "symbol": a.description, "rho": rho, "tol": tol,
            "converged": conv, "nodes": nodes}
    return FieldSample(grid, values, errors, meta)


def box_partial_apply(kind: str, n: int, a: Symbol, f: TestFunction, grid,
                      tol: float = 1e-8,
                      decomposition: Optional[geometry.Decomposition] = None,
                      max_nodes=quadrature.DEFAULT_NODE_BUDGET) -> FieldSample:
    """F_n f or H_n f: the kernel integral restricted to box D_n."""
    _check_kind(kind)
    if decomposition is None:
        m, _ = geometry.index_of_id(n)
        decomposition = geometry.Decomposition(m)
    box = decomposition[n]
    grid = np.asarray(grid, dtype=complex)
    breaks = a.radial_breakpoints(box.r_in, box.r_out)

    def build(integrand, tol_, max_nodes_):
        return quadrature.integrate_box(integrand, box, tol_, max_nodes=max_nodes_,
                                        radial_breakpoints=breaks)

    values, errors, conv, nodes = _field_over_region(kind, a, f, grid, build,
                                                     tol, max_nodes)
    meta = {"kind": kind, "symbol": a.description, "box": n, "tol": tol,
            "converged": conv, "nodes": nodes}
    return FieldSample(grid, values, errors, meta)


def series_apply(kind: str, a: Symbol, f: TestFunction, up_to_generation: int,
                 grid, tol: float = 1e-8,
                 decomposition: Optional[geometry.Decomposition] = None) -> FieldSample:
    """Sum of the per-box partial operators over all boxes of generation
    <= up_to_generation.  Agrees with the truncation at rho = 1 - 2^-m."""
    _check_kind(kind)
    grid = _check_interior(np.asarray(grid, dtype=complex), "grid")
    if up_to_generation < 0:
        raise ValueError("generation must be >= 0")
    if up_to_generation == 0:
        zeros = np.zeros(len(grid), dtype=complex)
        return FieldSample(grid, zeros, np.zeros(len(grid)),
                           {"kind": kind, "symbol": a.description,
                            "generation": 0, "converged": True})
    if decomposition is None or decomposition.m_max < up_to_generation:
        decomposition = geometry.Decomposition(up_to_generation)
    n_boxes = 2 ** (up_to_generation + 1) - 2
    per_box_tol = tol / n_boxes
    total = np.zeros(len(grid), dtype=complex)
    errors = np.zeros(len(grid), dtype=float)
    conv = True
    for n in range(n_boxes):
        part = box_partial_apply(kind, n, a, f, grid, per_box_tol, decomposition)
        total += part.values
        errors += part.per_point_error
        conv = conv and part.converged
    meta = {"kind": kind, "symbol": a.description,
            "generation": up_to_generation, "tol": tol, "converged": conv}
    return FieldSample(grid, total, errors, meta)


def limit_apply(kind: str, a: Symbol, f: TestFunction, grid,
                schedule: Optional[Sequence[float]] = None,
                tol: float = 1e-7, cauchy_eps: float = 1e-5,
                m_max: int = 24) -> FieldSample:
    """Radial-limit evaluation along a truncation ladder with a convergence
    log.

    Default schedule rho_m = 1 - 2^-m, m = 1..m_max.  Each step only
    integrates the newly added annulus (additivity over disjoint regions).
    Declares convergence when the grid-L2 difference between consecutive
    iterates drops below cauchy_eps; never raises on slow convergence, the
    unconverged flag plus the full log is the result.
    """
    _check_kind(kind)
    grid = _check_interior(np.asarray(grid, dtype=complex), "grid")
    if schedule is None:
        schedule = [1.0 - 2.0 ** (-m) for m in range(1, m_max + 1)]
    schedule = list(schedule)
    if any(b <= a_ for a_, b in zip(schedule, schedule[1:])) or schedule[-1] >= 1.0:
        raise ValueError("schedule must be strictly increasing with all radii < 1")
    step_tol = tol / max(1, len(schedule))
    total = np.zeros(len(grid), dtype=complex)
    errors = np.zeros(len(grid), dtype=float)
    log = []
    converged = False
    prev = 0.0
    prev_diff = None
    for rho in schedule:
        vals, errs, conv, _ = _field_over_region(
            kind, a, f, grid, _annulus_builder(a, prev, rho), step_tol,
            quadrature.DEFAULT_NODE_BUDGET)
        total += vals
        errors += errs
        diff = float(np.sqrt(np.mean(np.abs(vals) ** 2)))
        log.append((rho, diff))
        prev = rho
        # two consecutive sub-threshold, non-increasing increments: a single
        # small step can be spurious when the integrand mass sits near the
        # boundary (high-degree inputs)
        if (prev_diff is not None and diff < cauchy_eps
                and prev_diff < cauchy_eps and diff <= prev_diff):
            converged = True
            break
        prev_diff = diff
    meta = {"kind": kind, "symbol": a.description, "tol": tol,
            "cauchy_eps": cauchy_eps, "rho_final": prev, "converged": converged}
    return FieldSample(grid, total, errors, meta, convergence_log=log)


def transpose_apply(kind: str, a: Symbol, rho: float, g: TestFunction, grid,
                    tol: float = 1e-8) -> FieldSample:
    """The transposed truncated operator: same kernel, conjugated symbol."""
    return _truncated(kind, transform(a, "conjugate"), rho, g, grid, tol,
                      quadrature.DEFAULT_NODE_BUDGET)


# fixed outer rule for dual pairings: radial Gauss x equispaced angles;
# 48 x 128 keeps angular aliasing of the truncated fields below 1e-7
DUALITY_OUTER_RULE = (48, 128)


def _outer_rule(n_rad, n_ang):
    from numpy.polynomial.legendre import leggauss
    x, w = leggauss(n_rad)
    r = 0.5 * (x + 1.0)
    wr = 0.5 * w
    phi = 2.0 * math.pi * np.arange(n_ang) / n_ang
    R = np.repeat(r, n_ang)
    P = np.tile(phi, n_rad)
    # normalized measure: (1/pi) * r dr dphi, total mass 1
    W = np.repeat(wr * r, n_ang) * (2.0 / n_ang)
    return R * np.exp(1j * P), W


def dual_pairing(u_values, v_values, weights):
    return complex(np.sum(weights * u_values * np.conj(v_values)))


def duality_defect(a: Symbol, rho: float, f: TestFunction, g: TestFunction,
                   tol: float = 1e-9, outer=DUALITY_OUTER_RULE):
    """Both sides of <T_{a_rho} f, g> = <f, T_{abar_rho} g> by disc
    quadrature; returns (lhs, rhs)."""
    znodes, weights = _outer_rule(*outer)
    u = toeplitz_truncated(a, rho, f, znodes, tol)
    v = transpose_apply(TOEPLITZ, a, rho, g, znodes, tol)
    lhs = dual_pairing(u.values, g(znodes), weights)
    rhs = dual_pairing(f(znodes), v.values, weights)
    return lhs, rhs


def majorant_GD(f: TestFunction, box, z, tol: float = 1e-9) -> np.ndarray:
    """G_D(z): integral over the box of (|f| + |f'| W + |f''| W^2) / |1 - z zeta|^2.

    Requires exact derivatives (polynomial or supplied callables); a
    diagnostic upper envelope must not rest on numerical differentiation.
    """
    if not f.has_derivatives:
        raise ValueError("majorant needs exact derivatives; supply a polynomial "
                         "or a callable triple (f, f', f'')")
    z = np.atleast_1d(_check_interior(z, "z"))

    def integrand(rho, phi):
        zeta = rho * np.exp(1j * phi)
        w = 1.0 - rho ** 2
        g = np.abs(f(zeta)) + np.abs(f.deriv(zeta, 1)) * w + np.abs(f.deriv(zeta, 2)) * w ** 2
        kern = np.abs(1.0 - np.conj(zeta)[:, None] * z[None, :]) ** (-2.0)
        return g[:, None] * kern

    res = quadrature.integrate_box(integrand, box, tol)
    vals = np.real(np.asarray(res.value))
    return vals if len(vals) > 1 else float(vals[0])


def subharmonic_bound_check(f: TestFunction, n: int, w: complex,
                            tol: float = 1e-9,
                            decomposition: Optional[geometry.Decomposition] = None,
                            _union_cache: Optional[dict] = None):
    """Verify |f(w)| <= (c/|D_n|) * integral of |f| over U_n with
    c = |D_n| / |D(w, R)| from the inscribed disc; returns (lhs, rhs, pass)."""
    if decomposition is None:
        m, _ = geometry.index_of_id(n)
        decomposition = geometry.Decomposition(min(m + 1, geometry.DEFAULT_GENERATION_CAP))
    _, radius, _ = geometry.inscribed_disc(n, w, decomposition)
    key = n
    if _union_cache is not None and key in _union_cache:
        union_integral = _union_cache[key]
    else:
        nb = geometry.neighbors(n, decomposition)
        union_integral = 0.0
        for b in nb.union_region:

            def integrand(rho, phi):
                return np.abs(f(rho * np.exp(1j * phi)))

            union_integral += quadrature.integrate_box(integrand, b, tol).value.real
        if _union_cache is not None:
            _union_cache[key] = union_integral
    lhs = float(abs(f(np.array([w]))[0]))
    rhs = union_integral / radius ** 2  # |D(w,R)| = R^2 in normalized measure
    return lhs, rhs, lhs <= rhs * (1.0 + 1e-9) + tol
