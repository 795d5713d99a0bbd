"""Independent spectral oracle for radial symbols on A^2.

A radial symbol acts diagonally on the monomial basis; the diagonal sequence
gamma_n = 2(n+1) * int_0^1 a(r) r^{2n+1} dr is computed by oscillation-aware
radial quadrature and serves as the brute-force reference for the operator
modules.  Plain Gauss panels across the boundary oscillation would silently
lose the cancellation, so oscillating symbols are integrated period by period
in the variable y = 1/(1-r).
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence
import warnings

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import quadrature
from .symbols import Symbol, OSC_SIN, OSC_ABS_SIN

_X16, _W16 = leggauss(16)
_X8, _W8 = leggauss(8)

# default ladder length for dense sequences and matrix sections
DEFAULT_N_MAX = 10_000
DEFAULT_SECTION_N = 256

POWER_ITERATION_STAGNATION = 1e-10

_DYADIC_TAIL_GENERATIONS = 50


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("BERGOPS_THREADS", "1")))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    workers = thread_count()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


@dataclass
class SpectralSequence:
    symbol: str
    n_values: np.ndarray
    gamma: np.ndarray
    errors: np.ndarray
    tol: float
    fit: Optional[tuple] = None

    @property
    def n_max(self) -> int:
        return int(self.n_values[-1])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "gamma_re", "gamma_im", "err"])
            for n, g, e in zip(self.n_values, self.gamma, self.errors):
                w.writerow([int(n), repr(float(g.real)), repr(float(g.imag)),
                            repr(float(e))])


@dataclass(frozen=True)
class NormEstimate:
    value: float
    iterations: int
    residual: float
    converged: bool

    def __float__(self):
        return self.value


def _require_radial(a: Symbol):
    if not a.is_radial:
        raise ValueError(f"symbol {a.description!r} is not radial; the diagonal "
                         "formula only applies to radial symbols")


def _smooth_radial_integral(profile, r0, r1, n, tol):
    """int_{r0}^{r1} profile(r) r^(2n+1) dr for non-oscillating profiles.

    Panels are graded dyadically toward r = 1 so integrable boundary
    singularities like (1-r)^-b are resolved; if r1 = 1 the last sliver
    beyond 1 - 2^-50 enters the error estimate instead of the value.
    """
    def h(r):
        return profile(r) * r ** (2 * n + 1)

    tail = 0.0
    upper = r1
    if r1 >= 1.0:
        upper = 1.0 - 2.0 ** (-_DYADIC_TAIL_GENERATIONS)
        width = 1.0 - upper
        tail = float(abs(h(np.array([upper]))[0])) * width * 4.0
    breaks = quadrature.dyadic_radial_edges(r0, upper)
    res = quadrature.integrate_interval(h, r0, upper, tol, breakpoints=breaks)
    return res.value, res.error_estimate + tail


def _osc_pieces_value(env_weight, osc_abs, edges):
    """Per-period Gauss sums of env_weight(y) * sin y (or |sin y|)."""
    a = edges[:-1]
    b = edges[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)

    def vals(x, w):
        y = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        s = np.abs(np.sin(y)) if osc_abs else np.sin(y)
        v = (env_weight(y) * s).reshape(len(a), len(x))
        return half * (v @ w)

    fine = vals(_X16, _W16)
    coarse = vals(_X8, _W8)
    return fine, np.abs(fine - coarse)


def _osc_radial_integral(env, r_start, n, tol, kind, r_end=None):
    """int over [r_start, r_end or 1) of env(r) sin(1/(1-r)) r^(2n+1) dr.

    Substitutes y = 1/(1-r).  The factor r^(2n+1) = e^{-(2n+1) ln(1/r)}
    varies on the scale y^2/(2n+1), faster than one oscillation period while
    y < sqrt(2n+1); that head is integrated adaptively.  Beyond the split the
    envelope is slowly varying and the integral is summed period by period
    over J_k = [2 pi k, 2 pi (k+1)] with compensated summation.  For the
    improper endpoint the sum stops at Y ~ 2 pi max(512, 2n); the |sin|
    variant replaces the tail by its angular mean 2/pi times the envelope
    integral, the signed variant bounds the tail by the last period
    contribution.
    """
    osc_abs = kind == OSC_ABS_SIN
    y0 = 1.0 / (1.0 - r_start)
    y1 = None if r_end is None else 1.0 / (1.0 - r_end)
    two_pi = 2.0 * math.pi

    def env_weight(y):
        r = 1.0 - 1.0 / y
        return env(r) * r ** (2 * n + 1) / (y * y)

    def g(y):
        s = np.abs(np.sin(y)) if osc_abs else np.sin(y)
        return env_weight(y) * s

    y_split = two_pi * math.ceil(max(y0, math.sqrt(2 * n + 1)) / two_pi)
    if y1 is not None:
        y_split = min(y_split, y1)
    value = 0.0 + 0.0j
    err = 0.0
    if y_split > y0:
        k0 = math.floor(y0 / math.pi) + 1
        k1 = math.ceil(y_split / math.pi) - 1
        breaks = [k * math.pi for k in range(k0, k1 + 1)]
        head = quadrature.integrate_interval(g, y0, y_split, tol / 2,
                                             breakpoints=breaks)
        value += head.value
        err += head.error_estimate
    if y1 is not None:
        if y1 > y_split:
            # half-period edges so |sin| kinks fall on panel boundaries
            k0 = math.floor(y_split / math.pi) + 1
            k1 = math.ceil(y1 / math.pi) - 1
            interior = np.arange(k0, k1 + 1) * math.pi
            edges = np.unique(np.concatenate(([y_split], interior, [y1])))
            v, e = _gl_sum(env_weight, osc_abs, edges)
            value += v
            err += e
        return value, err
    k_end = max(512, 2 * n, int(y_split / two_pi) + 256)
    interior = np.arange(math.floor(y_split / math.pi) + 1,
                         2 * (k_end + 1) + 1) * math.pi
    edges = np.unique(np.concatenate(([y_split], interior[interior > y_split])))
    v, e = _gl_sum(env_weight, osc_abs, edges)
    value += v
    err += e
    Y = edges[-1]
    last_piece = _gl_sum(env_weight, osc_abs, edges[-3:])[0]
    if osc_abs:
        # mean of |sin| is 2/pi; the remaining tail integral in t = 1/y,
        # cut off where 1 - t is no longer distinguishable from 1 in floats
        # (the remainder below t_min is O(t_min^{1-b}), added to the error)
        def tail_integrand(t):
            r = 1.0 - t
            return env(r) * r ** (2 * n + 1)

        t_hi = 1.0 / Y
        t_min = max(t_hi * 2.0 ** (-40), 4e-16)
        breaks = [t_hi * 2.0 ** (-j) for j in range(1, 40)]
        tail = quadrature.integrate_interval(tail_integrand, t_min, t_hi, tol,
                                             breakpoints=breaks)
        value += (2.0 / math.pi) * tail.value
        rem = 2.0 * t_min * abs(complex(tail_integrand(np.array([t_min]))[0]))
        err += tail.error_estimate + rem + abs(last_piece)
    else:
        # integration by parts at Y = 2 pi k (cos Y = 1, sin Y = 0):
        # int_Y^inf H sin = H(Y) - H''(Y) + H''''(Y) - ...
        h = 0.5
        stencil = env_weight(np.array([Y - 2 * h, Y - h, Y, Y + h, Y + 2 * h]))
        H0 = stencil[2]
        H2 = (stencil[1] - 2.0 * stencil[2] + stencil[3]) / h ** 2
        H4 = (stencil[0] - 4.0 * stencil[1] + 6.0 * stencil[2]
              - 4.0 * stencil[3] + stencil[4]) / h ** 4
        value += H0 - H2
        err += abs(H4) + 1e-15 * abs(H0)
    return value, err


def _gl_sum(env_weight, osc_abs, edges):
    fine, diffs = _osc_pieces_value(env_weight, osc_abs, np.asarray(edges, dtype=float))
    value = complex(math.fsum(fine.real), math.fsum(fine.imag))
    return value, float(math.fsum(diffs))


def radial_eigenvalue(a: Symbol, n: int, tol: float = 1e-10) -> complex:
    """gamma_n(a) = 2(n+1) int_0^1 a(r) r^(2n+1) dr."""
    val, _ = radial_eigenvalue_with_error(a, n, tol)
    return val


def radial_eigenvalue_with_error(a: Symbol, n: int, tol: float = 1e-10):
    _require_radial(a)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    scale = 2.0 * (n + 1)
    inner_tol = tol / scale

    def profile(r):
        return a(np.asarray(r, dtype=float), np.zeros(np.shape(r)))

    upper = a.trunc_radius if a.trunc_radius is not None else 1.0
    if a.osc_kind is None or upper <= a.osc_start:
        val, err = _smooth_radial_integral(profile, 0.0, upper, n, inner_tol)
        return scale * val, scale * err
    s = a.osc_start
    v1, e1 = _smooth_radial_integral(profile, 0.0, s, n, inner_tol / 2)
    if a.envelope is None:
        raise ValueError(f"oscillating symbol {a.description!r} carries no "
                         "envelope; cannot integrate its boundary oscillation")

    def env(r):
        r = np.asarray(r, dtype=float)
        return np.asarray(a.envelope(r), dtype=complex)

    r_end = None if upper >= 1.0 else upper
    v2, e2 = _osc_radial_integral(env, s, n, inner_tol / 2, a.osc_kind, r_end=r_end)
    return scale * (v1 + v2), scale * (e1 + e2)


def spectral_sequence(a: Symbol, n_values: Sequence[int],
                      tol: float = 1e-8) -> SpectralSequence:
    """gamma_n along an explicit ladder of degrees (dense or log-spaced)."""
    _require_radial(a)
    ns = np.asarray(sorted(set(int(n) for n in n_values)), dtype=int)
    if len(ns) == 0 or ns[0] < 0:
        raise ValueError("n_values must be non-empty and non-negative")
    out = _parallel_map(lambda n: radial_eigenvalue_with_error(a, int(n), tol), ns)
    gamma = np.array([v for v, _ in out], dtype=complex)
    errs = np.array([e for _, e in out], dtype=float)
    return SpectralSequence(a.description, ns, gamma, errs, tol)


def log_spaced_degrees(n_lo: int, n_hi: int, per_decade: int = 20) -> list[int]:
    if n_lo < 1 or n_hi <= n_lo:
        raise ValueError("need 1 <= n_lo < n_hi")
    count = max(2, int(per_decade * math.log10(n_hi / n_lo)) + 1)
    raw = np.unique(np.round(np.logspace(math.log10(n_lo), math.log10(n_hi),
                                         count)).astype(int))
    return [int(x) for x in raw]


def matrix_element(a: Symbol, m: int, n: int, tol: float = 1e-9) -> complex:
    """<T_a e_m, e_n> in the normalized monomial basis e_k = sqrt(k+1) z^k."""
    if m < 0 or n < 0:
        raise ValueError("m and n must be >= 0")
    norm = math.sqrt((m + 1) * (n + 1))
    k = m - n

    def integrand(rho, phi):
        return a(rho, phi) * rho ** (m + n) * np.exp(1j * k * phi)

    upper = a.trunc_radius if a.trunc_radius is not None else 1.0
    breaks = a.radial_breakpoints(0.0, upper)
    res = quadrature.integrate_disc(integrand, tol / norm, radius=upper,
                                    radial_breakpoints=breaks)
    return norm * complex(res.value)


def finite_section_norm(a: Symbol, N: int, tol: float = 1e-8,
                        iters: int = 500) -> NormEstimate:
    """Largest singular value of the N x N section, a lower bound for the
    A^2 operator norm.

    Power iteration on the normal matrix with the fixed all-ones seed and a
    relative stagnation stop; deterministic.  Radial symbols assemble their
    diagonal through the eigenvalue ladder, everything else through
    matrix_element (quadratic cost; keep N modest for non-radial symbols).
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if a.is_radial:
        diag = np.array([radial_eigenvalue(a, n, tol) for n in range(N)])
        A = None
    else:
        A = np.zeros((N, N), dtype=complex)
        for mm in range(N):
            for nn in range(N):
                A[nn, mm] = matrix_element(a, mm, nn, tol)
        diag = None

    def apply_normal(x):
        if A is None:
            return (np.abs(diag) ** 2) * x
        y = A @ x
        return A.conj().T @ y

    x = np.ones(N) / math.sqrt(N)
    sigma2 = 0.0
    converged = False
    it = 0
    for it in range(1, iters + 1):
        v = apply_normal(x)
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            return NormEstimate(0.0, it, 0.0, True)
        new_sigma2 = float(np.real(np.vdot(x, v)))
        x = v / nv
        if sigma2 > 0 and abs(new_sigma2 - sigma2) <= POWER_ITERATION_STAGNATION * sigma2:
            sigma2 = new_sigma2
            converged = True
            break
        sigma2 = new_sigma2
    residual = float(np.linalg.norm(apply_normal(x) - sigma2 * x))
    if not converged:
        warnings.warn(f"power iteration did not stagnate in {iters} iterations "
                      f"(residual {residual:.2e})")
    return NormEstimate(math.sqrt(max(sigma2, 0.0)), it, residual, converged)


def growth_fit(seq: SpectralSequence, window: tuple) -> tuple:
    """Log-log least squares of |gamma_n| against n over an n-window.

    Exact zeros cannot enter the log fit and are excluded (with a warning
    reporting how many).
    """
    n_lo, n_hi = window
    mask = (seq.n_values >= n_lo) & (seq.n_values <= n_hi)
    ns = seq.n_values[mask]
    mags = np.abs(seq.gamma[mask])
    nz = mags > 0
    if np.count_nonzero(~nz):
        warnings.warn(f"excluding {np.count_nonzero(~nz)} zero values from the "
                      "growth fit")
    ns, mags = ns[nz], mags[nz]
    if len(ns) < 3:
        raise ValueError(f"window {window} leaves {len(ns)} usable points; "
                         "need at least 3")
    X = np.log(ns.astype(float))
    Y = np.log(mags)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    seq.fit = (float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2))))
    return seq.fit
