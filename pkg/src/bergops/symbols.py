"""Symbols: evaluatable maps on the open unit disc with metadata.

A Symbol evaluates on polar coordinates (rho, phi) with vectorized numpy
semantics and carries the structural hints the quadrature layer needs:
radiality, an optional truncation radius, and the location/type of a
boundary-concentrating oscillation sin(1/(1-r)).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

# tabulated symbols interpolate bilinearly on their polar mesh
TABLE_INTERPOLATION_ORDER = 1

OSC_NONE = None
OSC_SIN = "sin"
OSC_ABS_SIN = "abs_sin"


class SymbolParseError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.column = column


@dataclass(frozen=True)
class Symbol:
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    is_radial: bool = False
    description: str = ""
    integrability_hint: Optional[float] = None  # a in L^q for all q < hint
    osc_kind: Optional[str] = OSC_NONE
    osc_start: float = 0.5
    envelope: Optional[Callable[[np.ndarray], np.ndarray]] = None
    trunc_radius: Optional[float] = None

    def __call__(self, rho, phi):
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)
        scalar = rho.ndim == 0
        if scalar:
            rho = rho.reshape(1)
            phi = np.broadcast_to(phi, (1,)).astype(float)
        vals = np.asarray(self.fn(rho, phi), dtype=complex)
        return vals[0] if scalar else vals

    def radial_breakpoints(self, r0: float, r1: float) -> list[float]:
        """Radial points quadrature panels should not straddle.

        Includes the truncation radius, the oscillation onset, and the
        half-period points 1/(1-r) = k*pi of the oscillating factor.
        """
        points = set()
        for p in (self.trunc_radius, self.osc_start if self.osc_kind else None):
            if p is not None and r0 < p < r1:
                points.add(p)
        if self.osc_kind:
            lo = max(r0, self.osc_start)
            hi = min(r1, 1.0 - 1e-16)
            if lo < hi:
                k0 = max(1, math.floor(1.0 / (math.pi * (1.0 - lo))) + 1)
                k1 = math.floor(1.0 / (math.pi * (1.0 - hi)))
                for k in range(k0, k1 + 1):
                    points.add(1.0 - 1.0 / (k * math.pi))
        return sorted(points)


def const_symbol(c: complex) -> Symbol:
    c = complex(c)

    def fn(rho, phi):
        return np.full(np.shape(rho), c, dtype=complex)

    return Symbol(fn, is_radial=True, description=f"const:{c}",
                  integrability_hint=math.inf)


def make_ab(b: float) -> Symbol:
    """The oscillating radial symbol: r^-1 (1-r)^-b sin(1/(1-r)) for
    r >= 1/2 and 1 inside; lies in L^q exactly when b*q < 1."""
    if not (0.0 < b <= 0.5):
        raise ValueError(f"b must lie in (0, 1/2], got {b}")

    def fn(rho, phi):
        rho = np.asarray(rho, dtype=float)
        out = np.ones(rho.shape, dtype=complex)
        mask = rho >= 0.5
        r = rho[mask]
        w = 1.0 - r
        out[mask] = np.sin(1.0 / w) * w ** (-b) / r
        return out

    def envelope(r):
        r = np.asarray(r, dtype=float)
        return (1.0 - r) ** (-b) / r

    return Symbol(fn, is_radial=True, description=f"ab:{b}",
                  integrability_hint=1.0 / b, osc_kind=OSC_SIN,
                  osc_start=0.5, envelope=envelope)


def power_symbol(b: float) -> Symbol:
    """(1 - r)^-b: the modulus-shaped, cancellation-free comparison symbol."""
    if b <= 0:
        raise ValueError(f"exponent must be positive, got {b}")

    def fn(rho, phi):
        rho = np.asarray(rho, dtype=float)
        return ((1.0 - rho) ** (-b)).astype(complex)

    return Symbol(fn, is_radial=True, description=f"pow:{b}",
                  integrability_hint=1.0 / b)


def transform(a: Symbol, kind: str, rho: Optional[float] = None) -> Symbol:
    """Wrap a symbol: pointwise modulus, complex conjugate, or radial
    truncation to |z| <= rho."""
    if kind == "modulus":
        inner = a.fn

        def fn(r, p):
            return np.abs(np.asarray(inner(r, p))).astype(complex)

        osc = OSC_ABS_SIN if a.osc_kind in (OSC_SIN, OSC_ABS_SIN) else a.osc_kind
        env = a.envelope
        if env is not None:
            orig_env = env

            def env(r):  # noqa: F811
                return np.abs(orig_env(r))

        return replace(a, fn=fn, description=f"abs({a.description})",
                       osc_kind=osc, envelope=env)
    if kind == "conjugate":
        inner = a.fn

        def fn(r, p):
            return np.conjugate(np.asarray(inner(r, p), dtype=complex))

        return replace(a, fn=fn, description=f"conj({a.description})")
    if kind == "truncate":
        if rho is None or not (0.0 < rho < 1.0):
            raise ValueError(f"truncation radius must lie in (0, 1), got {rho}")
        cut = rho if a.trunc_radius is None else min(rho, a.trunc_radius)
        inner = a.fn

        def fn(r, p):
            r = np.asarray(r, dtype=float)
            vals = np.asarray(inner(r, p), dtype=complex)
            return np.where(r <= cut, vals, 0.0 + 0.0j)

        return replace(a, fn=fn, description=f"trunc:{cut}({a.description})",
                       trunc_radius=cut)
    raise ValueError(f"unknown transform kind {kind!r}; expected modulus, "
                     "conjugate or truncate")


def eval_grid(a: Symbol, grid) -> np.ndarray:
    """Pointwise values at a list of (rho, phi) points, in grid order."""
    pts = list(grid)
    rho = np.array([p[0] for p in pts], dtype=float)
    phi = np.array([p[1] for p in pts], dtype=float)
    bad = np.nonzero(rho >= 1.0)[0]
    if len(bad):
        i = int(bad[0])
        raise ValueError(f"grid point {i} has rho={rho[i]} >= 1; symbols live "
                         "on the open disc")
    return a(rho, phi)


def tabulated_symbol(path) -> Symbol:
    """Symbol from a CSV table with columns rho, phi, re, im on a full polar
    tensor mesh; evaluation interpolates bilinearly (order 1), with angular
    wraparound."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"rho", "phi", "re", "im"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"table {path} must have columns rho, phi, re, im")
        for row in reader:
            rows.append((float(row["rho"]), float(row["phi"]),
                         float(row["re"]) + 1j * float(row["im"])))
    if not rows:
        raise ValueError(f"table {path} is empty")
    rhos = np.array(sorted({r for r, _, _ in rows}))
    phis = np.array(sorted({p for _, p, _ in rows}))
    table = np.zeros((len(rhos), len(phis)), dtype=complex)
    filled = np.zeros(table.shape, dtype=bool)
    ri = {v: i for i, v in enumerate(rhos)}
    pi_ = {v: i for i, v in enumerate(phis)}
    for r, p, v in rows:
        table[ri[r], pi_[p]] = v
        filled[ri[r], pi_[p]] = True
    if not filled.all():
        raise ValueError(f"table {path} is not a full rho x phi tensor grid")
    two_pi = 2.0 * math.pi
    # close the angular seam for interpolation
    phis_ext = np.concatenate((phis, [phis[0] + two_pi]))
    table_ext = np.concatenate((table, table[:, :1]), axis=1)
    radial = len(phis) == 1

    def fn(rho, phi):
        rho = np.clip(np.asarray(rho, dtype=float), rhos[0], rhos[-1])
        phi = np.asarray(phi, dtype=float) % two_pi
        if radial:
            i = np.clip(np.searchsorted(rhos, rho) - 1, 0, len(rhos) - 2)
            t = (rho - rhos[i]) / (rhos[i + 1] - rhos[i])
            return (1 - t) * table[i, 0] + t * table[i + 1, 0]
        phi = np.clip(phi, phis_ext[0], phis_ext[-1])
        i = np.clip(np.searchsorted(rhos, rho) - 1, 0, len(rhos) - 2)
        j = np.clip(np.searchsorted(phis_ext, phi) - 1, 0, len(phis_ext) - 2)
        t = (rho - rhos[i]) / (rhos[i + 1] - rhos[i])
        u = (phi - phis_ext[j]) / (phis_ext[j + 1] - phis_ext[j])
        return ((1 - t) * (1 - u) * table_ext[i, j]
                + t * (1 - u) * table_ext[i + 1, j]
                + (1 - t) * u * table_ext[i, j + 1]
                + t * u * table_ext[i + 1, j + 1])

    return Symbol(fn, is_radial=radial, description=f"table:{path}")


# ---------------------------------------------------------------------------
# mini-language: const:<c>, ab:<b>, pow:<b>, abs(<expr>), conj(<expr>),
# trunc:<rho>(<expr>), table:<path.csv>
# ---------------------------------------------------------------------------

def parse_symbol(text: str) -> Symbol:
    parser = _Parser(text)
    sym = parser.parse_expr()
    parser.skip_ws()
    if parser.pos != len(parser.text):
        raise SymbolParseError(f"unexpected trailing input {parser.text[parser.pos:]!r}",
                               parser.pos + 1)
    return sym


class _Parser:
    def __init__(self, text: str):
        self.text = text.strip()
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def fail(self, msg):
        raise SymbolParseError(msg, self.pos + 1)

    def parse_expr(self) -> Symbol:
        self.skip_ws()
        for head, kind in (("abs(", "modulus"), ("conj(", "conjugate")):
            if self.text.startswith(head, self.pos):
                self.pos += len(head)
                inner = self.parse_expr()
                self.expect(")")
                return transform(inner, kind)
        if self.text.startswith("trunc:", self.pos):
            self.pos += len("trunc:")
            rho = self.parse_number("truncation radius")
            self.expect("(")
            inner = self.parse_expr()
            self.expect(")")
            return transform(inner, "truncate", rho=rho)
        if self.text.startswith("const:", self.pos):
            self.pos += len("const:")
            return const_symbol(self.parse_complex("constant"))
        if self.text.startswith("ab:", self.pos):
            self.pos += len("ab:")
            return make_ab(self.parse_number("oscillation exponent"))
        if self.text.startswith("pow:", self.pos):
            self.pos += len("pow:")
            return power_symbol(self.parse_number("power exponent"))
        if self.text.startswith("table:", self.pos):
            self.pos += len("table:")
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos] not in "()":
                self.pos += 1
            return tabulated_symbol(self.text[start:self.pos].strip())
        self.fail("expected const:, ab:, pow:, abs(, conj(, trunc: or table:")

    def expect(self, token: str):
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            self.fail(f"expected {token!r}")
        self.pos += len(token)

    def _scan(self, extra: str) -> str:
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] in extra):
            self.pos += 1
        return self.text[start:self.pos]

    def parse_number(self, what: str) -> float:
        start = self.pos
        token = self._scan(".+-eE/")
        try:
            if "/" in token:
                num, den = token.split("/")
                return float(num) / float(den)
            return float(token)
        except (ValueError, ZeroDivisionError):
            raise SymbolParseError(f"invalid {what} {token!r}", start + 1) from None

    def parse_complex(self, what: str) -> complex:
        start = self.pos
        token = self._scan(".+-eEjJ/")
        try:
            return complex(token)
        except ValueError:
            raise SymbolParseError(f"invalid {what} {token!r}", start + 1) from None
