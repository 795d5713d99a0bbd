"""Dyadic Carleson-type box decomposition of the unit disc.

The continuous family consists of polar rectangles D(r, theta) with radial
extent [r, (1+r)/2] and angular width pi*(1-r).  The countable decomposition
indexes them by generation m >= 1 and angular slot mu in 1..2^m; boxes are
half-open (r_in, r_out] x (theta_in, theta_out], which tiles the punctured
disc exactly.  Enumeration order is m ascending, then mu ascending.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

DEFAULT_GENERATION_CAP = 24

# measured over generations 1..10 and frozen as regression constants: every
# interior box touches exactly 9 boxes (itself included) for m >= 2, and no
# box belongs to more than 9 neighbor sets; the asserted cap is 12.
NEIGHBOR_COUNT_INTERIOR = 9
NEIGHBOR_CAP = 12

# |D(w, R)| >= INSCRIBED_RATIO_MIN * |D_n| for the disc returned by
# inscribed_disc, uniformly over all generations.
INSCRIBED_RATIO_MIN = 0.125

_SEAM_EPS = 1e-12


class ResourceError(RuntimeError):
    pass


@dataclass(frozen=True)
class DyadicBox:
    """Polar rectangle (r_in, r_out] x (theta_in, theta_out]."""
    r_in: float
    r_out: float
    theta_in: float
    theta_out: float
    m: Optional[int] = None
    mu: Optional[int] = None

    @property
    def indexed(self) -> bool:
        return self.m is not None

    def contains(self, rho: float, phi: float) -> bool:
        """Half-open membership; angles compared modulo 2*pi."""
        if not (self.r_in < rho <= self.r_out + _SEAM_EPS):
            return False
        width = self.theta_out - self.theta_in
        d = (phi - self.theta_in) % (2.0 * math.pi)
        return 0.0 < d <= width + _SEAM_EPS

    def center(self) -> complex:
        rho = 0.5 * (self.r_in + self.r_out)
        phi = 0.5 * (self.theta_in + self.theta_out)
        return rho * complex(math.cos(phi), math.sin(phi))

    def corners(self) -> list[complex]:
        out = []
        for rho in (self.r_in, self.r_out):
            for phi in (self.theta_in, self.theta_out):
                out.append(rho * complex(math.cos(phi), math.sin(phi)))
        return out


@dataclass(frozen=True)
class NeighborSet:
    center: int
    members: tuple[int, ...]
    union_region: tuple[DyadicBox, ...]
    frontier: bool  # True when outer-generation members lie beyond m_max


@dataclass(frozen=True)
class TailRegion:
    """Union of all boxes of generation > cutoff: the annulus |z| > 1 - 2^-m."""
    generation_cutoff: int
    boxes: tuple[DyadicBox, ...]

    @property
    def inner_radius(self) -> float:
        return 1.0 - 2.0 ** (-self.generation_cutoff)

    def indicator(self, z: complex) -> bool:
        return abs(z) > self.inner_radius

    def area(self) -> float:
        return 1.0 - self.inner_radius ** 2


def box_from_index(m: int, mu: int) -> DyadicBox:
    if m < 1:
        raise ValueError(f"generation m must be >= 1, got {m}")
    if not (1 <= mu <= 2 ** m):
        raise ValueError(f"angular slot mu must lie in 1..{2 ** m} for m={m}, got {mu}")
    r_in = 1.0 - 2.0 ** (-m + 1)
    r_out = 1.0 - 2.0 ** (-m)
    theta_in = math.pi * (mu - 1) * 2.0 ** (-m + 1)
    theta_out = math.pi * mu * 2.0 ** (-m + 1)
    return DyadicBox(r_in, r_out, theta_in, theta_out, m, mu)


def box_area(box: DyadicBox) -> float:
    """Normalized measure (theta_out - theta_in)(r_out^2 - r_in^2)/(2 pi)."""
    return (box.theta_out - box.theta_in) * (box.r_out ** 2 - box.r_in ** 2) / (2.0 * math.pi)


def family_box(r: float, theta: float) -> DyadicBox:
    """The continuous-family box D(r, theta)."""
    if not (0.0 <= r < 1.0):
        raise ValueError(f"r must lie in [0, 1), got {r}")
    return DyadicBox(r, 1.0 - 0.5 * (1.0 - r), theta, theta + math.pi * (1.0 - r))


def box_id(m: int, mu: int) -> int:
    """Position of box (m, mu) in the enumeration order (0-based)."""
    return 2 ** m - 2 + (mu - 1)


def index_of_id(n: int) -> tuple[int, int]:
    if n < 0:
        raise ValueError(f"box id must be >= 0, got {n}")
    m = 1
    while n >= 2 ** (m + 1) - 2:
        m += 1
    return m, n - (2 ** m - 2) + 1


class Decomposition:
    """All indexed boxes with generation <= m_max, in enumeration order."""

    def __init__(self, m_max: int, generation_cap: int = DEFAULT_GENERATION_CAP):
        if m_max < 1:
            raise ValueError(f"m_max must be >= 1, got {m_max}")
        if m_max > generation_cap:
            raise ResourceError(f"m_max={m_max} exceeds the configured cap of "
                                f"{generation_cap} ({2 ** (generation_cap + 1) - 2} boxes)")
        self.m_max = m_max
        self.boxes: list[DyadicBox] = []
        for m in range(1, m_max + 1):
            for mu in range(1, 2 ** m + 1):
                self.boxes.append(box_from_index(m, mu))

    def __len__(self):
        return len(self.boxes)

    def __getitem__(self, n: int) -> DyadicBox:
        return self.boxes[n]


def enumerate_decomposition(m_max: int, generation_cap: int = DEFAULT_GENERATION_CAP):
    return Decomposition(m_max, generation_cap).boxes


def _arcs_touch(a0, a1, b0, b1) -> bool:
    """Closed angular intervals touch modulo 2*pi."""
    two_pi = 2.0 * math.pi
    for shift in (-two_pi, 0.0, two_pi):
        if b0 + shift <= a1 + _SEAM_EPS and a0 <= b1 + shift + _SEAM_EPS:
            return True
    return False


def boxes_touch(a: DyadicBox, b: DyadicBox) -> bool:
    if b.r_in > a.r_out + _SEAM_EPS or a.r_in > b.r_out + _SEAM_EPS:
        return False
    return _arcs_touch(a.theta_in, a.theta_out, b.theta_in, b.theta_out)


def neighbors(n: int, decomposition: Decomposition) -> NeighborSet:
    """All boxes whose closure meets the closure of box ``n``.

    Boxes adjacent across the m_max frontier are computed as if the
    decomposition continued; such sets carry ``frontier=True`` instead of
    being silently truncated.
    """
    if not (0 <= n < len(decomposition)):
        raise ValueError(f"box id {n} outside decomposition of size {len(decomposition)}")
    box = decomposition[n]
    m, mu = box.m, box.mu
    candidates: list[tuple[int, int]] = []
    for mm in (m - 1, m, m + 1):
        if mm < 1:
            continue
        slots = 2 ** mm
        # angular position of our box scaled to generation mm slots
        lo = math.floor((mu - 1) * 2.0 ** (mm - m)) - 1
        hi = math.ceil(mu * 2.0 ** (mm - m)) + 1
        for raw in range(lo, hi + 1):
            candidates.append((mm, (raw - 1) % slots + 1))
    seen = set()
    members = []
    for mm, uu in candidates:
        if (mm, uu) in seen:
            continue
        seen.add((mm, uu))
        other = box_from_index(mm, uu)
        if boxes_touch(box, other):
            members.append((box_id(mm, uu), other))
    members.sort(key=lambda t: t[0])
    ids = tuple(i for i, _ in members)
    region = tuple(b for _, b in members)
    return NeighborSet(n, ids, region, frontier=(m == decomposition.m_max))


def inscribed_disc(n: int, w: complex, decomposition: Decomposition):
    """A Euclidean disc D(w, R) inside the neighbor union U_n.

    Returns ``(w, R, ratio)`` with |D(w, R)| >= ratio * |D_n| and
    ratio >= INSCRIBED_RATIO_MIN.  R is a uniform safety margin: the
    R-neighborhood of the closed box lies inside U_n because edge- and
    corner-touching neighbors cover every side.
    """
    box = decomposition[n]
    rho, phi = abs(w), math.atan2(w.imag, w.real) % (2.0 * math.pi)
    if not box.contains(rho, phi):
        raise ValueError(f"point {w} does not lie in box {n} "
                         f"(m={box.m}, mu={box.mu})")
    m = box.m
    if m == 1:
        # U_1 is the full disc of radius 3/4
        radius = 0.75 - rho
    else:
        width = math.pi * 2.0 ** (1 - m)
        angular_margin = box.r_in * math.sin(min(width, 0.5 * math.pi))
        radius = min(2.0 ** (-m - 1), angular_margin)
    ratio = radius ** 2 / box_area(box)
    return w, radius, ratio


def tail_region(m: int, decomposition: Decomposition) -> TailRegion:
    if m > decomposition.m_max:
        raise ValueError(f"cutoff m={m} exceeds decomposition m_max={decomposition.m_max}")
    boxes = tuple(b for b in decomposition.boxes if b.m > m)
    return TailRegion(m, boxes)


def decomposition_to_csv(boxes: Sequence[DyadicBox], path) -> None:
    """CSV export: m, mu, r_in, r_out, theta_in, theta_out, area."""

    def fmt(x):
        return format(x, ".17g")

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "mu", "r_in", "r_out", "theta_in", "theta_out", "area"])
        for b in boxes:
            writer.writerow([b.m, b.mu, fmt(b.r_in), fmt(b.r_out),
                             fmt(b.theta_in), fmt(b.theta_out), fmt(box_area(b))])
