"""Dyadic decomposition geometry: indexing, tiling, neighbors, inscribed discs."""

import csv
import math

import numpy as np
import pytest

from bergops import geometry as geo


def test_box_from_index_values():
    b = geo.box_from_index(1, 1)
    assert b.r_in == 0.0 and b.r_out == 0.5
    assert b.theta_in == 0.0 and b.theta_out == pytest.approx(math.pi)
    b = geo.box_from_index(3, 5)
    assert b.r_in == pytest.approx(1 - 2.0 ** -2)
    assert b.r_out == pytest.approx(1 - 2.0 ** -3)
    assert b.theta_in == pytest.approx(math.pi * 4 * 2.0 ** -2)
    assert b.theta_out == pytest.approx(math.pi * 5 * 2.0 ** -2)


def test_box_from_index_rejects_bad_slots():
    with pytest.raises(ValueError, match="1..8"):
        geo.box_from_index(3, 9)
    with pytest.raises(ValueError):
        geo.box_from_index(3, 0)
    with pytest.raises(ValueError):
        geo.box_from_index(0, 1)


def test_family_box_matches_indexed():
    m = 4
    idx = geo.box_from_index(m, 1)
    fam = geo.family_box(idx.r_in, 0.0)
    assert fam.r_out == pytest.approx(idx.r_out)
    assert fam.theta_out == pytest.approx(idx.theta_out)


def test_partition_area_per_generation():
    for m_max in (1, 3, 8):
        total = sum(geo.box_area(b) for b in geo.enumerate_decomposition(m_max))
        assert total == pytest.approx((1 - 2.0 ** -m_max) ** 2, abs=1e-13)


def test_enumeration_order_and_ids():
    boxes = geo.enumerate_decomposition(4)
    assert len(boxes) == 2 ** 5 - 2
    for i, b in enumerate(boxes):
        assert geo.box_id(b.m, b.mu) == i
        assert geo.index_of_id(i) == (b.m, b.mu)


def test_random_points_covered_exactly_once():
    # the half-open boxes of one generation tile their annulus
    rng = np.random.default_rng(42)
    for m in (1, 2, 5):
        boxes = [geo.box_from_index(m, mu) for mu in range(1, 2 ** m + 1)]
        lo, hi = boxes[0].r_in, boxes[0].r_out
        for _ in range(50):
            rho = rng.uniform(lo + 1e-9, hi)
            phi = rng.uniform(0, 2 * math.pi)
            hits = [b for b in boxes if b.contains(rho, phi)]
            assert len(hits) == 1


def test_contains_wraps_angle():
    b = geo.box_from_index(2, 4)  # arc ending at 2*pi
    assert b.contains(0.6, 2 * math.pi)
    assert b.contains(0.6, 0.0)  # 0 == 2*pi mod 2*pi, seam point
    assert not b.contains(0.6, 0.1)


def test_contains_is_half_open_radially():
    b = geo.box_from_index(2, 1)
    phi = 0.1
    assert not b.contains(b.r_in, phi)
    assert b.contains(b.r_out, phi)


def test_neighbor_counts():
    dec = geo.Decomposition(6)
    n1 = geo.neighbors(0, dec)
    assert len(n1.members) == 6
    assert 0 in n1.members
    for mid in (geo.box_id(3, 2), geo.box_id(4, 7), geo.box_id(5, 1)):
        ns = geo.neighbors(mid, dec)
        assert len(ns.members) == geo.NEIGHBOR_COUNT_INTERIOR
        assert len(ns.members) <= geo.NEIGHBOR_CAP
        assert not ns.frontier
    assert geo.neighbors(geo.box_id(6, 3), dec).frontier


def test_neighbors_symmetric():
    dec = geo.Decomposition(4)
    sets = {n: set(geo.neighbors(n, dec).members) for n in range(len(dec))}
    for n, members in sets.items():
        for k in members:
            if k < len(dec):
                assert n in sets[k]


def test_neighbor_multiplicity_bounded():
    # no box belongs to more than NEIGHBOR_CAP neighbor sets
    dec = geo.Decomposition(5)
    counts = {}
    for n in range(len(dec)):
        for k in geo.neighbors(n, dec).members:
            counts[k] = counts.get(k, 0) + 1
    assert max(counts.values()) <= geo.NEIGHBOR_CAP


def test_inscribed_disc_ratio_and_membership():
    rng = np.random.default_rng(7)
    dec = geo.Decomposition(7)
    for _ in range(60):
        n = int(rng.integers(0, len(dec)))
        b = dec[n]
        rho = rng.uniform(b.r_in, b.r_out)
        if rho == b.r_in:
            continue
        phi = rng.uniform(b.theta_in, b.theta_out)
        w = rho * complex(math.cos(phi), math.sin(phi))
        centre, radius, ratio = geo.inscribed_disc(n, w, dec)
        assert centre == w
        assert radius > 0
        assert ratio >= geo.INSCRIBED_RATIO_MIN
        # boundary samples of the disc stay inside the neighbor union
        union = geo.neighbors(n, dec).union_region
        for t in np.linspace(0, 2 * math.pi, 16, endpoint=False):
            z = w + 0.999 * radius * complex(math.cos(t), math.sin(t))
            zr, zp = abs(z), math.atan2(z.imag, z.real)
            assert any(u.contains(zr, zp) for u in union), (n, w, z)


def test_inscribed_disc_rejects_outside_point():
    dec = geo.Decomposition(3)
    with pytest.raises(ValueError, match="does not lie"):
        geo.inscribed_disc(geo.box_id(2, 1), 0.9j, dec)


def test_tail_region():
    dec = geo.Decomposition(5)
    tail = geo.tail_region(3, dec)
    assert tail.inner_radius == pytest.approx(1 - 2.0 ** -3)
    assert tail.area() == pytest.approx(1 - tail.inner_radius ** 2)
    assert all(b.m > 3 for b in tail.boxes)
    assert tail.indicator(0.95) and not tail.indicator(0.5)
    with pytest.raises(ValueError):
        geo.tail_region(9, dec)


def test_generation_cap():
    with pytest.raises(geo.ResourceError):
        geo.Decomposition(25)
    with pytest.raises(geo.ResourceError):
        geo.Decomposition(5, generation_cap=4)
    geo.Decomposition(5, generation_cap=5)  # explicit opt-in works


def test_decomposition_csv(tmp_path):
    path = tmp_path / "boxes.csv"
    geo.decomposition_to_csv(geo.enumerate_decomposition(3), path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 14
    total = sum(float(r["area"]) for r in rows)
    assert total == pytest.approx((1 - 2.0 ** -3) ** 2, abs=1e-15)
