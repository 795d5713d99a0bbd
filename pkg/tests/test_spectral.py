"""The radial diagonal oracle, matrix elements, sections and growth fits."""

import math
import warnings

import numpy as np
import pytest

from bergops import spectral as sp
from bergops import symbols as sym


def _gamma_pow_exact(b, n):
    # 2(n+1) * Beta(2n+2, 1-b)
    return (2 * (n + 1) * math.gamma(2 * n + 2) * math.gamma(1 - b)
            / math.gamma(2 * n + 3 - b))


def _gamma_ab_brute(b, n, osc_abs, K=60000):
    """Independent dense-trapezoid reference in the y = 1/(1-r) variable."""
    r = np.linspace(0, 0.5, 20001)
    inner = np.trapezoid(r ** (2 * n + 1), r)
    Y = 2 * math.pi * max(K, 3 * n)

    def piece(lo, hi, npts):
        y = np.linspace(lo, hi, npts)
        rr = 1 - 1 / y
        s = np.abs(np.sin(y)) if osc_abs else np.sin(y)
        H = s * y ** b / rr * y ** -2.0 * rr ** (2 * n + 1)
        return np.trapezoid(H, y)

    # dense head where the y^(b-2) envelope carries its mass, coarser tail
    osc = piece(2.0, 2000.0, 4_000_001) + piece(2000.0, Y, int((Y - 2000.0) * 30))
    tail = 0.0
    if osc_abs:
        t = np.linspace(1e-12, 1 / Y, 20001)
        tail = (2 / math.pi) * np.trapezoid(t ** -b * (1 - t) ** (2 * n), t)
    return 2 * (n + 1) * (inner + osc + tail)


def test_constant_symbol_diagonal():
    a = sym.const_symbol(2 - 1j)
    for n in (0, 1, 7, 40):
        assert sp.radial_eigenvalue(a, n, 1e-12) == pytest.approx(2 - 1j, abs=1e-10)


def test_power_symbol_matches_beta_integral():
    a = sym.power_symbol(0.25)
    for n in (0, 1, 5, 20):
        got = sp.radial_eigenvalue(a, n, 1e-11)
        assert got.real == pytest.approx(_gamma_pow_exact(0.25, n), rel=1e-8)
        assert abs(got.imag) < 1e-12


def test_truncated_constant_diagonal():
    a = sym.transform(sym.const_symbol(1), "truncate", rho=0.5)
    for n in (0, 3, 9):
        assert sp.radial_eigenvalue(a, n).real == pytest.approx(
            0.25 ** (n + 1), abs=1e-10)


def test_oscillating_symbol_against_brute_force():
    a = sym.make_ab(0.25)
    a_abs = sym.transform(a, "modulus")
    for n in (0, 10):
        got = sp.radial_eigenvalue(a, n, 1e-12)
        ref = _gamma_ab_brute(0.25, n, osc_abs=False)
        assert got.real == pytest.approx(ref, abs=5e-6)
    got = sp.radial_eigenvalue(a_abs, 10, 1e-10)
    ref = _gamma_ab_brute(0.25, 10, osc_abs=True)
    assert got.real == pytest.approx(ref, abs=1e-3)


def test_truncated_oscillating_symbol():
    a = sym.transform(sym.make_ab(0.25), "truncate", rho=0.9)

    def brute(n):
        r = np.linspace(0, 0.5, 20001)
        inner = np.trapezoid(r ** (2 * n + 1), r)
        y = np.linspace(2.0, 10.0, 400001)
        rr = 1 - 1 / y
        H = np.sin(y) * y ** 0.25 / rr * y ** -2.0 * rr ** (2 * n + 1)
        return 2 * (n + 1) * (inner + np.trapezoid(H, y))

    got = sp.radial_eigenvalue(a, 4, 1e-12)
    assert got.real == pytest.approx(brute(4), abs=1e-7)


def test_rejects_non_radial():
    a = sym.Symbol(lambda r, p: np.exp(1j * p), is_radial=False, description="e")
    with pytest.raises(ValueError, match="not radial"):
        sp.radial_eigenvalue(a, 0)
    with pytest.raises(ValueError):
        sp.radial_eigenvalue(sym.const_symbol(1), -1)


def test_real_symbols_give_real_diagonal():
    rng = np.random.default_rng(17)
    a = sym.make_ab(0.5)
    for n in rng.integers(0, 200, 8):
        assert abs(sp.radial_eigenvalue(a, int(n), 1e-10).imag) < 1e-10


def test_matrix_element_angular_orthogonality():
    a = sym.power_symbol(0.25)
    assert abs(sp.matrix_element(a, 2, 0, tol=1e-10)) < 1e-8
    assert abs(sp.matrix_element(a, 0, 3, tol=1e-10)) < 1e-8


def test_matrix_element_diagonal_matches_eigenvalue():
    a = sym.power_symbol(0.25)
    for n in (0, 2):
        me = sp.matrix_element(a, n, n, tol=1e-9)
        assert me.real == pytest.approx(_gamma_pow_exact(0.25, n), abs=1e-7)


def test_matrix_element_conjugate_coordinate():
    # a(zeta) = conj(zeta) couples e_{n+1} -> e_n only
    a = sym.Symbol(lambda r, p: (r * np.exp(-1j * p)).astype(complex),
                   is_radial=False, description="zbar")
    M = np.array([[sp.matrix_element(a, m, n, tol=1e-9) for m in range(3)]
                  for n in range(3)])
    for n in range(3):
        for m in range(3):
            if m == n + 1:
                assert abs(M[n, m]) > 0.5
            else:
                assert abs(M[n, m]) < 1e-7


def test_matrix_element_hermitian_for_real_symbols():
    a = sym.power_symbol(0.5)
    x = sp.matrix_element(a, 1, 1, tol=1e-9)
    assert x.imag == pytest.approx(0.0, abs=1e-9)


def test_finite_section_norm_identity():
    a = sym.const_symbol(1)
    for N in (1, 4, 16):
        est = sp.finite_section_norm(a, N)
        assert est.value == pytest.approx(1.0, abs=1e-8)
        assert est.converged


def test_finite_section_norm_monotone():
    a = sym.power_symbol(0.25)
    # the top two diagonal entries are close ((64/63)^(1/4)), so power
    # iteration needs a few thousand steps to resolve the gap at 1e-6
    v = [sp.finite_section_norm(a, N, iters=5000).value for N in (4, 16, 64)]
    assert v[0] < v[1] < v[2]
    # diagonal matrix: the norm is the largest diagonal entry
    diag = max(abs(sp.radial_eigenvalue(a, n)) for n in range(64))
    assert v[2] == pytest.approx(diag, rel=1e-6)


def test_finite_section_norm_validation():
    with pytest.raises(ValueError):
        sp.finite_section_norm(sym.const_symbol(1), 0)


def test_spectral_sequence_and_csv(tmp_path):
    a = sym.const_symbol(3)
    seq = sp.spectral_sequence(a, [0, 2, 5], tol=1e-10)
    assert np.allclose(seq.gamma, 3.0)
    assert seq.n_max == 5
    path = tmp_path / "seq.csv"
    seq.to_csv(path)
    import csv
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["n"]) for r in rows] == [0, 2, 5]
    assert float(rows[1]["gamma_re"]) == pytest.approx(3.0, abs=1e-9)


def test_thread_ladder_matches_serial(monkeypatch):
    a = sym.power_symbol(0.25)
    serial = sp.spectral_sequence(a, [1, 4, 9], tol=1e-10)
    monkeypatch.setenv("BERGOPS_THREADS", "3")
    parallel = sp.spectral_sequence(a, [1, 4, 9], tol=1e-10)
    assert np.array_equal(serial.gamma, parallel.gamma)


def test_growth_fit_synthetic():
    ns = np.arange(10, 200)
    seq = sp.SpectralSequence("synthetic", ns, np.sqrt(ns).astype(complex),
                              np.zeros(len(ns)), 0.0)
    slope, intercept, resid = sp.growth_fit(seq, (10, 199))
    assert slope == pytest.approx(0.5, abs=1e-10)
    assert resid < 1e-10


def test_growth_fit_excludes_zeros_with_warning():
    ns = np.arange(1, 30)
    gamma = ns.astype(complex)
    gamma[5] = 0.0
    seq = sp.SpectralSequence("z", ns, gamma, np.zeros(len(ns)), 0.0)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        slope, _, _ = sp.growth_fit(seq, (1, 29))
    assert slope == pytest.approx(1.0, abs=1e-9)
    assert any("excluding 1" in str(w.message) for w in rec)
    with pytest.raises(ValueError, match="usable"):
        sp.growth_fit(seq, (100, 200))


def test_log_spaced_degrees():
    ns = sp.log_spaced_degrees(10, 1000, per_decade=5)
    assert ns[0] == 10 and ns[-1] == 1000
    assert ns == sorted(set(ns))
    with pytest.raises(ValueError):
        sp.log_spaced_degrees(0, 10)
