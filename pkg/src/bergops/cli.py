"""Command-line front end: batch analyses with CSV/JSON artifacts and figures.

Exit codes are stable: 0 success, 2 configuration/parse error, 3 numerical
non-convergence (artifacts are still written, flagged).  CSV is the primary
artifact; ``--format json`` mirrors the same records.  Defaults can be
supplied through ``--config FILE`` holding ``key=value`` lines; explicit
flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import averaging, geometry, operators, plotting, spectral
from .geometry import ResourceError, box_area, box_from_index
from .symbols import SymbolParseError, parse_symbol, transform

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

# documented verdict thresholds for the dichotomy pipeline
CARLESON_SLOPE_TOL = 0.10        # fitted Carleson slope within this of -b
SUPAVG_SLOPE_MARGIN = 0.15       # product slope must reach (3 - b) - margin
SUP_SLOPE_MIN = -0.05            # sup-averages must not grow as delta -> 0
SUP_BOUNDED_MAX = 2.0            # absolute cap for sup-averages on the ladder
GAMMA_ABS_SLOPE_TOL = 0.10       # |a| eigenvalue slope within this of b
GAMMA_SLOPE_MAX = 0.05           # one-sided: no growth trend for gamma_n(a)


def _parse_bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"invalid boolean {text!r}")


# the documented config schema: every key doubles as a long option
CONFIG_FIELDS = {
    "symbol": str,
    "mmax": int,
    "m_min": int,
    "nmax": int,
    "rho": float,
    "generation": int,
    "kind": str,
    "transpose": _parse_bool,
    "coeffs": str,
    "b": float,
    "tol": float,
    "cauchy_eps": float,
    "grid_angles": int,
    "slots": int,
    "zeta_grid": int,
    "output": str,
    "outdir": str,
    "format": str,
    "figures": _parse_bool,
}


@dataclass
class RunConfig:
    """Canonical record of one run: command plus the documented options."""
    command: str
    options: dict

    def canonical_text(self) -> str:
        lines = [f"command={self.command}"]
        for k in sorted(self.options):
            lines.append(f"{k}={self.options[k]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_args(cls, args):
        opts = {k: getattr(args, k) for k in CONFIG_FIELDS if hasattr(args, k)
                and getattr(args, k) is not None}
        return cls(args.command, opts)


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key == "command":
            continue
        if key not in CONFIG_FIELDS:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        try:
            out[key] = CONFIG_FIELDS[key](value.strip())
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {exc}")
    return out


def _add_common(sp):
    sp.add_argument("--config", help="key=value config file supplying defaults")
    sp.add_argument("--tol", type=float, default=1e-8, help="quadrature tolerance")
    sp.add_argument("--output", default=None,
                    help="artifact basename (default: the command name)")
    sp.add_argument("--outdir", default=".", help="directory for artifacts")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--figures", action="store_true", default=True)
    sp.add_argument("--no-figures", dest="figures", action="store_false")


def build_parser():
    p = argparse.ArgumentParser(
        prog="bergops",
        description="Toeplitz/little-Hankel operator analyses on the Bergman "
                    "space of the unit disc")
    sub = p.add_subparsers(dest="command", required=True)
    parsers = {}

    sp = sub.add_parser("decompose", help="dyadic box decomposition CSV")
    sp.add_argument("--mmax", type=int, default=4)
    _add_common(sp)
    parsers["decompose"] = sp

    sp = sub.add_parser("avg", help="averaging-functional ladder over generations")
    sp.add_argument("--symbol", default="const:1")
    sp.add_argument("--mmax", type=int, default=10)
    sp.add_argument("--m-min", dest="m_min", type=int, default=2)
    sp.add_argument("--slots", type=int, default=1,
                    help="angular slots per generation to maximize over")
    sp.add_argument("--zeta-grid", dest="zeta_grid", type=int, default=16)
    _add_common(sp)
    parsers["avg"] = sp

    sp = sub.add_parser("carleson", help="Carleson-mean ladder over generations")
    sp.add_argument("--symbol", default="const:1")
    sp.add_argument("--mmax", type=int, default=12)
    sp.add_argument("--m-min", dest="m_min", type=int, default=2)
    sp.add_argument("--slots", type=int, default=1)
    _add_common(sp)
    parsers["carleson"] = sp

    sp = sub.add_parser("apply", help="apply a truncated/series operator to a polynomial")
    sp.add_argument("--symbol", default="const:1")
    sp.add_argument("--kind", choices=("toeplitz", "hankel", "series"),
                    default="toeplitz")
    sp.add_argument("--rho", type=float, default=0.875,
                    help="truncation radius (toeplitz/hankel)")
    sp.add_argument("--generation", type=int, default=4,
                    help="box-series generation (kind=series)")
    sp.add_argument("--transpose", action="store_true")
    sp.add_argument("--coeffs", default="1",
                    help="comma-separated polynomial coefficients c0,c1,...")
    sp.add_argument("--grid-angles", dest="grid_angles", type=int, default=8)
    _add_common(sp)
    parsers["apply"] = sp

    sp = sub.add_parser("converge", help="radial-limit ladder with convergence log")
    sp.add_argument("--symbol", default="const:1")
    sp.add_argument("--kind", choices=("toeplitz", "hankel"), default="toeplitz")
    sp.add_argument("--coeffs", default="1")
    sp.add_argument("--mmax", type=int, default=20)
    sp.add_argument("--cauchy-eps", dest="cauchy_eps", type=float, default=1e-5)
    sp.add_argument("--grid-angles", dest="grid_angles", type=int, default=8)
    _add_common(sp)
    parsers["converge"] = sp

    sp = sub.add_parser("spectrum", help="diagonal eigenvalue sequence of a radial symbol")
    sp.add_argument("--symbol", default="const:1")
    sp.add_argument("--nmax", type=int, default=64)
    sp.add_argument("--log-spaced", action="store_true",
                    help="log-spaced degree ladder instead of dense 0..nmax")
    _add_common(sp)
    parsers["spectrum"] = sp

    sp = sub.add_parser("reproduce-prop15",
                        help="boundedness dichotomy pipeline for the "
                             "oscillating symbol family")
    sp.add_argument("--b", type=float, default=0.25)
    sp.add_argument("--mmax", type=int, default=12)
    sp.add_argument("--nmax", type=int, default=2000)
    _add_common(sp)
    parsers["reproduce-prop15"] = sp

    return p, parsers


def _paths(args):
    base = args.output or args.command.replace("-", "_")
    os.makedirs(args.outdir, exist_ok=True)
    return os.path.join(args.outdir, base)


def _write_rows(base, args, header, rows):
    path = base + ".csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    written = [path]
    if args.format == "json":
        jpath = base + ".json"
        with open(jpath, "w") as fh:
            json.dump([dict(zip(header, r)) for r in rows], fh, indent=1)
        written.append(jpath)
    return written


def _symbol(args):
    return parse_symbol(args.symbol)


def _coeffs(text):
    try:
        return [complex(tok.strip().replace(" ", "")) for tok in text.split(",")]
    except ValueError:
        raise ValueError(f"invalid coefficient list {text!r}; expected "
                         "comma-separated complex numbers")


def _report(written):
    for path in written:
        print(f"wrote {path}")


def cmd_decompose(args):
    boxes = geometry.enumerate_decomposition(args.mmax)
    base = _paths(args)
    geometry.decomposition_to_csv(boxes, base + ".csv")
    written = [base + ".csv"]
    if args.format == "json":
        rows = [{"m": b.m, "mu": b.mu, "r_in": b.r_in, "r_out": b.r_out,
                 "theta_in": b.theta_in, "theta_out": b.theta_out,
                 "area": box_area(b)} for b in boxes]
        with open(base + ".json", "w") as fh:
            json.dump(rows, fh, indent=1)
        written.append(base + ".json")
    if args.figures:
        written.append(plotting.plot_decomposition(boxes, base + ".png"))
    print(f"{len(boxes)} boxes up to generation {args.mmax}")
    _report(written)
    return EXIT_OK


def _ladder_boxes(m_min, m_max, slots):
    for m in range(m_min, m_max + 1):
        step = max(1, 2 ** m // max(1, slots))
        yield m, [box_from_index(m, mu) for mu in range(1, 2 ** m + 1, step)][:max(1, slots)]


def cmd_avg(args):
    a = _symbol(args)
    rows = []
    reports = []
    grid = (args.zeta_grid, args.zeta_grid)
    for m, boxes in _ladder_boxes(args.m_min, args.mmax, args.slots):
        best = None
        for b in boxes:
            rep = averaging.sup_avg(a, b, zeta_grid=grid, tol=args.tol)
            if best is None or rep.sup_over_zeta > best.sup_over_zeta:
                best = rep
        reports.append(best)
        delta = 2.0 ** (-m)
        rows.append([m, repr(delta), repr(best.sup_over_zeta),
                     repr(box_area(best.box) * best.sup_over_zeta),
                     repr(best.carleson_mean)])
    base = _paths(args)
    written = _write_rows(base, args, ["m", "delta", "sup_avg", "area_times_sup",
                                       "carleson_mean"], rows)
    deltas = [2.0 ** (-r.box.m) for r in reports]
    sups = [r.sup_over_zeta for r in reports]
    prods = [box_area(r.box) * r.sup_over_zeta for r in reports]
    try:
        slope = averaging.scaling_fit(list(zip(deltas, prods)))[0]
        print(f"slope of |D|*sup|avg| against delta: {slope:+.4f}")
    except ValueError as exc:
        print(f"no scaling fit: {exc}")
        slope = None
    if args.figures:
        series = [("|D|*sup", deltas, prods, None), ("sup", deltas, sups, None)]
        written.append(plotting.plot_loglog(series, base + ".png",
                                            title=f"averaging ladder for {a.description}"))
    _report(written)
    return EXIT_OK


def cmd_carleson(args):
    a = _symbol(args)
    rows = []
    pts = []
    for m, boxes in _ladder_boxes(args.m_min, args.mmax, args.slots):
        val = max(averaging.carleson_mean(a, b, tol=args.tol) for b in boxes)
        delta = 2.0 ** (-m)
        pts.append((delta, val))
        rows.append([m, repr(delta), repr(val)])
    base = _paths(args)
    written = _write_rows(base, args, ["m", "delta", "carleson_mean"], rows)
    try:
        fit = averaging.scaling_fit(pts)
        print(f"Carleson-mean slope against delta: {fit[0]:+.4f}")
    except ValueError as exc:
        fit = None
        print(f"no scaling fit: {exc}")
    if args.figures:
        d = [p[0] for p in pts]
        v = [p[1] for p in pts]
        series = [("M_a", d, v, fit[:2] if fit else None)]
        written.append(plotting.plot_loglog(series, base + ".png",
                                            title=f"Carleson means for {a.description}"))
    _report(written)
    return EXIT_OK


def cmd_apply(args):
    a = _symbol(args)
    f = operators.TestFunction.from_coeffs(_coeffs(args.coeffs))
    grid = operators.default_grid(n_angles=args.grid_angles)
    if args.kind == "series":
        sample = operators.series_apply(operators.TOEPLITZ, a, f,
                                        args.generation, grid, tol=args.tol)
    else:
        kind = operators.TOEPLITZ if args.kind == "toeplitz" else operators.HANKEL
        if args.transpose:
            sample = operators.transpose_apply(kind, a, args.rho, f, grid,
                                               tol=args.tol)
        elif kind == operators.TOEPLITZ:
            sample = operators.toeplitz_truncated(a, args.rho, f, grid, tol=args.tol)
        else:
            sample = operators.hankel_truncated(a, args.rho, f, grid, tol=args.tol)
    base = _paths(args)
    sample.to_csv(base + ".csv")
    written = [base + ".csv"]
    if args.format == "json":
        with open(base + ".json", "w") as fh:
            json.dump({"meta": sample.meta,
                       "records": [{"z_re": z.real, "z_im": z.imag,
                                    "value_re": v.real, "value_im": v.imag,
                                    "err": e}
                                   for z, v, e in zip(sample.grid, sample.values,
                                                      sample.per_point_error)]},
                      fh, indent=1)
        written.append(base + ".json")
    if args.figures:
        written.append(plotting.plot_field(sample, base + ".png",
                                           title=f"{args.kind} field, {a.description}"))
    _report(written)
    if not sample.converged:
        print("warning: quadrature did not reach the requested tolerance")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_converge(args):
    a = _symbol(args)
    f = operators.TestFunction.from_coeffs(_coeffs(args.coeffs))
    grid = operators.default_grid(n_angles=args.grid_angles)
    kind = operators.TOEPLITZ if args.kind == "toeplitz" else operators.HANKEL
    sample = operators.limit_apply(kind, a, f, grid, tol=args.tol,
                                   cauchy_eps=args.cauchy_eps, m_max=args.mmax)
    base = _paths(args)
    sample.to_csv(base + ".csv")
    sample.log_to_csv(base + "_log.csv")
    written = [base + ".csv", base + "_log.csv"]
    if args.format == "json":
        with open(base + ".json", "w") as fh:
            json.dump({"meta": sample.meta,
                       "log": [{"rho": r, "grid_l2_diff": d}
                               for r, d in sample.convergence_log]}, fh, indent=1)
        written.append(base + ".json")
    if args.figures:
        written.append(plotting.plot_convergence(sample.convergence_log,
                                                 base + ".png"))
    _report(written)
    if not sample.converged:
        print(f"ladder did not reach the Cauchy threshold {args.cauchy_eps} "
              f"by rho = {sample.meta['rho_final']}")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_spectrum(args):
    a = _symbol(args)
    if args.log_spaced:
        ns = [0] + spectral.log_spaced_degrees(1, args.nmax)
    else:
        ns = list(range(args.nmax + 1))
    seq = spectral.spectral_sequence(a, ns, tol=args.tol)
    base = _paths(args)
    seq.to_csv(base + ".csv")
    written = [base + ".csv"]
    if args.format == "json":
        with open(base + ".json", "w") as fh:
            json.dump({"symbol": seq.symbol,
                       "records": [{"n": int(n), "gamma_re": g.real,
                                    "gamma_im": g.imag, "err": e}
                                   for n, g, e in zip(seq.n_values, seq.gamma,
                                                      seq.errors)]}, fh, indent=1)
        written.append(base + ".json")
    if args.figures:
        written.append(plotting.plot_sequence(seq, base + ".png"))
    _report(written)
    return EXIT_OK


def cmd_reproduce(args):
    b = args.b
    if not (0.0 < b <= 0.5):
        raise ValueError(f"--b must lie in (0, 1/2], got {b}")
    a = parse_symbol(f"ab:{b}")
    a_abs = transform(a, "modulus")
    base = _paths(args)
    written = []

    m_lo = 4
    deltas, means, sups, prods = [], [], [], []
    for m in range(m_lo, args.mmax + 1):
        box = box_from_index(m, 1)
        delta = 2.0 ** (-m)
        rep = averaging.sup_avg(a, box, tol=args.tol)
        deltas.append(delta)
        means.append(averaging.carleson_mean(a, box, tol=args.tol))
        sups.append(rep.sup_over_zeta)
        prods.append(box_area(box) * rep.sup_over_zeta)

    carleson_fit = averaging.scaling_fit(list(zip(deltas, means)))
    prod_fit = averaging.scaling_fit(list(zip(deltas, prods)))
    sup_fit = averaging.scaling_fit(list(zip(deltas, sups)))

    ns = spectral.log_spaced_degrees(100, args.nmax, per_decade=12)
    seq_abs = spectral.spectral_sequence(a_abs, ns, tol=args.tol)
    seq_sgn = spectral.spectral_sequence(a, ns, tol=args.tol)
    fit_abs = spectral.growth_fit(seq_abs, (ns[0], ns[-1]))
    fit_sgn = spectral.growth_fit(seq_sgn, (ns[0], ns[-1]))

    checks = [
        ("carleson_slope", carleson_fit[0], f"within {CARLESON_SLOPE_TOL} of {-b}",
         abs(carleson_fit[0] - (-b)) <= CARLESON_SLOPE_TOL),
        ("supavg_product_slope", prod_fit[0],
         f">= {3 - b - SUPAVG_SLOPE_MARGIN:.3f}",
         prod_fit[0] >= (3.0 - b) - SUPAVG_SLOPE_MARGIN),
        ("supavg_bounded", max(sups),
         f"max <= {SUP_BOUNDED_MAX} and slope >= {SUP_SLOPE_MIN}",
         max(sups) <= SUP_BOUNDED_MAX and sup_fit[0] >= SUP_SLOPE_MIN),
        ("gamma_abs_slope", fit_abs[0], f"within {GAMMA_ABS_SLOPE_TOL} of {b}",
         abs(fit_abs[0] - b) <= GAMMA_ABS_SLOPE_TOL),
        ("gamma_slope", fit_sgn[0], f"<= {GAMMA_SLOPE_MAX} (one-sided)",
         fit_sgn[0] <= GAMMA_SLOPE_MAX),
    ]
    unbounded_trend = checks[0][3] and checks[3][3]
    bounded_trend = checks[1][3] and checks[2][3] and checks[4][3]

    rows = [[name, repr(val), threshold, "PASS" if ok else "FAIL"]
            for name, val, threshold, ok in checks]
    rows.append(["T_abs_unbounded_trend", "", "",
                 "TRUE" if unbounded_trend else "FALSE"])
    rows.append(["T_bounded_trend", "", "",
                 "TRUE" if bounded_trend else "FALSE"])
    written += _write_rows(base, args, ["check", "measured", "threshold",
                                        "verdict"], rows)
    if args.figures:
        series = [("Carleson mean", deltas, means, carleson_fit[:2]),
                  ("|D|*sup|avg|", deltas, prods, prod_fit[:2])]
        written.append(plotting.plot_loglog(series, base + "_averaging.png",
                                            title=f"averaging ladder, b={b}"))
        written.append(plotting.plot_sequence(seq_abs, base + "_gamma_abs.png"))
        written.append(plotting.plot_sequence(seq_sgn, base + "_gamma.png"))

    width = max(len(r[0]) for r in rows)
    print(f"dichotomy pipeline for b = {b}")
    for r in rows:
        measured = f"  measured {r[1]}" if r[1] else ""
        threshold = f"  ({r[2]})" if r[2] else ""
        print(f"  {r[0]:<{width}}  {r[3]}{measured}{threshold}")
    print(f"verdict: T_|a| unbounded-trend {unbounded_trend}, "
          f"T_a bounded-trend {bounded_trend}")
    _report(written)
    return EXIT_OK


_HANDLERS = {
    "decompose": cmd_decompose,
    "avg": cmd_avg,
    "carleson": cmd_carleson,
    "apply": cmd_apply,
    "converge": cmd_converge,
    "spectrum": cmd_spectrum,
    "reproduce-prop15": cmd_reproduce,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, parsers = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            with open(known.config) as fh:
                defaults = parse_config_text(fh.read())
        except (OSError, ValueError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        for sp in parsers.values():
            sp.set_defaults(**defaults)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed the message; its exit code for usage
        # errors is 2, matching the documented config-error code
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except SymbolParseError as exc:
        print(f"symbol parse error at {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
