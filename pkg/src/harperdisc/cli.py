"""harperdisc command line: discriminant values, Sigma'(0) tables, bands, butterfly sweeps, W(d).

Global flags (--precision-bits, --format, --out, --svg) may come before or
after the subcommand. Exit codes: 0 success, 2 usage or validation error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib.metadata import PackageNotFoundError, version

import mpmath
from mpmath import mp, mpf

from . import asymptotics, bands, exactdisc
from .errors import (
    ClusteringAmbiguous,
    DecompositionError,
    DomainError,
    EdgeNotFound,
    NonConvergence,
    NotCoprime,
    ParityError,
    PrecisionTooLow,
)
from .numerics import MIN_PRECISION, working_precision

log = logging.getLogger("harperdisc")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
BUTTERFLY_MAX_N = 100
SCHEMA_VERSION = 1


class UsageError(Exception):
    """Validation failure; the message names the offending flag."""


def tool_version() -> str:
    try:
        return version("harperdisc")
    except PackageNotFoundError:
        return "unknown"


# -- formatting -----------------------------------------------------------------------


def digits_for(prec: int) -> int:
    return math.ceil(prec * 0.301)


def fmt(x, digits: int) -> str:
    """Scientific notation with an explicit exponent, e.g. -5.000e+0."""
    if x is None:
        return "nan"
    if isinstance(x, (bool, int, str)):
        return str(x)
    # mpf(x) would round to the ambient 53 bits; keep extended values as they are
    x = x if isinstance(x, mpf) else mpf(x)
    s = mpmath.nstr(x, digits, min_fixed=mp.inf, max_fixed=-mp.inf, strip_zeros=False)
    if "e" not in s:
        s += "e+0"
    return s


class Table:
    def __init__(self, name: str, columns: list, digits: int, meta: dict):
        self.name = name
        self.columns = columns
        self.digits = digits
        self.meta = meta
        self.rows: list = []
        self.summary: list = []
        # digits beyond this absolute tolerance are not certified
        self.abs_tol = None

    def add(self, *values):
        self.rows.append(list(values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"#schema={self.name}/v{SCHEMA_VERSION}:{','.join(self.columns)}\n")
        buf.write(f"#digits={self.digits}\n")
        if self.abs_tol is not None:
            buf.write(f"#abs_tol={fmt(self.abs_tol, 4)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(v, self.digits) for v in row])
        for item in self.summary:
            buf.write("#summary " + " ".join(f"{k}={fmt(v, 8)}" for k, v in item.items()) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        meta = dict(self.meta)
        if self.abs_tol is not None:
            meta["abs_tol"] = fmt(self.abs_tol, 4)
        doc = {
            "meta": dict(meta, schema=f"{self.name}/v{SCHEMA_VERSION}", columns=self.columns, digits=self.digits),
            "rows": [dict(zip(self.columns, (fmt(v, self.digits) if _is_real(v) else v for v in row))) for row in self.rows],
        }
        if self.summary:
            doc["summary"] = [
                {k: fmt(v, self.digits) if _is_real(v) else v for k, v in item.items()} for item in self.summary
            ]
        return json.dumps(doc, indent=2) + "\n"


def _is_real(v) -> bool:
    return isinstance(v, mpf) or (isinstance(v, float) and not isinstance(v, bool))


def emit(args, table: Table, svg: str | None = None):
    text = table.to_json() if args.format == "json" else table.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.svg and svg is not None:
        path = (os.path.splitext(args.out)[0] if args.out else "harperdisc") + ".svg"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg)


# -- SVG --------------------------------------------------------------------------------

SVG_W, SVG_H = 1000, 600


def _ex(x) -> float:
    """Energy in [-4, 4] to a horizontal pixel coordinate."""
    return 50 + (float(x) + 4) / 8 * (SVG_W - 100)


def _svg(body: list, title: str) -> str:
    axis = [
        f'<line x1="{_ex(-4):.2f}" y1="{SVG_H - 40}" x2="{_ex(4):.2f}" y2="{SVG_H - 40}" stroke="black"/>',
    ]
    for e in range(-4, 5):
        axis.append(f'<text x="{_ex(e):.2f}" y="{SVG_H - 20}" font-size="12" text-anchor="middle">{e}</text>')
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_W} {SVG_H}" width="{SVG_W}" height="{SVG_H}">\n'
        f'<title>{title}</title>\n' + "\n".join(axis + body) + "\n</svg>\n"
    )


def bands_svg(P, Q, band_list) -> str:
    body = []
    for b in band_list:
        x0, x1 = _ex(b.lo), _ex(b.hi)
        body.append(f'<rect x="{x0:.3f}" y="280" width="{max(x1 - x0, 0.5):.3f}" height="40" fill="steelblue"/>')
    return _svg(body, f"bands P={P} Q={Q}")


def butterfly_svg(results) -> str:
    body = []
    for P, Q, edges in results:
        y = 20 + (1 - P / Q) * (SVG_H - 80)
        for lo, hi in edges:
            x0, x1 = _ex(lo), _ex(hi)
            body.append(f'<rect x="{x0:.3f}" y="{y - 1:.2f}" width="{max(x1 - x0, 0.5):.3f}" height="2" fill="black"/>')
    return _svg(body, "butterfly")


# -- validation -------------------------------------------------------------------------


def _precision(args, Q: int) -> int:
    if args.precision_bits is None:
        return working_precision(Q)
    return args.precision_bits


def _check_pq(P: int, Q: int, need_odd: bool = False, flag_q: str = "--q"):
    if Q < 1:
        raise UsageError(f"{flag_q} must be >= 1, got {Q}")
    if P < 1:
        raise UsageError(f"--p must be >= 1, got {P}")
    if math.gcd(P, Q) != 1:
        raise UsageError(f"--p {P} and {flag_q} {Q} must be coprime")
    if need_odd and Q % 2 == 0:
        raise UsageError(f"{flag_q} must be odd for this command, got {Q}")


def _route(name: str | None):
    if name is None:
        return None
    return {"det": exactdisc.Route.determinant, "transfer": exactdisc.Route.transfer_matrix}[name]


# -- commands ---------------------------------------------------------------------------


def cmd_disc_eval(args) -> Table:
    _check_pq(args.p, args.q)
    route = _route(args.route)
    if route is exactdisc.Route.determinant and args.q % 2 == 0:
        raise UsageError("--route det needs an odd --q; use --route transfer")
    prec = _precision(args, args.q)
    model = exactdisc.build_model(args.p, args.q, prec)
    table = Table("disc", ["x", "sigma", "sigma_prime", "route"], digits_for(prec), _meta(args, prec))
    with mp.workprec(prec):
        for xs in args.x:
            try:
                x = mpf(xs)
            except (ValueError, TypeError):
                raise UsageError(f"--x value {xs!r} is not a number")
            if route is exactdisc.Route.transfer_matrix or (route is None and args.q % 2 == 0):
                v = exactdisc.sigma_transfer(model, x, args.theta)
            else:
                v = exactdisc.sigma_det(model, x)
            table.add(v.x, v.sigma, v.sigma_prime, v.route.value)
    return table


def cmd_dprime(args) -> Table:
    P = args.p
    prec = args.precision_bits or 128
    for Q in args.q:
        _check_pq(P, Q, need_odd=True)
    cols = ["P", "Q", "s", "exact", "asym", "abs_error", "rel_error"]
    table = Table("dprime", cols, digits_for(min(prec, asymptotics.ASYM_PRECISION)), _meta(args, prec))
    by_s: dict = {}
    for Q in sorted(args.q):
        flux = exactdisc.flux_ratio(P, Q, prec)
        exact = exactdisc.sigma_prime_zero_exact(flux)
        if flux.r >= 1:
            asym = asymptotics.sigma_prime_zero_asym(flux)
        elif P == 1:
            asym = asymptotics.sigma_prime_zero_asym_p1(Q)
        else:
            asym = None
        if asym is None:
            table.add(P, Q, flux.s, exact, None, None, None)
            continue
        with mp.workprec(prec):
            err = abs(exact - asym)
            table.add(P, Q, flux.s, exact, asym, err, err / max(1, abs(exact)))
        by_s.setdefault(flux.s, []).append(err)
    for s, errs in sorted(by_s.items()):
        table.summary.append(
            {"s": s, "count": len(errs), "decreasing": all(b < a for a, b in zip(errs, errs[1:]))}
        )
    return table


def _compute_bands(P: int, Q: int, prec: int, edge_tol):
    model = exactdisc.build_model(P, Q, prec)
    route = exactdisc.Route.determinant if Q % 2 else exactdisc.Route.transfer_matrix
    return bands.compute_bands(model, edge_tol, route=route)


def cmd_bands(args) -> tuple:
    _check_pq(args.p, args.q)
    prec = _precision(args, args.q)
    edge_tol = _edge_tol(args)
    summary = _compute_bands(args.p, args.q, prec, edge_tol)
    out_prec = summary.precision_bits
    table = Table("bands", ["index", "lo", "hi", "width", "cluster_id"], digits_for(out_prec), _meta(args, out_prec))
    for b in summary.bands:
        table.add(b.index, b.lo, b.hi, b.width, b.cluster_id)
    table.abs_tol = edge_tol if edge_tol is not None else mpf(2) ** (-out_prec // 2)
    table.summary.append({"total_width": summary.total_width, "centermost_width": summary.centermost_width})
    return table, bands_svg(args.p, args.q, summary.bands)


def _edge_tol(args):
    if args.edge_tol is None:
        return None
    try:
        tol = mpf(args.edge_tol)
    except (ValueError, TypeError):
        raise UsageError(f"--edge-tol {args.edge_tol!r} is not a number")
    if not tol > 0:
        raise UsageError("--edge-tol must be positive")
    return tol


def butterfly_pairs(N: int) -> list:
    """All coprime (P, Q) with 1 <= P <= Q <= N, sorted by Q then P."""
    return [(P, Q) for Q in range(1, N + 1) for P in range(1, Q + 1) if math.gcd(P, Q) == 1]


def _butterfly_task(task):
    P, Q, prec = task
    try:
        summary = _compute_bands(P, Q, prec or working_precision(Q), None)
        with mp.workprec(summary.precision_bits):
            return P, Q, [(b.lo, b.hi) for b in summary.bands], None
    except (ArithmeticError, ValueError) as exc:
        return P, Q, None, f"{type(exc).__name__}: {exc}"


def cmd_butterfly(args) -> tuple:
    N = args.n
    if not 1 <= N <= BUTTERFLY_MAX_N:
        raise UsageError(f"--n must lie in [1, {BUTTERFLY_MAX_N}], got {N}")
    tasks = [(P, Q, args.precision_bits) for P, Q in butterfly_pairs(N)]
    workers = args.workers or os.cpu_count() or 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_butterfly_task, tasks))
    else:
        results = [_butterfly_task(t) for t in tasks]
    results.sort(key=lambda r: (r[1], r[0]))
    prec = args.precision_bits or working_precision(N)
    table = Table("butterfly", ["P", "Q", "band_index", "lo", "hi"], digits_for(prec), _meta(args, prec))
    failed = []
    ok = []
    for P, Q, edges, err in results:
        if err is not None:
            log.error("P=%d Q=%d failed: %s", P, Q, err)
            failed.append((P, Q))
            continue
        ok.append((P, Q, edges))
        for k, (lo, hi) in enumerate(edges, 1):
            table.add(P, Q, k, lo, hi)
    table.meta["failed_pairs"] = [list(p) for p in failed]
    return table, butterfly_svg(ok), bool(failed)


def cmd_hausdorff(args) -> Table:
    P = args.p
    ds = []
    for d in args.d:
        try:
            dv = mpf(d)
        except (ValueError, TypeError):
            raise UsageError(f"--d value {d!r} is not a number")
        if not 0 < dv <= 1:
            raise UsageError(f"--d values must lie in (0, 1], got {d}")
        ds.append(dv)
    Qs = sorted(args.q)
    for Q in Qs:
        _check_pq(P, Q)
        if Q < 3:
            raise UsageError(f"--q values must be >= 3, got {Q}")
    cols = ["Q"] + [f"W({mpmath.nstr(d, 6)})" for d in ds] + [f"W_asym({mpmath.nstr(d, 6)})" for d in ds]
    prec = args.precision_bits or 128
    table = Table("hausdorff", cols, digits_for(min(prec, 128)), _meta(args, prec))
    columns = {d: [] for d in ds}
    for Q in Qs:
        summary = _compute_bands(P, Q, args.precision_bits or working_precision(Q), _edge_tol(args))
        exact = [bands.hausdorff_wd(summary, d) for d in ds]
        for d, w in zip(ds, exact):
            columns[d].append(w)
        table.add(Q, *exact, *[asymptotics.w_d_asym(Q, d) for d in ds])
    for d in ds:
        ws = columns[d]
        table.summary.append({"d": d, "decreasing": all(b < a for a, b in zip(ws, ws[1:]))})
    return table


def _meta(args, prec: int) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    return {"tool": "harperdisc", "version": tool_version(), "precision_bits": prec, "config": cfg}


# -- parser ---------------------------------------------------------------------------


def _global_flags(parser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--precision-bits", type=int, default=default, help="working precision in bits (>= 53)")
    parser.add_argument(
        "--format", choices=("csv", "json"), default=argparse.SUPPRESS if suppress else "csv", help="output format"
    )
    parser.add_argument("--out", default=default, metavar="PATH", help="write output here instead of stdout")
    parser.add_argument(
        "--svg", action="store_true", default=argparse.SUPPRESS if suppress else False, help="also write an SVG plot"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harperdisc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    disc = sub.add_parser("disc", help="evaluate the discriminant")
    disc_sub = disc.add_subparsers(dest="disc_command", required=True)
    ev = disc_sub.add_parser("eval", parents=[common], help="Sigma and Sigma' at given points")
    ev.add_argument("--p", type=int, required=True)
    ev.add_argument("--q", type=int, required=True)
    ev.add_argument("--x", nargs="+", required=True, help="evaluation points (decimal strings)")
    ev.add_argument("--route", choices=("det", "transfer"), default=None)
    ev.add_argument("--theta", default=None, help="phase for the transfer route (default pi/2Q)")
    ev.set_defaults(func="disc_eval")

    dp = sub.add_parser("dprime", parents=[common], help="exact vs asymptotic Sigma'(0)")
    dp.add_argument("--p", type=int, default=1)
    dp.add_argument("--q", type=int, nargs="+", required=True)
    dp.set_defaults(func="dprime")

    bd = sub.add_parser("bands", parents=[common], help="exact band edges")
    bd.add_argument("--p", type=int, required=True)
    bd.add_argument("--q", type=int, required=True)
    bd.add_argument("--edge-tol", default=None, help="absolute edge tolerance (decimal string)")
    bd.set_defaults(func="bands")

    bf = sub.add_parser("butterfly", parents=[common], help="bands for all coprime P/Q with Q <= N")
    bf.add_argument("--n", type=int, required=True)
    bf.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")
    bf.set_defaults(func="butterfly")

    hd = sub.add_parser("hausdorff", parents=[common], help="W(d) from exact bands vs asymptotics")
    hd.add_argument("--p", type=int, default=1)
    hd.add_argument("--q", type=int, nargs="+", required=True)
    hd.add_argument("--d", nargs="+", default=["0.25", "0.5", "0.75", "1"])
    hd.add_argument("--edge-tol", default=None)
    hd.set_defaults(func="hausdorff")
    return parser


def run(args) -> int:
    if args.precision_bits is not None and args.precision_bits < MIN_PRECISION:
        raise UsageError(f"--precision-bits must be >= {MIN_PRECISION}, got {args.precision_bits}")
    failed = False
    svg = None
    if args.func == "disc_eval":
        table = cmd_disc_eval(args)
    elif args.func == "dprime":
        table = cmd_dprime(args)
    elif args.func == "bands":
        table, svg = cmd_bands(args)
    elif args.func == "butterfly":
        table, svg, failed = cmd_butterfly(args)
    else:
        table = cmd_hausdorff(args)
    emit(args, table, svg)
    return EXIT_NUMERIC if failed else EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="harperdisc: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (NotCoprime, ParityError, DecompositionError, DomainError, ClusteringAmbiguous) as exc:
        print(f"harperdisc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EdgeNotFound, NonConvergence, PrecisionTooLow, ArithmeticError) as exc:
        print(f"harperdisc: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
