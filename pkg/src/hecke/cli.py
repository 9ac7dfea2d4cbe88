"""Command line front end.

Every subcommand writes JSON (a top-level ``"schema": 1`` and floats
with 17 significant digits) or CSV to stdout.  Exit status is 0 on
success, 1 on usage errors, 2 on domain errors and 3 when an internal
consistency check fails.
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
from decimal import Decimal, InvalidOperation
from typing import Optional

from . import cfmaps, codes, domain, flow, measure, reduction
from .context import DEFAULT_EPS, make_context
from .errors import HeckeError

SCHEMA = 1
# typed decimals with at least this resolution may be snapped to a landmark
SNAP_RESOLUTION = 5e-7
PRECISION_ENV = "HECKE_PRECISION"
EPS_ENV = "HECKE_EPS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# serialization


def _fmt(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return json.dumps(str(obj))
        return format(obj, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in obj) + "]"
    if hasattr(obj, "item"):
        return _fmt(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(payload: dict) -> str:
    """JSON text with the schema tag first and fixed float formatting."""
    return _fmt({"schema": SCHEMA, **payload})


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# input parsing


def _landmarks(ctx, x: float) -> list:
    k = int(abs(x) / ctx.half) + 2
    pts = [j * ctx.half for j in range(-k, k + 1)]
    pts += [ctx.R, -ctx.R, ctx.r, -ctx.r, 1.0, -1.0]
    return pts


def parse_real(ctx, text: str, exact: bool = False) -> float:
    """Parse a typed real.

    A decimal typed to at least six places is read as an interval of
    half a unit in its last place; if a landmark of the expansion maps
    (a multiple of lam/2, +-R, +-r or +-1) lies inside, it is used.
    """
    try:
        dec = Decimal(text.strip())
        x = float(dec)
    except (InvalidOperation, ValueError):
        raise UsageError(f"not a number: {text!r}")
    if not math.isfinite(x):
        raise UsageError(f"not a finite number: {text!r}")
    if exact:
        return x
    exp = dec.as_tuple().exponent
    if not isinstance(exp, int) or exp >= 0:
        return x
    tol = 0.5 * 10.0 ** exp
    if tol > SNAP_RESOLUTION:
        return x
    best = min(_landmarks(ctx, x), key=lambda p: abs(p - x))
    return best if abs(best - x) <= tol else x


def parse_point(ctx, text: str, exact: bool = False) -> float:
    """A real, or a code string such as ``"1;(3)"`` evaluated to a real."""
    if ";" in text:
        return codes.code_value(ctx, codes.parse_code(text))
    return parse_real(ctx, text, exact)


def parse_cycle(text: str) -> tuple:
    body = text.strip().strip("()")
    try:
        return tuple(int(t) for t in body.replace("(", "").replace(")", "").split(",") if t.strip())
    except ValueError:
        raise UsageError(f"cycle must be comma separated integers: {text!r}")


def _context(args):
    precision = args.precision or os.environ.get(PRECISION_ENV, "binary64")
    eps = args.eps if args.eps is not None else float(os.environ.get(EPS_ENV, DEFAULT_EPS))
    return make_context(args.q, precision=precision, eps=eps)


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(ctx, args, out):
    lam, R = ctx.lam, ctx.R
    res = {"lambda": abs(lam - 2.0 * math.cos(math.pi / ctx.q)), "r": abs(ctx.r - (R - lam))}
    if ctx.even:
        res["R_equals_1"] = abs(R - 1.0)
    else:
        res["quadratic"] = abs(R * R + (2.0 - lam) * R - 1.0)
    out.write(dumps({"q": ctx.q, "lambda": lam, "R": R, "r": ctx.r, "kappa": ctx.kappa, "h": ctx.h,
                     "parity": ctx.parity, "residuals": res}) + "\n")


def _expand(ctx, args, out, dual):
    x = parse_real(ctx, args.x, args.exact)
    fn = cfmaps.expand_dual_info if dual else cfmaps.expand_regular_info
    info = fn(ctx, x, args.digits)
    out.write(dumps({"q": ctx.q, "x": x, "flavor": "dual" if dual else "regular",
                     "code": codes.format_code(info.code), "finite": info.code.is_finite and not info.exhausted,
                     "truncated": info.exhausted}) + "\n")


def cmd_expand(ctx, args, out):
    _expand(ctx, args, out, False)


def cmd_dual(ctx, args, out):
    _expand(ctx, args, out, True)


def cmd_partition(ctx, args, out):
    part = domain.get_partition(ctx)
    out.write(dumps({"q": ctx.q, "kappa": ctx.kappa, "phi": list(part.phi), "r": list(part.rj)}) + "\n")


def _edge_points(rect, k):
    a, b, c, d = rect
    corners = [(a, c), (b, c), (b, d), (a, d), (a, c)]
    pts = []
    for (x0, y0), (x1, y1) in zip(corners, corners[1:]):
        for i in range(k):
            t = i / k
            pts.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
    return pts


# columns touching u = 0 map to infinity in the endpoint picture
OMEGA_STAR_CLIP = 1e-2


def omega_polygons(ctx, resolution: int) -> list:
    """Rows (region, piece, vertex, x, y) for Omega, Omega* and the strong part."""
    part = domain.get_partition(ctx)
    rows = []
    for region, rects in (("omega", domain.omega_rectangles(ctx, part)),
                          ("omega_strong", domain.omega_rectangles(ctx, part, strong=True))):
        for i, rect in enumerate(rects):
            for j, (u, v) in enumerate(_edge_points(rect, resolution)):
                rows.append((region, i, j, u, v))
    for i, (a, b, c, d) in enumerate(domain.omega_rectangles(ctx, part)):
        a = a if a != 0 else OMEGA_STAR_CLIP
        b = b if b != 0 else -OMEGA_STAR_CLIP
        for j, (u, v) in enumerate(_edge_points((a, b, c, d), resolution)):
            xi, eta = domain.from_planar((u, v))
            rows.append(("omega_star", i, j, xi, eta))
    return rows


def cmd_omega(ctx, args, out):
    if args.resolution < 1:
        raise UsageError("--resolution must be positive")
    out.write(_csv(omega_polygons(ctx, args.resolution), ["region", "piece", "vertex", "x", "y"]))
    if args.plot:
        from .plotting import plot_regions
        plot_regions(ctx, domain.get_partition(ctx), args.plot)


def _pairs_from_stdin(ctx, stream, exact):
    for line in csv.reader(stream):
        if not line or line[0].lstrip().startswith("#"):
            continue
        if len(line) != 2:
            raise UsageError(f"expected two values per line, got {line!r}")
        yield parse_point(ctx, line[0], exact), parse_point(ctx, line[1], exact)


def _inputs(ctx, args):
    if args.batch:
        return list(_pairs_from_stdin(ctx, sys.stdin, args.exact))
    if args.xi is None or args.eta is None:
        raise UsageError("--xi and --eta are required unless --batch is given")
    return [(parse_point(ctx, args.xi, args.exact), parse_point(ctx, args.eta, args.exact))]


def reduce_record(ctx, xi, eta, digits=40) -> dict:
    rg = reduction.reduce_endpoints(ctx, (xi, eta))
    bc = reduction.bicode_of(ctx, rg.xi, rg.eta, digits)
    return {"q": ctx.q, "input": [xi, eta], "word": rg.word_text(), "xi": rg.xi, "eta": rg.eta,
            "bicode": {"past": codes.format_code(bc.past), "future": codes.format_code(bc.future)},
            "strongly_reduced": reduction.is_strongly_reduced(ctx, rg.xi, rg.eta)}


def cmd_reduce(ctx, args, out):
    for xi, eta in _inputs(ctx, args):
        out.write(dumps(reduce_record(ctx, xi, eta, args.digits)) + "\n")


def cmd_trace(ctx, args, out):
    if args.returns < 0:
        raise UsageError("--returns must be nonnegative")
    for n, (xi, eta) in enumerate(_inputs(ctx, args)):
        start = flow.prepare(ctx, (xi, eta))
        recs = flow.simulate_returns(ctx, start, args.returns, args.engine)
        base = {"q": ctx.q, "orbit": n, "engine": args.engine}
        out.write(dumps({**base, "step": 0, "k": 0, "label": None, "xi": start.xi, "eta": start.eta,
                         "time": 0.0, "cumulative_time": 0.0}) + "\n")
        for i, r in enumerate(recs, 1):
            p = r.point
            out.write(dumps({**base, "step": i, "k": r.k, "label": p.label, "xi": p.endpoints.xi,
                             "eta": p.endpoints.eta, "time": r.time, "cumulative_time": r.cumulative_time}) + "\n")
        if args.plot and n == 0 and recs:
            from .plotting import plot_returns
            plot_returns(recs, args.plot)


def cmd_length(ctx, args, out):
    cyc = parse_cycle(args.cycle)
    length = flow.closed_length(ctx, cyc)
    oracle = flow.trace_length(ctx, cyc)
    out.write(dumps({"q": ctx.q, "cycle": list(cyc), "length": length, "trace_length": oracle,
                     "difference": abs(length - oracle)}) + "\n")


def cmd_measure(ctx, args, out):
    part = domain.get_partition(ctx)
    d = measure.density_fq(ctx, part)
    df = measure.density_factor_map(ctx, part)
    dens = df if args.map == "return_factor" else d
    if args.csv:
        out.write(_csv(measure.density_samples(dens, args.resolution), ["u", "density"]))
        return
    rep = measure.total_mass_and_constant(ctx, d)
    frep = measure.total_mass_and_constant(ctx, df)
    payload = {"q": ctx.q, "pieces": d.as_dict()["pieces"], "mass": rep.mass, "quadrature": rep.quadrature,
               "C_check": rep.C_check, "C_printed": rep.C_printed,
               "normalization": rep.normalization + " (interpretive reading of the normalizing constant)",
               "factor_map": {"pieces": df.as_dict()["pieces"], "mass": frep.mass}}
    hist = None
    if args.birkhoff:
        x0 = args.x0 if args.x0 is not None else 1.0 / math.pi
        x0 -= cfmaps.nearest(ctx, x0) * ctx.lam
        hist = measure.birkhoff_histogram(ctx, part, x0, args.birkhoff, args.bins, args.map, args.seed)
        payload["birkhoff"] = {"map": args.map, "x0": x0, "iterations": hist.iterations, "bins": args.bins,
                               "seed": args.seed, "l1": hist.l1, "restarts": hist.restarts}
    out.write(dumps(payload) + "\n")
    if args.plot:
        from .plotting import plot_density
        plot_density(dens, args.plot, hist)


COMMANDS = {
    "constants": cmd_constants, "expand": cmd_expand, "dual": cmd_dual, "partition": cmd_partition,
    "omega": cmd_omega, "reduce": cmd_reduce, "trace": cmd_trace, "length": cmd_length, "measure": cmd_measure,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hecke", description="Continued fractions and geodesics for Hecke triangle groups.")
    p.add_argument("--verbose", "-v", action="store_true", help="log diagnostics to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--q", type=int, required=True)
        sp.add_argument("--eps", type=float, default=None)
        sp.add_argument("--precision", default=None)
        return sp

    add("constants", "lambda, R, r, kappa, h and identity residuals")
    for name, what in (("expand", "regular"), ("dual", "dual regular")):
        sp = add(name, f"{what} expansion of a real")
        sp.add_argument("--x", required=True)
        sp.add_argument("--digits", type=int, default=40)
        sp.add_argument("--exact", action="store_true", help="do not snap typed decimals to landmarks")
    add("partition", "Markov partition endpoints and heights")
    sp = add("omega", "polygon vertices of the planar domains as CSV")
    sp.add_argument("--resolution", type=int, default=1, help="points per rectangle edge")
    sp.add_argument("--plot", default=None)
    for name in ("reduce", "trace"):
        sp = add(name, "reduce a geodesic" if name == "reduce" else "simulate first returns")
        sp.add_argument("--xi", default=None)
        sp.add_argument("--eta", default=None)
        sp.add_argument("--batch", action="store_true", help="read xi,eta pairs from stdin")
        sp.add_argument("--exact", action="store_true")
        if name == "reduce":
            sp.add_argument("--digits", type=int, default=40)
        else:
            sp.add_argument("--returns", type=int, default=10)
            sp.add_argument("--engine", choices=flow.ENGINES, default="symbolic")
            sp.add_argument("--plot", default=None)
    sp = add("length", "length of the closed geodesic of a cycle")
    sp.add_argument("--cycle", required=True)
    sp = add("measure", "invariant densities and masses")
    sp.add_argument("--birkhoff", type=int, default=0)
    sp.add_argument("--bins", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--x0", type=float, default=None)
    sp.add_argument("--map", choices=measure.MAPS, default="fq")
    sp.add_argument("--csv", action="store_true", help="emit density samples instead of the report")
    sp.add_argument("--resolution", type=int, default=200)
    sp.add_argument("--plot", default=None)
    return p


def run(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=err)
        ctx = _context(args)
        COMMANDS[args.command](ctx, args, out)
    except UsageError as e:
        err.write(f"usage error: {e}\n")
        return 1
    except HeckeError as e:
        err.write(dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return e.exit_code
    return 0


def main(argv: Optional[list] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
