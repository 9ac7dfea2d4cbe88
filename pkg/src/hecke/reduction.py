"""Reduction of geodesics and the periodic code / closed geodesic dictionary."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .cfmaps import expand_dual, expand_dual_info, expand_regular, expand_regular_info, nearest_star
from .codes import DUAL, BiCode, Code, cycle_matrix, evaluate, is_regular
from .context import HeckeContext, Mobius, S, classify, mobius_word, t_power, word_string
from .domain import get_partition, in_omega_star, tilde_f, tilde_f_inv
from .errors import CuspGeodesic, InternalConsistency, InvalidCode, OutOfDomain
from .geometry import GeodesicEndpoints

MAX_STEPS = 200
CUSP_DIGITS = 400


@dataclass(frozen=True)
class ReducedGeodesic:
    """Endpoints in Omega* with the group element that produced them.

    ``tokens`` spell the accumulated element as (letter, exponent)
    pairs, leftmost applied last.
    """

    endpoints: GeodesicEndpoints
    word: Mobius = field(compare=False)
    tokens: tuple = ()

    @property
    def xi(self) -> float:
        return self.endpoints.xi

    @property
    def eta(self) -> float:
        return self.endpoints.eta

    def word_text(self) -> str:
        return word_string(self.tokens)


def bicode_of(ctx: HeckeContext, xi: float, eta: float, digits: int = 40) -> BiCode:
    """Past: dual code of -eta.  Future: regular code of S xi."""
    return BiCode(past=expand_dual(ctx, -eta, digits), future=expand_regular(ctx, -1.0 / xi, digits))


def _is_cusp(ctx: HeckeContext, x: float) -> bool:
    info = expand_regular_info(ctx, x, CUSP_DIGITS)
    return info.code.is_finite and not info.exhausted


def _final_candidates(ctx: HeckeContext) -> list:
    """The elements A that finish a reduction, with their mirror images."""
    h = ctx.h
    words = [[], ["T-1"]]
    if ctx.even:
        words.append(["T-1", "S", "T-1"])
    else:
        words.append(["T-1"] + ["S", "T-1"] * h + ["S", "T-2"])
    out = []
    for w in words:
        out.append(w)
        if w:
            out.append([_flip(t) for t in w])
    return out


def _flip(tok: str) -> str:
    if tok == "S":
        return "S"
    return "T" + tok[1:].replace("-", "") if "-" in tok else tok.replace("T", "T-", 1)


def _pairs(word) -> list:
    from .context import parse_word
    return parse_word(word) if word else []


def reduce_endpoints(ctx: HeckeContext, g, max_steps: int = MAX_STEPS, normalize: bool = True) -> ReducedGeodesic:
    """Find B in G_q with (B xi, B eta) in Omega*.

    Raises :class:`CuspGeodesic` when an endpoint has a finite expansion.
    """
    xi, eta = float(g[0]), float(g[1])
    if not (math.isfinite(xi) and math.isfinite(eta)) or xi == eta:
        raise OutOfDomain("endpoints must be finite and distinct")
    for x in (xi, eta):
        if _is_cusp(ctx, x):
            raise CuspGeodesic(f"{x!r} has a finite expansion")
    part = get_partition(ctx)
    M = Mobius.identity()
    tokens: list = []
    if abs(eta) > ctx.R:
        b0 = nearest_star(ctx, eta)
        step = t_power(ctx, -b0)
        xi, eta = step(xi), step(eta)
        M = step @ M
        tokens = [("T", -b0)] + tokens
    cands = [(w, mobius_word(ctx, w) if w else Mobius.identity()) for w in _final_candidates(ctx)]
    for _ in range(max_steps):
        for w, A in cands:
            x2, y2 = A(xi), A(eta)
            if math.isfinite(x2) and math.isfinite(y2) and in_omega_star(ctx, part, x2, y2):
                rg = ReducedGeodesic(GeodesicEndpoints(x2, y2), A @ M, tuple(_pairs(w)) + tuple(tokens))
                return normalize_tail(ctx, rg) if normalize else rg
        if eta == 0:
            raise CuspGeodesic("backward endpoint reached 0")
        # one step of the extended inverse natural extension
        st = nearest_star(ctx, -1.0 / eta)
        step = t_power(ctx, -st) @ S
        xi, eta = step(xi), step(eta)
        M = step @ M
        tokens = [("T", -st), ("S", 1)] + tokens
    raise InternalConsistency(f"reduction did not finish within {max_steps} steps")


def _dual_cycle_of_minus_r(ctx: HeckeContext) -> tuple:
    return expand_dual(ctx, -ctx.r, 80).cycle


def _same_cycle(c1, c2) -> bool:
    if c1 is None or c2 is None or len(c1) != len(c2):
        return False
    n = len(c1)
    return any(c1[k:] + c1[:k] == c2 for k in range(n))


def has_minus_r_tail(ctx: HeckeContext, eta: float) -> bool:
    code = expand_dual_info(ctx, eta, 80).code
    return _same_cycle(code.cycle, _dual_cycle_of_minus_r(ctx))


def normalize_tail(ctx: HeckeContext, rg: ReducedGeodesic) -> ReducedGeodesic:
    """Move a backward endpoint with the tail of -r onto r or -R.

    A no-op unless eta's dual expansion ends in the cycle of -r.
    """
    xi, eta = rg.xi, rg.eta
    if not has_minus_r_tail(ctx, eta):
        return rg
    M, tokens = rg.word, list(rg.tokens)
    target = -ctx.r
    for _ in range(200):
        if abs(eta - target) <= 1e-9:
            break
        xi, eta, b = tilde_f_inv(ctx, xi, eta)
        step = t_power(ctx, b) @ S
        M = step @ M
        tokens = [("T", b), ("S", 1)] + tokens
    else:
        raise InternalConsistency("could not move eta onto -r")
    code = expand_regular(ctx, -1.0 / xi, 40)
    a = [code.digit(i) for i in range(1, 2 * ctx.h + 4)]
    h = ctx.h
    if ctx.even:
        if a[0] >= 2:
            w = ["T-1"]
        elif a[0] == 1 and a[1] <= -1:
            w = ["T-1", "S", "T-1"]
        else:
            w = None
    else:
        w = None
        if a[0] >= 3:
            w = ["T-1"]
        elif a[0] == 2:
            j = 0
            while j < h and a[1 + j] == 1:
                j += 1
            if j <= h - 1:
                w = ["T-1"]
            elif a[h + 1] <= -1:
                w = ["T-1"] + ["S", "T-1"] * h + ["S", "T-2"]
    part = get_partition(ctx)
    options = [w] if w else []
    options += [c for c in _final_candidates(ctx) if c]
    for cand in options:
        A = mobius_word(ctx, cand)
        x2, y2 = A(xi), A(eta)
        if in_omega_star(ctx, part, x2, y2) and not has_minus_r_tail(ctx, y2):
            return ReducedGeodesic(GeodesicEndpoints(x2, y2), A @ M, tuple(_pairs(cand)) + tuple(tokens))
    raise InternalConsistency("no normalizing element found for the -r tail")


def is_strongly_reduced(ctx: HeckeContext, xi: float, eta: float) -> bool:
    return abs(xi) > 1.5 * ctx.lam or xi * eta < 0


def strongly_reduce(ctx: HeckeContext, rg, max_steps: int = 1000) -> tuple:
    """Smallest k with F~^k(rg) strongly reduced, and that image."""
    if not isinstance(rg, ReducedGeodesic):
        rg = ReducedGeodesic(GeodesicEndpoints(float(rg[0]), float(rg[1])), Mobius.identity(), ())
    xi, eta = rg.xi, rg.eta
    M, tokens = rg.word, list(rg.tokens)
    for k in range(max_steps):
        if is_strongly_reduced(ctx, xi, eta):
            return ReducedGeodesic(GeodesicEndpoints(xi, eta), M, tuple(tokens)), k
        xi, eta, a = tilde_f(ctx, xi, eta)
        M = S @ t_power(ctx, -a) @ M
        tokens = [("S", 1), ("T", -a)] + tokens
    raise InternalConsistency("no strongly reduced image found")


def validate_cycle(ctx: HeckeContext, cycle) -> tuple:
    cyc = tuple(int(a) for a in cycle)
    if not cyc or any(a == 0 for a in cyc):
        raise InvalidCode("a cycle needs nonzero digits")
    if not is_regular(ctx, Code(0, (), cyc)):
        raise InvalidCode(f"cycle {cyc} contains a forbidden block")
    return cyc


def chordal(x: float, y: float) -> float:
    """Chordal distance on the projective line; handles large values."""
    if math.isinf(x) or math.isinf(y):
        if math.isinf(x) and math.isinf(y):
            return 0.0
        z = y if math.isinf(x) else x
        return 1.0 / math.sqrt(1.0 + z * z)
    return abs(x - y) / math.sqrt((1.0 + x * x) * (1.0 + y * y))


def hyperbolic_from_periodic(ctx: HeckeContext, cycle) -> tuple:
    """(A, xi, xi_conj) for the purely periodic code with the given cycle."""
    cyc = validate_cycle(ctx, cycle)
    A = cycle_matrix(ctx, cyc)
    cl = classify(A)
    if cl.kind != "hyperbolic":
        raise InvalidCode(f"cycle {cyc} does not give a hyperbolic element")
    xi = evaluate(ctx, Code(0, (), cyc)).value
    eta = evaluate(ctx, Code(0, (), tuple(reversed(cyc)), DUAL)).value
    xi_conj = 1.0 / eta
    # xi_conj repels under A, so it is checked with the inverse
    if chordal(A(xi), xi) > 1e-9 or chordal(A.inverse()(xi_conj), xi_conj) > 1e-9:
        raise InternalConsistency("periodic values are not fixed by the cycle word")
    return A, xi, xi_conj


def closed_geodesic(ctx: HeckeContext, cycle) -> GeodesicEndpoints:
    """Reduced representative (xi, eta) of the closed geodesic of a cycle.

    xi = S[[0; cycle]] and eta = -[[0; reversed cycle]]*, so that
    (S xi, -eta) is the periodic point of the natural extension.
    """
    cyc = validate_cycle(ctx, cycle)
    u = evaluate(ctx, Code(0, (), cyc)).value
    v = evaluate(ctx, Code(0, (), tuple(reversed(cyc)), DUAL)).value
    return GeodesicEndpoints(-1.0 / u, -v)
