"""The cross-section, its first return map and return times.

Two independent engines compute returns.  The symbolic one reads the
exponent k off the leading digits of xi and applies the natural
extension k times.  The geometric one follows the geodesic through
copies of the fundamental domain, pairing sides as it leaves, and stops
at the first entry that satisfies one of the section conditions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .cfmaps import f_q_star
from .codes import MAX_DIGIT, Code, evaluate
from .context import HeckeContext, Mobius, S, t_power
from .domain import exponent_from_code, first_return_exponent, get_partition, in_omega_star, tilde_f
from .errors import InternalConsistency, OutOfDomain, TracerBudget
from .geometry import GeodesicEndpoints, g_value, intersect_side, param, tangent_to_geodesic
from .reduction import closed_geodesic, has_minus_r_tail, is_strongly_reduced, normalize_tail, reduce_endpoints
from .reduction import strongly_reduce, validate_cycle, ReducedGeodesic

log = logging.getLogger(__name__)

ENGINES = ("symbolic", "geometric", "both")
MATCH_TOL = 1e-8


@dataclass(frozen=True)
class SectionPoint:
    """A point of the cross-section.

    ``base`` lies on the boundary of the fundamental domain and ``theta``
    is the direction there.  ``lift`` is the same point seen on the
    strongly reduced geodesic ``endpoints`` (it differs from ``base``
    only for labels +-2 and +-3).
    """

    endpoints: GeodesicEndpoints
    label: int
    base: complex
    theta: float
    lift: complex = field(default=0j)

    def to_geodesic(self, ctx: HeckeContext) -> GeodesicEndpoints:
        """Inverse of :func:`section_embed` computed from (base, theta)."""
        g, _ = tangent_to_geodesic((self.base.real, self.base.imag, self.theta))
        M = pullback_matrix(ctx, self.label)
        return GeodesicEndpoints(M(g.xi), M(g.eta))


@dataclass(frozen=True)
class ReturnRecord:
    point: SectionPoint
    k: int
    time: float
    n_formula: Optional[int] = None
    crossings: Optional[int] = None
    cumulative_time: float = 0.0


def pullback_matrix(ctx: HeckeContext, label: int) -> Mobius:
    """Element taking the geodesic through the base point to the reduced one."""
    s = 1 if label > 0 else -1
    if abs(label) <= 1:
        return Mobius.identity()
    if abs(label) == 2:
        return t_power(ctx, s) @ S
    if abs(label) == 3:
        return t_power(ctx, s)
    raise OutOfDomain(f"no section label {label}")


def direction(g, z: complex) -> float:
    """Argument of the unit tangent of g at the point z."""
    xi, eta = g
    w = z - (xi + eta) / 2.0
    d = -1j * w if xi > eta else 1j * w
    return math.atan2(d.imag, d.real)


# ---------------------------------------------------------------------------
# membership tests


def _minus_r_orbit(ctx: HeckeContext) -> list:
    pts = [-ctx.r]
    y = -ctx.r
    for _ in range(4 * ctx.kappa + 8):
        st = f_q_star(ctx, y)
        if st.digit is None:
            break
        y = st.next
        if any(abs(y - p) <= 1e-9 for p in pts):
            break
        pts.append(y)
    return pts


_ORBITS: dict = {}


def _tail_is_minus_r(ctx: HeckeContext, eta: float, steps: int = 40) -> bool:
    # cheap version of has_minus_r_tail: look for the periodic orbit of -r
    key = ctx.q
    if key not in _ORBITS:
        _ORBITS[key] = _minus_r_orbit(ctx)
    orb = _ORBITS[key]
    y = eta
    if abs(y) > ctx.R + ctx.eps:
        return has_minus_r_tail(ctx, eta)
    for _ in range(steps):
        if any(abs(y - p) <= 1e-9 for p in orb):
            return True
        if abs(y) * MAX_DIGIT * ctx.lam < 1.0:
            # the code ends here; what follows is rounding noise
            return False
        st = f_q_star(ctx, y)
        if st.digit is None:
            return False
        y = st.next
    return False


def in_upsilon(ctx: HeckeContext, xi: float, eta: float) -> bool:
    """Reduced: endpoints in Omega* and eta without the tail of -r."""
    if not (math.isfinite(xi) and math.isfinite(eta)):
        return False
    if not in_omega_star(ctx, get_partition(ctx), xi, eta):
        return False
    return not _tail_is_minus_r(ctx, eta)


def in_upsilon_s(ctx: HeckeContext, xi: float, eta: float) -> bool:
    return is_strongly_reduced(ctx, xi, eta) and in_upsilon(ctx, xi, eta)


def lifted_label(ctx: HeckeContext, g) -> Optional[int]:
    """Label +-2 or +-3 for a reduced geodesic that misses the domain itself.

    The geodesic takes label 3s (s the sign of xi, odd q >= 5 only) when
    it crosses the arc L_3s and either s*xi > lam + 1 or it misses L_2s;
    otherwise label 2s when it crosses L_2s.  This is the window
    3lam/2 < s*xi <= lam + 1 made exact: near xi = lam + 1 a reduced
    geodesic can cross L_2s and pass below the end of L_3s.
    """
    xi = g[0]
    s = 1 if xi > 0 else -1
    it2 = intersect_side(ctx, 2 * s, g)
    c2 = it2 is not None and it2.on_arc
    c3 = False
    if not ctx.even and ctx.q > 3:
        it3 = intersect_side(ctx, 3 * s, g)
        c3 = it3 is not None and it3.on_arc
    if c3 and (s * xi > ctx.lam + 1.0 or not c2):
        return 3 * s
    if c2:
        return 2 * s
    return None


def literal_window(ctx: HeckeContext, xi: float) -> bool:
    """The literal window 3lam/2 < |xi| <= lam + 1 (no upper bound for q = 3)."""
    if ctx.q == 3:
        return True
    return 1.5 * ctx.lam < abs(xi) <= ctx.lam + 1.0


# ---------------------------------------------------------------------------
# section embedding


def _boundary_crossings(ctx: HeckeContext, g) -> list:
    out = []
    for j in (-1, 0, 1):
        it = intersect_side(ctx, j, g)
        if it is not None and it.on_arc:
            out.append((param(g, it.z), j, it))
    out.sort(key=lambda t: t[0])
    return out


def section_embed(ctx: HeckeContext, g, check: bool = True) -> SectionPoint:
    """The point where a strongly reduced geodesic meets the section."""
    xi, eta = float(g[0]), float(g[1])
    if check and not in_upsilon_s(ctx, xi, eta):
        raise OutOfDomain(f"({xi!r}, {eta!r}) is not strongly reduced")
    s = 1 if xi > 0 else -1
    g = GeodesicEndpoints(xi, eta)
    cr = _boundary_crossings(ctx, g)
    if cr:
        # crossings tied with the first one (a pass through a corner)
        # count as direct entries when they lie on an entry side
        tol = 1e-9 * max(1.0, abs(cr[0][0]))
        for t, j, it in cr:
            if t <= cr[0][0] + tol and j in (-s, 0):
                return SectionPoint(g, j, it.z, direction(g, it.z), it.z)
    label = lifted_label(ctx, g)
    if label is None:
        raise InternalConsistency(f"no section point found for ({xi!r}, {eta!r})")
    it = intersect_side(ctx, label, g)
    P = pullback_matrix(ctx, label)
    Pi = P.inverse()
    base = Pi(it.z)
    gb = GeodesicEndpoints(Pi(xi), Pi(eta))
    return SectionPoint(g, label, base, direction(gb, base), it.z)


# ---------------------------------------------------------------------------
# symbolic engine


def _f_iterates(ctx, xi, eta, k):
    """k steps of the natural extension on endpoints, with sum ln|xi_j|."""
    logF = 0.0
    for _ in range(k):
        xi, eta, _a = tilde_f(ctx, xi, eta)
        logF += math.log(abs(xi))
    return xi, eta, logF


def return_exponent(ctx: HeckeContext, xi: float) -> tuple:
    """(k, n) from the leading digits of xi; also covers a0 = +-1."""
    return first_return_exponent(ctx, xi)


def first_return_symbolic(ctx: HeckeContext, g) -> ReturnRecord:
    p0 = section_embed(ctx, g)
    xi, eta = p0.endpoints
    k, n = return_exponent(ctx, xi)
    x1, y1, logF = _f_iterates(ctx, xi, eta, k)
    p1 = section_embed(ctx, (x1, y1), check=False)
    t = math.log(g_value(p0.lift, xi)) - math.log(g_value(p1.lift, x1)) + 2.0 * logF
    return ReturnRecord(p1, k, t, n_formula=n)


# ---------------------------------------------------------------------------
# geometric engine

_PAIRING = {1: -1, -1: 1, 0: 0}


def _pair(ctx, j: int) -> Mobius:
    # leaving through L_1 use T^-1, through L_-1 use T, through L_0 use S
    if j == 1:
        return t_power(ctx, -1)
    if j == -1:
        return t_power(ctx, 1)
    return S


def _return_label(ctx: HeckeContext, g, j0: int) -> Optional[tuple]:
    """Section label for an entry through L_j0, with the reduced geodesic."""
    xi, eta = g
    if in_upsilon_s(ctx, xi, eta):
        return j0, g
    if in_upsilon(ctx, xi, eta):
        return None
    if j0 in (1, -1):
        P = pullback_matrix(ctx, 2 * j0)
        h = GeodesicEndpoints(P(xi), P(eta))
        if j0 * h.xi > 0 and in_upsilon_s(ctx, *h) and lifted_label(ctx, h) == 2 * j0:
            return 2 * j0, h
    if j0 == 0 and not ctx.even and ctx.q > 3:
        for s in (1, -1):
            P = pullback_matrix(ctx, 3 * s)
            h = GeodesicEndpoints(P(xi), P(eta))
            if s * h.xi > 0 and in_upsilon_s(ctx, *h) and lifted_label(ctx, h) == 3 * s:
                return 3 * s, h
    return None


def _at_corner(ctx: HeckeContext, z: complex, tol: float = 1e-9) -> bool:
    return abs(abs(z.real) - ctx.half) <= tol and abs(z.imag - ctx.sin_pi_q) <= tol


def crossing_budget(ctx: HeckeContext, xi: float) -> int:
    """Default crossing budget: one crossing per unit of a0 plus slack."""
    return int(abs(xi) / ctx.lam) + 8 * ctx.h + 40


def trace_return(ctx: HeckeContext, g, max_crossings: Optional[int] = None) -> dict:
    """Follow the geodesic from its section point to the next return.

    Returns a dict with the new section point, the accumulated distance
    and the number of boundary crossings.
    """
    p0 = section_embed(ctx, g)
    if max_crossings is None:
        max_crossings = crossing_budget(ctx, p0.endpoints.xi)
    P = pullback_matrix(ctx, p0.label).inverse()
    cur = GeodesicEndpoints(P(p0.endpoints.xi), P(p0.endpoints.eta))
    # translations are kept as one integer power applied to the geodesic
    # at the start of the run, so long runs do not accumulate rounding
    anchor, run = cur, 0
    z_in = p0.base
    j_in = p0.label if abs(p0.label) <= 1 else (p0.label // 2 if abs(p0.label) == 2 else 0)
    t_in = param(cur, z_in)
    total = 0.0
    for n in range(1, max_crossings + 1):
        # the exit is the last crossing on another side; a pass through a
        # corner gives an exit at (almost) the entry parameter
        tol = 1e-9 * max(1.0, abs(t_in))
        cr = [c for c in _boundary_crossings(ctx, cur) if c[1] != j_in and c[0] > t_in - tol]
        if not cr:
            raise InternalConsistency("geodesic does not leave the fundamental domain")
        t_out, j, it = cr[-1]
        if t_out - t_in <= tol:
            log.info("geodesic passes through a corner at crossing %d", n)
        total += math.log(g_value(z_in, cur.xi)) - math.log(g_value(it.z, cur.xi))
        if j == 0:
            cur = GeodesicEndpoints(S(cur.xi), S(cur.eta))
            anchor, run = cur, 0
        else:
            run += -j
            T = t_power(ctx, run)
            cur = GeodesicEndpoints(T(anchor.xi), T(anchor.eta))
        j0 = j_in = _PAIRING[j]
        ent = intersect_side(ctx, j0, cur)
        z_in = ent.z if ent is not None else complex(_pair(ctx, j)(it.z))
        t_in = param(cur, z_in)
        hit = _return_label(ctx, cur, j0)
        if hit is not None:
            label, red = hit
            if _at_corner(ctx, z_in):
                # entry side is ambiguous at rho; use the canonical point
                log.info("return through a corner resolved by the canonical embedding")
                sp = section_embed(ctx, red, check=False)
            else:
                P = pullback_matrix(ctx, label)
                sp = SectionPoint(red, label, z_in, direction(cur, z_in), complex(P(z_in)))
            return {"point": sp, "time": total, "crossings": n}
    raise TracerBudget(f"no return within {max_crossings} crossings")


def _match(a, b, tol=MATCH_TOL) -> bool:
    return all(abs(x - y) <= tol * max(1.0, abs(x)) for x, y in zip(a, b))


def first_return_geometric(ctx: HeckeContext, g, max_crossings: Optional[int] = None) -> ReturnRecord:
    res = trace_return(ctx, g, max_crossings)
    xi, eta = float(g[0]), float(g[1])
    target = res["point"].endpoints
    # the power of the natural extension that lands on the returned geodesic
    x, y = xi, eta
    k = None
    for kk in range(1, 4 * ctx.h + 12):
        x, y, _ = tilde_f(ctx, x, y)
        if _match((x, y), target, 1e-7):
            k = kk
            break
    if k is None:
        raise InternalConsistency("returned geodesic is not an iterate of the natural extension")
    return ReturnRecord(res["point"], k, res["time"], crossings=res["crossings"])


def return_time(ctx: HeckeContext, g) -> float:
    return first_return_symbolic(ctx, g).time


def entry_side_table(ctx: HeckeContext, xi: float, eta: float) -> Optional[int]:
    """Side index of the section point read from the explicit inequality table.

    For xi < 0 the table is applied to (-xi, -eta) and the sign flipped.
    """
    if xi < 0:
        v = entry_side_table(ctx, -xi, -eta)
        return None if v is None else -v
    lam, R, r = ctx.lam, ctx.R, ctx.r

    def B(z):
        return (2.0 - lam * z) / (lam - 2.0 * z)

    if -R <= eta < -lam / 2:
        return -1 if xi > -B(-eta) else 0
    if -lam / 2 <= eta < -r and xi >= B(eta):
        return 0
    if 0.75 * lam - 1.0 / lam < eta < -r and 1.5 * lam < xi < B(eta) < lam + 1:
        return 2
    if lam - 1 < eta < -r and lam + 1 < xi < B(eta):
        return 3
    return None


# ---------------------------------------------------------------------------
# closed geodesics and orbits


def closed_length(ctx: HeckeContext, cycle) -> float:
    """Length of the closed geodesic with the given primitive cycle."""
    cyc = validate_cycle(ctx, cycle)
    n = len(cyc)
    total = 0.0
    for j in range(n):
        rot = cyc[j + 1:] + cyc[:j + 1]
        total += math.log(abs(evaluate(ctx, Code(0, (), rot)).value))
    return -2.0 * total


def trace_length(ctx: HeckeContext, cycle) -> float:
    """2 arccosh(|tr A|/2) for the cycle word, the comparison value."""
    from .reduction import hyperbolic_from_periodic
    A, _, _ = hyperbolic_from_periodic(ctx, cycle)
    return 2.0 * math.acosh(abs(A.trace()) / 2.0)


def prepare(ctx: HeckeContext, g) -> GeodesicEndpoints:
    """Reduce, normalize and strongly reduce arbitrary endpoints."""
    xi, eta = float(g[0]), float(g[1])
    if in_upsilon_s(ctx, xi, eta):
        return GeodesicEndpoints(xi, eta)
    if in_omega_star(ctx, get_partition(ctx), xi, eta):
        rg = normalize_tail(ctx, ReducedGeodesic(GeodesicEndpoints(xi, eta), Mobius.identity(), ()))
    else:
        rg = reduce_endpoints(ctx, (xi, eta))
    rs, _ = strongly_reduce(ctx, rg)
    return rs.endpoints


def closed_start(ctx: HeckeContext, cycle) -> GeodesicEndpoints:
    """Strongly reduced representative of the closed geodesic of a cycle."""
    return prepare(ctx, closed_geodesic(ctx, cycle))


def simulate_returns(ctx: HeckeContext, g, count: int, engine: str = "symbolic",
                     max_crossings: Optional[int] = None) -> list:
    """``count`` successive returns starting from a strongly reduced geodesic."""
    if engine not in ENGINES:
        raise OutOfDomain(f"unknown engine {engine!r}")
    cur = GeodesicEndpoints(float(g[0]), float(g[1]))
    if not in_upsilon_s(ctx, *cur):
        raise OutOfDomain("start must be strongly reduced")
    out = []
    cum = 0.0
    for _ in range(count):
        if engine == "geometric":
            rec = first_return_geometric(ctx, cur, max_crossings)
        else:
            rec = first_return_symbolic(ctx, cur)
            if engine == "both":
                geo = first_return_geometric(ctx, cur, max_crossings)
                if not agree(rec, geo):
                    raise InternalConsistency(f"engines disagree at {tuple(cur)}")
        cum += rec.time
        rec = ReturnRecord(rec.point, rec.k, rec.time, rec.n_formula, rec.crossings, cum)
        out.append(rec)
        cur = rec.point.endpoints
    return out


def agree(a: ReturnRecord, b: ReturnRecord, tol: float = MATCH_TOL) -> bool:
    return (a.k == b.k and a.point.label == b.point.label
            and _match(a.point.endpoints, b.point.endpoints, tol))


def period_returns(ctx: HeckeContext, cycle, engine: str = "symbolic") -> list:
    """Returns along one period of the closed geodesic of ``cycle``."""
    cyc = validate_cycle(ctx, cycle)
    start = closed_start(ctx, cyc)
    out = []
    cum = 0.0
    steps = 0
    cur = start
    while steps < len(cyc):
        rec = simulate_returns(ctx, cur, 1, engine)[0]
        cum += rec.time
        steps += rec.k
        out.append(ReturnRecord(rec.point, rec.k, rec.time, rec.n_formula, rec.crossings, cum))
        cur = rec.point.endpoints
    if steps != len(cyc):
        raise InternalConsistency(f"returns overshoot the period: {steps} != {len(cyc)}")
    return out
