"""Markov partitions, the planar domains and the natural extension.

Planar points (u, v) live in the Omega picture, where u is the forward
coordinate in I_q and v the backward one in I_R.  Geodesic endpoint
pairs (xi, eta) live in the Omega* picture; the two are related by
(u, v) = (-1/xi, -eta).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

from .cfmaps import expand_regular_info, f_q, f_q_star, nearest, nearest_star
from .codes import Code, cycle_matrix, digits_value
from .context import HeckeContext, Mobius, S, classify, t_power
from .errors import InternalConsistency, NoInterval, OutOfDomain, UndefinedStep

OUTSIDE = "outside"
OMEGA = "omega"
OMEGA_STRONG = "omega_strong"

ORBIT_TOL = 1e-9


class PlanarPoint(NamedTuple):
    u: float
    v: float


@dataclass(frozen=True)
class Partition:
    """Endpoints phi_0 < ... < phi_kappa = 0 and heights r_0 = -R, r_1 > ... > r_kappa = r."""

    ctx: HeckeContext
    phi: tuple
    rj: tuple

    @property
    def kappa(self) -> int:
        return self.ctx.kappa

    def interval(self, j: int) -> tuple:
        """Closure of I_j as (lo, hi)."""
        if j == 0 or abs(j) > self.kappa:
            raise NoInterval(f"no interval with index {j}")
        if j > 0:
            return self.phi[j - 1], self.phi[j]
        lo, hi = self.interval(-j)
        return -hi, -lo

    def height(self, j: int) -> tuple:
        """R_j = [r_j, R] for j > 0 and its mirror for j < 0."""
        if j == 0 or abs(j) > self.kappa:
            raise NoInterval(f"no interval with index {j}")
        if j > 0:
            return self.rj[j], self.ctx.R
        return -self.ctx.R, -self.rj[-j]

    def as_dict(self) -> dict:
        return {"q": self.ctx.q, "kappa": self.kappa, "phi": list(self.phi), "r": list(self.rj)}


def _dedupe(points, tol=ORBIT_TOL):
    out = []
    for p in points:
        if not any(abs(p - o) <= tol for o in out):
            out.append(p)
    return out


def _orbit_until_repeat(step, ctx, x, limit):
    pts = [x]
    for _ in range(limit):
        st = step(ctx, x)
        if st.digit is None:
            pts.append(0.0)
            break
        x = st.next
        if abs(x) <= 1e-9:
            x = 0.0
        if any(abs(x - p) <= ORBIT_TOL for p in pts):
            break
        pts.append(x)
        if x == 0.0:
            break
    return pts


def formula_phi(ctx: HeckeContext) -> list:
    """phi_j from their closed-form codes."""
    h = ctx.h
    if ctx.even:
        return [digits_value(ctx, [0] + [1] * (h - j)) for j in range(h + 1)]
    phi = [0.0] * (2 * h + 2)
    for j in range(h + 1):
        phi[2 * j] = digits_value(ctx, [0] + [1] * (h - j) + [2] + [1] * h)
    for j in range(1, h + 2):
        phi[2 * j - 1] = digits_value(ctx, [0] + [1] * (h + 1 - j))
    return phi


def _periodic(ctx, head, cycle) -> float:
    W = cycle_matrix(ctx, cycle)
    t = classify(W).attracting
    M = Mobius.identity()
    for a in head:
        M = M @ S @ t_power(ctx, a)
    return M(t)


def formula_rj(ctx: HeckeContext) -> list:
    """r_j (j >= 1) from their closed-form codes."""
    h = ctx.h
    if ctx.q == 3:
        return [-ctx.R, _periodic(ctx, [], [3])]
    out = [-ctx.R] + [0.0] * ctx.kappa
    if ctx.even:
        for j in range(1, h + 1):
            out[j] = _periodic(ctx, [1] * (j - 1), [2] + [1] * (h - 1))
        return out
    for j in range(h + 1):
        out[2 * j + 1] = _periodic(ctx, [1] * j + [2], [1] * (h - 1) + [2] + [1] * h + [2])
    for j in range(1, h + 1):
        out[2 * j] = _periodic(ctx, [1] * (j - 1) + [2], [1] * h + [2] + [1] * (h - 1) + [2])
    return out


def build_partition(ctx: HeckeContext, check_formulas: bool = True) -> Partition:
    """Orbits of -lam/2 under F_q and of -R under F_q*, sorted."""
    k = ctx.kappa
    phi = _dedupe(_orbit_until_repeat(f_q, ctx, -ctx.half, 4 * k + 8))
    if len(phi) != k + 1 or min(abs(p) for p in phi) > 1e-9:
        raise InternalConsistency(f"orbit of -lam/2 has {len(phi)} points, expected {k + 1}")
    phi = sorted(phi)
    phi[-1] = 0.0
    phi[0] = -ctx.half
    rorb = _dedupe(_orbit_until_repeat(f_q_star, ctx, -ctx.R, 4 * k + 8))
    if len(rorb) != k + 1:
        raise InternalConsistency(f"orbit of -R has {len(rorb)} points, expected {k + 1}")
    rest = sorted(rorb[1:], reverse=True)
    rj = [-ctx.R] + rest
    if abs(rj[-1] - ctx.r) > 1e-9:
        raise InternalConsistency("smallest point of the -R orbit is not r")
    rj[-1] = ctx.r
    part = Partition(ctx, tuple(phi), tuple(rj))
    if check_formulas:
        for name, got, want in (("phi", phi, formula_phi(ctx)), ("r", rj, formula_rj(ctx))):
            diff = max(abs(a - b) for a, b in zip(got, want))
            if diff > 1e-9:
                warnings.warn(f"q={ctx.q}: sorted {name} orbit differs from the code formulas by {diff:.3g}")
    return part


_PARTITIONS: dict = {}


def get_partition(ctx: HeckeContext) -> Partition:
    key = (ctx.q, ctx.eps)
    if key not in _PARTITIONS:
        _PARTITIONS[key] = build_partition(ctx)
    return _PARTITIONS[key]


def locate(ctx: HeckeContext, part: Partition, u: float) -> int:
    """Signed index j with u in I_j (half-open, mirrored for u > 0)."""
    if u == 0 or not abs(u) <= ctx.half + ctx.eps:
        raise NoInterval(f"u={u!r} lies in no partition interval")
    if u > 0:
        return -locate(ctx, part, -u)
    phi = part.phi
    for j in range(1, len(phi)):
        if u < phi[j]:
            return j
    raise NoInterval(f"u={u!r} lies in no partition interval")


def _near(a, b, eps):
    return abs(a - b) <= eps


def omega_detail(ctx: HeckeContext, part: Partition, p) -> tuple:
    """(region, on_boundary) for the closed domain Omega and its strong part."""
    u, v = float(p[0]), float(p[1])
    eps = ctx.eps * 100
    if not abs(u) <= ctx.half + eps or not abs(v) <= ctx.R + eps:
        return OUTSIDE, False
    boundary = _near(abs(u), ctx.half, eps) or _near(abs(v), ctx.R, eps)
    inside = False
    if abs(u) <= eps:
        inside = abs(v) <= ctx.R + eps
    else:
        for j in list(range(1, ctx.kappa + 1)) + list(range(-ctx.kappa, 0)):
            lo, hi = part.interval(j)
            if lo - eps <= u <= hi + eps:
                vlo, vhi = part.height(j)
                if vlo - eps <= v <= vhi + eps:
                    inside = True
                    if _near(v, vlo, eps) or _near(v, vhi, eps) or _near(u, lo, eps) or _near(u, hi, eps):
                        boundary = True
    if not inside:
        return OUTSIDE, False
    if abs(u) <= 2.0 / (3.0 * ctx.lam) + eps or u * v < 0:
        return OMEGA_STRONG, boundary
    return OMEGA, boundary


def omega_membership(ctx: HeckeContext, part: Partition, p) -> str:
    """'outside', 'omega' or 'omega_strong'."""
    return omega_detail(ctx, part, p)[0]


def natural_extension(ctx: HeckeContext, p) -> tuple:
    """(F_q u, -1/(v + a lam)) together with the digit a."""
    u, v = float(p[0]), float(p[1])
    if u == 0:
        raise UndefinedStep("the natural extension is undefined at u = 0")
    st = f_q(ctx, u)
    if st.digit is None:
        raise UndefinedStep("the natural extension is undefined at u = 0")
    a = st.digit
    den = v + a * ctx.lam
    if den == 0:
        raise UndefinedStep("backward coordinate hits a pole")
    return PlanarPoint(st.next, -1.0 / den), a


def natural_extension_inv(ctx: HeckeContext, p) -> tuple:
    """(-1/(u + b lam), F_q* v) together with the digit b."""
    u, v = float(p[0]), float(p[1])
    if v == 0:
        raise UndefinedStep("the inverse natural extension is undefined at v = 0")
    st = f_q_star(ctx, v)
    if st.digit is None:
        raise UndefinedStep("the inverse natural extension is undefined at v = 0")
    b = st.digit
    den = u + b * ctx.lam
    if den == 0:
        raise UndefinedStep("forward coordinate hits a pole")
    return PlanarPoint(-1.0 / den, st.next), b


# ---------------------------------------------------------------------------
# endpoint (Omega*) picture


def to_planar(xi: float, eta: float) -> PlanarPoint:
    return PlanarPoint(-1.0 / xi, -eta)


def from_planar(p) -> tuple:
    return -1.0 / p[0], -p[1]


def in_omega_star(ctx: HeckeContext, part: Partition, xi: float, eta: float) -> bool:
    if xi == 0 or math.isinf(xi):
        return False
    return omega_membership(ctx, part, to_planar(xi, eta)) != OUTSIDE


def in_omega_star_strong(ctx: HeckeContext, part: Partition, xi: float, eta: float) -> bool:
    if xi == 0 or math.isinf(xi):
        return False
    return omega_membership(ctx, part, to_planar(xi, eta)) == OMEGA_STRONG


def tilde_f(ctx: HeckeContext, xi: float, eta: float) -> tuple:
    """Natural extension on endpoints: apply S T^{-a0} with a0 = <xi>.

    Returns (xi', eta', a0).
    """
    a = nearest(ctx, xi)
    M = S @ t_power(ctx, -a)
    return M(xi), M(eta), a


def tilde_f_inv(ctx: HeckeContext, xi: float, eta: float) -> tuple:
    """Inverse on endpoints: apply T^b S with b = <1/eta>*."""
    if eta == 0:
        raise UndefinedStep("eta = 0 has no preimage")
    b = nearest_star(ctx, 1.0 / eta)
    M = t_power(ctx, b) @ S
    return M(xi), M(eta), b


def first_return_exponent(ctx: HeckeContext, xi: float, max_digits: int = 60) -> tuple:
    """(K(xi), n(xi)) read off the leading digits of xi."""
    if not abs(xi) > ctx.half:
        raise OutOfDomain(f"|xi| must exceed lam/2, got {xi!r}")
    code = expand_regular_info(ctx, xi, max_digits).code
    return exponent_from_code(ctx, code)


def exponent_from_code(ctx: HeckeContext, code: Code) -> tuple:
    a0 = code.leading
    if a0 == 0:
        raise OutOfDomain("leading digit must be nonzero")
    eps = 1 if a0 > 0 else -1
    k = 1
    limit = len(code.head) if code.is_finite else len(code.head) + len(code.cycle) + 2
    while k <= limit and code.digit(k) == eps and (not code.is_finite or k <= len(code.head)):
        k += 1
    h = ctx.h
    if not ctx.even and k == h + 1:
        n = 3 * eps
    elif ctx.even and k == h and h >= 1 and eps * code.digit(h) >= 2:
        n = 2 * eps
    elif ctx.even and k == h + 1:
        n = eps
    else:
        n = 0
    return k, n


def omega_rectangles(ctx: HeckeContext, part: Partition, strong: bool = False) -> list:
    """Omega (or its strong part) as rectangles (u_lo, u_hi, v_lo, v_hi).

    In the strong part a column with u < -2/(3 lam) keeps only v >= 0,
    and its mirror keeps only v <= 0.
    """
    cut = -2.0 / (3.0 * ctx.lam)
    left = []
    for j in range(1, ctx.kappa + 1):
        lo, hi = part.interval(j)
        vlo, vhi = part.height(j)
        if not strong or lo >= cut:
            left.append((lo, hi, vlo, vhi))
        elif hi <= cut:
            left.append((lo, hi, 0.0, vhi))
        else:
            left.append((lo, cut, 0.0, vhi))
            left.append((cut, hi, vlo, vhi))
    right = [(-b, -a, -d, -c) for a, b, c, d in left]
    return sorted(left + right)
