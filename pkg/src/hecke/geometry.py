"""Hyperbolic plane computations for the Hecke fundamental domain.

Geodesics are stored by their endpoints (xi, eta) with xi the forward
end.  Distances along a geodesic come from differences of ln g where
g(z, xi) = |z - xi|^2 / Im z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .context import HeckeContext, Mobius
from .errors import InvalidParameter, OffGeodesic, OutOfDomain, VerticalGeodesic


class GeodesicEndpoints(NamedTuple):
    xi: float
    eta: float


class TangentVector(NamedTuple):
    x: float
    y: float
    theta: float


class Intersection(NamedTuple):
    z: complex
    g: float
    on_arc: bool


@dataclass(frozen=True)
class SideArc:
    """A side of the fundamental domain or one of its translates.

    ``kind`` is "vertical" (line x = a) or "circle" (center c, radius
    rho).  The bounded arc is x in [xmin, xmax] and Im z >= ymin.
    """

    id: int
    kind: str
    a: float = 0.0
    c: float = 0.0
    rho: float = 0.0
    xmin: float = -math.inf
    xmax: float = math.inf
    ymin: float = 0.0


def side(ctx: HeckeContext, j: int) -> SideArc:
    """The arc L_j, |j| <= 3.  L_1 is the vertical at +lam/2."""
    lam = ctx.lam
    s = 1 if j > 0 else -1
    if j == 0:
        return SideArc(0, "circle", c=0.0, rho=1.0, xmin=-ctx.half, xmax=ctx.half)
    if abs(j) == 1:
        return SideArc(j, "vertical", a=s * ctx.half, ymin=ctx.sin_pi_q)
    if abs(j) == 2:
        # T S L_1: center lam - 1/lam, radius 1/lam, from rho to lam
        lo, hi = ctx.half, lam
        return SideArc(j, "circle", c=s * (lam - 1.0 / lam), rho=1.0 / lam,
                       xmin=lo if s > 0 else -hi, xmax=hi if s > 0 else -lo)
    if abs(j) == 3:
        lo, hi = ctx.half, 1.5 * lam
        return SideArc(j, "circle", c=s * lam, rho=1.0,
                       xmin=lo if s > 0 else -hi, xmax=hi if s > 0 else -lo)
    raise InvalidParameter(f"no side with index {j}")


def tangent_to_geodesic(tv) -> tuple:
    """Endpoints and arclength parameter of the geodesic through (x + iy, theta)."""
    x, y, theta = float(tv[0]), float(tv[1]), float(tv[2])
    if not y > 0:
        raise OutOfDomain("base point must lie in the upper half-plane")
    c = math.cos(theta)
    if abs(c) <= 1e-12:
        raise VerticalGeodesic("vertical direction has no finite endpoints")
    if c < 0:
        # moving left: reflect in the imaginary axis
        th = math.pi - theta
        if th > math.pi / 2:
            th -= 2 * math.pi
        (xi, eta), s = tangent_to_geodesic((-x, y, th))
        return GeodesicEndpoints(-xi, -eta), s
    t = math.tan(theta)
    center = x + y * t
    rad = y / c
    s = math.log(math.tan(theta / 2 + math.pi / 4))
    return GeodesicEndpoints(center + rad, center - rad), s


def geodesic_to_tangent(g, s: float) -> TangentVector:
    """Inverse of :func:`tangent_to_geodesic`."""
    xi, eta = float(g[0]), float(g[1])
    if not (math.isfinite(xi) and math.isfinite(eta)) or xi == eta:
        raise InvalidParameter("endpoints must be finite and distinct")
    if xi < eta:
        x, y, th = geodesic_to_tangent((-xi, -eta), s)
        theta = math.pi - th
        if theta >= math.pi:
            theta -= 2 * math.pi
        return TangentVector(-x, y, theta)
    theta = 2.0 * math.atan(math.exp(s)) - math.pi / 2
    c = (xi + eta) / 2
    rad = (xi - eta) / 2
    return TangentVector(c - rad * math.sin(theta), rad * math.cos(theta), theta)


def g_value(z: complex, xi: float) -> float:
    if not z.imag > 0:
        raise OutOfDomain("g is defined only for Im z > 0")
    return abs(z - xi) ** 2 / z.imag


def on_geodesic(g, z: complex, tol: float = 1e-9) -> bool:
    xi, eta = g
    c = (xi + eta) / 2
    rad = abs(xi - eta) / 2
    return abs(abs(z - c) - rad) <= tol * max(1.0, rad)


def distance_along(g, z1: complex, z2: complex, tol: float = 1e-9) -> float:
    """Signed hyperbolic distance from z1 to z2 measured toward xi."""
    for z in (z1, z2):
        if not on_geodesic(g, z, tol):
            raise OffGeodesic(f"{z} is not on the geodesic {tuple(g)}")
    return math.log(g_value(z1, g[0])) - math.log(g_value(z2, g[0]))


def hyperbolic_distance(z1: complex, z2: complex) -> float:
    """arccosh form of the distance, used as an independent check."""
    return math.acosh(1.0 + abs(z1 - z2) ** 2 / (2.0 * z1.imag * z2.imag))


def _vertical(a: float, xi: float, eta: float):
    rad = (xi - a) * (a - eta)
    if not rad > 0:
        return None
    z = complex(a, math.sqrt(rad))
    # closed form of g at the crossing
    g = abs(xi - eta) * math.sqrt(-(xi - a) / (eta - a))
    return z, g


def _circle(c: float, rho: float, xi: float, eta: float):
    D = xi + eta - 2.0 * c
    if D == 0:
        return None
    rad = ((xi - c) ** 2 - rho * rho) * (rho * rho - (eta - c) ** 2)
    if not rad > 0:
        return None
    x = (xi * eta + rho * rho - c * c) / D
    y = math.sqrt(rad) / abs(D)
    g = abs(xi - eta) * math.sqrt(-((xi - c) ** 2 - rho * rho) / ((eta - c) ** 2 - rho * rho))
    return complex(x, y), g


def intersect_side(ctx: HeckeContext, sd, g) -> Optional[Intersection]:
    """Crossing of the full geodesic carrying ``sd`` with g, or None.

    ``sd`` may be a :class:`SideArc` or a side index.  ``on_arc`` tells
    whether the crossing lies on the bounded arc itself.
    """
    if isinstance(sd, int):
        sd = side(ctx, sd)
    xi, eta = float(g[0]), float(g[1])
    if sd.kind == "vertical":
        res = _vertical(sd.a, xi, eta)
    else:
        res = _circle(sd.c, sd.rho, xi, eta)
    if res is None:
        return None
    z, gv = res
    tol = 1e-12
    on_arc = sd.xmin - tol <= z.real <= sd.xmax + tol and z.imag >= sd.ymin - tol
    return Intersection(z, gv, on_arc)


def b_map(ctx: HeckeContext) -> Mobius:
    """B z = (lam z - 2)/(2 z - lam), the involution fixing rho."""
    return Mobius(ctx.lam, -2.0, 2.0, -ctx.lam)


def delta(ctx: HeckeContext, xi: float, eta: float, n: int = 0) -> float:
    """delta_n(xi, eta) = (eta - n lam) - B(xi - n lam)."""
    x = xi - n * ctx.lam
    y = eta - n * ctx.lam
    return y - (x * ctx.lam - 2.0) / (2.0 * x - ctx.lam)


def crosses_L1(ctx: HeckeContext, g, n: int = 0) -> tuple:
    """Whether g crosses T^n L_1, together with delta_n."""
    xi, eta = float(g[0]), float(g[1])
    a = (n + 0.5) * ctx.lam
    d = delta(ctx, xi, eta, n)
    return (eta < a < xi and d < 0), d


def apply_geodesic(M: Mobius, g) -> GeodesicEndpoints:
    return GeodesicEndpoints(M(g[0]), M(g[1]))


def param(g, z: complex) -> float:
    """Monotone position of z along g, 0 at eta and 1 at xi."""
    xi, eta = g
    return (z.real - eta) / (xi - eta)
