"""Invariant densities of the interval maps and their validation.

The planar density 2/(1-uv)^2 on Omega projects onto the u-axis by
integrating over each vertical fiber [lower, upper]:

    2 (upper - lower) / ((1 - upper u)(1 - lower u))

with antiderivative 2 ln((1 - lower u)/(1 - upper u)).  The F_q density
uses the full fibers of Omega; the density of the return factor uses
the fibers of the strong part.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import integrate

from .cfmaps import f_q
from .context import HeckeContext
from .domain import Partition, natural_extension, omega_rectangles
from .errors import InvalidParameter, OutOfDomain, Singularity

log = logging.getLogger(__name__)

MAPS = ("fq", "return_factor")
# digits summed term by term before the tail is estimated
BRANCH_CUTOFF = 200


class Piece(NamedTuple):
    a: float
    b: float
    lower: float
    upper: float

    def density(self, u):
        return 2.0 * (self.upper - self.lower) / ((1.0 - self.upper * u) * (1.0 - self.lower * u))

    def primitive(self, u):
        return 2.0 * (math.log1p(-self.lower * u) - math.log1p(-self.upper * u))

    def mass(self, lo=None, hi=None) -> float:
        lo = self.a if lo is None else max(lo, self.a)
        hi = self.b if hi is None else min(hi, self.b)
        if hi <= lo:
            return 0.0
        return self.primitive(hi) - self.primitive(lo)


@dataclass(frozen=True)
class PiecewiseDensity:
    """A density on I_q made of fiber integrals of the planar density."""

    pieces: tuple
    total_mass: float
    name: str = "fq"

    def __call__(self, u: float) -> float:
        for p in self.pieces:
            if p.a <= u <= p.b:
                return p.density(u)
        raise OutOfDomain(f"u={u!r} is outside the support")

    def mass(self, lo: float, hi: float) -> float:
        """Measure of [lo, hi] (zero if the interval is empty)."""
        if hi <= lo:
            return 0.0
        return sum(p.mass(lo, hi) for p in self.pieces)

    def cdf(self, u: float) -> float:
        return self.mass(self.pieces[0].a, u)

    def values(self, us) -> np.ndarray:
        return np.array([self(float(u)) for u in us])

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "pieces": [{"a": p.a, "b": p.b, "lower": p.lower, "upper": p.upper} for p in self.pieces],
            "total_mass": self.total_mass,
        }


def planar_density(p) -> float:
    u, v = float(p[0]), float(p[1])
    d = 1.0 - u * v
    if d == 0:
        raise Singularity("the planar density is singular on uv = 1")
    return 2.0 / (d * d)


def planar_invariance_residual(ctx: HeckeContext, p) -> float:
    """|rho(F p) |det DF(p)| - rho(p)| for one natural extension step."""
    (u2, v2), a = natural_extension(ctx, p)
    u, v = float(p[0]), float(p[1])
    jac = 1.0 / (u * u * (v + a * ctx.lam) ** 2)
    return abs(planar_density((u2, v2)) * jac - planar_density((u, v)))


def _build(pieces, name) -> PiecewiseDensity:
    pieces = tuple(sorted(pieces, key=lambda p: p.a))
    return PiecewiseDensity(pieces, sum(p.mass() for p in pieces), name)


def density_fq(ctx: HeckeContext, part: Partition) -> PiecewiseDensity:
    """Invariant density of F_q: the fiber over I_j is [r_j, R]."""
    return _build([Piece(*rect) for rect in omega_rectangles(ctx, part)], "fq")


def density_factor_map(ctx: HeckeContext, part: Partition) -> PiecewiseDensity:
    """Invariant density of the return factor u -> F_q^K(u) u.

    Over u < -2/(3 lam) only the half v > 0 of the fiber is strong, so
    the fiber there is [0, R]; elsewhere it is the full fiber.
    """
    return _build([Piece(*rect) for rect in omega_rectangles(ctx, part, strong=True)], "return_factor")


def strong_split(ctx: HeckeContext) -> float:
    """Left end of the part of I_q where the whole fiber is strong."""
    return -2.0 / (3.0 * ctx.lam)


def printed_constant_inverse(ctx: HeckeContext) -> float:
    """C^-1: ln((1 + cos pi/q)/sin pi/q) for even q and ln(1 + R) for odd q."""
    if ctx.even:
        return math.log((1.0 + math.cos(math.pi / ctx.q)) / math.sin(math.pi / ctx.q))
    return math.log(1.0 + ctx.R)


class MassReport(NamedTuple):
    mass: float
    quadrature: float
    C_check: float
    C_printed: float
    normalization: str


def total_mass_and_constant(ctx: HeckeContext, d: PiecewiseDensity) -> MassReport:
    """Closed-form mass, its quadrature cross-check and C = 4/mass.

    The returned C_check equals the printed C only for the F_q density;
    the normalizing constant is read as 1/c = C/4.
    """
    quad = 0.0
    for p in d.pieces:
        val, _ = integrate.quad(p.density, p.a, p.b, epsabs=1e-14, epsrel=1e-13)
        quad += val
    if abs(quad - d.total_mass) > 1e-9 * max(1.0, d.total_mass):
        log.warning("quadrature %.17g differs from the closed form %.17g", quad, d.total_mass)
    return MassReport(d.total_mass, quad, 4.0 / d.total_mass, 1.0 / printed_constant_inverse(ctx),
                      "mass = 4 / C, so the probability density is (C/4) times the density")


# ---------------------------------------------------------------------------
# preimages under the digit branches


def _branch(ctx: HeckeContext, a: int, t: float) -> float:
    return -1.0 / (t + a * ctx.lam)


def _branch_image(ctx: HeckeContext, a: int, lo: float, hi: float) -> Optional[tuple]:
    """u-interval of points with first digit a and F_q u in [lo, hi]."""
    lo, hi = max(lo, -ctx.half), min(hi, ctx.half)
    # -1/u = t + a lam must have modulus at least 2/lam
    bound = 2.0 / ctx.lam
    if a > 0:
        lo = max(lo, bound - a * ctx.lam)
    else:
        hi = min(hi, -bound - a * ctx.lam)
    if hi <= lo:
        return None
    u1, u2 = _branch(ctx, a, lo), _branch(ctx, a, hi)
    return (min(u1, u2), max(u1, u2))


def _tail(ctx, d: PiecewiseDensity, sign: int, lo: float, hi: float, n: int) -> float:
    """Sum over digits sign*a, a > n, by the Euler-Maclaurin formula."""
    def f(x):
        u1 = -1.0 / (lo + sign * x * ctx.lam)
        u2 = -1.0 / (hi + sign * x * ctx.lam)
        return d.mass(min(u1, u2), max(u1, u2))
    m = n + 1
    body, _ = integrate.quad(f, m, np.inf, epsabs=1e-15, epsrel=1e-12, limit=200)
    step = 1e-3 * m
    df = (f(m + step) - f(m - step)) / (2.0 * step)
    return body + f(m) / 2.0 - df / 12.0


def branch_preimage_mass(ctx: HeckeContext, d: PiecewiseDensity, intervals, sign: int,
                         cutoff: int = BRANCH_CUTOFF) -> float:
    """d-mass of all u with sign(first digit) = sign and F_q u in the intervals."""
    total = 0.0
    for lo, hi in intervals:
        for a in range(1, cutoff + 1):
            iv = _branch_image(ctx, sign * a, lo, hi)
            if iv is not None:
                total += d.mass(*iv)
        total += _tail(ctx, d, sign, max(lo, -ctx.half), min(hi, ctx.half), cutoff)
    return total


def preimage_mass_fq(ctx: HeckeContext, d: PiecewiseDensity, lo: float, hi: float) -> float:
    return sum(branch_preimage_mass(ctx, d, [(lo, hi)], s) for s in (1, -1))


def _subtract(intervals, cut) -> list:
    out = []
    clo, chi = cut
    for lo, hi in intervals:
        if hi <= clo or lo >= chi:
            out.append((lo, hi))
            continue
        if lo < clo:
            out.append((lo, clo))
        if hi > chi:
            out.append((chi, hi))
    return out


def unit_cylinder(ctx: HeckeContext, eps: int) -> tuple:
    """Points of I_q whose first digit is eps = +1 or -1."""
    cut = strong_split(ctx)
    return (-ctx.half, cut) if eps > 0 else (-cut, ctx.half)


def preimage_mass_factor(ctx: HeckeContext, d: PiecewiseDensity, lo: float, hi: float,
                         max_run: int = 64) -> float:
    """d-mass of {u : F_q^K(u) u in [lo, hi]}.

    A point with digits a0, eps^m, b (eps = sign a0, b != eps) returns
    after K = m + 1 steps, so the preimage is enumerated over a0 and m.
    """
    total = 0.0
    for eps in (1, -1):
        ys = _subtract([(lo, hi)], unit_cylinder(ctx, eps))
        for _ in range(max_run):
            ys = [iv for iv in ys if iv[1] > iv[0]]
            if not ys:
                break
            total += branch_preimage_mass(ctx, d, ys, eps)
            nxt = []
            for y0, y1 in ys:
                iv = _branch_image(ctx, eps, y0, y1)
                if iv is not None:
                    nxt.append(iv)
            ys = nxt
    return total


def pushforward_residual(ctx: HeckeContext, d: PiecewiseDensity, lo: float, hi: float) -> float:
    """|mu(T^-1 [lo, hi]) - mu([lo, hi])| for the map the density belongs to."""
    if d.name == "return_factor":
        pre = preimage_mass_factor(ctx, d, lo, hi)
    else:
        pre = preimage_mass_fq(ctx, d, lo, hi)
    return abs(pre - d.mass(lo, hi))


# ---------------------------------------------------------------------------
# empirical densities


class Histogram(NamedTuple):
    edges: np.ndarray
    counts: np.ndarray
    expected: np.ndarray
    l1: float
    iterations: int
    restarts: int


def return_factor_step(ctx: HeckeContext, u: float) -> Optional[float]:
    """F_q^K(u) u, or None when the orbit reaches 0."""
    st = f_q(ctx, u)
    if st.digit is None:
        return None
    eps = 1 if st.digit > 0 else -1
    x = st.next
    while True:
        nx = f_q(ctx, x)
        if nx.digit is None:
            return None
        if nx.digit != eps:
            return x
        x = nx.next


def _fq_step(ctx: HeckeContext, u: float) -> Optional[float]:
    st = f_q(ctx, u)
    return None if st.digit is None else st.next


def birkhoff_histogram(ctx: HeckeContext, part: Partition, x0: float, iterations: int,
                       bins: int = 50, map: str = "fq", seed: Optional[int] = 0) -> Histogram:
    """Occupation histogram of one orbit and its L1 distance to the density.

    When the orbit lands on 0 it is restarted at a seeded random point;
    the number of restarts is reported.
    """
    if map not in MAPS:
        raise InvalidParameter(f"map must be one of {MAPS}")
    if bins < 1 or iterations < 0:
        raise InvalidParameter("bins must be positive and iterations nonnegative")
    d = density_fq(ctx, part) if map == "fq" else density_factor_map(ctx, part)
    step = _fq_step if map == "fq" else return_factor_step
    edges = np.linspace(-ctx.half, ctx.half, bins + 1)
    expected = np.array([d.mass(edges[i], edges[i + 1]) for i in range(bins)]) / d.total_mass
    counts = np.zeros(bins, dtype=np.int64)
    if iterations == 0:
        return Histogram(edges, counts, expected, 1.0, 0, 0)
    rng = np.random.default_rng(seed)
    x = min(max(float(x0), -ctx.half), ctx.half)
    width = ctx.lam / bins
    restarts = 0
    for _ in range(iterations):
        nxt = step(ctx, x)
        if nxt is None or nxt == 0.0:
            restarts += 1
            nxt = float(rng.uniform(-ctx.half, ctx.half))
        x = nxt
        counts[min(bins - 1, int((x + ctx.half) / width))] += 1
    if restarts:
        log.info("orbit reached 0 and was restarted %d times", restarts)
    l1 = float(np.abs(counts / iterations - expected).sum())
    return Histogram(edges, counts, expected, l1, iterations, restarts)


def density_samples(d: PiecewiseDensity, resolution: int) -> list:
    """(u, density) pairs on an even grid of the support."""
    a, b = d.pieces[0].a, d.pieces[-1].b
    return [(float(u), d(float(u))) for u in np.linspace(a, b, resolution)]
