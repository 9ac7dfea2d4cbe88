"""Interval maps F_q, F_q* and the expansion algorithms built on them."""

from __future__ import annotations

import math
from typing import NamedTuple, Optional

from .codes import DUAL, MAX_DIGIT, REGULAR, Code
from .context import HeckeContext
from .errors import HeckeError, OutOfDomain

# relative tolerance for snapping a ratio onto an integer boundary
SNAP_TOL = 1e-10
# two orbit points closer than this are treated as equal (cycle detection)
CYCLE_TOL = 1e-9
_ULP = 2.0 ** -52
# digits produced while the error bound is below this are trusted
RELIABLE_ERR = 1e-6
MAX_PERIOD = 12


class DigitStep(NamedTuple):
    digit: Optional[int]
    next: float


def floor_q(x: float) -> int:
    """n with n < x <= n+1 for x > 0, and n <= x < n+1 for x <= 0."""
    if x > 0:
        return math.ceil(x) - 1
    return math.floor(x)


def _snap(v: float) -> float:
    n = round(v)
    if abs(v - n) <= SNAP_TOL * max(1.0, abs(v)):
        return float(n)
    return v


def nearest(ctx: HeckeContext, z: float) -> int:
    """Nearest lambda-multiple <z>, ties rounded toward zero."""
    if z < 0:
        return -nearest(ctx, -z)
    if z == 0:
        return 0
    return math.ceil(_snap(z / ctx.lam - 0.5))


def nearest_star(ctx: HeckeContext, z: float) -> int:
    """Shifted nearest multiple <z>*, so that z - <z>* lam lies in [r, R] for z > 0.

    At exact boundaries the digit putting the image on r is chosen.
    """
    if z < 0:
        return -nearest_star(ctx, -z)
    if z == 0:
        return 0
    v = (z - ctx.r) / ctx.lam
    n = round(v)
    if abs(v - n) <= SNAP_TOL * max(1.0, abs(v)):
        return int(n)
    return math.floor(v)


def _clamp(x: float, bound: float) -> float:
    return max(-bound, min(bound, x))


def f_q(ctx: HeckeContext, x: float) -> DigitStep:
    """One step of the generating map: a = <-1/x>, next = -1/x - a lam."""
    if not abs(x) <= ctx.half + ctx.eps:
        raise OutOfDomain(f"x={x!r} is outside [-lam/2, lam/2]")
    if abs(x) <= ctx.eps:
        return DigitStep(None, 0.0)
    z = -1.0 / x
    a = nearest(ctx, z)
    nxt = z - a * ctx.lam
    return DigitStep(a, _clamp(nxt, ctx.half))


def f_q_star(ctx: HeckeContext, y: float) -> DigitStep:
    """One step of the dual generating map on [-R, R]."""
    if not abs(y) <= ctx.R + ctx.eps:
        raise OutOfDomain(f"y={y!r} is outside [-R, R]")
    if abs(y) <= ctx.eps:
        return DigitStep(None, 0.0)
    z = -1.0 / y
    b = nearest_star(ctx, z)
    nxt = z - b * ctx.lam
    # image lies in sign(z)[r, R]
    if z > 0:
        nxt = min(max(nxt, ctx.r), ctx.R)
    else:
        nxt = min(max(nxt, -ctx.R), -ctx.r)
    return DigitStep(b, nxt)


def _expand(ctx, lead, x, step, max_digits, detect_cycles, flavor):
    digits = []
    orbit = [x]
    start = x
    # running bound on the rounding error carried by x; the map -1/x
    # amplifies it by 1/x^2 per step
    err = _ULP * max(1.0, abs(x))
    reliable = 0
    for _ in range(max_digits):
        if abs(x) * MAX_DIGIT * ctx.lam < 1.0:
            # the next digit would exceed the cap; x is 0 to this resolution
            return Code(lead, tuple(digits), None, flavor)
        st = step(ctx, x)
        if st.digit is None:
            return Code(lead, tuple(digits), None, flavor)
        digits.append(st.digit)
        if err <= RELIABLE_ERR:
            reliable = len(digits)
        err = err / (x * x) + _ULP * abs(1.0 / x)
        x = st.next
        if _is_zero(ctx, x, err):
            return Code(lead, tuple(digits), None, flavor)
        if detect_cycles:
            tol = max(CYCLE_TOL, min(64.0 * err, 1e-6))
            for i, y in enumerate(orbit):
                if abs(x - y) <= tol:
                    # x_j == x_i: digits i.. repeat, if the periodic value agrees
                    cand = Code(0, tuple(digits[:i]), tuple(digits[i:]), flavor)
                    if _confirms(ctx, cand, start):
                        return Code(lead, cand.head, cand.cycle, flavor)
        orbit.append(x)
    if detect_cycles:
        cand = _digit_period(ctx, digits[:reliable], flavor, start)
        if cand is not None:
            return Code(lead, cand.head, cand.cycle, flavor)
    return Code(lead, tuple(digits), None, flavor)


def _digit_period(ctx, digits, flavor, x):
    """A periodic code matching the trusted digits whose value is x.

    Catches cycles whose orbit drifted apart in floating point before
    it closed.  Candidates need one repeated digit past a full period.
    """
    n = len(digits)
    for p in range(1, min(MAX_PERIOD, n - 1) + 1):
        i = n - p - 1
        while i > 0 and digits[i - 1] == digits[i - 1 + p]:
            i -= 1
        if n - i < p + 1 or any(digits[k] != digits[k - p] for k in range(i + p, n)):
            continue
        cand = Code(0, tuple(digits[:i]), tuple(digits[i:i + p]), flavor)
        if _confirms(ctx, cand, x):
            return cand
    return None


def _confirms(ctx, cand: Code, x: float) -> bool:
    from .codes import evaluate
    try:
        v = evaluate(ctx, cand).value
    except (HeckeError, ArithmeticError):
        return False
    return abs(v - x) <= 1e-14 * max(1.0, abs(x))


def _is_zero(ctx, x, err) -> bool:
    # the propagated bound only means something while it is small; past
    # that the orbit is a shadow of a nearby point and eps alone decides
    if abs(x) <= ctx.eps:
        return True
    if err <= 1e-6 and abs(x) <= 16.0 * err:
        return True
    return abs(x) * MAX_DIGIT * ctx.lam < 1.0


class Expansion(NamedTuple):
    code: Code
    exhausted: bool


def expand_regular(ctx: HeckeContext, x: float, max_digits: int = 40,
                   detect_cycles: bool = True) -> Code:
    """Regular lambda-fraction of x.

    a0 = <x>, then digits from iterating f_q.  Orbits that come back to
    an earlier point within CYCLE_TOL are closed into a periodic code.
    A code cut off by ``max_digits`` is returned as a finite truncation;
    use :func:`expand_regular_info` to tell the two apart.
    """
    return expand_regular_info(ctx, x, max_digits, detect_cycles).code


def expand_regular_info(ctx, x, max_digits=40, detect_cycles=True) -> Expansion:
    if not math.isfinite(x):
        raise OutOfDomain("cannot expand a non-finite number")
    a0 = nearest(ctx, x)
    x1 = _clamp(x - a0 * ctx.lam, ctx.half)
    if abs(x1) <= ctx.eps:
        return Expansion(Code(a0, (), None, REGULAR), False)
    code = _expand(ctx, a0, x1, f_q, max_digits, detect_cycles, REGULAR)
    return Expansion(code, code.is_finite and len(code.head) >= max_digits)


def expand_dual(ctx: HeckeContext, y: float, max_digits: int = 40,
                detect_cycles: bool = True) -> Code:
    """Dual regular lambda-fraction of y (b0 = 0 iff |y| <= R)."""
    return expand_dual_info(ctx, y, max_digits, detect_cycles).code


def expand_dual_info(ctx, y, max_digits=40, detect_cycles=True) -> Expansion:
    if not math.isfinite(y):
        raise OutOfDomain("cannot expand a non-finite number")
    if abs(y) <= ctx.R + ctx.eps:
        b0 = 0
        y1 = _clamp(y, ctx.R)
    else:
        b0 = nearest_star(ctx, y)
        y1 = y - b0 * ctx.lam
        y1 = _clamp(y1, ctx.R)
    if abs(y1) <= ctx.eps:
        return Expansion(Code(b0, (), None, DUAL), False)
    code = _expand(ctx, b0, y1, f_q_star, max_digits, detect_cycles, DUAL)
    return Expansion(code, code.is_finite and len(code.head) >= max_digits)


def orbit(ctx: HeckeContext, x: float, steps: int, dual: bool = False) -> list:
    """Points x, F x, F^2 x, ... stopping early at 0."""
    step = f_q_star if dual else f_q
    out = [x]
    for _ in range(steps):
        st = step(ctx, x)
        if st.digit is None:
            break
        x = st.next
        out.append(x)
    return out
