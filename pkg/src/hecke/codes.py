"""Symbolic layer for lambda-fractions.

A :class:`Code` stores the leading entry, a finite head and an optional
repeating cycle.  The module provides the shift, the lexicographic order
that matches the order of values, the Cantor-type metric, detection and
rewriting of forbidden blocks, and exact evaluation of eventually
periodic codes.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .context import HeckeContext, Mobius, S, classify, t_power
from .errors import InternalConsistency, InvalidCode, InvalidParameter, NotConvergent

MAX_DIGIT = 10 ** 9
REGULAR = "regular"
DUAL = "dual"


def _primitive(cycle: tuple) -> tuple:
    n = len(cycle)
    for p in range(1, n + 1):
        if n % p == 0 and cycle == cycle[:p] * (n // p):
            return cycle[:p]
    return cycle


@dataclass(frozen=True)
class Code:
    """A lambda-fraction [[a0; a1, a2, ...]] with optional periodic tail.

    The representation is canonical: the cycle is primitive and no head
    digit could be absorbed into the cycle, so equal sequences compare
    equal as dataclasses.
    """

    leading: int = 0
    head: tuple = ()
    cycle: Optional[tuple] = None
    flavor: str = REGULAR

    def __post_init__(self):
        if self.flavor not in (REGULAR, DUAL):
            raise InvalidParameter(f"unknown flavor {self.flavor!r}")
        lead = int(self.leading)
        head = tuple(int(a) for a in self.head)
        cycle = None if self.cycle is None else tuple(int(a) for a in self.cycle)
        if cycle is not None and not cycle:
            cycle = None
        for a in head + (cycle or ()):
            if a == 0:
                raise InvalidCode("digits after the leading entry must be nonzero")
        for a in (lead,) + head + (cycle or ()):
            if abs(a) > MAX_DIGIT:
                raise InvalidCode(f"digit {a} exceeds the magnitude cap {MAX_DIGIT}")
        if cycle is not None:
            cycle = _primitive(cycle)
            # roll trailing head digits into the cycle
            while head and head[-1] == cycle[-1]:
                head = head[:-1]
                cycle = (cycle[-1],) + cycle[:-1]
        object.__setattr__(self, "leading", lead)
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "cycle", cycle)

    @property
    def is_finite(self) -> bool:
        return self.cycle is None

    @property
    def is_empty(self) -> bool:
        return self.cycle is None and not self.head

    def digit(self, i: int) -> int:
        """Digit a_i for i >= 1; finite codes return 0 past their end."""
        if i == 0:
            return self.leading
        j = i - 1
        if j < len(self.head):
            return self.head[j]
        if self.cycle is None:
            return 0
        return self.cycle[(j - len(self.head)) % len(self.cycle)]

    def digits(self, n: int) -> list:
        """The first n digits a_1..a_n (fewer if the code is finite)."""
        if self.cycle is None:
            return list(self.head[:n])
        return [self.digit(i) for i in range(1, n + 1)]

    def sequence(self, n: int) -> list:
        """[a0, a1, ..., a_n], truncated for finite codes."""
        return [self.leading] + self.digits(n)

    def negate(self) -> "Code":
        return Code(-self.leading, tuple(-a for a in self.head),
                    None if self.cycle is None else tuple(-a for a in self.cycle), self.flavor)

    def with_flavor(self, flavor: str) -> "Code":
        return Code(self.leading, self.head, self.cycle, flavor)

    def __str__(self):
        return format_code(self)


def negate(c: Code) -> Code:
    return c.negate()


_CODE_RE = re.compile(r"^\s*(-?\d+)\s*;\s*(.*?)\s*$")


def parse_code(text: str, flavor: str = REGULAR) -> Code:
    """Parse ``"a0;a1,a2,(c1,c2)"``; parentheses enclose the cycle."""
    m = _CODE_RE.match(text)
    if not m:
        raise InvalidCode(f"cannot parse code {text!r}")
    lead = int(m.group(1))
    rest = m.group(2)
    cycle = None
    if "(" in rest:
        head_part, _, cyc = rest.partition("(")
        if not cyc.endswith(")") or ")" in cyc[:-1]:
            raise InvalidCode(f"unbalanced cycle in {text!r}")
        cycle = _int_list(cyc[:-1], text)
        if not cycle:
            raise InvalidCode(f"empty cycle in {text!r}")
        head_part = head_part.strip()
        if head_part and not head_part.endswith(","):
            raise InvalidCode(f"missing comma before cycle in {text!r}")
        head = _int_list(head_part.rstrip(","), text)
    else:
        head = _int_list(rest, text)
    return Code(lead, tuple(head), None if cycle is None else tuple(cycle), flavor)


def _int_list(s: str, text: str) -> list:
    s = s.strip()
    if not s:
        return []
    out = []
    for tok in s.split(","):
        tok = tok.strip()
        if not re.fullmatch(r"-?\d+", tok):
            raise InvalidCode(f"bad digit {tok!r} in {text!r}")
        out.append(int(tok))
    return out


def format_code(c: Code) -> str:
    parts = [str(a) for a in c.head]
    if c.cycle is not None:
        parts.append("(" + ",".join(str(a) for a in c.cycle) + ")")
    return f"{c.leading};" + ",".join(parts)


def shift(c: Code, n: int = 1) -> Code:
    """Drop the leading entry and the first n digits.

    The result has leading entry 0.  Shifting a finite code past its end
    gives the empty code.
    """
    if n < 1:
        raise InvalidParameter("shift amount must be at least 1")
    if n - 1 < len(c.head):
        head = c.head[n:]
        return Code(0, head, c.cycle, c.flavor)
    if c.cycle is None:
        return Code(0, (), None, c.flavor)
    k = (n - len(c.head)) % len(c.cycle)
    return Code(0, (), c.cycle[k:] + c.cycle[:k], c.flavor)


def _horizon(c1: Code, c2: Code) -> int:
    l1 = len(c1.cycle) if c1.cycle else 1
    l2 = len(c2.cycle) if c2.cycle else 1
    return max(len(c1.head), len(c2.head)) + l1 * l2 + 1


def _order_key(a: int, present: bool):
    if not present:
        return (1, 0)
    return (0, a) if a > 0 else (2, a)


def compare(c1: Code, c2: Code) -> int:
    """-1, 0 or 1 according to the order of the coded values."""
    if c1.flavor != c2.flavor:
        raise InvalidParameter("cannot compare codes of different flavor")
    if c1.leading != c2.leading:
        return -1 if c1.leading < c2.leading else 1
    for i in range(1, _horizon(c1, c2) + 1):
        k1 = _order_key(c1.digit(i), not c1.is_finite or i <= len(c1.head))
        k2 = _order_key(c2.digit(i), not c2.is_finite or i <= len(c2.head))
        if k1 != k2:
            return -1 if k1 < k2 else 1
        if k1 == (1, 0):
            return 0
    return 0


def code_distance(c1: Code, c2: Code) -> float:
    """1/(1+n) with n the first index where the sequences a0, a1, ... differ."""
    if c1.leading != c2.leading:
        return 1.0
    for i in range(1, _horizon(c1, c2) + 1):
        if c1.digit(i) != c2.digit(i):
            return 1.0 / (1.0 + i)
    return 0.0


# ---------------------------------------------------------------------------
# forbidden blocks


def block_patterns(ctx: HeckeContext) -> list:
    """Forbidden block shapes as (pattern id, list of multipliers).

    A multiplier of 0 stands for the free entry m >= 1; the rest are fixed
    multiples of the sign s.
    """
    h = ctx.h
    if ctx.even:
        return [("ones_m", [1] * h + [0])]
    return [("ones", [1] * (h + 1)), ("two_block", [1] * h + [2] + [1] * h + [0])]


def max_block_length(ctx: HeckeContext) -> int:
    return max(len(p) for _, p in block_patterns(ctx))


def _matches(seq, i, pat) -> Optional[int]:
    if i + len(pat) > len(seq):
        return None
    s = 1 if seq[i] > 0 else -1
    for k, mult in enumerate(pat):
        a = seq[i + k]
        if mult == 0:
            if a * s < 1:
                return None
        elif a != mult * s:
            return None
    return s


def scan_forbidden(ctx: HeckeContext, digits: Sequence, reversed: bool = False):
    """Leftmost forbidden block in [a0, a1, ...]; index 0 is never part of one.

    Returns (start index, pattern id) or None.  With ``reversed`` the
    patterns are read backwards, which is the dual-regularity test.
    """
    seq = list(digits)
    pats = [(pid, list(p[::-1]) if reversed else list(p)) for pid, p in block_patterns(ctx)]
    for i in range(1, len(seq)):
        if seq[i] == 0:
            continue
        for pid, pat in pats:
            if _matches(seq, i, pat) is not None:
                return i, pid
    return None


def _cleanup_zeros(seq: list) -> list:
    out = list(seq)
    changed = True
    while changed:
        changed = False
        for i in range(1, len(out)):
            if out[i] != 0:
                continue
            if i == len(out) - 1:
                if i == 1:
                    raise InvalidCode("rewriting produced an infinite value")
                out = out[: i - 1]
            else:
                out = out[: i - 1] + [out[i - 1] + out[i + 1]] + out[i + 2:]
            changed = True
            break
    return out


def rewrite_forbidden(ctx: HeckeContext, digits: Sequence, clean: bool = True) -> Optional[list]:
    """One rewriting step at the leftmost forbidden block.

    Returns the new sequence, or None when nothing is forbidden.  Digits
    before position hit-1 are left untouched by the rule itself; a zero
    digit it produces is then merged away ([.., a, 0, b, ..] is
    [.., a+b, ..]), which may reach further left.  ``clean=False`` skips
    that merge.
    """
    seq = [int(a) for a in digits]
    hit = scan_forbidden(ctx, seq)
    if hit is None:
        return None
    i, pid = hit
    h = ctx.h
    s = 1 if seq[i] > 0 else -1
    a = seq[i - 1]
    if ctx.even:
        L = h + 1
        m = seq[i + h] * s
    elif pid == "ones":
        L = h + 1
        m = None
    else:
        L = 2 * h + 2
        m = seq[i + 2 * h + 1] * s
    b = seq[i + L] if i + L < len(seq) else None
    tail = seq[i + L + 1:]
    ms = [-s] * h
    if ctx.even:
        if m >= 2:
            mid = [a - s] + ms + [s * (m - 1)] + _opt(b)
        else:
            mid = [a - s] + [-s] * (h - 1) + _opt(b, -s)
    elif pid == "ones":
        mid = [a - s] + ms + _opt(b, -s)
    elif h == 0:
        if m >= 2:
            mid = [a - s, -2 * s, s * (m - 1)] + _opt(b)
        else:
            mid = [a - s] + _opt(b, -2 * s)
    else:
        if m >= 2:
            mid = [a - s] + ms + [-2 * s] + ms + [s * (m - 1)] + _opt(b)
        else:
            mid = [a - s] + ms + [-2 * s] + [-s] * (h - 1) + _opt(b, -s)
    out = seq[: i - 1] + mid + tail
    return _cleanup_zeros(out) if clean else out


def _opt(b, delta: int = 0) -> list:
    return [] if b is None else [b + delta]


def regularize(ctx: HeckeContext, digits: Sequence, max_steps: int = 10000) -> list:
    """Rewrite until no forbidden block remains."""
    seq = [int(a) for a in digits]
    for _ in range(max_steps):
        nxt = rewrite_forbidden(ctx, seq)
        if nxt is None:
            return seq
        seq = nxt
    raise InternalConsistency("forbidden-block rewriting did not terminate")


def _window(ctx: HeckeContext, c: Code) -> int:
    L = max_block_length(ctx)
    if c.cycle is None:
        return len(c.head)
    return len(c.head) + len(c.cycle) * (L + 2) + L


def is_regular(ctx: HeckeContext, c: Code) -> bool:
    return scan_forbidden(ctx, c.sequence(_window(ctx, c))) is None


def is_dual_regular(ctx: HeckeContext, c: Code) -> bool:
    """No reversed forbidden block in [0; b1, ...], resp. [0; b0, b1, ...] if b0 != 0."""
    body = c.digits(_window(ctx, c))
    seq = [0] + ([c.leading] if c.leading != 0 else []) + body
    return scan_forbidden(ctx, seq, reversed=True) is None


@dataclass(frozen=True)
class BiCode:
    """Two-sided sequence ..., b2, b1 . a1, a2, ...

    ``past`` holds the dual digits read outward from the cut, ``future``
    the regular digits.
    """

    past: Code
    future: Code

    def window(self, n: int) -> list:
        return list(reversed(self.past.digits(n))) + self.future.digits(n)


def bicode_is_regular(ctx: HeckeContext, bc: BiCode) -> bool:
    """True when no forbidden block straddles the cut."""
    L = max_block_length(ctx)
    left = list(reversed(bc.past.digits(L)))
    right = bc.future.digits(L)
    seq = [0] + left + right
    cut = 1 + len(left)
    for i in range(1, cut):
        if seq[i] == 0:
            continue
        for _, pat in block_patterns(ctx):
            if i + len(pat) > cut and _matches(seq, i, pat) is not None:
                return False
    return True


# ---------------------------------------------------------------------------
# evaluation


class Evaluation(NamedTuple):
    value: float
    residual: float


def _head_matrix(ctx: HeckeContext, lead: int, digits: Sequence) -> Mobius:
    M = t_power(ctx, lead)
    for a in digits:
        M = M @ S @ t_power(ctx, a)
    return M


def cycle_matrix(ctx: HeckeContext, cycle: Sequence) -> Mobius:
    """S T^{c1} S T^{c2} ... S T^{cn}."""
    M = Mobius.identity()
    for a in cycle:
        M = M @ S @ t_power(ctx, a)
    return M


def evaluate(ctx: HeckeContext, c: Code, depth: int = 60, force: bool = False) -> Evaluation:
    """Value of a code.

    Eventually periodic codes are evaluated exactly through the attracting
    fixed point of the cycle word; finite codes through H(0).  Codes with
    a forbidden block raise :class:`NotConvergent` unless ``force`` is set,
    in which case the first ``depth`` digits are used and the residual
    bounds the truncation error.
    """
    valid = is_dual_regular(ctx, c) if c.flavor == DUAL else is_regular(ctx, c)
    if not valid and not force:
        raise NotConvergent(f"code {format_code(c)} has a forbidden block")
    if valid and c.cycle is None:
        return Evaluation(_head_matrix(ctx, c.leading, c.head)(0.0), 0.0)
    if valid:
        W = cycle_matrix(ctx, c.cycle)
        try:
            cl = classify(W)
        except InvalidParameter:
            cl = None
        if cl is not None and cl.kind == "hyperbolic":
            H = _head_matrix(ctx, c.leading, c.head)
            return Evaluation(H(cl.attracting), 0.0)
    return _truncated(ctx, c, depth)


def _truncated(ctx: HeckeContext, c: Code, depth: int) -> Evaluation:
    digits = c.digits(depth)
    H = _head_matrix(ctx, c.leading, digits)
    v0 = H(0.0)
    if c.is_finite and len(digits) == len(c.head):
        return Evaluation(v0, 0.0)
    bound = ctx.R if c.flavor == DUAL else ctx.half
    # pole of H inside the tail interval makes the bound useless
    if H.c != 0:
        pole = -H.d / H.c
        if -bound <= pole <= bound:
            return Evaluation(v0, math.inf)
    res = max(abs(H(-bound) - v0), abs(H(bound) - v0))
    return Evaluation(v0, res)


def code_value(ctx: HeckeContext, c: Code, **kw) -> float:
    return evaluate(ctx, c, **kw).value


def digits_value(ctx: HeckeContext, digits: Sequence) -> float:
    """Value of the finite fraction [a0; a1, ..., an] without validity checks.

    Evaluated from the tail inward; a vanishing denominator gives inf.
    """
    digits = list(digits)
    if not digits:
        return 0.0
    t = 0.0
    for a in reversed(digits[1:]):
        den = a * ctx.lam + t
        if math.isinf(den):
            t = 0.0
        elif den == 0:
            t = math.inf
        else:
            t = -1.0 / den
    return digits[0] * ctx.lam + t
