"""Hecke group constants and Moebius arithmetic.

A :class:`HeckeContext` holds every constant that depends only on ``q``.
:class:`Mobius` is a projective 2x2 real matrix acting on the extended
real line and on the upper half-plane.  :class:`ExactElement` is a slow
but exact matrix over Z[lambda], used to certify group relations.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidParameter

DEFAULT_EPS = 1e-12
SUPPORTED_PRECISION = ("binary64",)


@dataclass(frozen=True)
class HeckeContext:
    """Constants of the Hecke triangle group G_q.

    ``lam`` is the translation length 2cos(pi/q).  ``R`` is the right end
    of the dual interval and ``r = R - lam``.  ``rho`` is the corner of the
    standard fundamental domain.
    """

    q: int
    lam: float
    h: int
    kappa: int
    parity: str
    R: float
    r: float
    rho: complex
    eps: float = DEFAULT_EPS
    precision: str = "binary64"

    @property
    def even(self) -> bool:
        return self.parity == "even"

    @property
    def half(self) -> float:
        return self.lam / 2.0

    @property
    def sin_pi_q(self) -> float:
        return math.sin(math.pi / self.q)

    def as_dict(self) -> dict:
        return {
            "q": self.q,
            "lambda": self.lam,
            "h": self.h,
            "kappa": self.kappa,
            "parity": self.parity,
            "R": self.R,
            "r": self.r,
            "rho": [self.rho.real, self.rho.imag],
            "eps": self.eps,
            "precision": self.precision,
        }


@lru_cache(maxsize=None)
def make_context(q: int, precision: str = "binary64", eps: float = DEFAULT_EPS) -> HeckeContext:
    """Build the context for G_q.

    For odd q the constant R is the positive root of
    R^2 + (2 - lam) R - 1 = 0; for even q it is 1.
    """
    if isinstance(q, bool) or int(q) != q:
        raise InvalidParameter(f"q must be an integer, got {q!r}")
    q = int(q)
    if q < 3:
        raise InvalidParameter(f"q must be at least 3, got {q}")
    if precision not in SUPPORTED_PRECISION:
        raise InvalidParameter(f"unsupported precision {precision!r}; use one of {SUPPORTED_PRECISION}")
    if not eps > 0:
        raise InvalidParameter("eps must be positive")
    lam = 2.0 * math.cos(math.pi / q)
    if q % 2 == 0:
        h = (q - 2) // 2
        kappa = h
        parity = "even"
        R = 1.0
    else:
        h = (q - 3) // 2
        kappa = 2 * h + 1
        parity = "odd"
        b = 2.0 - lam
        # stable form of the positive root of R^2 + bR - 1
        R = 2.0 / (b + math.sqrt(b * b + 4.0))
    rho = complex(math.cos(math.pi / q), math.sin(math.pi / q))
    return HeckeContext(q=q, lam=lam, h=h, kappa=kappa, parity=parity,
                        R=R, r=R - lam, rho=rho, eps=eps, precision=precision)


class Mobius:
    """Projective real 2x2 matrix, normalized to determinant one."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d, normalize=True):
        a, b, c, d = float(a), float(b), float(c), float(d)
        if normalize:
            det = a * d - b * c
            if not det > 0:
                raise InvalidParameter(f"matrix must have positive determinant, got {det}")
            s = 1.0 / math.sqrt(det)
            a, b, c, d = a * s, b * s, c * s, d * s
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1.0, 0.0, 0.0, 1.0, normalize=False)

    def __repr__(self):
        return f"Mobius([[{self.a!r}, {self.b!r}], [{self.c!r}, {self.d!r}]])"

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "Mobius") -> "Mobius":
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        # both factors have determinant one; recomputing it from large
        # entries cancels catastrophically
        return Mobius(a, b, c, d, normalize=False)

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a, normalize=False)

    def trace(self) -> float:
        return self.a + self.d

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __call__(self, x):
        return mobius_apply(self, x)

    def derivative(self, x: float) -> float:
        """Derivative at a finite real point (determinant one)."""
        den = self.c * x + self.d
        if den == 0:
            return math.inf
        return 1.0 / (den * den)

    def equals(self, other: "Mobius", tol: float = 1e-9) -> bool:
        """Projective comparison: M and -M are the same map."""
        p = self.as_array()
        o = other.as_array()
        scale = max(1.0, float(np.abs(p).max()))
        return bool(np.abs(p - o).max() <= tol * scale or np.abs(p + o).max() <= tol * scale)

    def __eq__(self, other):
        if not isinstance(other, Mobius):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def is_identity(self, tol: float = 1e-9) -> bool:
        return self.equals(Mobius.identity(), tol)


def mobius_apply(M: Mobius, x):
    """Image of x under M, with infinity handled projectively.

    Real input may be ``math.inf``; complex input is a point of the upper
    half-plane.
    """
    if isinstance(x, complex):
        den = M.c * x + M.d
        if den == 0:
            return complex(math.inf, 0.0)
        return (M.a * x + M.b) / den
    x = float(x)
    if math.isinf(x):
        if M.c == 0:
            return math.inf
        return M.a / M.c
    den = M.c * x + M.d
    if den == 0:
        return math.inf
    return (M.a * x + M.b) / den


S = Mobius(0.0, -1.0, 1.0, 0.0, normalize=False)


def t_power(ctx: HeckeContext, n: int) -> Mobius:
    return Mobius(1.0, n * ctx.lam, 0.0, 1.0, normalize=False)


_TOKEN = re.compile(r"^(S|T)(?:\^?(-?\d+))?$")


def parse_word(word) -> list:
    """Split a word into (letter, exponent) pairs.

    Accepts a sequence of tokens such as ``["S", "T", "T-1"]`` or a
    whitespace separated string like ``"T^-2 S T^3"``.
    """
    if isinstance(word, str):
        tokens = word.replace("*", " ").split()
    else:
        tokens = list(word)
    out = []
    for tok in tokens:
        tok = str(tok).strip().replace("⁻¹", "-1")
        m = _TOKEN.match(tok)
        if not m:
            raise InvalidParameter(f"unknown generator token {tok!r}")
        letter, exp = m.group(1), m.group(2)
        out.append((letter, 1 if exp is None else int(exp)))
    return out


def mobius_word(ctx: HeckeContext, word) -> Mobius:
    """Product of the generator tokens, leftmost factor applied last."""
    pairs = parse_word(word)
    if not pairs:
        raise InvalidParameter("empty word")
    M = Mobius.identity()
    for letter, exp in pairs:
        if letter == "S":
            G = S if exp % 2 else Mobius.identity()
        else:
            G = t_power(ctx, exp)
        M = M @ G
    return M


def word_string(pairs: Sequence) -> str:
    """Canonical text for a list of (letter, exponent) pairs.

    Adjacent T powers are merged and S pairs cancel; the empty word is
    printed as ``Id``.
    """
    stack: list = []
    for letter, exp in pairs:
        if letter == "T":
            if exp == 0:
                continue
            if stack and stack[-1][0] == "T":
                e = stack.pop()[1] + exp
                if e:
                    stack.append(("T", e))
            else:
                stack.append(("T", exp))
        else:
            if exp % 2 == 0:
                continue
            if stack and stack[-1][0] == "S":
                stack.pop()
            else:
                stack.append(("S", 1))
    if not stack:
        return "Id"
    parts = []
    for letter, exp in stack:
        if letter == "S":
            parts.append("S")
        elif exp == 1:
            parts.append("T")
        else:
            parts.append(f"T^{exp}")
    return " ".join(parts)


def ts_power(ctx: HeckeContext, n: int) -> Mobius:
    """(TS)^n from the sine closed form.

    With B_n = sin(n pi/q) the matrix is proportional to
    [[B_{n+1}, -B_n], [B_n, -B_{n-1}]]; the scalar is irrelevant
    projectively.
    """
    t = math.pi / ctx.q
    B = lambda k: math.sin(k * t)
    s = 1.0 / math.sin(t)
    return Mobius(B(n + 1) * s, -B(n) * s, B(n) * s, -B(n - 1) * s)


class Classification(NamedTuple):
    kind: str
    fixed_points: tuple
    attracting: object = None
    repelling: object = None


def classify(M: Mobius, eps: float = DEFAULT_EPS) -> Classification:
    """Elliptic, parabolic or hyperbolic type with fixed points.

    For hyperbolic maps the attracting fixed point is the one where
    |M'| < 1.  Elliptic maps report their fixed point in the upper
    half-plane; the point at infinity is ``math.inf``.
    """
    if M.is_identity(1e-14):
        raise InvalidParameter("the identity has no type")
    a, b, c, d = M.a, M.b, M.c, M.d
    tr = abs(a + d)
    if abs(tr - 2.0) <= eps:
        if abs(c) <= eps * max(1.0, abs(a), abs(b), abs(d)):
            return Classification("parabolic", (math.inf,))
        return Classification("parabolic", ((a - d) / (2.0 * c),))
    if tr < 2.0:
        # c z^2 + (d - a) z - b = 0 has complex roots
        disc = complex((d - a) ** 2 + 4.0 * b * c)
        z = (a - d + cmath.sqrt(disc)) / (2.0 * c)
        if z.imag < 0:
            z = z.conjugate()
        return Classification("elliptic", (z,))
    if c == 0:
        pts = [math.inf, b / (d - a)]
    else:
        root = math.sqrt((d - a) ** 2 + 4.0 * b * c)
        # avoid cancellation when forming the two roots
        s = a - d
        big = s + root if s >= 0 else s - root
        p1 = big / (2.0 * c)
        p2 = -2.0 * b / big if big != 0 else p1
        pts = [p1, p2]

    def mult(p):
        if math.isinf(p):
            return a * a  # derivative at infinity in the chart w = -1/z
        return abs(M.derivative(p))

    pts.sort(key=mult)
    return Classification("hyperbolic", tuple(pts), pts[0], pts[1])


def a_r_matrix(ctx: HeckeContext) -> Mobius:
    """The element fixing r = R - lam.

    Odd q: (ST)^{h+1} T (ST)^h T.  Even q: (ST)^{h-1} S T^2.
    """
    h = ctx.h
    if ctx.even:
        word = ["S", "T"] * (h - 1) + ["S", "T^2"]
    else:
        word = ["S", "T"] * (h + 1) + ["T"] + ["S", "T"] * h + ["T"]
    return mobius_word(ctx, word)


# ---------------------------------------------------------------------------
# exact arithmetic in Z[lambda]


@lru_cache(maxsize=None)
def minimal_polynomial(q: int) -> tuple:
    """Integer coefficients (highest first) of the minimal polynomial of 2cos(pi/q).

    The conjugates are 2cos(k pi/q) for odd k with gcd(k, 2q) = 1.
    """
    roots = [2.0 * math.cos(k * math.pi / q) for k in range(1, 2 * q, 2)
             if math.gcd(k, 2 * q) == 1 and k < q]
    coeffs = np.poly(roots)
    ints = tuple(int(round(c)) for c in coeffs)
    if max(abs(c - i) for c, i in zip(coeffs, ints)) > 1e-6:
        raise InvalidParameter(f"minimal polynomial for q={q} is not integral in float arithmetic")
    return ints


class ExactElement:
    """2x2 matrix over Z[lambda] reduced by the minimal polynomial of lambda."""

    def __init__(self, q: int, entries):
        self.q = q
        self.entries = [self._reduce(list(e)) for e in entries]

    def _reduce(self, p: list) -> tuple:
        # p holds coefficients lowest degree first
        mp = minimal_polynomial(self.q)
        deg = len(mp) - 1
        low = list(reversed(mp))  # lowest first, monic leading term
        p = list(p)
        while len(p) > deg:
            top = p.pop()
            if top:
                base = len(p) - deg
                for i in range(deg):
                    p[base + i] -= top * low[i]
        p += [0] * (deg - len(p))
        return tuple(p)

    @staticmethod
    def _mul(p, s):
        out = [0] * (len(p) + len(s) - 1)
        for i, x in enumerate(p):
            if x:
                for j, y in enumerate(s):
                    out[i + j] += x * y
        return out

    @staticmethod
    def _add(p, s):
        n = max(len(p), len(s))
        return [(p[i] if i < len(p) else 0) + (s[i] if i < len(s) else 0) for i in range(n)]

    def __matmul__(self, other: "ExactElement") -> "ExactElement":
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        m, add = self._mul, self._add
        return ExactElement(self.q, [add(m(a, e), m(b, g)), add(m(a, f), m(b, h)),
                                     add(m(c, e), m(d, g)), add(m(c, f), m(d, h))])

    @classmethod
    def generator(cls, q: int, letter: str, exp: int = 1) -> "ExactElement":
        if letter == "S":
            M = cls(q, [[0], [-1], [1], [0]])
            return M if exp % 2 else cls(q, [[1], [0], [0], [1]])
        return cls(q, [[1], [0, exp], [0], [1]])

    @classmethod
    def from_word(cls, q: int, word) -> "ExactElement":
        M = cls(q, [[1], [0], [0], [1]])
        for letter, exp in parse_word(word):
            M = M @ cls.generator(q, letter, exp)
        return M

    def is_projective_identity(self) -> bool:
        deg = len(minimal_polynomial(self.q)) - 1
        one = tuple([1] + [0] * (deg - 1))
        mone = tuple([-1] + [0] * (deg - 1))
        zero = tuple([0] * deg)
        a, b, c, d = self.entries
        return b == zero and c == zero and ((a == one and d == one) or (a == mone and d == mone))

    def to_float(self, lam: float) -> np.ndarray:
        ev = lambda p: sum(c * lam ** i for i, c in enumerate(p))
        a, b, c, d = self.entries
        return np.array([[ev(a), ev(b)], [ev(c), ev(d)]])
