import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_omega_point
from hecke.cfmaps import expand_dual, expand_regular, f_q, f_q_star
from hecke.codes import parse_code
from hecke.context import make_context
from hecke.domain import (
    OMEGA_STRONG,
    OUTSIDE,
    build_partition,
    exponent_from_code,
    first_return_exponent,
    get_partition,
    locate,
    natural_extension,
    natural_extension_inv,
    omega_membership,
    omega_rectangles,
)
from hecke.errors import NoInterval, OutOfDomain, UndefinedStep
from hecke.codes import evaluate

Q_RANGE = range(3, 13)


def test_partition_q4():
    p = get_partition(make_context(4))
    assert p.phi == pytest.approx((-0.7071068, 0.0), abs=1e-7)
    assert p.rj[1] == pytest.approx(1 - math.sqrt(2), abs=1e-12)


def test_partition_q5():
    p = get_partition(make_context(5))
    assert p.phi == pytest.approx((-0.8090170, -0.6180340, -0.3819660, 0.0), abs=1e-7)


def test_partition_q3():
    ctx = make_context(3)
    p = get_partition(ctx)
    assert p.phi == pytest.approx((-0.5, 0.0), abs=1e-12)
    assert p.rj[1] == pytest.approx((math.sqrt(5) - 3) / 2, abs=1e-12)


@pytest.mark.parametrize("q", Q_RANGE)
def test_partition_sizes(q):
    ctx = make_context(q)
    p = build_partition(ctx)
    assert len(p.phi) == ctx.kappa + 1
    assert len(p.rj) == ctx.kappa + 1
    assert p.phi[0] == pytest.approx(-ctx.half, abs=1e-12)
    assert p.rj[0] == pytest.approx(-ctx.R, abs=1e-12)
    assert p.rj[-1] == pytest.approx(ctx.r, abs=1e-12)
    assert list(p.phi) == sorted(p.phi)


@pytest.mark.parametrize("q", Q_RANGE)
def test_markov_property(q):
    ctx = make_context(q)
    p = get_partition(ctx)
    ends = list(p.phi) + [-x for x in p.phi]
    for x in p.phi[:-1]:
        y = f_q(ctx, x).next
        assert min(abs(y - e) for e in ends) <= 1e-10


@pytest.mark.parametrize("q", Q_RANGE)
def test_dual_orbit_closes(q):
    ctx = make_context(q)
    p = get_partition(ctx)
    for y in p.rj[:-1]:
        z = f_q_star(ctx, y).next
        assert min(abs(z - r) for r in p.rj) <= 1e-10


@pytest.mark.parametrize("q", Q_RANGE)
def test_interlacing(q):
    ctx = make_context(q)
    p = get_partition(ctx)
    k = ctx.kappa
    for j in range(1, k + 1):
        lo, hi = p.interval(j)
        assert lo - 1e-12 <= p.rj[k + 1 - j] <= hi + 1e-12


def test_locate():
    ctx = make_context(4)
    p = get_partition(ctx)
    assert locate(ctx, p, -0.7) == 1
    assert locate(ctx, p, 0.3) == -1
    with pytest.raises(NoInterval):
        locate(ctx, p, 0.0)
    with pytest.raises(NoInterval):
        locate(ctx, p, 0.9)


def test_omega_membership_examples():
    ctx = make_context(4)
    p = get_partition(ctx)
    assert omega_membership(ctx, p, (-0.3, 0.9)) == OMEGA_STRONG
    assert omega_membership(ctx, p, (-0.6, -0.9)) == OUTSIDE
    assert omega_membership(ctx, p, (0.5, -0.2)) == OMEGA_STRONG
    assert omega_membership(ctx, p, (-0.6, -0.3)) == "omega"


def test_natural_extension_examples():
    c3, c4 = make_context(3), make_context(4)
    (u, v), a = natural_extension(c3, (0.4, 0.0))
    assert a == -2
    assert (u, v) == pytest.approx((-0.5, 0.5), abs=1e-12)
    (u, v), b = natural_extension_inv(c3, (-0.5, 0.5))
    assert b == -2
    assert (u, v) == pytest.approx((0.4, 0.0), abs=1e-12)

    (u, v), a = natural_extension(c4, (-0.3, 0.2))
    st_ = f_q(c4, -0.3)
    assert a == st_.digit
    assert u == pytest.approx(st_.next, abs=1e-15)
    assert v == pytest.approx(-1 / (0.2 + a * c4.lam), abs=1e-15)

    (u, v), b = natural_extension_inv(c4, (0.1, -0.2))
    assert b == 3
    assert v == pytest.approx(5 - 3 * math.sqrt(2), abs=1e-12)
    assert u == pytest.approx(-1 / (0.1 + 3 * c4.lam), abs=1e-12)


def test_natural_extension_undefined():
    ctx = make_context(4)
    with pytest.raises(UndefinedStep):
        natural_extension(ctx, (0.0, 0.3))
    with pytest.raises(UndefinedStep):
        natural_extension_inv(ctx, (0.3, 0.0))


def test_natural_extension_roundtrip(ctx):
    rng = random.Random(ctx.q)
    part = get_partition(ctx)
    worst = 0.0
    for _ in range(10000 // 6):
        pt = random_omega_point(ctx, rng)
        img, _ = natural_extension(ctx, pt)
        assert omega_membership(ctx, part, img) != OUTSIDE
        back, _ = natural_extension_inv(ctx, img)
        worst = max(worst, abs(back[0] - pt[0]), abs(back[1] - pt[1]))
    assert worst <= 1e-9


def test_natural_extension_codes_shift(ctx):
    """The dual code of the new v gains the digit just emitted."""
    rng = random.Random(100 + ctx.q)
    for _ in range(200):
        u, v = random_omega_point(ctx, rng)
        (u2, v2), a = natural_extension(ctx, (u, v))
        past = expand_dual(ctx, v, 8)
        past2 = expand_dual(ctx, v2, 8)
        assert [past2.digit(i) for i in range(1, 6)] == [a] + [past.digit(i) for i in range(1, 5)]
        fut = expand_regular(ctx, u, 8)
        fut2 = expand_regular(ctx, u2, 8)
        assert fut.digit(1) == a
        assert [fut2.digit(i) for i in range(1, 5)] == [fut.digit(i) for i in range(2, 6)]


@pytest.mark.parametrize("q, code, want", [
    (4, "2;-3,5", (1, 0)),
    (4, "2;1,-3,5", (2, 1)),
    (6, "2;1,2,5", (2, 2)),
    (5, "3;1,2,5", (2, 3)),
])
def test_first_return_exponent(q, code, want):
    ctx = make_context(q)
    c = parse_code(code)
    assert exponent_from_code(ctx, c) == want
    assert first_return_exponent(ctx, evaluate(ctx, c).value) == want


def test_first_return_exponent_domain():
    with pytest.raises(OutOfDomain):
        first_return_exponent(make_context(4), 0.5)


@pytest.mark.parametrize("q", [3, 4, 7])
def test_rectangles_cover_omega(q):
    ctx = make_context(q)
    part = get_partition(ctx)
    rects = omega_rectangles(ctx, part)
    strong = omega_rectangles(ctx, part, strong=True)
    rng = random.Random(q)
    for _ in range(2000):
        u = rng.uniform(-ctx.half, ctx.half)
        v = rng.uniform(-ctx.R, ctx.R)
        m = omega_membership(ctx, part, (u, v))
        inside = any(a < u < b and c < v < d for a, b, c, d in rects)
        in_strong = any(a < u < b and c < v < d for a, b, c, d in strong)
        if inside:
            assert m != OUTSIDE
        if in_strong:
            assert m == OMEGA_STRONG


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 12), st.floats(-1, 1), st.floats(-1, 1))
def test_membership_is_symmetric(q, s, t):
    ctx = make_context(q)
    part = get_partition(ctx)
    u, v = s * ctx.half, t * ctx.R
    assert omega_membership(ctx, part, (u, v)) == omega_membership(ctx, part, (-u, -v))
