import math
import random

import pytest

from hecke.codes import Code, evaluate, parse_code
from hecke.context import Mobius, make_context
from hecke.domain import get_partition, in_omega_star
from hecke.errors import CuspGeodesic, InvalidCode, OutOfDomain
from hecke.geometry import GeodesicEndpoints
from hecke.reduction import (
    ReducedGeodesic,
    closed_geodesic,
    has_minus_r_tail,
    hyperbolic_from_periodic,
    is_strongly_reduced,
    normalize_tail,
    reduce_endpoints,
    strongly_reduce,
)


def _check_reduced(ctx, g, rg):
    assert in_omega_star(ctx, get_partition(ctx), rg.xi, rg.eta)
    assert rg.word(g[0]) == pytest.approx(rg.xi, rel=1e-8, abs=1e-8)
    assert rg.word(g[1]) == pytest.approx(rg.eta, rel=1e-8, abs=1e-8)


def test_reduce_q3_example():
    ctx = make_context(3)
    g = (math.sqrt(2), -math.sqrt(3))
    rg = reduce_endpoints(ctx, g)
    _check_reduced(ctx, g, rg)
    assert abs(rg.word.det() - 1) < 1e-9


def test_already_reduced_is_identity():
    ctx = make_context(5)
    xi = evaluate(ctx, parse_code("3;(3)")).value
    eta = math.pi / 30
    rg = reduce_endpoints(ctx, (xi, eta))
    assert rg.tokens == ()
    assert (rg.xi, rg.eta) == (xi, eta)


@pytest.mark.parametrize("q", range(3, 9))
def test_reduce_quadratic_irrationals(q):
    ctx = make_context(q)
    rng = random.Random(q)
    for _ in range(40):
        a, b = rng.randint(2, 30), rng.randint(2, 30)
        if math.isqrt(a) ** 2 == a or math.isqrt(b) ** 2 == b:
            continue
        g = (rng.uniform(-3, 3) + math.sqrt(a) / 3, rng.uniform(-3, 3) - math.sqrt(b) / 3)
        if abs(g[0] - g[1]) < 1e-3:
            continue
        rg = reduce_endpoints(ctx, g, max_steps=200)
        _check_reduced(ctx, g, rg)


def test_word_tokens_match_matrix():
    from hecke.context import mobius_word
    ctx = make_context(4)
    g = (math.sqrt(7), -math.sqrt(11))
    rg = reduce_endpoints(ctx, g)
    M = mobius_word(ctx, rg.word_text()) if rg.tokens else Mobius.identity()
    assert M(g[0]) == pytest.approx(rg.xi, rel=1e-9)
    assert M(g[1]) == pytest.approx(rg.eta, rel=1e-9)


def test_cusp_rejected():
    ctx = make_context(4)
    with pytest.raises(CuspGeodesic):
        reduce_endpoints(ctx, (ctx.lam, -0.3))
    with pytest.raises(OutOfDomain):
        reduce_endpoints(ctx, (1.0, 1.0))


def _tail_case(ctx, code):
    u = evaluate(ctx, parse_code(code)).value
    return ReducedGeodesic(GeodesicEndpoints(-1.0 / u, -ctx.r), Mobius.identity(), ())


def test_normalize_tail_to_minus_R():
    ctx = make_context(4)
    out = normalize_tail(ctx, _tail_case(ctx, "0;3,-2,(5)"))
    assert out.word_text() == "T^-1"
    assert out.eta == pytest.approx(-ctx.R, abs=1e-12)


def test_normalize_tail_to_r():
    ctx = make_context(4)
    out = normalize_tail(ctx, _tail_case(ctx, "0;1,-3,(4)"))
    assert out.word_text() == "T^-1 S T^-1"
    assert out.eta == pytest.approx(ctx.r, abs=1e-12)


@pytest.mark.parametrize("q", [3, 4, 5, 6, 7])
def test_normalize_tail_removes_tail(q):
    ctx = make_context(q)
    part = get_partition(ctx)
    rng = random.Random(q)
    done = 0
    for _ in range(200):
        u = -rng.uniform(0.05, ctx.half)
        rg = ReducedGeodesic(GeodesicEndpoints(-1.0 / u, -ctx.r), Mobius.identity(), ())
        if not in_omega_star(ctx, part, rg.xi, rg.eta):
            continue
        out = normalize_tail(ctx, rg)
        assert in_omega_star(ctx, part, out.xi, out.eta)
        assert not has_minus_r_tail(ctx, out.eta)
        done += 1
    assert done > 20


def test_normalize_tail_noop():
    ctx = make_context(5)
    rg = ReducedGeodesic(GeodesicEndpoints(3.0, ctx.r), Mobius.identity(), ())
    assert normalize_tail(ctx, rg) is rg


def test_strongly_reduce_examples():
    ctx = make_context(6)
    xi = evaluate(ctx, parse_code("1;1,-2,(3)")).value
    assert strongly_reduce(ctx, (xi, 0.001))[1] == 2
    xi = evaluate(ctx, parse_code("1;3,(4)")).value
    assert strongly_reduce(ctx, (xi, 0.001))[1] == 1
    xi = evaluate(ctx, parse_code("3;(3)")).value
    rs, k = strongly_reduce(ctx, (xi, 0.001))
    assert k == 0 and rs.xi == xi


@pytest.mark.parametrize("q", range(3, 9))
def test_strongly_reduce_lands_in_strong_part(q):
    from conftest import random_omega_point
    ctx = make_context(q)
    rng = random.Random(q)
    for _ in range(200):
        u, v = random_omega_point(ctx, rng)
        rs, k = strongly_reduce(ctx, (-1.0 / u, -v))
        assert is_strongly_reduced(ctx, rs.xi, rs.eta)
        assert rs.word(-1.0 / u) == pytest.approx(rs.xi, rel=1e-6)


def test_periodic_q3_cycle_3():
    ctx = make_context(3)
    A, xi, xs = hyperbolic_from_periodic(ctx, [3])
    assert abs(A.trace()) == pytest.approx(3)
    assert xi == pytest.approx((-3 + math.sqrt(5)) / 2, abs=1e-12)
    assert xs == pytest.approx((-3 - math.sqrt(5)) / 2, abs=1e-12)
    assert abs(A.derivative(xi)) < 1


def test_periodic_q3_cycle_2_m2():
    ctx = make_context(3)
    A, xi, _ = hyperbolic_from_periodic(ctx, [2, -2])
    assert A.trace() == pytest.approx(-6)
    assert xi == pytest.approx(1 - math.sqrt(2), abs=1e-12)


def test_forbidden_cycle():
    with pytest.raises(InvalidCode):
        hyperbolic_from_periodic(make_context(3), [1])
    with pytest.raises(InvalidCode):
        closed_geodesic(make_context(4), [0, 3])


@pytest.mark.parametrize("q", [3, 4, 5, 8])
def test_closed_geodesic_fixed_by_word(q):
    ctx = make_context(q)
    part = get_partition(ctx)
    for cyc in ([3], [2, -3], [4, 2, -5]):
        try:
            g = closed_geodesic(ctx, cyc)
        except InvalidCode:
            continue
        A, xi, xs = hyperbolic_from_periodic(ctx, cyc)
        assert in_omega_star(ctx, part, g.xi, g.eta)
        assert Code(0, (), tuple(cyc)).cycle == tuple(cyc)
        assert -1.0 / g.xi == pytest.approx(xi, abs=1e-12)
