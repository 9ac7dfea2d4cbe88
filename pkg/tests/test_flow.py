import math
import random

import pytest

from conftest import random_strongly_reduced
from hecke.codes import evaluate, parse_code
from hecke.context import make_context
from hecke.errors import InvalidCode, OutOfDomain
from hecke.flow import (
    agree,
    closed_length,
    closed_start,
    entry_side_table,
    first_return_geometric,
    first_return_symbolic,
    in_upsilon_s,
    literal_window,
    period_returns,
    prepare,
    return_time,
    section_embed,
    simulate_returns,
    trace_length,
)
from hecke.geometry import intersect_side

GOLDEN = 2 * math.log((3 + math.sqrt(5)) / 2)


def golden(ctx):
    # the representative with xi > 0 has eta = -r and is not reduced, so
    # the canonical start is its mirror image
    return closed_start(ctx, [3])


def test_golden_section_point():
    ctx = make_context(3)
    g = golden(ctx)
    assert g.xi == pytest.approx(-(3 + math.sqrt(5)) / 2, abs=1e-12)
    assert g.eta == pytest.approx(ctx.r, abs=1e-12)
    p = section_embed(ctx, g)
    assert -p.label in (-1, 0, 2)
    back = p.to_geodesic(ctx)
    assert tuple(back) == pytest.approx(tuple(g), abs=1e-10)


def test_golden_is_fixed():
    ctx = make_context(3)
    g = golden(ctx)
    sym = first_return_symbolic(ctx, g)
    geo = first_return_geometric(ctx, g)
    assert sym.k == 1
    assert tuple(sym.point.endpoints) == pytest.approx(tuple(g), abs=1e-9)
    assert agree(sym, geo)
    assert return_time(ctx, g) == pytest.approx(GOLDEN, abs=1e-9)
    assert geo.time == pytest.approx(GOLDEN, abs=1e-9)


def test_embed_rejects_non_strong():
    ctx = make_context(4)
    with pytest.raises(OutOfDomain):
        section_embed(ctx, (1.5, 0.2))
    with pytest.raises(OutOfDomain):
        simulate_returns(ctx, (1.5, 0.2), 3)


def test_small_xi_never_lifted(ctx):
    rng = random.Random(ctx.q)
    seen = 0
    for _ in range(3000):
        g = random_strongly_reduced(ctx, rng)
        if g[0] * g[1] < 0 and abs(g[0]) <= 1.5 * ctx.lam:
            assert section_embed(ctx, g).label in (-1, 0, 1)
            seen += 1
    # for q = 3 the condition leaves nothing: 2/(3 lam) > lam/2
    assert seen > 0 or 2 / (3 * ctx.lam) > ctx.half


def test_embed_roundtrip(ctx):
    rng = random.Random(50 + ctx.q)
    for _ in range(500):
        g = random_strongly_reduced(ctx, rng)
        back = section_embed(ctx, g).to_geodesic(ctx)
        assert back[0] == pytest.approx(g[0], rel=1e-8)
        assert back[1] == pytest.approx(g[1], abs=1e-8)


def test_engines_agree(ctx):
    rng = random.Random(ctx.q)
    for _ in range(300):
        g = random_strongly_reduced(ctx, rng)
        a = first_return_symbolic(ctx, g)
        b = first_return_geometric(ctx, g)
        assert agree(a, b)
        assert a.time == pytest.approx(b.time, rel=1e-8)
        assert a.time > 0


def test_repaired_label_window():
    """Near xi = lam + 1 a geodesic can miss L3 and still cross L2."""
    ctx = make_context(5)
    g = (2.6290879603999655, 0.7691774441429339)
    assert in_upsilon_s(ctx, *g)
    assert not literal_window(ctx, g[0])
    it3 = intersect_side(ctx, 3, g)
    assert it3 is None or not it3.on_arc
    p = section_embed(ctx, g)
    assert p.label == 2
    assert tuple(p.to_geodesic(ctx)) == pytest.approx(g, abs=1e-9)
    assert agree(first_return_symbolic(ctx, g), first_return_geometric(ctx, g))


@pytest.mark.parametrize("q", [4, 5, 6, 7, 8])
def test_entry_side_table(q):
    ctx = make_context(q)
    rng = random.Random(q)
    for _ in range(1000):
        g = random_strongly_reduced(ctx, rng)
        assert entry_side_table(ctx, *g) == section_embed(ctx, g).label


def test_entry_side_table_q3_differs():
    ctx = make_context(3)
    rng = random.Random(3)
    miss = sum(entry_side_table(ctx, *g) != section_embed(ctx, g).label
               for g in (random_strongly_reduced(ctx, rng) for _ in range(1000)))
    assert miss > 0


def test_return_k_examples():
    ctx = make_context(4)
    xi = evaluate(ctx, parse_code("2;1,-3,(4)")).value
    rec = first_return_symbolic(ctx, (xi, -0.3))
    assert rec.k == 2 and rec.point.label == 1
    ctx = make_context(6)
    xi = evaluate(ctx, parse_code("1;1,-2,(3)")).value
    g = prepare(ctx, (xi, -0.2))
    assert first_return_symbolic(ctx, g).k >= 1


def test_closed_lengths():
    ctx = make_context(3)
    assert closed_length(ctx, [3]) == pytest.approx(1.9248473, abs=1e-7)
    assert closed_length(ctx, [2, -2]) == pytest.approx(3.5254943, abs=1e-7)
    assert closed_length(ctx, [2, -2]) == pytest.approx(2 * math.acosh(3), abs=1e-12)
    with pytest.raises(InvalidCode):
        closed_length(ctx, [1])


def test_rotation_invariance():
    ctx = make_context(5)
    cyc = [3, -2, 4]
    base = closed_length(ctx, cyc)
    for k in range(1, 3):
        assert closed_length(ctx, cyc[k:] + cyc[:k]) == pytest.approx(base, rel=1e-12)


@pytest.mark.parametrize("q", [3, 4, 5, 6, 7, 8])
def test_length_matches_trace(q):
    ctx = make_context(q)
    rng = random.Random(q)
    n = 0
    while n < 30:
        cyc = [rng.choice([-1, 1]) * rng.randint(2, 5) for _ in range(rng.randint(1, 4))]
        try:
            cl = closed_length(ctx, cyc)
        except InvalidCode:
            continue
        assert cl == pytest.approx(trace_length(ctx, cyc), rel=1e-9)
        n += 1


@pytest.mark.parametrize("q, cyc", [(3, [3]), (3, [2, -2]), (4, [3, -2]), (5, [4, 2, -3]), (7, [3, 3, -2])])
def test_telescoping(q, cyc):
    ctx = make_context(q)
    recs = period_returns(ctx, cyc, "both")
    assert sum(r.k for r in recs) == len(cyc)
    assert recs[-1].cumulative_time == pytest.approx(closed_length(ctx, cyc), abs=1e-8)
    assert tuple(recs[-1].point.endpoints) == pytest.approx(tuple(closed_start(ctx, cyc)), abs=1e-8)


def test_orbit_is_periodic():
    ctx = make_context(4)
    cyc = [3, -2, 5]
    start = closed_start(ctx, cyc)
    recs = simulate_returns(ctx, start, 2 * len(cyc))
    ends = [tuple(r.point.endpoints) for r in recs]
    per = next(p for p in range(1, len(cyc) + 1) if ends[p - 1] == pytest.approx(tuple(start), abs=1e-8))
    for a, b in zip(ends[per:2 * per], ends[:per]):
        assert a == pytest.approx(b, abs=1e-7)


def test_count_zero():
    ctx = make_context(3)
    assert simulate_returns(ctx, golden(ctx), 0) == []


def test_cumulative_time_increases():
    ctx = make_context(6)
    rng = random.Random(1)
    g = random_strongly_reduced(ctx, rng)
    recs = simulate_returns(ctx, g, 20, engine="both")
    times = [r.cumulative_time for r in recs]
    assert all(b > a for a, b in zip(times, times[1:]))
