import random

import pytest

from hecke.context import make_context
from hecke.domain import OMEGA_STRONG, get_partition, omega_membership


def random_strongly_reduced(ctx, rng):
    """Rejection sample (u, v) in the strong part of Omega, as endpoints."""
    part = get_partition(ctx)
    while True:
        u = rng.uniform(-ctx.half, ctx.half)
        v = rng.uniform(-ctx.R, ctx.R)
        if u != 0 and omega_membership(ctx, part, (u, v)) == OMEGA_STRONG:
            return -1.0 / u, -v


def random_omega_point(ctx, rng):
    part = get_partition(ctx)
    while True:
        u = rng.uniform(-ctx.half, ctx.half)
        v = rng.uniform(-ctx.R, ctx.R)
        if u != 0 and v != 0 and omega_membership(ctx, part, (u, v)) != "outside":
            return u, v


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(params=[3, 4, 5, 6, 7, 8])
def ctx(request):
    return make_context(request.param)
