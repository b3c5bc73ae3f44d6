import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from paralab import series as ps
from paralab.accel import ladder, richardson
from paralab.hp import context

ctx = context()
coef = st.floats(-2, 2, allow_nan=False)


def tangent(cs):
    return [0, 1] + list(cs)


@given(st.lists(coef, min_size=6, max_size=6))
def test_reversion_is_inverse(cs):
    a = tangent(cs)
    n = len(a) - 1
    r = ps.reversion(ctx, a, n)
    for left in (ps.compose(ctx, a, r, n), ps.compose(ctx, r, a, n)):
        assert all(abs(x - y) < 1e-9 * (1 + max(abs(c) for c in cs)) ** n
                   for x, y in zip(left, ps.identity(ctx, n)))


@given(st.lists(coef, min_size=5, max_size=5), st.lists(coef, min_size=5, max_size=5),
       st.lists(coef, min_size=5, max_size=5))
def test_compose_associative(a, b, c):
    a, b, c = tangent(a), tangent(b), tangent(c)
    n = 6
    lhs = ps.compose(ctx, ps.compose(ctx, a, b, n), c, n)
    rhs = ps.compose(ctx, a, ps.compose(ctx, b, c, n), n)
    assert all(abs(x - y) < 1e-8 * max(1, abs(x)) for x, y in zip(lhs, rhs))


@given(st.lists(coef, min_size=6, max_size=6))
def test_exp_log_roundtrip(cs):
    a = [0] + list(cs)
    n = 6
    back = ps.log(ctx, ps.exp(ctx, a, n), n)
    assert all(abs(x - y) < 1e-9 * (1 + max(map(abs, cs))) ** n for x, y in zip(back, a))


def test_reciprocal_and_divide():
    one_minus_z = [1, -1, 0, 0, 0]
    assert ps.reciprocal(ctx, one_minus_z, 4) == pytest.approx([1, 1, 1, 1, 1])
    assert ps.divide(ctx, [0, 1, 0, 0, 0], one_minus_z, 4) == pytest.approx([0, 1, 1, 1, 1])


def test_power_and_valuation():
    assert ps.valuation([0, 0, 3, 1]) == 2
    assert ps.power(ctx, [0, 1, 1], 2, 4) == pytest.approx([0, 0, 1, 2, 1])


def test_richardson_removes_inverse_powers():
    L = 1.234
    f = lambda n: L + 3 / n ** 2 - 5 / n ** 3 + 7 / n ** 4
    rungs = ladder(1024, 4)
    best, err = richardson([f(n) for n in rungs], 2, [2, 3, 4])
    assert abs(best - L) < 1e-12
    assert rungs == sorted(rungs) and rungs[-1] == 1024


def test_multiprecision_context_digits():
    c = context(40)
    a = ps.exp(c, [0, 1] + [0] * 20, 20)
    assert abs(ps.evaluate(a, c.mpf(1) / 10) - c.exp(c.mpf(1) / 10)) < c.mpf(10) ** -35
