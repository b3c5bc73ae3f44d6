import cmath
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from paralab.errors import DomainError, EscapeError
from paralab.germ import (FIXTURES, MODEL_CLASS_FIXTURES, compose, conjugate, f0, formal_class, from_coefficients,
                          get_germ, germ_from_json, germ_to_json, identity, invert, iterate, log2exp,
                          newton_inverse, petal, phi_germ)
from paralab.hp import context

ctx = context()
small = st.complex_numbers(max_magnitude=0.15, allow_nan=False, allow_infinity=False)


def test_f0_series_and_closed_form_agree():
    f = f0()
    assert f.coefficients(ctx, 5) == pytest.approx([1, 1, 1, 1, 1])
    assert f(-0.5) == pytest.approx(-1 / 3)


def test_self_composition_of_f0():
    # z/(1-z) composed with itself is z/(1-2z)
    g = compose(f0(), f0())
    assert g.coefficients(ctx, 3) == pytest.approx([1, 2, 4])
    assert g(-0.25) == pytest.approx(-0.25 / 1.5)


@given(small)
def test_invert_roundtrip_closed(z):
    f = f0()
    fi = invert(f)
    assert abs(fi(f(z)) - z) < 1e-14


@given(small)
def test_newton_inverse_of_log2exp(z):
    f = log2exp()
    w = f(z)
    assert abs(newton_inverse(f, w, ctx) - z) < 1e-13


@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3), small)
def test_polynomial_germ_inverse_series(cs, z):
    p = from_coefficients([1] + cs)
    ps_inv = invert(p).series(ctx, 12)
    series_comp = compose(p, invert(p)).coefficients(ctx, 8)
    assert series_comp[0] == pytest.approx(1)
    assert all(abs(c) < 1e-9 * 10 ** k for k, c in enumerate(series_comp[1:], 1))
    assert ps_inv[1] == pytest.approx(1)


def test_conjugate_by_identity_is_f():
    g = conjugate(f0(), identity())
    assert g(-0.3) == pytest.approx(f0()(-0.3))


def test_iterate_closed_form():
    z0 = -0.5
    assert iterate(f0(), 10, z0) == pytest.approx(z0 / (1 - 10 * z0))
    with pytest.raises(EscapeError):
        iterate(f0(), 5, 0.3, escape_radius=0.5)


@pytest.mark.parametrize("name", MODEL_CLASS_FIXTURES)
def test_model_class_fixtures_have_no_obstruction(name):
    info = formal_class(get_germ(name))
    assert info.k == 1
    assert abs(info.rho_obstruction) < 1e-10


def test_formal_class_detects_obstruction():
    # z + z^2 + 2 z^3: coefficient of z^3 off the model value
    info = formal_class(from_coefficients([1, 1, 2]))
    assert abs(info.rho_obstruction) > 1e-3


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_json_roundtrip(name):
    g = get_germ(name)
    doc = germ_to_json(g, ctx, 10)
    back = germ_from_json(doc)
    assert back.coefficients(ctx, 10) == pytest.approx(g.coefficients(ctx, 10), abs=1e-14)


def test_unknown_fixture():
    with pytest.raises(DomainError):
        get_germ("nonsense")


def test_petals_and_intersections():
    assert petal("+").contains(-0.1)
    assert not petal("+").contains(0.1)
    assert petal("-").contains(0.1)
    assert petal("up").contains(0.1j)
    assert not petal("up").contains(-0.1j)
    assert petal("low").contains(-0.1j)


@pytest.mark.parametrize("name", ["id", "oneminusexp", "tan"])
def test_phis_tangent_to_identity(name):
    assert phi_germ(name).coefficients(ctx, 1)[0] == pytest.approx(1)


def test_evaluate_and_taylor_wrappers():
    from paralab.germ import evaluate, taylor

    assert evaluate(f0(), -0.5) == pytest.approx(-1 / 3)
    assert evaluate(f0(), 0) == 0
    assert evaluate(log2exp(), 0) == 0
    assert taylor(f0(), 4) == pytest.approx((1, 1, 1, 1))
    assert taylor(phi_germ("oneminusexp"), 3) == pytest.approx((1, -0.5, 1 / 6))
    assert taylor(log2exp(), 3) == pytest.approx((1, 1, 1))
