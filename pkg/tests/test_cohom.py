import cmath
import math

import mpmath
import pytest
import scipy.special
from hypothesis import given
from hypothesis import strategies as st

from paralab.cohom import (Rhs, borel_laplace_model, cocycle, construct_global, f0_cocycle_closed_form,
                           formal_solution, residue_series, sectorial_solution, verify_solution)
from paralab.errors import DomainError, ObstructionError, RayError
from paralab.germ import f0, from_coefficients, get_germ, log2exp, phi_germ, zexpz
from paralab.hp import context, log_branch

ctx = context()
EULER_GAMMA = 0.5772156649015329
ABEL_F0 = sectorial_solution(f0(), Rhs.monomial(0, 1), "+", ctx)
ONE_ABEL_F0 = sectorial_solution(f0(), Rhs.parse("-pi*z"), "+", ctx)


def petal_point(r, a):
    return -r * cmath.exp(1j * a)


petal_pts = st.builds(petal_point, st.floats(0.02, 0.3), st.floats(-2.0, 2.0))


# -- right-hand sides ---------------------------------------------------------------
@pytest.mark.parametrize("text,coeffs", [
    ("-z", [0, -1]), ("z^2", [0, 0, 1]), ("1", [1]), ("2*z^3-z", [0, -1, 0, 2]), ("z**2+3", [3, 0, 1])])
def test_rhs_parse(text, coeffs):
    got = Rhs.parse(text).coefficients(ctx, len(coeffs) - 1)
    assert [complex(c) for c in got] == pytest.approx(coeffs)


def test_rhs_parse_pi():
    assert complex(Rhs.parse("-pi*z").coefficients(ctx, 1)[1]) == pytest.approx(-math.pi)


@pytest.mark.parametrize("bad", ["", "z^", "x+1", "0"])
def test_rhs_parse_rejects(bad):
    with pytest.raises(DomainError):
        Rhs.parse(bad)


def test_rhs_json_roundtrip():
    g = Rhs.parse("2*z^3-z")
    back = Rhs.from_json(g.to_json())
    assert [complex(c) for c in back.coefficients(ctx, 4)] == pytest.approx([complex(c) for c in g.coefficients(ctx, 4)])


# -- formal solutions ---------------------------------------------------------------
def test_formal_abel_solution_of_f0_is_exact():
    fs = formal_solution(f0(), Rhs.monomial(0, 1), 8)
    # Psi = -1/z exactly: alpha0 = 1 and no regular part
    assert complex(fs.alpha0) == pytest.approx(1)
    assert all(abs(c) < 1e-14 for c in fs.z_coefficients)


def test_formal_one_abel_has_log_term():
    fs = formal_solution(f0(), Rhs.parse("-pi*z"), 6)
    assert complex(fs.alpha1) == pytest.approx(-math.pi)
    assert fs.residual < 1e-13


def test_formal_solution_obstructions():
    with pytest.raises(ObstructionError):
        formal_solution(from_coefficients([1, 2]), Rhs.monomial(0, 1), 6)
    with pytest.raises(ObstructionError):
        formal_solution(from_coefficients([1, 1, 2]), Rhs.monomial(0, 1), 6)
    with pytest.raises(DomainError):
        formal_solution(from_coefficients([2, 1]), Rhs.monomial(2, 1), 6)


# -- sectorial solutions --------------------------------------------------------------
@given(petal_pts)
def test_abel_solution_of_f0_is_minus_one_over_z(z):
    assert abs(complex(ABEL_F0(z)) + 1 / z) < 1e-12


@given(petal_pts)
def test_one_abel_of_f0_is_digamma(z):
    ref = math.pi * complex(scipy.special.psi(-1 / z)) - 1j * math.pi ** 2
    assert abs(complex(ONE_ABEL_F0(z)) - ref) < 1e-10 * max(1, abs(ref))


def test_one_abel_at_minus_half():
    assert complex(ONE_ABEL_F0(-0.5)) == pytest.approx(math.pi * (1 - EULER_GAMMA) - 1j * math.pi ** 2, abs=1e-12)


@pytest.mark.parametrize("name", ["f0", "log2exp", "zexpz", "exp-family:tan"])
@pytest.mark.parametrize("side", ["+", "-"])
def test_sectorial_solution_satisfies_equation(name, side):
    f = get_germ(name)
    g = Rhs.parse("-z+z^2")
    H = sectorial_solution(f, g, side, ctx)
    pts = [0.1 * cmath.exp(1j * a) * (-1 if side == "+" else 1) for a in (-1.0, 0.0, 0.9)]
    assert verify_solution(f, g, H, pts, ctx) < 1e-11


def test_global_family_closed_form():
    H = sectorial_solution(log2exp(), Rhs.parse("-pi*z"), "+", ctx)
    phi = phi_germ("oneminusexp")
    for z in (-0.5, -0.2 + 0.1j, -0.1 - 0.25j):
        ref = -math.pi * complex(log_branch(ctx, phi(z, ctx), "+"))
        assert complex(H(z)) == pytest.approx(ref, abs=1e-10)


# -- cocycles -------------------------------------------------------------------------
def strip_point(y, x=0.1, upper=True):
    w = complex(x, y)
    return -1 / w if upper else -1 / w.conjugate()


def test_f0_cocycle_sign_against_digamma_reflection():
    """H+ - H- = psi(w) - psi(1 - w) - i pi = 2 pi i q/(1 - q), w = -1/z, q = e^(2 pi i w)."""
    c = context(40)
    z = strip_point(2.0)
    sample = cocycle(f0(), Rhs.parse("-z"), [z], c)[0]
    w = -1 / c.mpc(z)
    with mpmath.workdps(45):
        wm = mpmath.mpc(str(w.real), str(w.imag))
        oracle = mpmath.digamma(wm) - mpmath.digamma(1 - wm) - 1j * mpmath.pi
        oracle = c.mpc(str(oracle.real), str(oracle.imag))
    assert abs(sample.value - oracle) < 1e-30 * abs(oracle)
    assert abs(sample.value - f0_cocycle_closed_form(z, c, sign=1)) < 1e-30 * abs(oracle)
    assert abs(sample.value - f0_cocycle_closed_form(z, c, sign=-1)) > abs(oracle)


def test_f0_cocycle_lower_component_and_branch_constant():
    c = context(40)
    z = strip_point(2.0, upper=False)
    s = cocycle(f0(), Rhs.parse("-z"), [z], c)[0]
    assert s.component == "low"
    # alpha1 = -1 for rhs -z, so the two log branches differ by the constant 2 pi i
    assert complex(s.branch_constant) == pytest.approx(2j * math.pi)
    assert abs(s.value - f0_cocycle_closed_form(z, c)) < 1e-30


def test_global_family_has_trivial_cocycle():
    c = context(40)
    pts = [strip_point(y, x) for y, x in ((1.5, 0.2), (2.5, -0.3))]
    pts += [strip_point(1.8, upper=False)]
    for s in cocycle(log2exp(), Rhs.parse("-z"), pts, c):
        assert abs(s.value) < 1e-25


def test_cocycle_rejects_real_points():
    with pytest.raises(DomainError):
        cocycle(f0(), Rhs.parse("-z"), [-0.1], context(40))


# -- Borel-Laplace model ----------------------------------------------------------------
def test_laplace_sum_matches_orbit_sum():
    S = sectorial_solution(f0(), Rhs.parse("-z"), "+", ctx)
    assert complex(borel_laplace_model(0, 20)) == pytest.approx(complex(S.regular(-1 / 20)), abs=1e-12)


def test_ray_difference_is_residue_sum():
    w = 0.5 + 3j
    d = borel_laplace_model(-math.pi / 2 + 0.3, w) - borel_laplace_model(-math.pi / 2 - 0.3, w)
    assert complex(d) == pytest.approx(2j * math.pi * complex(residue_series(w)), rel=1e-8)


def test_singular_ray_is_refused():
    with pytest.raises(RayError):
        borel_laplace_model(math.pi / 2, 1 + 1j)


# -- global constructions -----------------------------------------------------------------
def test_construct_global_quadratic():
    G = construct_global(phi_germ("id"), Rhs.parse("z^2"), ctx)
    assert [complex(c) for c in G.f.coefficients(ctx, 4)] == pytest.approx([1, 1, 0, 0])
    assert complex(G.H(-0.1)) == pytest.approx(-0.1)
    assert G.residual < 1e-13


def test_construct_global_recovers_log2exp():
    G = construct_global(phi_germ("oneminusexp"), Rhs.parse("-pi*z"), ctx)
    got = G.f.coefficients(ctx, 9)
    want = log2exp().coefficients(ctx, 9)
    assert max(abs(complex(a - b)) for a, b in zip(got, want)) < 1e-10


def test_construct_global_constant_rhs():
    G = construct_global(phi_germ("id"), Rhs.parse("1"), ctx)
    assert [complex(c) for c in G.f.coefficients(ctx, 3)] == pytest.approx([1, 1, 1])
