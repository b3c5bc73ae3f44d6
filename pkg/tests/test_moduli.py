import cmath
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from paralab.errors import DomainError, NotInvertibleError, PrecisionError
from paralab.germ import f0, from_coefficients, log2exp
from paralab.hp import context
from paralab.moduli import (NARROW_Q_WINDOW, Moment, ev_from_two_sided_moments, ev_modulus_direct,
                            fatou_coordinate, formclas_conjugate, invert_fatou, m_moment, moment_equivalent,
                            two_dim_trivialization)

TWO_PI_I = 2j * math.pi


@pytest.fixture(scope="module")
def f0_moment():
    return m_moment(f0(), 1)


@pytest.fixture(scope="module")
def f0_moment_minus():
    return m_moment(f0(), 1, trivialization="-")


def test_fatou_coordinates():
    assert complex(fatou_coordinate(f0())(-0.2)) == pytest.approx(5, abs=1e-12)
    # sectorial Fatou coordinate of the global family is -1/phi + 1/2 (no constant term)
    z = -0.5
    phi = 1 - math.exp(-z)
    assert complex(fatou_coordinate(log2exp())(z)) == pytest.approx(-1 / phi + 0.5, abs=1e-12)


def test_fatou_inversion_roundtrip():
    c = context(30)
    psi = fatou_coordinate(log2exp(), "+", c)
    w = c.mpc(0.3, 2.0)
    z = invert_fatou(psi, w)
    assert abs(psi(z) - w) < 1e-20


def test_f0_one_moment_is_two_pi_i_geometric(f0_moment):
    # g(t) = 2 pi i t/(1 - t): every Taylor coefficient equals 2 pi i
    for seq in (f0_moment.g_inf, f0_moment.g_0):
        assert abs(complex(seq[0])) < 1e-12
        for c in seq[1:5]:
            assert complex(c) == pytest.approx(TWO_PI_I, abs=1e-8)


def test_zero_moment_of_f0_is_trivial():
    assert m_moment(f0(), 0).is_trivial(1e-10)


def test_global_family_has_trivial_one_moment():
    assert m_moment(log2exp(), 1).is_trivial(1e-10)


def test_moment_window_floor():
    with pytest.raises(PrecisionError):
        m_moment(f0(), 1, q_window=(1e-14, 1e-9))
    with pytest.raises(DomainError):
        m_moment(f0(), -1)


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.floats(0.3, 3.0), st.floats(-math.pi, math.pi))
def test_action_is_invisible_to_equivalence(a, r, theta):
    M = Moment(1, (0, TWO_PI_I, TWO_PI_I, TWO_PI_I, TWO_PI_I), (0, TWO_PI_I, TWO_PI_I, TWO_PI_I, TWO_PI_I), "model")
    b = r * cmath.exp(1j * theta)
    ok, (a_hat, b_hat) = moment_equivalent(M, M.act(a, b), tol=1e-9, through=4)
    assert ok
    assert a_hat == pytest.approx(a, abs=1e-9)
    assert b_hat == pytest.approx(b, rel=1e-9)


@given(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
       st.complex_numbers(min_magnitude=0.5, max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_canonical_form_is_invariant(a, b):
    M = Moment(1, (0.3, 1 + 1j, 0.5, -0.2), (-0.3, 2.0, 0.1j, 0.7), "x")
    c1 = M.canonical()[0]
    c2 = M.act(a, b).canonical()[0]
    assert [complex(x) for x in c2.g_inf] == pytest.approx([complex(x) for x in c1.g_inf], abs=1e-9)
    assert [complex(x) for x in c2.g_0] == pytest.approx([complex(x) for x in c1.g_0], abs=1e-9)


@pytest.mark.parametrize("c", [0.3, 1 + 0.2j])
def test_shifted_trivialization_is_equivalent(f0_moment, c):
    shifted = m_moment(f0(), 1, shift=c)
    ok, (a, b) = moment_equivalent(f0_moment, shifted)
    assert ok
    assert b == pytest.approx(cmath.exp(-TWO_PI_I * c), rel=1e-8)


def test_trivial_versus_nontrivial(f0_moment):
    assert moment_equivalent(f0_moment, Moment.zero(1))[0] is False
    with pytest.raises(DomainError):
        moment_equivalent(f0_moment, Moment.zero(0))


def test_conjugate_by_cubic_has_equal_moment(f0_moment):
    conj = formclas_conjugate(f0(), from_coefficients([0, 0, 0, 1], label="z^3"))
    c = context(16)
    # the conjugate differs from f0 beyond the order fixed by the formal class
    assert max(abs(complex(x) - 1) for x in conj.g.coefficients(c, 6)) > 0.5
    ref = m_moment(f0(), 1, q_window=NARROW_Q_WINDOW)
    assert moment_equivalent(ref, m_moment(conj.g, 1, q_window=NARROW_Q_WINDOW))[0]


def test_ev_moduli_of_f0_are_identity(f0_moment, f0_moment_minus):
    direct = ev_modulus_direct(f0())
    assert direct.identity_deviation() < 1e-8
    two = ev_from_two_sided_moments(f0_moment, f0_moment_minus)
    assert two.identity_deviation() < 1e-8
    for a, b in zip(direct.phi_0 + direct.phi_inf, two.phi_0 + two.phi_inf):
        assert abs(complex(a) - complex(b)) < 1e-6


def test_ev_moduli_of_global_family():
    assert ev_modulus_direct(log2exp()).identity_deviation() < 1e-10


def test_member_of_S_is_not_invertible():
    plus = m_moment(log2exp(), 1)
    minus = m_moment(log2exp(), 1, trivialization="-")
    with pytest.raises(NotInvertibleError):
        ev_from_two_sided_moments(plus, minus)


@pytest.mark.parametrize("germ", [f0(), log2exp()])
@pytest.mark.parametrize("z,w", [(-0.2, 0.3), (-0.1 + 0.1j, -1j), (0.05j - 0.15, 2.0)])
def test_two_dimensional_trivialization(germ, z, w):
    assert two_dim_trivialization(germ, z, w).residual < 1e-12
