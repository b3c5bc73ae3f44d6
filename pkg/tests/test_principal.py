import math

import pytest

from paralab.errors import BranchError, FitError, IllConditionedError
from paralab.germ import f0, log2exp, phi_germ
from paralab.hp import context
from paralab.principal import (BASIS_FULL, c0_of_orbit_sum, fit_expansion, principal_via_cohom,
                               principal_via_geometry, pringlo_closed_form)

EULER_GAMMA = 0.5772156649015329
ctx = context()


def test_cohomological_principal_part_of_f0():
    # pi (1 - gamma) - i pi^2 shifted by -pi/4 + i pi^2
    v = principal_via_cohom(f0(), -0.5).value
    assert complex(v) == pytest.approx(math.pi * (0.75 - EULER_GAMMA), abs=1e-12)


def test_two_sides_agree_on_the_real_axis_shift():
    plus = principal_via_cohom(f0(), -0.3, "+")
    assert set(plus.components) == {"H+", "shift"}


def test_orbit_sum_constant_of_f0():
    # sum_{l<=n} -1/(l+2) + log n -> 1 - gamma + ... : the f0 orbit from -1/2
    assert complex(c0_of_orbit_sum(f0(), -0.5)) == pytest.approx(1 - EULER_GAMMA, abs=1e-10)


def test_orbit_sum_route_matches_cohomology_for_log2exp():
    c0 = complex(c0_of_orbit_sum(log2exp(), -0.5))
    v = complex(principal_via_cohom(log2exp(), -0.5).value)
    assert math.pi * c0 - math.pi / 4 == pytest.approx(v, abs=1e-9)


def test_closed_form_principal_part_for_global_family():
    phi = phi_germ("oneminusexp")
    for z in (-0.5, -0.2 + 0.15j):
        assert complex(pringlo_closed_form(phi, z)) == pytest.approx(complex(principal_via_cohom(log2exp(), z).value),
                                                                     abs=1e-10)


def test_closed_form_branch_cut():
    with pytest.raises(BranchError):
        pringlo_closed_form(phi_germ("oneminusexp"), -0.5, "-")


def test_fit_recovers_synthetic_coefficients():
    c = context(32)
    true = [c.mpf("1.5"), c.mpf("-0.7"), c.mpf("0.01"), c.mpf("0.3")]
    grid = [c.mpf(10) ** (-6 + 3 * c.mpf(i) / 29) for i in range(30)]
    areas = [true[0] * e * e * c.log(e) + true[1] * e * e + true[2] * e ** 2.5 * c.log(e) + true[3] * e ** 2.5
             for e in grid]
    fit = fit_expansion(grid, areas, c)
    assert [complex(x) for x in fit.coefficients] == pytest.approx([complex(t) for t in true], abs=1e-20)
    assert fit.basis == BASIS_FULL


def test_fit_guards():
    c = context(32)
    with pytest.raises(FitError):
        fit_expansion([c.mpf(1e-3)] * 4, [0] * 4, c)
    grid = [c.mpf(1e-4) * (1 + c.mpf(i) * 1e-9) for i in range(12)]
    with pytest.raises(IllConditionedError):
        fit_expansion(grid, [e * e for e in grid], c)


@pytest.mark.slow
def test_geometric_principal_part_matches_cohomology():
    fit = principal_via_geometry(f0(), "-0.3")
    assert abs(complex(fit.H) - complex(principal_via_cohom(f0(), -0.3).value)) < 1e-3
    assert complex(fit.q1) == pytest.approx(math.pi / 2, abs=1e-4)
    assert fit.condition_number < 1e4


def test_nucleus_and_tail_constants():
    from paralab.principal import nucleus_tail_constants

    k = nucleus_tail_constants()
    assert k["nucleus"] == pytest.approx(-(math.pi / 4) * (1 + math.log(4)), abs=1e-15)
    assert k["nucleus"] == pytest.approx(-1.8741912, abs=1e-7)
    assert k["tail_offset"] == pytest.approx(1.0887930, abs=1e-7)
    assert k["nucleus"] + k["tail_offset"] == pytest.approx(-math.pi / 4, abs=1e-15)
