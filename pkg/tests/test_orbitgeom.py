import io
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from paralab.errors import DomainError, RangeError, TruncationError
from paralab.germ import f0, identity, log2exp
from paralab.hp import context
from paralab.orbitgeom import (CSV_COLUMNS, AreaEvaluator, area_function, check_functional_equation,
                               crescent_kernel, crescent_relation_residual, directed_area, directed_area_oracle,
                               orbit, orbit_length_for, reconstruct_orbit_from_area, separation_index,
                               two_disc_directed_area, write_area_csv)

ctx = context()
F0_AREA = area_function(f0(), -0.5, 1e-4)


def exact_f0_point(z0, n):
    return z0 / (1 - n * z0)


def test_orbit_of_f0_matches_closed_form():
    o = orbit(f0(), -0.5, max_n=50, ctx=ctx)
    assert [complex(p) for p in o.points[:5]] == pytest.approx([-1 / (n + 2) for n in range(5)])
    # eps_n = d_n / 2 = 1/(2(n+2)(n+3))
    assert float(o.thresholds[6]) == pytest.approx(1 / (2 * 8 * 9))
    assert o.monotone_from == 0


def test_separation_index():
    o = orbit(f0(), -0.5, max_n=200, ctx=ctx)
    eps = 1 / (2 * 8 * 9)
    assert separation_index(o, eps * 1.0001) == 5
    assert separation_index(o, eps * 0.9999) == 6
    assert separation_index(o, 1.0, allow_full_nucleus=True) == -1


def test_crescent_kernel_values():
    assert crescent_kernel(0.0) == 0
    assert crescent_kernel(1.0) == pytest.approx(math.pi / 2)
    c = context(30)
    assert abs(crescent_kernel(c.mpf("0.3"), c) - crescent_kernel(0.3)) < 1e-15


def test_identity_germ_area_is_single_disc():
    eps = 0.01
    a = directed_area(identity(), 0.2 + 0.1j, eps)
    assert complex(a.value) == pytest.approx(math.pi * eps ** 2 * (0.2 + 0.1j))


@given(st.floats(0.05, 0.4), st.floats(-0.1, 0.1), st.floats(0.05, 0.45))
def test_functional_equation_for_disjoint_discs(r, y, frac):
    z = complex(-r, y)
    d = abs(z - f0()(z))
    eps = frac * d
    assume(eps > 1e-3)
    assert check_functional_equation(f0(), z, eps) < 1e-13 * eps ** 2


@given(st.floats(0.05, 0.4), st.floats(-0.1, 0.1), st.floats(0.55, 3.0))
def test_crescent_relation_for_overlapping_discs(r, y, frac):
    z = complex(-r, y)
    f = log2exp()
    d = abs(z - f(z))
    eps = frac * d
    assume(eps > 1e-3)
    assert crescent_relation_residual(f, z, eps) < 1e-12 * eps ** 2


def test_identity_checks_reject_wrong_regime():
    z = -0.3
    d = abs(z - f0()(z))
    with pytest.raises(RangeError):
        check_functional_equation(f0(), z, d)
    with pytest.raises(RangeError):
        crescent_relation_residual(f0(), z, d / 4)


def test_two_disc_formula_matches_oracle():
    a, b, eps = 0.1 + 0.02j, 0.13 - 0.01j, 0.03
    ref = directed_area_oracle([a, b], eps, resolution=256)
    assert abs(two_disc_directed_area(a, b, eps) - ref.value) < 3 * ref.error_estimate + 1e-12


@pytest.mark.parametrize("z0,eps", [(-0.3, 0.005), (-0.2 + 0.05j, 0.004)])
def test_area_matches_quadrature_oracle(z0, eps):
    o = orbit(f0(), z0, max_n=10 ** 6, min_abs=eps / 4, ctx=ctx)
    ref = directed_area_oracle(o, eps)
    val = complex(directed_area(f0(), z0, eps).value)
    assert abs(val - ref.value) <= 3 * ref.error_estimate


def test_double_and_multiprecision_areas_agree():
    c = context(40)
    hi = area_function(f0(), -0.5, 1e-4, c)
    for e in (1e-4, 3.3e-4, 0.002, 0.05):
        lo = complex(F0_AREA.normalized(e)[0])
        ref = complex(hi.normalized(c.mpf(e))[0])
        assert abs(lo - ref) < 1e-14 * max(1, abs(ref))


def test_area_is_continuous_across_a_threshold():
    e6 = 1 / (2 * 8 * 9)
    left = complex(F0_AREA.normalized(e6 * (1 - 1e-9))[0])
    right = complex(F0_AREA.normalized(e6 * (1 + 1e-9))[0])
    assert abs(left - right) < 1e-7


def test_inner_and_outer_variants_differ():
    inner = AreaEvaluator(F0_AREA.orbit, variant="inner")
    assert abs(complex(inner.normalized(0.003)[0]) - complex(F0_AREA.normalized(0.003)[0])) > 1e-3
    with pytest.raises(DomainError):
        AreaEvaluator(F0_AREA.orbit, variant="middle")


def test_short_orbit_is_refused():
    o = orbit(f0(), -0.5, max_n=100, ctx=ctx)
    with pytest.raises(TruncationError):
        AreaEvaluator(o)


def test_orbit_length_grows_with_resolution():
    assert orbit_length_for(1e-6, -0.5) > orbit_length_for(1e-3, -0.5)
    assert orbit_length_for(1e-3, -0.5) & (orbit_length_for(1e-3, -0.5) - 1) == 0


def test_reconstruction_recovers_f0_thresholds():
    rec = reconstruct_orbit_from_area(lambda e: F0_AREA(e).value, (2e-3, 5e-2))
    for e, s in zip(rec.thresholds, rec.midpoint_sums):
        n = round((-5 + math.sqrt(1 + 2 / e)) / 2)
        assert e == pytest.approx(1 / (2 * (n + 2) * (n + 3)), abs=1e-8)
        assert s == pytest.approx(-(1 / (n + 2) + 1 / (n + 3)), abs=1e-3)


def test_csv_rows_and_precision():
    buf = io.StringIO()
    write_area_csv([F0_AREA(e) for e in (1e-3, 1e-2)], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 3
    c = context(30)
    ev = area_function(f0(), -0.5, 1e-3, c)
    buf = io.StringIO()
    write_area_csv([ev(c.mpf("0.002"))], buf, c)
    assert len(buf.getvalue().splitlines()[1].split(",")[1]) > 25
