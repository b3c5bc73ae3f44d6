"""Cocycles, moments and Ecalle-Voronin moduli.

On the two petal intersections the difference of the attracting and
repelling solutions of H(f) - H = -z is exponentially small.  For f0 it is
2 pi i q/(1 - q) with q = exp(-2 pi i/z); for the global family
-log(2 - e^z) it vanishes.  Lifting to the orbit space turns these
differences into a pair of germs, the 1-moment.
"""
import math

from paralab.cohom import Rhs, cocycle, f0_cocycle_closed_form
from paralab.germ import f0, from_coefficients, log2exp
from paralab.hp import context
from paralab.moduli import (NARROW_Q_WINDOW, ev_modulus_direct, formclas_conjugate, m_moment,
                            moment_equivalent)

c40 = context(40)
pts = [-1 / complex(0.1, y) for y in (1.5, 2.5, 3.5)]

# %% cocycle of f0 against the closed form
print("f0, rhs -z")
for s in cocycle(f0(), Rhs.parse("-z"), pts, c40):
    ref = f0_cocycle_closed_form(s.z, c40)
    print(f"  |q| = {float(abs(c40.exp(-2j * c40.pi / s.z))):.1e}  rel. error {float(abs(s.value - ref) / abs(ref)):.1e}")

print("-log(2 - e^z), rhs -z")
for s in cocycle(log2exp(), Rhs.parse("-z"), pts, c40):
    print(f"  |cocycle| = {float(abs(s.value)):.1e}")

# %% 1-moments
M = m_moment(f0(), 1)
print("\n1-moment of f0, g_0 coefficients / (2 pi i):")
print("  ", [round(complex(c).imag / (2 * math.pi), 8) for c in M.g_0])
print("global family has trivial 1-moment:", m_moment(log2exp(), 1).is_trivial(1e-10))

# %% conjugates of f0 that keep the 1-moment
ref = m_moment(f0(), 1, q_window=NARROW_Q_WINDOW)
for label, coeffs in (("z^2", [0, 0, 1]), ("z^3", [0, 0, 0, 1])):
    g = formclas_conjugate(f0(), from_coefficients(coeffs, label=label)).g
    ok, _ = moment_equivalent(ref, m_moment(g, 1, q_window=NARROW_Q_WINDOW))
    print(f"r = {label}: equivalent 1-moment: {ok}")

# %% Ecalle-Voronin moduli of f0 are trivial
E = ev_modulus_direct(f0())
print("\nEV moduli of f0, deviation from identity:", f"{E.identity_deviation():.1e}")
