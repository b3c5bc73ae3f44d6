"""Directed area of the eps-neighbourhood of an orbit and its principal part.

A(z, eps) is evaluated exactly (tail discs plus crescent sums over the
nucleus), checked against a grid quadrature, and then fitted against
eps^2 log eps, eps^2, eps^(5/2) log eps, eps^(5/2).  The eps^2 coefficient
is compared with the value obtained from the 1-Abel equation.
"""
import math

from paralab.germ import f0
from paralab.hp import context
from paralab.orbitgeom import area_function, directed_area_oracle, orbit
from paralab.principal import principal_via_cohom, principal_via_geometry

f = f0()
z0 = -0.3

# %% exact evaluation against the quadrature oracle
eps = 0.005
ev = area_function(f, z0, 1e-4)
o = orbit(f, z0, max_n=10 ** 6, min_abs=eps / 4, ctx=context())
ref = directed_area_oracle(o, eps)
a = ev(eps)
print(f"A(z0, {eps}) = {complex(a.value):.12e}  (n_eps = {a.n_eps})")
print(f"quadrature = {ref.value:.12e}  +- {ref.error_estimate:.1e}")

# %% the normalised area A/(pi eps^2) over a range of eps
for e in (1e-4, 1e-3, 5e-3, 2e-2):
    F = ev.normalized(e)[0]
    print(f"eps={e:7.1e}  A/(pi eps^2) = {complex(F).real: .12f}")

# %% principal part: least squares at 32 digits versus the cohomological route
fit = principal_via_geometry(f, str(z0))
H = principal_via_cohom(f, z0).value
for name, c in zip(fit.basis, fit.coefficients):
    print(f"{name:18s} {complex(c).real: .10f}")
print(f"H from the 1-Abel equation: {complex(H).real:.10f}")
print(f"difference: {abs(complex(fit.H) - complex(H)):.2e}   condition number: {fit.condition_number:.0f}")
print(f"q1 - pi/2 = {complex(fit.q1).real - math.pi / 2:.2e}")
