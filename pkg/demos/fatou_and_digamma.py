"""Sectorial solutions of Abel-type equations for the model germ z/(1-z).

For f0 the Fatou coordinate is -1/z and the 1-Abel solution is a digamma
function in the variable -1/z.  Both are recovered here from orbit sums
alone and compared with the closed forms.
"""
import math

import scipy.special

from paralab.cohom import Rhs, sectorial_solution
from paralab.germ import f0
from paralab.hp import context

ctx = context()
f = f0()

# %% Abel equation Psi(f) - Psi = 1
psi = sectorial_solution(f, Rhs.monomial(0, 1), "+", ctx)
for z in (-0.3, -0.1 + 0.2j, 0.05 - 0.25j):
    print(f"Psi({z}) = {complex(psi(z)):.15f}   -1/z = {-1 / z:.15f}")

# %% 1-Abel equation H(f) - H = -pi z
h = sectorial_solution(f, Rhs.parse("-pi*z"), "+", ctx)
gamma = 0.5772156649015329
print("\nH+(-1/2)           =", complex(h(-0.5)))
print("pi(1-gamma) - i pi^2 =", complex(math.pi * (1 - gamma), -math.pi ** 2))
for z in (-0.25, -0.15 + 0.1j):
    ref = math.pi * complex(scipy.special.psi(-1 / z)) - 1j * math.pi ** 2
    print(f"z={z}: |H+ - (pi psi(-1/z) - i pi^2)| = {abs(complex(h(z)) - ref):.2e}")

# %% the same solution at 40 digits
c40 = context(40)
h40 = sectorial_solution(f, Rhs.parse("-pi*z"), "+", c40)
print("\nH+(-1/2) at 40 digits:", h40(c40.mpf(-0.5)))
