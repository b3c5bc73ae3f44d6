"""Germs built to have global solutions of a cohomological equation.

Given a change of variables phi tangent to the identity and a right-hand
side g, the constructor returns f together with a solution H defined on a
full neighbourhood of 0.  With phi = 1 - e^{-z} and g = -pi z the result is
-log(2 - e^z); with phi = id and g = z^2 it is z + z^2 with H = z.
"""
from paralab.cohom import Rhs, construct_global
from paralab.germ import log2exp, phi_germ
from paralab.hp import context

ctx = context()

G = construct_global(phi_germ("id"), Rhs.parse("z^2"), ctx)
print("phi = id, g = z^2:", [complex(c).real for c in G.f.coefficients(ctx, 5)], " residual", G.residual)
print("  H(-0.1) =", complex(G.H(-0.1)))

G = construct_global(phi_germ("oneminusexp"), Rhs.parse("-pi*z"), ctx)
got = [complex(c).real for c in G.f.coefficients(ctx, 8)]
want = [complex(c).real for c in log2exp().coefficients(ctx, 8)]
print("\nphi = 1 - e^-z, g = -pi z")
for k, (a, b) in enumerate(zip(got, want), 1):
    print(f"  z^{k}: {a: .12f}   -log(2-e^z): {b: .12f}")
