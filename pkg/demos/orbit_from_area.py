"""Reading an orbit back from its area function.

The normalised area has a (eps - eps_n)^(3/2) singularity at each threshold
eps_n = |z_n - z_{n+1}|/2, with amplitude proportional to z_n + z_{n+1}.
Treating the area as a black box, the thresholds and midpoint sums of the
orbit of -1/2 under z/(1-z) are recovered and compared with -1/(n+2).
"""
from paralab.germ import f0
from paralab.hp import context
from paralab.orbitgeom import area_function, orbit, orbit_length_for, reconstruct_orbit_from_area, \
    second_derivative_probe

ev = area_function(f0(), -0.5, 1e-3)
rec = reconstruct_orbit_from_area(lambda e: ev(e).value, (1e-3, 5e-2))

# %% recovered thresholds
print(" n   eps_n (recovered)     error      z_n + z_{n+1}   error")
for e, s in zip(rec.thresholds[:8], rec.midpoint_sums[:8]):
    n = round((-5 + (1 + 2 / e) ** 0.5) / 2)
    true_e = 1 / (2 * (n + 2) * (n + 3))
    true_s = -(1 / (n + 2) + 1 / (n + 3))
    print(f"{n:2d}   {e:.12f}   {abs(e - true_e):.1e}   {s: .8f}   {abs(s - true_s):.1e}")

# %% blow-up of the second derivative at eps_6
c32 = context(32)
o = orbit(f0(), -0.5, max_n=orbit_length_for(1e-3, 0.5, c32), ctx=c32)
p = second_derivative_probe(o, 6)
print(f"\nfitted exponent at eps_6: {p.fitted_exponent:.4f}")
print(f"left limit of F'': {complex(p.left_limit).real:.6f} (relative stability {p.left_stability:.1e})")
