"""Principal part H^f(z) of the directed area, by two independent routes.

Cohomological route: H^f = H+ - pi/4 + i pi^2 where H+ solves
H(f) - H = -pi z on the attracting petal (and the mirror formula for f^-1).
Geometric route: least-squares fit of A(z, eps) against
eps^2 log eps, eps^2, eps^(5/2) log eps, eps^(5/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .accel import richardson
from .cohom import Rhs, sectorial_solution
from .errors import ConvergenceError, DomainError, FitError, IllConditionedError
from .germ import Germ
from .hp import cnum, context, digits_of, log_branch, rnum
from .orbitgeom import AreaEvaluator, orbit, orbit_length_for, separation_index

BASIS_FULL = ("eps^2 log eps", "eps^2", "eps^(5/2) log eps", "eps^(5/2)")
COND_LIMIT = 1e12


@dataclass(frozen=True)
class PrincipalPart:
    value: object
    route: str
    side: str
    components: dict = field(default_factory=dict)
    error: float = 0.0


def _one_abel(ctx):
    return Rhs.parse("-pi*z")


def principal_via_cohom(f: Germ, z, side: str = "+", ctx=None, solution=None) -> PrincipalPart:
    ctx = ctx or context()
    z = cnum(ctx, z)
    sol = solution or sectorial_solution(f, _one_abel(ctx), side, ctx)
    h, err, _ = sol.evaluate(z)
    pi = ctx.pi
    if side == "+":
        v = h - pi / 4 + 1j * pi * pi
        comps = {"H+": h, "shift": -pi / 4 + 1j * pi * pi}
    elif side == "-":
        v = pi * z - h + pi / 4
        comps = {"H-": h, "shift": pi * z + pi / 4}
    else:
        raise DomainError(f"unknown side {side!r}")
    return PrincipalPart(v, "cohom", side, comps, err)


def nucleus_tail_constants(ctx=None) -> dict:
    ctx = ctx or context()
    pi = ctx.pi
    return {"nucleus": -(pi / 4) * (1 + ctx.log(4)), "tail_offset": (pi / 2) * ctx.log(2)}


def c0_of_orbit_sum(f: Germ, z, ctx=None, tol: float = 1e-12, n0: int = 64, max_levels: int = 10) -> object:
    """C(z) = lim_n (sum_{l<=n} f^l(z) + log n), accelerated on n = n0 2^j."""
    ctx = ctx or context()
    z = cnum(ctx, z)
    step = f.closed or (lambda w, c: f(w, c))
    s, w, n = z, z, 0
    vals, prev_best = [], None
    target = n0
    for level in range(max_levels + 1):
        while n < target:
            w = step(w, ctx)
            s += w
            n += 1
        vals.append(s + ctx.log(n))
        target *= 2
        if len(vals) >= 3:
            best, _ = richardson(vals, 2, list(range(1, len(vals))))
            if prev_best is not None and abs(best - prev_best) <= tol * max(1.0, float(abs(best))):
                return best
            prev_best = best
    raise ConvergenceError("accelerated orbit sums did not settle")


def pringlo_closed_form(phi: Germ, z, side: str = "+", ctx=None):
    """Closed forms for f = phi^-1(e^z phi): -pi log+ phi + i pi^2 - pi/4 on V+,
    pi z + pi log- phi + pi/4 (for f^-1) on V-."""
    ctx = ctx or context()
    z = cnum(ctx, z)
    pi = ctx.pi
    p = phi(z, ctx)
    if side == "+":
        return -pi * log_branch(ctx, p, "+") + 1j * pi * pi - pi / 4
    if side == "-":
        if p.real < 0 and abs(p.imag) <= 1e-300:
            from .errors import BranchError

            raise BranchError("point lies on the cut of log- (negative real axis)")
        return pi * z + pi * log_branch(ctx, p, "-") + pi / 4
    raise DomainError(f"unknown side {side!r}")


# -- geometric route ------------------------------------------------------------------
@dataclass(frozen=True)
class ExpansionFit:
    basis: tuple
    coefficients: tuple
    condition_number: float
    residual_norm: float
    eps_grid: tuple
    areas: tuple = ()

    def coefficient(self, name: str):
        return self.coefficients[self.basis.index(name)]

    @property
    def H(self):
        return self.coefficient("eps^2")

    @property
    def q1(self):
        return self.coefficient("eps^2 log eps")

    @property
    def q2(self):
        return self.coefficient("eps^(5/2) log eps")

    def to_json(self) -> dict:
        c = lambda v: [float(complex(v).real), float(complex(v).imag)]
        return {"basis": list(self.basis), "coefficients": [c(v) for v in self.coefficients],
                "condition_number": self.condition_number, "residual_norm": self.residual_norm,
                "eps_grid": [float(e) for e in self.eps_grid]}


def _basis_value(ctx, name, e):
    le = ctx.log(e)
    return {
        "eps^2 log eps": e * e * le,
        "eps^2": e * e,
        "eps^(5/2) log eps": e ** ctx.mpf(2.5) * le,
        "eps^(5/2)": e ** ctx.mpf(2.5),
    }[name]


def default_eps_grid(o_or_none=None, lo: float = 1e-6, hi: float = 1e-3, n: int = 40, snap: bool = True, ctx=None):
    """Log-spaced targets; with ``snap`` each is moved to the nearest-below threshold eps_n.

    Sampling at the thresholds keeps the oscillating O(eps^(5/2)) remainder in
    phase across the grid, which stabilises the higher coefficients.
    """
    ctx = ctx or context()
    targets = [rnum(ctx, lo) * (rnum(ctx, hi) / rnum(ctx, lo)) ** (ctx.mpf(i) / (n - 1)) for i in range(n)]
    if not snap:
        return targets
    o = o_or_none
    idx = sorted({separation_index(o, t) for t in targets})
    if len(idx) < n:
        # fill with neighbouring thresholds to keep the grid size
        extra = [k for k in range(idx[0], idx[-1]) if k not in idx]
        step = max(1, len(extra) // max(1, n - len(idx)))
        idx = sorted(set(idx) | set(extra[::step][: n - len(idx)]))
    return [o.thresholds[k] for k in idx]


def fit_expansion(eps_grid: Sequence, areas: Sequence, ctx, basis: Sequence[str] = BASIS_FULL,
                  cond_limit: float = COND_LIMIT) -> ExpansionFit:
    """Weighted least squares (rows scaled by eps^(-5/2)) with column equilibration."""
    if len(eps_grid) < 2 * len(basis):
        raise FitError("grid must have at least twice as many points as basis functions")
    rows = []
    rhs_re, rhs_im = [], []
    for e, a in zip(eps_grid, areas):
        w = e ** ctx.mpf(-2.5)
        rows.append([_basis_value(ctx, b, e) * w for b in basis])
        rhs_re.append(ctx.re(a) * w)
        rhs_im.append(ctx.im(a) * w)
    m, k = len(rows), len(basis)
    scale = [ctx.sqrt(ctx.fsum(rows[i][j] ** 2 for i in range(m))) for j in range(k)]
    A = ctx.matrix([[rows[i][j] / scale[j] for j in range(k)] for i in range(m)])
    sv = np.linalg.svd(np.array([[float(A[i, j]) for j in range(k)] for i in range(m)]), compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if cond > cond_limit:
        raise IllConditionedError(f"condition number {cond:.3g} exceeds {cond_limit:.1g}; widen the eps range")
    xr, _ = ctx.qr_solve(A, ctx.matrix(rhs_re))
    xi, _ = ctx.qr_solve(A, ctx.matrix(rhs_im))
    coeffs = tuple(ctx.mpc(xr[j] / scale[j], xi[j] / scale[j]) for j in range(k))
    res2, norm2 = 0, 0
    for i in range(m):
        pred = ctx.fsum(A[i, j] * ctx.mpc(xr[j], xi[j]) for j in range(k))
        y = ctx.mpc(rhs_re[i], rhs_im[i])
        res2 += abs(pred - y) ** 2
        norm2 += abs(y) ** 2
    return ExpansionFit(tuple(basis), coeffs, cond, float(ctx.sqrt(res2 / norm2)), tuple(eps_grid), tuple(areas))


def principal_via_geometry(f: Germ, z, eps_grid: Optional[Sequence] = None, digits: int = 32,
                           basis: Sequence[str] = BASIS_FULL, snap: bool = True, eps_range=(1e-6, 1e-3),
                           n_points: int = 40, evaluator: Optional[AreaEvaluator] = None) -> ExpansionFit:
    ctx = context(max(digits, 32))
    z = cnum(ctx, z)
    if evaluator is None:
        lo = min(eps_grid) if eps_grid is not None else eps_range[0]
        o = orbit(f, z, max_n=orbit_length_for(float(lo), z, ctx), ctx=ctx)
        evaluator = AreaEvaluator(o)
    o = evaluator.orbit
    if eps_grid is None:
        eps_grid = default_eps_grid(o, eps_range[0], eps_range[1], n_points, snap, ctx)
    eps_grid = [rnum(ctx, e) for e in eps_grid]
    areas = [evaluator(e).value for e in eps_grid]
    return fit_expansion(eps_grid, areas, ctx, basis)
