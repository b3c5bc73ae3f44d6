"""Orbits and directed areas of their epsilon-neighbourhoods.

The directed area of a set is the integral of the complex coordinate over it,
i.e. area times centroid.  For an orbit converging to the parabolic point the
epsilon-neighbourhood splits into a tail of pairwise disjoint discs and a
nucleus of consecutively overlapping discs.  The nucleus is assembled disc by
disc: adding the disc at z_k to the union of the discs at z_{k+1}, z_{k+2},...
adds the disc minus its lens with the disc at z_{k+1}.  Normalising by
eps^2*pi, the lens of two discs at distance 2*t*eps contributes through the
crescent kernel G(t) = t*sqrt(1-t^2) + arcsin(t).
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .accel import ladder, richardson
from .errors import (
    DetectionError,
    DomainError,
    EscapeError,
    NonMonotoneError,
    PrecisionError,
    RangeError,
    ResourceError,
    TruncationError,
)
from .germ import Germ
from .hp import cnum, context, digits_of, fmt, is_fp, rnum, unit_roundoff

NUCLEUS_VARIANTS = ("outer", "inner")
DEFAULT_VARIANT = "outer"


# -- orbits -------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Orbit:
    germ: str
    z0: object
    points: tuple
    gaps: tuple
    thresholds: tuple
    monotone_from: int
    ctx: object = field(repr=False)

    def __len__(self):
        return len(self.points)

    def to_json(self) -> dict:
        c = lambda v: [float(v.real), float(v.imag)]
        return {
            "germ": self.germ,
            "z0": c(self.z0),
            "points": [c(p) for p in self.points],
            "gaps": [float(g) for g in self.gaps],
            "thresholds": [float(t) for t in self.thresholds],
        }


def _monotone_from(gaps) -> int:
    m = len(gaps) - 1
    while m > 0 and gaps[m - 1] > gaps[m]:
        m -= 1
    return m


def orbit(
    f: Germ,
    z0,
    max_n: int = 1000,
    min_abs: Optional[float] = None,
    ctx=None,
    backward: bool = False,
    escape_radius: Optional[float] = None,
) -> Orbit:
    """Forward (or backward) orbit z_0, ..., z_N with gaps and thresholds."""
    ctx = ctx or context()
    z = cnum(ctx, z0)
    if z == 0:
        raise DomainError("the fixed point has an empty orbit")
    step = f.inverse_closed if backward else f.closed
    if step is None:
        from .germ import invert

        g = invert(f) if backward else f
        step = lambda w, c: g(w, c)
    limit = escape_radius if escape_radius is not None else max(0.5, 2 * float(abs(z)))
    pts = [z]
    floor = None if min_abs is None else rnum(ctx, min_abs)
    for _ in range(max_n):
        if floor is not None and abs(pts[-1]) < floor:
            break
        try:
            w = step(pts[-1], ctx)
        except ZeroDivisionError:
            raise EscapeError(f"orbit of {f.label} reached a pole") from None
        if not abs(w) <= limit:
            raise EscapeError(f"orbit of {f.label} left the disc |z| <= {limit}")
        pts.append(w)
    gaps = tuple(abs(pts[i] - pts[i + 1]) for i in range(len(pts) - 1))
    thresholds = tuple(g / 2 for g in gaps)
    mono = _monotone_from(gaps) if gaps else 0
    if len(gaps) >= 8 and mono > len(gaps) - 3:
        raise NonMonotoneError(f"gaps of the orbit of {f.label} never become monotone within {max_n} steps")
    return Orbit(f.label, z, tuple(pts), gaps, thresholds, mono, ctx)


def separation_index(o: Orbit, eps, allow_full_nucleus: bool = False) -> int:
    """n_eps = max{n : d_n >= 2 eps}; tangent discs stay in the tail.

    Returns -1 (everything overlaps) only when ``allow_full_nucleus`` is set.
    """
    th = o.thresholds
    if not th:
        raise RangeError("orbit too short")
    m0 = o.monotone_from
    if m0 > 0 and eps > min(th[: m0 + 1]):
        raise RangeError("eps probes the regime before the gaps become monotone")
    if eps > th[m0]:
        if allow_full_nucleus and m0 == 0:
            return -1
        raise RangeError(f"eps={float(eps):.3g} exceeds the largest threshold {float(th[m0]):.3g}")
    if eps <= th[-1]:
        raise RangeError("orbit too short to separate tail and nucleus at this eps")
    # thresholds are strictly decreasing on [m0, N); find last index with th >= eps
    lo, hi = m0, len(th) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if th[mid] >= eps:
            lo = mid
        else:
            hi = mid
    return lo


def crescent_kernel(t, ctx=None):
    """G(t) = t sqrt(1 - t^2) + arcsin t on [0, 1]."""
    if ctx is None or is_fp(ctx):
        t = float(t)
        return t * math.sqrt(max(0.0, 1 - t * t)) + math.asin(min(1.0, t))
    return t * ctx.sqrt(1 - t * t) + ctx.asin(t)


def _kernel_series(ctx, count):
    # G(t) = sum_j g_j t^(2j+1), from G'(t) = 2 sqrt(1 - t^2)
    out, b = [], ctx.mpf(1)
    for j in range(count):
        out.append(2 * b * (-1) ** j / (2 * j + 1))
        b = b * (ctx.mpf(1) / 2 - j) / (j + 1)
    return out


@dataclass(frozen=True)
class DirectedArea:
    value: object
    tail: object
    nucleus: object
    n_eps: int
    eps: object
    truncation_error: float = 0.0

    @property
    def parts(self):
        return {"tail": self.tail, "nucleus": self.nucleus}


class AreaEvaluator:
    """Directed area A(z0, eps) for a fixed stored orbit and any admissible eps.

    The crescent sum over the nucleus is evaluated term by term while the
    ratio t_k = eps_k/eps exceeds ``tau``; beyond that G is expanded in odd
    powers of t, which reduces the remaining infinite sums to orbit
    functionals sum_k eps_k^(2j+1) (z_k + z_{k+1}) independent of eps.  Their
    values past the stored orbit come from Richardson extrapolation of the
    partial sums on a doubling ladder (pure inverse powers of the index for
    germs in the model formal class).  The functionals are kept as suffix
    sums: prefix totals would cancel catastrophically once weighted by
    eps^-(2j+1).
    """

    def __init__(self, o: Orbit, tau: float = 0.1, stride: int = 32, levels: Optional[int] = None,
                 tol_rel: float = 1e-16, variant: str = DEFAULT_VARIANT):
        if variant not in NUCLEUS_VARIANTS:
            raise DomainError(f"unknown nucleus variant {variant!r}")
        self.orbit = o
        self.ctx = ctx = o.ctx
        self.variant = variant
        self.tau = rnum(ctx, tau)
        self.stride = stride
        digits = digits_of(ctx)
        self.n_terms = int(math.ceil((digits + 3) / (-2 * math.log10(tau)))) + 1
        self.gj = _kernel_series(ctx, self.n_terms)
        self.tol = max(float(tol_rel), 1e4 * float(unit_roundoff(ctx)))
        z, th = o.points, o.thresholds
        n = len(th)
        if n < 64 * 2 ** 3:
            raise TruncationError("orbit too short for tail extrapolation (need at least 512 gaps)")
        if levels is None:
            levels = ladder_levels(ctx)
        self.levels = min(levels, int(math.log2(n // 64)))
        # prefix sums of points (tail part)
        pref, s = [], ctx.mpc(0) if not is_fp(ctx) else 0j
        for p in z:
            s = s + p
            pref.append(s)
        self.prefix = pref
        # orbit functionals as suffix sums over the stored orbit, accumulated
        # backwards so each keeps full relative accuracy at its own size
        rungs = ladder(n, self.levels)
        rung_set = {r: i for i, r in enumerate(rungs)}
        J = self.n_terms
        zero = 0j if is_fp(ctx) else ctx.mpc(0)
        acc = [zero] * J
        checkpoints = [None] * (n // stride + 1)
        rung_vals = [[None] * len(rungs) for _ in range(J)]
        for k in range(n, -1, -1):
            if k < n:
                e = th[k]
                w = z[k] + z[k + 1]
                e2 = e * e
                pw = e
                for j in range(J):
                    acc[j] = acc[j] + pw * w
                    pw = pw * e2
            if k % stride == 0:
                checkpoints[k // stride] = list(acc)
            if k in rung_set:
                for j in range(J):
                    rung_vals[j][rung_set[k]] = -acc[j]
        self.checkpoints = checkpoints
        # S(r) - S(n) = -suffix(r) has the same inverse-power expansion as S(r);
        # its limit is the remainder beyond the stored orbit
        rems, errs = [], []
        for j in range(J):
            p0 = 4 * j + 2
            val, err = richardson(rung_vals[j], 2, list(range(p0, p0 + self.levels)))
            rems.append(val)
            errs.append(err)
        self.remainders = rems
        self.remainder_errs = errs
        self.n_max = n

    # -- pieces -----------------------------------------------------------
    def _split(self, eps):
        return separation_index(self.orbit, eps, allow_full_nucleus=True)

    def normalized(self, eps):
        """(F, tail, nucleus, n_eps, err) with F = A/(eps^2 pi)."""
        ctx = self.ctx
        eps = rnum(ctx, eps)
        o = self.orbit
        z, th = o.points, o.thresholds
        n = self._split(eps)
        tail = self.prefix[n] if n >= 0 else (0j if is_fp(ctx) else ctx.mpc(0))
        m = n + 1
        # first index with t_k <= tau, rounded up to a checkpoint
        cut = self.tau * eps
        lo, hi = m, self.n_max
        if th[hi - 1] > cut:
            raise TruncationError("orbit too short: crescent ratios stay above the series cut-off")
        while lo < hi:
            mid = (lo + hi) // 2
            if th[mid] <= cut:
                hi = mid
            else:
                lo = mid + 1
        K = -(-lo // self.stride) * self.stride
        if K >= self.n_max:
            raise TruncationError("orbit too short for the requested eps")
        explicit = 0j if is_fp(ctx) else ctx.mpc(0)
        for k in range(m, K):
            explicit += crescent_kernel(th[k] / eps, ctx) * (z[k] + z[k + 1])
        cp = self.checkpoints[K // self.stride]
        series = 0j if is_fp(ctx) else ctx.mpc(0)
        err = 0.0
        inv = 1 / eps
        inv2 = inv * inv
        pw = inv
        for j in range(self.n_terms):
            series += self.gj[j] * pw * (cp[j] + self.remainders[j])
            err += float(abs(self.gj[j]) * pw * self.remainder_errs[j])
            pw = pw * inv2
        tK = float(th[K] / eps)
        err += float(abs(cp[0] + self.remainders[0]) * inv) * tK ** (2 * self.n_terms) / (1 - tK * tK)
        crescents = (explicit + series) / ctx.pi
        if self.variant == "outer":
            nucleus = z[m] / 2 + crescents
        else:
            nucleus = z[m] + crescents - z[m] / (2 * ctx.pi)
        F = tail + nucleus
        err = err / float(ctx.pi)
        if err > self.tol * max(float(abs(F)), 1e-300):
            raise TruncationError(
                f"crescent tail estimate {err:.2e} above tolerance {self.tol:.1e} (relative)")
        return F, tail, nucleus, n, err

    def __call__(self, eps) -> DirectedArea:
        ctx = self.ctx
        eps = rnum(ctx, eps)
        F, tail, nucleus, n, err = self.normalized(eps)
        scale = eps * eps * ctx.pi
        t, nu = scale * tail, scale * nucleus
        return DirectedArea(value=t + nu, tail=t, nucleus=nu, n_eps=n, eps=eps,
                            truncation_error=float(err * scale))


def ladder_levels(ctx) -> int:
    return 6 if is_fp(ctx) else 9


def orbit_length_for(eps_min: float, z0=None, ctx=None, tau: float = 0.1) -> int:
    """Stored orbit length: the series cut-off must sit well inside the orbit and the
    coarsest ladder index well beyond the orbit's index offset (about 1/|z0|)."""
    k_cut = 1.0 / math.sqrt(2 * tau * float(eps_min))
    offset = 1.0 / float(abs(z0)) if z0 is not None else 2.0
    levels = ladder_levels(ctx) if ctx is not None else 6
    n = max(4096, 16 * k_cut, 2 ** levels * 32 * max(offset, 1.0))
    return int(2 ** math.ceil(math.log2(n)))


def area_function(f: Germ, z0, eps_min, ctx=None, variant: str = DEFAULT_VARIANT, tol_rel: float = 1e-16,
                  max_n: Optional[int] = None) -> AreaEvaluator:
    """Evaluator of eps -> A(z0, eps) valid for eps >= eps_min."""
    ctx = ctx or context()
    n = max_n or orbit_length_for(eps_min, cnum(ctx, z0), ctx)
    o = orbit(f, z0, max_n=n, ctx=ctx)
    return AreaEvaluator(o, variant=variant, tol_rel=tol_rel)


def _fixed_point_area(f: Germ, z, eps, ctx):
    if f(z, ctx) == z:
        v = eps * eps * ctx.pi * z
        return DirectedArea(value=v, tail=v, nucleus=0 * v, n_eps=0, eps=eps)
    return None


def directed_area(f: Germ, z, eps, ctx=None, variant: str = DEFAULT_VARIANT,
                  tol_rel: float = 1e-16) -> DirectedArea:
    ctx = ctx or context()
    z = cnum(ctx, z)
    eps = rnum(ctx, eps)
    fixed = _fixed_point_area(f, z, eps, ctx)
    if fixed is not None:
        return fixed
    return area_function(f, z, eps, ctx, variant, tol_rel)(eps)


def tail_directed_area(o: Orbit, eps):
    ctx = o.ctx
    eps = rnum(ctx, eps)
    n = separation_index(o, eps)
    return eps * eps * ctx.pi * ctx.fsum(o.points[: n + 1])


def nucleus_directed_area(o: Orbit, eps, variant: str = DEFAULT_VARIANT, tol_rel: float = 1e-16):
    return AreaEvaluator(o, variant=variant, tol_rel=tol_rel)(eps).nucleus


# -- identities ---------------------------------------------------------------
def check_functional_equation(f: Germ, z, eps, ctx=None, variant: str = DEFAULT_VARIANT):
    """|A(z) - A(f(z)) - z eps^2 pi|; needs the disc at z disjoint from the rest."""
    ctx = ctx or context()
    z = cnum(ctx, z)
    eps = rnum(ctx, eps)
    fz = f(z, ctx)
    if abs(z - fz) < 2 * eps:
        raise RangeError("eps too large: the disc at z overlaps the disc at f(z)")
    a = directed_area(f, z, eps, ctx, variant).value
    b = directed_area(f, fz, eps, ctx, variant).value
    return abs(a - b - z * eps * eps * ctx.pi)


def crescent_relation_residual(f: Germ, z, eps, ctx=None, variant: str = DEFAULT_VARIANT):
    """Residual of A(z) - A(f z) = -(pi/2) eps^2 (f z - z) + eps^2 (z + f z) G(|z - f z|/(2 eps))."""
    ctx = ctx or context()
    z = cnum(ctx, z)
    eps = rnum(ctx, eps)
    fz = f(z, ctx)
    d = abs(z - fz)
    if not d < 2 * eps:
        raise RangeError("z is not in U_eps (its disc does not overlap the next one)")
    a = directed_area(f, z, eps, ctx, variant).value
    b = directed_area(f, fz, eps, ctx, variant).value
    rhs = -(ctx.pi / 2) * eps * eps * (fz - z) + eps * eps * (z + fz) * crescent_kernel(d / (2 * eps), ctx)
    return abs(a - b - rhs)


# -- quadrature oracle ----------------------------------------------------------
@dataclass(frozen=True)
class OracleResult:
    value: complex
    error_estimate: float
    fine: complex
    coarse: complex
    cells: int
    cluster_bound: float


_CORNERS = np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]])


def _clipped_moments(cx, cy, h, px, py, eps):
    """Area and first moment of each square cell intersected with the tangent half-plane
    of the nearest disc (polygon clipping, shoelace formulas)."""
    dx, dy = cx - px, cy - py
    d = np.hypot(dx, dy)
    d = np.where(d == 0, 1e-300, d)
    nx, ny = dx / d, dy / d
    off = eps - d
    vx = _CORNERS[:, 0][None, :] * h
    vy = _CORNERS[:, 1][None, :] * h
    vx = np.broadcast_to(vx, (cx.size, 4))
    vy = np.broadcast_to(vy, (cx.size, 4))
    s = nx[:, None] * vx + ny[:, None] * vy - off[:, None]
    inside = s <= 0
    X = np.zeros((cx.size, 8))
    Y = np.zeros((cx.size, 8))
    valid = np.zeros((cx.size, 8), dtype=bool)
    for i in range(4):
        j = (i + 1) % 4
        X[:, 2 * i], Y[:, 2 * i] = vx[:, i], vy[:, i]
        valid[:, 2 * i] = inside[:, i]
        cross = inside[:, i] != inside[:, j]
        denom = np.where(cross, s[:, i] - s[:, j], 1.0)
        lam = s[:, i] / denom
        X[:, 2 * i + 1] = vx[:, i] + lam * (vx[:, j] - vx[:, i])
        Y[:, 2 * i + 1] = vy[:, i] + lam * (vy[:, j] - vy[:, i])
        valid[:, 2 * i + 1] = cross
    any_valid = valid.any(axis=1)
    # cyclic forward fill of invalid slots with the previous valid vertex
    last = np.where(valid, np.arange(8)[None, :], -1)
    last_idx = np.maximum.accumulate(last, axis=1)
    wrap = last_idx[:, -1]
    last_idx = np.where(last_idx < 0, wrap[:, None], last_idx)
    rows = np.arange(cx.size)[:, None]
    Xf, Yf = X[rows, last_idx], Y[rows, last_idx]
    Xn, Yn = np.roll(Xf, -1, axis=1), np.roll(Yf, -1, axis=1)
    crs = Xf * Yn - Xn * Yf
    area = 0.5 * crs.sum(axis=1)
    mx = ((Xf + Xn) * crs).sum(axis=1) / 6
    my = ((Yf + Yn) * crs).sum(axis=1) / 6
    area = np.where(any_valid, area, 0.0)
    mx = np.where(any_valid, mx, 0.0)
    my = np.where(any_valid, my, 0.0)
    return (area * (cx + 1j * cy) + mx + 1j * my).sum()


def _grid_integral(centers: np.ndarray, eps: float, resolution: int, budget: int):
    pts = np.column_stack([centers.real, centers.imag])
    tree = cKDTree(pts)
    h_final = eps / resolution
    levels = max(1, int(math.ceil(math.log2(resolution / 2))))
    h = h_final * 2 ** levels
    x0, x1 = pts[:, 0].min() - eps, pts[:, 0].max() + eps
    y0, y1 = pts[:, 1].min() - eps, pts[:, 1].max() + eps
    nx_, ny_ = int(math.ceil((x1 - x0) / h)), int(math.ceil((y1 - y0) / h))
    if nx_ * ny_ > budget:
        raise ResourceError("initial grid exceeds the cell budget")
    gx, gy = np.meshgrid(x0 + (np.arange(nx_) + 0.5) * h, y0 + (np.arange(ny_) + 0.5) * h)
    cx, cy = gx.ravel(), gy.ravel()
    total = 0j
    cells = cx.size
    coarse = None
    for level in range(levels + 1):
        d, idx = tree.query(np.column_stack([cx, cy]))
        half = h * math.sqrt(2) / 2
        inside = d + half <= eps
        outside = d - half >= eps
        total += h * h * (cx[inside] + 1j * cy[inside]).sum()
        bnd = ~(inside | outside)
        bx, by, bi = cx[bnd], cy[bnd], idx[bnd]
        part = _clipped_moments(bx, by, h, pts[bi, 0], pts[bi, 1], eps)
        if level == levels - 1:
            coarse = total + part
        if level == levels:
            return total + part, coarse, cells
        q = h / 4
        cx = np.concatenate([bx - q, bx + q, bx - q, bx + q])
        cy = np.concatenate([by - q, by - q, by + q, by + q])
        h /= 2
        cells += cx.size
        if cells > budget:
            raise ResourceError(f"oracle needs more than {budget} cells; lower the resolution")
    raise AssertionError("unreachable")


def directed_area_oracle(o, eps, resolution: int = 128, budget: int = 20_000_000) -> OracleResult:
    """Grid quadrature of the integral of x + iy over the union of eps-discs.

    ``o`` is an :class:`Orbit` (its unresolved tail beyond the last point is
    represented by a disc at the limit point 0, with a bound for the
    discrepancy) or a plain sequence of disc centres.
    """
    eps = float(eps)
    cluster = 0.0
    if isinstance(o, Orbit):
        centers = np.array([complex(p) for p in o.points] + [0j])
        r = abs(centers[-2])
        if r > eps / 2:
            raise RangeError("orbit not long enough: last point must lie within eps/2 of the fixed point")
        # the omitted discs lie in the eps-neighbourhood of the arc from z_N to 0;
        # compared with the two end discs the missing sliver has area O(r^3/eps)
        cluster = (r ** 3 / eps) * (eps + r)
    else:
        centers = np.array([complex(p) for p in o])
    fine, coarse, cells = _grid_integral(centers, eps, resolution, budget)
    extrap = (4 * fine - coarse) / 3
    err = abs(extrap - fine) + cluster
    return OracleResult(complex(extrap), float(err), complex(fine), complex(coarse), cells, cluster)


def two_disc_directed_area(a: complex, b: complex, eps: float) -> complex:
    """Union of two eps-discs by lens subtraction (reference formula)."""
    d = abs(a - b)
    disc = math.pi * eps * eps
    if d >= 2 * eps:
        return disc * (a + b)
    t = d / (2 * eps)
    lens = 2 * eps * eps * (math.acos(t) - t * math.sqrt(1 - t * t))
    return disc * (a + b) - lens * (a + b) / 2


# -- singularities --------------------------------------------------------------
@dataclass(frozen=True)
class ProbeResult:
    n: int
    eps_n: object
    offsets: tuple
    right_samples: tuple
    left_samples: tuple
    left_limit: object
    left_limit_refined: object
    left_stability: float
    fitted_exponent: float
    blowup_coefficient: complex
    midpoint_sum: complex


def _second_difference(F, x, h):
    return (F(x + h) - 2 * F(x) + F(x - h)) / (h * h)


def second_derivative_probe(o: Orbit, n: int, offsets: Sequence[float] = None, digits: int = 32,
                            variant: str = DEFAULT_VARIANT) -> ProbeResult:
    """Finite-difference second derivative of A(z0, eps)/(eps^2 pi) around eps_n.

    The bounded part of the second derivative is continuous at eps_n, so the
    jump D(delta) = F''(eps_n + delta) - F''(eps_n - delta) isolates the
    singular term; log|D| against log(delta) gives the exponent, and with the
    exponent fixed to -1/2 the coefficient gives z_n + z_{n+1} through
    D ~ -(sqrt(2)/pi) eps_n^(-3/2) (z_n + z_{n+1}) delta^(-1/2).
    """
    ctx = o.ctx if digits_of(o.ctx) >= digits else context(digits)
    if ctx is not o.ctx:
        from .germ import get_germ

        o = orbit(get_germ(o.germ), o.z0, max_n=len(o.points) - 1, ctx=ctx)
    ev = AreaEvaluator(o, variant=variant)
    th = o.thresholds
    if n < 1 or n + 1 >= len(th):
        raise RangeError("probe index outside the orbit")
    en, en_prev = th[n], th[n - 1]
    room = float((en_prev - en) / 4)
    room_below = float((en - th[n + 1]) / 4)
    if offsets is None:
        lo, hi = room * 1e-4, min(room, room_below) * 0.5
        offsets = list(np.geomspace(lo, hi, 9))
    if any(not 0 < d < min(room, room_below) for d in offsets):
        raise RangeError("offsets must lie in (0, (eps_{n-1} - eps_n)/4) and keep eps_{n+1} away")
    def Fc(e):
        return ev.normalized(e)[0]

    def d2(x, h):
        return (Fc(x + h) - 2 * Fc(x) + Fc(x - h)) / (h * h)

    floor_h = ctx.mpf(10) ** (-(digits_of(ctx) - 6))
    right, left = [], []
    for dlt in offsets:
        d = rnum(ctx, dlt)
        h = max(d / 32, floor_h)
        right.append(d2(en + d, h))
        left.append(d2(en - d, h))
    scale = max(abs(v) for v in right)
    if scale * (offsets[0] / 32) ** 2 < 1e4 * float(unit_roundoff(ctx)) * float(abs(Fc(en))):
        raise PrecisionError("finite differences lost all significant digits; raise precision")
    D = [r - l for r, l in zip(right, left)]
    logd = np.log(np.array(offsets, dtype=float))
    logD = np.log(np.array([float(abs(x)) for x in D]))
    slope = float(np.polyfit(logd, logD, 1)[0])
    # sqrt(delta) D = c + J sqrt(delta) + O(delta): F'' also has a finite jump J
    c_vals = np.array([complex(x * ctx.sqrt(rnum(ctx, d))) for x, d in zip(D, offsets)])
    root = np.sqrt(np.array(offsets, dtype=float))
    deg = min(3, len(offsets) - 1)
    coef = complex(np.polyfit(root, c_vals.real, deg)[-1], np.polyfit(root, c_vals.imag, deg)[-1])
    s = -coef * math.pi * float(en) ** 1.5 / math.sqrt(2)
    if s.imag == 0:
        s = s.real
    # left limit by extrapolation of the left samples, with a refined step as stability check
    def left_limit(scale_h):
        vals = []
        for dlt in offsets[:4]:
            d = rnum(ctx, dlt)
            vals.append(complex(d2(en - d, max(d / (32 * scale_h), floor_h))))
        fit = np.polyfit(np.array(offsets[:4], dtype=float), np.array(vals).real, 1)
        return fit[1]

    l1, l2 = left_limit(1), left_limit(2)
    stab = abs(l1 - l2) / max(abs(l2), 1e-300)
    return ProbeResult(
        n=n, eps_n=en, offsets=tuple(offsets), right_samples=tuple(right), left_samples=tuple(left),
        left_limit=l2, left_limit_refined=l1, left_stability=float(stab), fitted_exponent=slope,
        blowup_coefficient=coef, midpoint_sum=s,
    )


@dataclass(frozen=True)
class Reconstruction:
    thresholds: tuple
    midpoint_sums: tuple
    brackets: tuple


def _singular_column(eps_arr, e):
    t = np.clip(e / eps_arr, 0.0, 1.0)
    G = t * np.sqrt(1 - t * t) + np.arcsin(t)
    return np.where(eps_arr > e, (G - math.pi / 2) / math.pi, 0.0)


def _locate(F, lo, hi, ctx, samples=48, degree=4):
    xs = np.linspace(lo, hi, samples)
    ys = np.array([complex(F(rnum(ctx, float(x)))) for x in xs])
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    u = (xs - mid) / half
    V = np.vander(u, degree + 1)
    y = ys - ys.mean()

    def fit(e):
        A = np.column_stack([V, _singular_column(xs, e)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        return float(np.linalg.norm(A @ coef - y)), coef

    grid = np.linspace(xs[1], xs[-2], 400)
    res = [fit(e)[0] for e in grid]
    i = int(np.argmin(res))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    from scipy.optimize import minimize_scalar

    opt = minimize_scalar(lambda e: fit(e)[0], bounds=(a, b), method="bounded",
                          options={"xatol": 1e-16 * max(abs(a), 1e-300)})
    e = float(opt.x)
    return e, fit(e)[1][-1]


def reconstruct_orbit_from_area(area_fn: Callable, eps_range, scan_step: float = 0.005, ctx=None,
                                noise_factor: float = 50.0) -> Reconstruction:
    """Locate the singular thresholds of a black-box area function and read off z_n + z_{n+1}.

    Fourth differences on a geometric scan grid are small for the analytic
    background and spike at each eps_n, where the normalised area has a
    (eps - eps_n)^(3/2) singularity.  Each spike bracket is refined by fitting
    a local polynomial plus the exact singular profile
    s (G(e/eps) - pi/2)/pi for eps > e, minimising the residual over e; the
    fitted amplitude s is the midpoint sum z_n + z_{n+1}.
    """
    ctx = ctx or context()
    lo, hi = float(eps_range[0]), float(eps_range[1])
    n_pts = int(math.ceil(math.log(hi / lo) / math.log1p(scan_step))) + 1
    grid = np.geomspace(lo, hi, n_pts)

    def F(e):
        e = rnum(ctx, e)
        return area_fn(e) / (e * e * ctx.pi)

    vals = np.array([complex(F(float(x))) for x in grid])
    d4 = np.abs(np.diff(vals, 4))
    if d4.size == 0:
        raise DetectionError("scan range too small")
    floor = np.median(d4)
    thresh = noise_factor * floor + 1e-13 * max(1.0, float(np.abs(vals).max()))
    hot = d4 > thresh
    if not hot.any():
        raise DetectionError("no second-difference spike exceeds the noise threshold")
    groups, start = [], None
    for i, flag in enumerate(hot):
        if flag and start is None:
            start = i
        if not flag and start is not None:
            groups.append((start, i - 1))
            start = None
    if start is not None:
        groups.append((start, len(hot) - 1))
    eps_hat, sums, brackets = [], [], []
    for a, b in groups:
        left = grid[max(a - 1, 0)]
        right = grid[min(b + 5, len(grid) - 1)]
        if b + 5 >= len(grid) or a == 0:
            continue
        e, s = _locate(F, left, right, ctx)
        eps_hat.append(e)
        sums.append(complex(s).real if abs(complex(s).imag) < 1e-12 else complex(s))
        brackets.append((left, right))
    if not eps_hat:
        raise DetectionError("spikes found only at the edge of the scan range")
    order = np.argsort(eps_hat)[::-1]
    return Reconstruction(tuple(eps_hat[i] for i in order), tuple(sums[i] for i in order),
                          tuple(brackets[i] for i in order))


# -- output -------------------------------------------------------------------
CSV_COLUMNS = ("eps", "re_area", "im_area", "n_eps", "tail_re", "tail_im", "nucleus_re", "nucleus_im")


def area_rows(areas: Sequence[DirectedArea], ctx=None):
    """Rows at the full working precision of ``ctx`` (repr of doubles by default)."""
    if ctx is None or is_fp(ctx):
        num = lambda x: repr(float(x))
    else:
        num = lambda x: fmt(ctx, x)
    for a in areas:
        yield (num(a.eps), num(a.value.real), num(a.value.imag), a.n_eps,
               num(a.tail.real), num(a.tail.imag), num(a.nucleus.real), num(a.nucleus.imag))


def write_area_csv(areas: Sequence[DirectedArea], fh, ctx=None) -> None:
    import csv

    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in area_rows(areas, ctx):
        w.writerow(row)
