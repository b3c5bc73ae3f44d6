"""Fatou coordinates, m-moments and Ecalle-Voronin moduli.

Lifts: on V^up a cocycle value is read as a function of s = exp(2 pi i Psi(z)),
on V^low as a function of t = exp(-2 pi i Psi(z)); both are small on the
sampled strip, so the lifted data are germs at 0 fitted by least squares.
The germ at infinity is stored through s = 1/t.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import series as ps
from .cohom import Rhs, SectorialSolution, cocycle, sectorial_solution
from .errors import DomainError, FitError, InversionError, NotInvertibleError, PrecisionError
from .germ import Germ, conjugate, from_coefficients, invert
from .hp import cnum, context, digits_of, unit_roundoff

MOMENT_DIGITS = 48
DEFAULT_DEGREE = 6
DEFAULT_POINTS = 16
GUARD_ORDERS = 0
Q_WINDOW = (1e-10, 1e-5)
Q_FLOOR = 1e-12
# for conjugated germs whose change of variable is univalent only on |z| < ~0.35
NARROW_Q_WINDOW = (1e-12, 1e-9)


def fatou_coordinate(f: Germ, side: str = "+", ctx=None, **kw) -> SectorialSolution:
    """Sectorial solution of Psi(f) - Psi = 1 without constant term."""
    return sectorial_solution(f, Rhs.monomial(0, 1), side, ctx, **kw)


def invert_fatou(psi: SectorialSolution, w, start=None, shift=0):
    """Solve psi(z) + shift = w by Newton iteration started at -1/(w - shift)."""
    ctx = psi.ctx
    w = cnum(ctx, w) - shift
    z = cnum(ctx, start) if start is not None else -1 / w
    tol = 1e4 * unit_roundoff(ctx)
    h = ctx.mpf(10) ** (-(digits_of(ctx) // 3))
    prev = None
    for _ in range(60):
        val = psi(z)
        d = (psi(z + h * z) - psi(z - h * z)) / (2 * h * z)
        step = (val - w) / d
        z -= step
        if abs(step) <= tol * abs(z):
            return z
        # stagnation at the noise level of psi
        if prev is not None and abs(step) >= prev and abs(step) <= ctx.sqrt(tol) * abs(z):
            return z
        prev = abs(step)
    raise InversionError(f"Newton inversion of the Fatou coordinate failed at w={complex(w)}")


# -- moments ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Moment:
    m: int
    g_inf: tuple
    g_0: tuple
    trivialization_tag: str
    fit_diagnostics: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return len(self.g_inf) - 1

    def to_json(self) -> dict:
        c = lambda v: [float(complex(v).real), float(complex(v).imag)]
        return {"m": self.m, "degree": self.degree, "g_inf": [c(x) for x in self.g_inf],
                "g_0": [c(x) for x in self.g_0], "trivialization_tag": self.trivialization_tag,
                "diagnostics": self.fit_diagnostics}

    def act(self, a=0, b=1) -> "Moment":
        """(g_inf(s), g_0(t)) -> (g_inf(b s) + a, g_0(t/b) - a)."""
        gi = [c * b ** k for k, c in enumerate(self.g_inf)]
        g0 = [c * b ** (-k) for k, c in enumerate(self.g_0)]
        gi[0] += a
        g0[0] -= a
        return Moment(self.m, tuple(gi), tuple(g0), self.trivialization_tag, dict(self.fit_diagnostics))

    def leading(self, tol: float = 1e-8):
        """(p, c_p): first non-constant coefficient of g_0 above tol, else (None, 0)."""
        for k in range(1, len(self.g_0)):
            if abs(self.g_0[k]) > tol:
                return k, self.g_0[k]
        return None, 0

    def canonical(self, root: int = 0, tol: float = 1e-8):
        """Representative with g_inf(0) = 0 and first non-constant g_0 coefficient 1.

        Returns (moment, a, b); ``root`` picks the p-th root for b.
        """
        a = -self.g_inf[0]
        p, cp = self.leading(tol)
        if p is None:
            b = 1
        else:
            b = complex(cp) ** (1.0 / p) * cmath.exp(2j * math.pi * root / p)
        return self.act(a, b), a, b

    def is_trivial(self, tol: float = 1e-8, through: int = 4) -> bool:
        d = min(through, self.degree) + 1
        return all(abs(c) <= tol for c in self.g_inf[1:d] + self.g_0[1:d])

    @staticmethod
    def zero(m: int, degree: int = DEFAULT_DEGREE) -> "Moment":
        z = tuple(0j for _ in range(degree + 1))
        return Moment(m, z, z, "zero")


def _fit_poly(xs, ys, degree, ctx, guard: int = 0):
    """Least-squares polynomial fit; ``guard`` extra orders absorb the truncated
    terms and are dropped from the result."""
    m, k = len(xs), degree + 1 + guard
    if m < 2 * k:
        raise FitError(f"need at least {2 * k} samples for degree {degree}")
    rows = [[x ** j for j in range(k)] for x in xs]
    scale = [ctx.sqrt(ctx.fsum(abs(rows[i][j]) ** 2 for i in range(m))) for j in range(k)]
    if any(s == 0 for s in scale):
        raise FitError("rank-deficient sample set")
    # split into real system: [Re A, -Im A; Im A, Re A]
    A = ctx.matrix(2 * m, 2 * k)
    b = ctx.matrix(2 * m, 1)
    for i in range(m):
        for j in range(k):
            v = rows[i][j] / scale[j]
            A[i, j], A[i, j + k] = ctx.re(v), -ctx.im(v)
            A[i + m, j], A[i + m, j + k] = ctx.im(v), ctx.re(v)
        b[i], b[i + m] = ctx.re(ys[i]), ctx.im(ys[i])
    x, res = ctx.qr_solve(A, b)
    coef = [ctx.mpc(x[j], x[j + k]) / scale[j] for j in range(k)]
    return coef[: degree + 1], float(res)


def _strip_points(q_window, n, sign):
    """Fatou-coordinate values w with |exp(+-2 pi i w)| spread over the window."""
    lo, hi = q_window
    y_hi = -math.log(lo) / (2 * math.pi)
    y_lo = -math.log(hi) / (2 * math.pi)
    pts = []
    for j in range(n):
        frac = j / max(1, n - 1)
        y = y_lo + (y_hi - y_lo) * frac
        x = ((j * 0.618034) % 1.0) - 0.5
        pts.append(complex(x, sign * y))
    return pts


def m_moment(f: Germ, m: int, n_points: int = DEFAULT_POINTS, degree: int = DEFAULT_DEGREE,
             q_window=Q_WINDOW, ctx=None, trivialization: str = "+", shift=0) -> Moment:
    """Lifted cocycle of H(f) - H = -z^m as a pair of fitted germs.

    ``trivialization`` selects Psi+ or Psi- for the lifts and ``shift`` adds a
    constant to it.
    """
    if m < 0:
        raise DomainError("moment order must be non-negative")
    if q_window[0] < Q_FLOOR:
        raise PrecisionError(f"lifted magnitudes below {Q_FLOOR} are refused")
    ctx = ctx or context(MOMENT_DIGITS)
    rhs = Rhs.monomial(m, -1)
    plus = sectorial_solution(f, rhs, "+", ctx)
    minus = sectorial_solution(f, rhs, "-", ctx)
    psi = fatou_coordinate(f, trivialization, ctx)
    shift = cnum(ctx, shift)
    data = {}
    err_max = 0.0
    for comp, sign in (("up", 1), ("low", -1)):
        # sample at the model preimages z = -1/w; the lift itself uses the computed Psi
        zs = [-1 / (cnum(ctx, w) - shift) for w in _strip_points(q_window, n_points, sign)]
        samples = cocycle(f, rhs, zs, ctx, plus=plus, minus=minus)
        lifts = [ctx.exp(sign * 2j * ctx.pi * (psi(z) + shift)) for z in zs]
        vals = [s.value for s in samples]
        err_max = max(err_max, max(s.error for s in samples))
        coef, res = _fit_poly(lifts, vals, degree, ctx, GUARD_ORDERS)
        data[comp] = (coef, res)
    gi, g0 = list(data["up"][0]), list(data["low"][0])
    total = gi[0] + g0[0]
    gi[0] -= total / 2
    g0[0] -= total / 2
    diag = {"residual_up": data["up"][1], "residual_low": data["low"][1], "max_sample_error": err_max,
            "constant_shift": [float(complex(total).real), float(complex(total).imag)], "n_points": n_points,
            "q_window": list(q_window), "precision_digits": digits_of(ctx)}
    tag = f"Psi{trivialization}" + (f"+({complex(shift)})" if shift != 0 else "")
    return Moment(m, tuple(gi), tuple(g0), tag, diag)


def moment_equivalent(M1: Moment, M2: Moment, tol: float = 1e-5, through: int = 4):
    """Decide whether M2 = M1 acted on by some (a, b); returns (bool, (a, b) or None).

    Coefficients are compared through degree ``through``: the top fitted
    coefficients carry the amplified sampling noise.
    """
    if M1.m != M2.m or M1.degree != M2.degree:
        raise DomainError("moments must share order and fitted degree")
    d = min(through, M1.degree)
    t1, t2 = M1.is_trivial(tol, d), M2.is_trivial(tol, d)
    if t1 or t2:
        if t1 and t2:
            return True, (complex(M2.g_inf[0] - M1.g_inf[0]), 1)
        return False, None
    p, _ = M2.leading(tol)
    c1, a1, b1 = M1.canonical(0, tol)
    best = None
    for r in range(p):
        c2, a2, b2 = M2.canonical(r, tol)
        # relative: canonical rescaling multiplies degree k by b^k
        rel = lambda x, y: abs(complex(x) - complex(y)) / max(1.0, abs(complex(x)))
        diff = max(max(rel(x, y) for x, y in zip(c1.g_inf[: d + 1], c2.g_inf[: d + 1])),
                   max(rel(x, y) for x, y in zip(c1.g_0[: d + 1], c2.g_0[: d + 1])))
        if best is None or diff < best[0]:
            best = (diff, b1 / b2)
    if best[0] <= tol:
        a = complex(M2.g_inf[0] - M1.g_inf[0])
        return True, (a, best[1])
    return False, None


# -- conjugation with equal moments ------------------------------------------------------
@dataclass(frozen=True)
class Conjugation:
    g: Germ
    phi: Germ
    phi_inv: Germ


def formclas_conjugate(f: Germ, r: Germ) -> Conjugation:
    """g = phi^-1 f phi with phi^-1 = Id + r(f) - r, which has the same 1-moments as f."""

    def series_fn(ctx, n):
        fs = f.series(ctx, n)
        rs = r.series(ctx, n)
        out = ps.add(ctx, ps.identity(ctx, n), ps.compose(ctx, rs, fs, n), n)
        return ps.sub(ctx, out, rs, n)

    def closed(z, ctx):
        return z + r(f(z, ctx), ctx) - r(z, ctx)

    def deriv(z, ctx):
        return 1 + r.derivative(f(z, ctx), ctx) * f.derivative(z, ctx) - r.derivative(z, ctx)

    phi_inv = Germ(label=f"Id+{r.label}o{f.label}-{r.label}", series_fn=series_fn, closed=closed, deriv=deriv,
                   radius=min(f.radius, r.radius))
    phi = invert(phi_inv)
    g = conjugate(f, phi)
    return Conjugation(g, phi, phi_inv)


# -- Ecalle-Voronin moduli -----------------------------------------------------------------
@dataclass(frozen=True)
class EVModulus:
    phi_0: tuple
    phi_inf: tuple
    method: str
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        c = lambda v: [float(complex(v).real), float(complex(v).imag)]
        return {"phi_0": [c(x) for x in self.phi_0], "phi_inf": [c(x) for x in self.phi_inf],
                "method": self.method, "diagnostics": self.diagnostics}

    def identity_deviation(self) -> float:
        dev = 0.0
        for seq in (self.phi_0, self.phi_inf):
            for k, c in enumerate(seq):
                dev = max(dev, abs(complex(c) - (1 if k == 1 else 0)))
        return dev


def ev_modulus_direct(f: Germ, n_points: int = DEFAULT_POINTS, degree: int = DEFAULT_DEGREE,
                      q_window=Q_WINDOW, ctx=None) -> EVModulus:
    """phi_0(t) = exp(-2 pi i Psi-(Psi+^-1(w))), t = exp(-2 pi i w), sampled near t = 0 (V^low);
    phi_inf through the germ 1/phi_inf(1/s) sampled on V^up.

    Points of the graph are generated as (exp(-+2 pi i Psi+(z)), exp(-+2 pi i Psi-(z)))
    for z on the strip, which avoids inverting Psi+.
    """
    ctx = ctx or context(MOMENT_DIGITS)
    pp = fatou_coordinate(f, "+", ctx)
    pm = fatou_coordinate(f, "-", ctx)
    out = {}
    for comp, sign in (("0", -1), ("inf", 1)):
        ws = _strip_points(q_window, n_points, sign)
        xs, ys = [], []
        for w in ws:
            z = -1 / cnum(ctx, w)
            wp, wm = pp(z), pm(z)
            xs.append(ctx.exp(sign * 2j * ctx.pi * wp))
            ys.append(ctx.exp(sign * 2j * ctx.pi * wm))
        coef, res = _fit_poly(xs, ys, degree, ctx, GUARD_ORDERS)
        out[comp] = (tuple(coef), res)
    return EVModulus(out["0"][0], out["inf"][0], "direct",
                     {"residual_0": out["0"][1], "residual_inf": out["inf"][1], "q_window": list(q_window)})


def _compose_inverse(g_minus: Sequence, g_plus: Sequence, ctx, threshold: float):
    """(g_minus)^-1 o g_plus as series, both with equal constant terms."""
    n = len(g_plus) - 1
    if abs(g_minus[1]) < threshold or abs(g_plus[1]) < threshold:
        raise NotInvertibleError("moment component has (numerically) zero linear coefficient; "
                                 "the moduli cannot be reconstructed from it")
    c = g_minus[0]
    gm = [ctx.mpc(0)] + [ctx.mpc(x) for x in g_minus[1:]]
    gp = [ctx.mpc(g_plus[0]) - c] + [ctx.mpc(x) for x in g_plus[1:]]
    inv = ps.reversion(ctx, gm, n)
    if abs(gp[0]) > threshold:
        raise NotInvertibleError("constant terms of the two moments do not match")
    gp[0] = ctx.mpc(0)
    return tuple(ps.compose(ctx, inv, gp, n))


def ev_from_two_sided_moments(Mplus: Moment, Mminus: Moment, ctx=None, threshold: float = 1e-8) -> EVModulus:
    ctx = ctx or context(MOMENT_DIGITS)
    if Mplus.m != Mminus.m or Mplus.degree != Mminus.degree:
        raise DomainError("moments must share order and degree")
    phi0 = _compose_inverse(Mminus.g_0, Mplus.g_0, ctx, threshold)
    phiinf = _compose_inverse(Mminus.g_inf, Mplus.g_inf, ctx, threshold)
    return EVModulus(phi0, phiinf, "two-sided-moments",
                     {"plus": Mplus.trivialization_tag, "minus": Mminus.trivialization_tag})


# -- 2-D trivialization ------------------------------------------------------------------------
@dataclass(frozen=True)
class Trivialization:
    T_value: tuple
    residual: float


def two_dim_trivialization(f: Germ, z, w, ctx=None, psi: Optional[SectorialSolution] = None,
                           h: Optional[SectorialSolution] = None) -> Trivialization:
    """T(z, w) = (Psi+(z), H+(z) + w) for F(z, w) = (f(z), z + w)."""
    ctx = ctx or context()
    psi = psi or fatou_coordinate(f, "+", ctx)
    h = h or sectorial_solution(f, Rhs.monomial(1, -1), "+", ctx)
    z, w = cnum(ctx, z), cnum(ctx, w)
    T = (psi(z), h(z) + w)
    fz = f(z, ctx)
    TF = (psi(fz), h(fz) + z + w)
    res = max(float(abs(TF[0] - T[0] - 1)), float(abs(TF[1] - T[1])))
    return Trivialization(T, res)
