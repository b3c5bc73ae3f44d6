"""Cohomological equations H(f(z)) - H(z) = g(z) near a parabolic point.

Conventions: the formal solution is -alpha0/z + alpha1 log z + sum_{n>=1} c_n z^n
with no constant term.  Internally the solver works with
R = H + alpha0/z - alpha1 log z, which satisfies R(f) - R = delta with
delta = g + alpha0 (1/f - 1/z) - alpha1 log(f/z).

On the attracting petal V+ the log uses arg in (0, 2 pi); on the repelling
petal V- the principal branch arg in (-pi, pi).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import series as ps
from .errors import (
    BranchError,
    ConvergenceError,
    DomainError,
    EscapeError,
    ObstructionError,
    PrecisionError,
    QuadratureError,
    RayError,
)
from .germ import Germ, PetalSpec, invert, petal
from .hp import cnum, context, digits_of, is_fp, log_branch, rnum, unit_roundoff

RHS_ORDER = 32
RAY_GUARD = 0.2


# -- right-hand sides ---------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Rhs:
    """Analytic right-hand side g (constant term allowed)."""

    label: str
    series_fn: Callable
    closed: Callable
    _cache: dict = field(default_factory=dict, repr=False)

    def coefficients(self, ctx, n: int = RHS_ORDER) -> list:
        key = (id(ctx), n)
        if key not in self._cache:
            self._cache[key] = ps.coerce(ctx, self.series_fn(ctx, n), n)
        return list(self._cache[key])

    def __call__(self, z, ctx=None):
        return self.closed(z, ctx or context())

    def alphas(self, ctx=None):
        c = self.coefficients(ctx or context(), 1)
        return c[0], c[1]

    def multiplicity(self, ctx=None):
        """(l, alpha_l): first nonzero Taylor coefficient."""
        ctx = ctx or context()
        c = self.coefficients(ctx)
        for k, v in enumerate(c):
            if v != 0:
                return k, v
        raise DomainError("the right-hand side vanishes identically (to the working order)")

    def __add__(self, other: "Rhs") -> "Rhs":
        return Rhs(f"({self.label})+({other.label})",
                   lambda ctx, n: ps.add(ctx, self.series_fn(ctx, n), other.series_fn(ctx, n), n),
                   lambda z, ctx: self.closed(z, ctx) + other.closed(z, ctx))

    def to_json(self) -> dict:
        ctx = context()
        c = self.coefficients(ctx, 12)
        return {"kind": "series", "label": self.label,
                "coefficients": [[float(x.real), float(x.imag)] for x in c]}

    # constructors
    @staticmethod
    def monomial(m: int, coefficient=1) -> "Rhs":
        if m < 0:
            raise DomainError("monomial degree must be non-negative")
        if coefficient == 0:
            raise DomainError("g must not vanish identically")

        def coef(ctx):
            return _const(ctx, coefficient)

        def series_fn(ctx, n):
            out = ps.zeros(ctx, n)
            if m <= n:
                out[m] = coef(ctx)
            return out

        return Rhs(f"{coefficient}*z^{m}", series_fn, lambda z, ctx: coef(ctx) * z ** m)

    @staticmethod
    def from_coefficients(coeffs: Sequence, label: str = "series") -> "Rhs":
        if all(c == 0 for c in coeffs):
            raise DomainError("g must not vanish identically")

        def series_fn(ctx, n):
            return ps.coerce(ctx, [_const(ctx, c) for c in coeffs], n)

        def closed(z, ctx):
            return ps.evaluate([_const(ctx, c) for c in coeffs], z)

        return Rhs(label, series_fn, closed)

    @staticmethod
    def from_germ(g: Germ, scale=1) -> "Rhs":
        return Rhs(f"{scale}*{g.label}", lambda ctx, n: ps.scale(ctx, g.series(ctx, n), _const(ctx, scale), n),
                   lambda z, ctx: _const(ctx, scale) * g(z, ctx))

    @staticmethod
    def parse(text: str) -> "Rhs":
        """Parse ``c``, ``z``, ``-z``, ``c*z^m``, ``-pi*z``, ``z**2`` and sums thereof."""
        s = text.replace(" ", "").replace("**", "^")
        if not s:
            raise DomainError("empty right-hand side")
        terms = re.findall(r"[+-]?[^+-]+", s)
        if "".join(terms) != s:
            raise DomainError(f"cannot parse right-hand side {text!r}")
        coeffs: dict = {}
        for t in terms:
            sign = -1 if t.startswith("-") else 1
            t = t.lstrip("+-")
            m = re.fullmatch(r"(?:(?P<c>[^z*]+)\*?)?(?P<z>z(?:\^(?P<e>\d+))?)?", t)
            if not m or (m.group("c") is None and m.group("z") is None):
                raise DomainError(f"cannot parse term {t!r} in {text!r}")
            deg = 0 if m.group("z") is None else int(m.group("e") or 1)
            c = m.group("c")
            val = _parse_const(c) if c else 1
            coeffs[deg] = coeffs.get(deg, 0) + sign * val
        n = max(coeffs)
        seq = [coeffs.get(k, 0) for k in range(n + 1)]
        rhs = Rhs.from_coefficients(seq, label=text)
        return rhs

    @staticmethod
    def from_json(doc: dict) -> "Rhs":
        kind = doc.get("kind")
        if kind == "monomial":
            return Rhs.monomial(int(doc["m"]), _json_number(doc.get("coefficient", 1)))
        if kind == "series":
            return Rhs.from_coefficients([_json_number(c) for c in doc["coefficients"]], doc.get("label", "series"))
        if kind == "expr":
            return Rhs.parse(doc["text"])
        raise DomainError(f"unknown rhs kind {kind!r}")


def _json_number(x):
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        return _parse_const(x)
    return x


_PI_TOKEN = "pi"


def _parse_const(c: str):
    if c == _PI_TOKEN:
        return _Pi(1)
    if c.endswith("*pi") or c.endswith("pi"):
        head = c[: -2].rstrip("*")
        return _Pi(float(head) if head else 1)
    try:
        return int(c)
    except ValueError:
        pass
    try:
        return complex(c.replace("i", "j")) if ("i" in c or "j" in c) else float(c)
    except ValueError:
        raise DomainError(f"cannot parse coefficient {c!r}") from None


@dataclass(frozen=True)
class _Pi:
    """Multiple of pi, evaluated in the target context."""

    k: float

    def __neg__(self):
        return _Pi(-self.k)

    def __rmul__(self, other):
        return _Pi(self.k * other)

    __mul__ = __rmul__

    def __radd__(self, other):
        if other == 0:
            return self
        raise DomainError("mixing multiples of pi with other constants in one term is not supported")

    def __eq__(self, other):
        return isinstance(other, _Pi) and other.k == self.k or (other == 0 and self.k == 0)

    def __hash__(self):
        return hash(("pi", self.k))

    def __str__(self):
        return f"{self.k}*pi"


def _const(ctx, c):
    if isinstance(c, _Pi):
        return ctx.mpc(ctx.mpf(c.k) * ctx.pi)
    if isinstance(c, str):
        return _const(ctx, _parse_const(c))
    return cnum(ctx, c)


# -- formal solution ------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class FormalSolution:
    alpha0: object
    alpha1: object
    z_coefficients: tuple
    order: int
    germ: str
    residual: float
    ctx: object = field(repr=False)

    def regular_part(self, z):
        return ps.evaluate([0 * z] + list(self.z_coefficients), z)

    def __call__(self, z, branch: str = "+"):
        ctx = self.ctx
        out = self.regular_part(z)
        if self.alpha0 != 0:
            out -= self.alpha0 / z
        if self.alpha1 != 0:
            out += self.alpha1 * log_branch(ctx, z, branch)
        return out

    def last_term(self, r) -> float:
        c = self.z_coefficients
        k = len(c)
        return float(max(abs(c[k - 1]) * r ** k, abs(c[k - 2]) * r ** (k - 1) if k > 1 else 0))


def modified_rhs(f: Germ, g: Rhs, n: int, ctx) -> list:
    """Series of delta = g + alpha0 (1/f - 1/z) - alpha1 log(f/z) through order n."""
    a = f.series(ctx, n + 2)
    u = a[1:]  # f/z through order n + 1
    d = g.coefficients(ctx, n)
    a0, a1 = d[0], d[1]
    if a0 != 0:
        inv = ps.reciprocal(ctx, u, n + 1)  # z/f
        pole = [inv[k + 1] for k in range(n + 1)]  # (z/f - 1)/z
        d = ps.add(ctx, d, ps.scale(ctx, pole, a0, n), n)
    if a1 != 0:
        d = ps.sub(ctx, d, ps.scale(ctx, ps.log(ctx, u, n), a1, n), n)
    return d


def formal_solution(f: Germ, g: Rhs, K: int = 24, ctx=None) -> FormalSolution:
    ctx = ctx or context()
    a = f.series(ctx, K + 2)
    if abs(a[1] - 1) > 1e3 * unit_roundoff(ctx):
        raise DomainError("f must be tangent to the identity")
    a2 = a[2]
    if a2 == 0:
        raise ObstructionError("f has vanishing quadratic coefficient; only k = 1 is supported")
    alpha0, alpha1 = g.alphas(ctx)
    if (alpha0 != 0 or alpha1 != 0) and abs(a2 - 1) > 1e3 * unit_roundoff(ctx):
        raise ObstructionError("pole and log terms need f normalised to z + z^2 + ...")
    delta = modified_rhs(f, g, K + 1, ctx)
    tol = 1e4 * float(unit_roundoff(ctx)) * max(1.0, float(abs(alpha0)) + float(abs(alpha1)))
    if abs(delta[0]) > tol or abs(delta[1]) > tol:
        raise ObstructionError(
            "no formal solution of the form -a0/z + a1 log z + zC[[z]]: f lies outside the model formal class")
    # powers f^j - z^j for j = 1..K
    fs = a[: K + 2]
    pw = [None, list(fs)]
    for j in range(2, K + 1):
        pw.append(ps.mul(ctx, pw[-1], fs, K + 1))
    diff = [None] + [ps.sub(ctx, pw[j], [0] * j + [1], K + 1) for j in range(1, K + 1)]
    c = [ctx.mpc(0)] * (K + 1)
    for n in range(2, K + 2):
        s = delta[n]
        for j in range(1, n - 1):
            s -= c[j] * diff[j][n]
        c[n - 1] = s / ((n - 1) * a2)
    # residual of R_K(f) - R_K - delta through order K
    lhs = ps.zeros(ctx, K + 1)
    for j in range(1, K + 1):
        lhs = ps.add(ctx, lhs, ps.scale(ctx, diff[j], c[j], K + 1), K + 1)
    res = max(float(abs(lhs[n] - delta[n])) for n in range(K + 1))
    return FormalSolution(alpha0, alpha1, tuple(c[1:]), K, f.label, res, ctx)


# -- sectorial solutions ----------------------------------------------------------
def default_params(ctx):
    if digits_of(ctx) <= 16:
        return 0.05, 24
    d = digits_of(ctx)
    return (0.02, 48) if d <= 48 else (0.01, 80)


@dataclass(eq=False)
class SectorialSolution:
    """H on one petal via H(z) = H_hat(f^N z) - sum_{n<N} g(f^n z) (or the backward analogue)."""

    petal: PetalSpec
    rhs: Rhs
    germ: Germ
    formal: FormalSolution
    N_max: int
    K: int
    r_switch: float
    branch: str
    ctx: object = field(repr=False)
    _step: Callable = field(repr=False, default=None)

    @property
    def params(self) -> dict:
        return {"N_max": self.N_max, "K": self.K, "r_switch": self.r_switch, "branch": self.branch}

    @property
    def error_estimate(self) -> float:
        """Nominal bound: size of the last formal terms at the hand-off radius plus rounding."""
        return 2 * self.formal.last_term(self.r_switch) + self._rounding(1.0)

    def _rounding(self, scale) -> float:
        return 64 * float(unit_roundoff(self.ctx)) * max(1.0, float(scale))

    def evaluate(self, z):
        """(value, error estimate, N)."""
        ctx = self.ctx
        z = cnum(ctx, z)
        if z == 0:
            raise DomainError("the fixed point is not in the petal")
        w = z
        acc = 0 * z
        mag = 0.0
        n = 0
        sign = -1 if self.branch == "+" else 1
        limit = max(0.5, 2 * float(abs(z)))
        while abs(w) >= self.r_switch:
            if n >= self.N_max:
                raise ConvergenceError(f"orbit did not reach |z| < {self.r_switch} in {self.N_max} steps")
            if self.branch == "+":
                gw = self.rhs(w, ctx)
                w = self._step(w, ctx)
            else:
                w = self._step(w, ctx)
                gw = self.rhs(w, ctx)
            acc += sign * gw
            mag += float(abs(gw))
            n += 1
            if not abs(w) <= limit:
                raise EscapeError("orbit left the petal neighbourhood")
        head = self.formal(w, self.branch)
        val = head + acc
        err = 2 * self.formal.last_term(float(abs(w))) + self._rounding(mag + float(abs(head)))
        return val, err, n

    def __call__(self, z):
        return self.evaluate(z)[0]

    def regular(self, z):
        """H minus its pole and log terms."""
        ctx = self.ctx
        z = cnum(ctx, z)
        v = self(z)
        if self.formal.alpha0 != 0:
            v += self.formal.alpha0 / z
        if self.formal.alpha1 != 0:
            v -= self.formal.alpha1 * log_branch(ctx, z, self.branch)
        return v

    def to_json(self) -> dict:
        return {"germ": self.germ.label, "rhs": self.rhs.label, "petal": self.branch,
                "params": self.params, "error_estimate": self.error_estimate,
                "precision_digits": digits_of(self.ctx)}


def sectorial_solution(f: Germ, g: Rhs, side: str = "+", ctx=None, K: Optional[int] = None,
                       r_switch: Optional[float] = None, N_max: int = 1_000_000) -> SectorialSolution:
    ctx = ctx or context()
    side = "+" if side in ("+", "plus", "attracting") else "-" if side in ("-", "minus", "repelling") else side
    if side not in ("+", "-"):
        raise DomainError(f"unknown petal side {side!r}")
    r0, k0 = default_params(ctx)
    K = K or k0
    r_switch = r_switch or r0
    formal = formal_solution(f, g, K, ctx)
    if side == "+":
        step = f.closed or (lambda w, c: f(w, c))
    else:
        step = f.inverse_closed
        if step is None:
            finv = invert(f)
            step = lambda w, c: finv(w, c)
    return SectorialSolution(petal(side), g, f, formal, N_max, K, r_switch, side, ctx, step)


def verify_solution(f: Germ, g, H: Callable, points, ctx=None) -> float:
    ctx = ctx or context()
    worst = 0.0
    for z in points:
        z = cnum(ctx, z)
        r = H(f(z, ctx)) - H(z) - g(z, ctx)
        worst = max(worst, float(abs(r)))
    return worst


# -- cocycles -----------------------------------------------------------------------
@dataclass(frozen=True)
class CocycleSample:
    z: object
    component: str
    raw: object
    branch_constant: object
    value: object
    error: float

    def to_json(self) -> dict:
        c = lambda v: [float(v.real), float(v.imag)]
        return {"z": c(self.z), "component": self.component, "raw": c(self.raw),
                "branch_constant": c(self.branch_constant), "value": c(self.value), "error": self.error}


def cocycle(f: Germ, g: Rhs, points, ctx=None, require_resolved: bool = False,
            plus: Optional[SectorialSolution] = None, minus: Optional[SectorialSolution] = None):
    """Differences of the two sectorial solutions on the petal intersections.

    V^up (Im z > 0): H+ - H-.  V^low: H- - H+.  On V^low the two log branches
    differ by 2 pi i, which contributes the constant -2 pi i alpha1; it is
    reported separately and subtracted from ``value``.
    """
    ctx = ctx or context(40)
    plus = plus or sectorial_solution(f, g, "+", ctx)
    minus = minus or sectorial_solution(f, g, "-", ctx)
    alpha1 = plus.formal.alpha1
    out = []
    for z in points:
        z = cnum(ctx, z)
        if z.imag == 0:
            raise DomainError("cocycle points must lie off the real axis")
        hp, ep, _ = plus.evaluate(z)
        hm, em, _ = minus.evaluate(z)
        if z.imag > 0:
            comp, raw, const = "up", hp - hm, 0 * hp
        else:
            comp, raw = "low", hm - hp
            const = -2j * ctx.pi * alpha1
        val = raw - const
        err = ep + em
        if require_resolved and not abs(val) > err:
            raise PrecisionError(f"cocycle value {float(abs(val)):.3g} not resolved above error {err:.3g}")
        out.append(CocycleSample(z, comp, raw, const, val, err))
    return out


def f0_cocycle_closed_form(z, ctx=None, sign: int = 1):
    """Closed form of the f0 cocycle for rhs -z: sign * 2 pi i t/(1 - t) with
    t = exp(-2 pi i/z) on V^up and t = exp(2 pi i/z) on V^low."""
    ctx = ctx or context(40)
    z = cnum(ctx, z)
    t = ctx.exp(-2j * ctx.pi / z) if z.imag > 0 else ctx.exp(2j * ctx.pi / z)
    return sign * 2j * ctx.pi * t / (1 - t)


# -- Borel-Laplace ----------------------------------------------------------------------
def _borel_kernel(xi, ctx):
    """B(xi) = Bb(xi)/(e^-xi - 1), Bb(xi) = (e^-xi + xi - 1)/xi; series near 0."""
    if abs(xi) < 0.1:
        # Bb = sum_{j>=1} (-1)^(j+1) xi^j/(j+1)!
        term = xi / 2
        bb, j = term, 1
        tol = unit_roundoff(ctx) / 8
        while abs(term) > tol * abs(bb):
            term = term * (-xi) / (j + 2)
            bb += term
            j += 1
    else:
        bb = (ctx.expm1(-xi) + xi) / xi
    return bb / ctx.expm1(-xi)


def borel_laplace_model(theta, w, ctx=None, tol: Optional[float] = None):
    """Laplace integral of the Borel transform of the f0 normal-form 1-Abel remainder.

    Returns R(w) solving R(w + 1) - R(w) = 1/w - log(1 + 1/w), i.e. the
    remainder of the rhs -z equation for f0 in the coordinate w = -1/z.
    """
    ctx = ctx or context()
    theta = rnum(ctx, theta)
    w = cnum(ctx, w)
    for pole in (ctx.pi / 2, -ctx.pi / 2):
        d = abs(((theta - pole + ctx.pi) % (2 * ctx.pi)) - ctx.pi)
        if d < RAY_GUARD:
            raise RayError(f"ray direction within {RAY_GUARD} rad of the pole ray {float(pole):+.4f}")
    e = ctx.expj(theta)
    rate = (w * e).real
    if not rate > 0:
        raise DomainError("Re(w e^{i theta}) must be positive for the Laplace integral")
    tol = tol or float(unit_roundoff(ctx)) * 16
    L = (-math.log(tol) + 5) / float(rate)

    def integrand(t):
        xi = t * e
        return ctx.exp(-xi * w) * _borel_kernel(xi, ctx) * e

    pts = [0] + [L * k / 8 for k in range(1, 9)]
    val, err = ctx.quad(integrand, pts, error=True)
    tail = float(ctx.exp(-L * rate)) / float(rate)
    if float(err) > max(1e3 * tol * max(1.0, float(abs(val))), 1e-300) and float(err) > 1e-12 * float(abs(val)):
        raise QuadratureError(f"Laplace quadrature error estimate {float(err):.2e} too large")
    return val


def residue_series(w, ctx=None, terms: Optional[int] = None):
    """sum_{k>=1} exp(2 pi i k w)."""
    ctx = ctx or context()
    q = ctx.expj(2 * ctx.pi * cnum(ctx, w))
    return q / (1 - q)


# -- global solutions ------------------------------------------------------------------
@dataclass(eq=False)
class GlobalConstruction:
    f: Germ
    phi: Germ
    rhs: Rhs
    l: int
    alpha: object
    H: Callable
    residual: float

    def to_json(self, ctx=None) -> dict:
        from .germ import germ_to_json

        return {"f": germ_to_json(self.f, ctx), "phi": self.phi.label, "rhs": self.rhs.label,
                "l": self.l, "residual": self.residual}


def _phi_parts(phi: Germ):
    fwd = phi.closed or (lambda z, c: phi(z, c))
    back = phi.inverse_closed
    if back is None:
        pinv = invert(phi)
        back = lambda w, c: pinv(w, c)
    return fwd, back


def construct_global(phi: Germ, g: Rhs, ctx=None, order: int = 32, check_points=None) -> GlobalConstruction:
    """Germ f for which H(f) - H = g has a global solution built from phi."""
    ctx = ctx or context()
    l, al = g.multiplicity(ctx)
    p = phi.series(ctx, order)
    if abs(p[1] - 1) > 1e3 * unit_roundoff(ctx):
        raise DomainError("phi must be tangent to the identity")
    p_fwd, p_back = _phi_parts(phi)
    rev = ps.reversion(ctx, p, order)
    gs = g.coefficients(ctx, order)

    if l >= 2:
        e = l - 1
        pe = ps.power(ctx, p, e, order + e)
        u = ps.divide(ctx, gs + [0] * e, pe, order)  # g/phi^(l-1)
        inner = ps.pow_real(ctx, ps.add(ctx, [1], ps.scale(ctx, u, e / al, order), order), ctx.mpf(1) / e, order)
        fser = ps.compose(ctx, rev, ps.mul(ctx, p, inner, order), order)

        def closed(z, c):
            ph = p_fwd(z, c)
            ratio = 1 + e * g(z, c) / (_const(c, al) * ph ** e)
            return p_back(ph * ratio ** (c.mpf(1) / e), c)

        def H(z, side="+", c=None):
            c = c or ctx
            return _const(c, al) * p_fwd(z, c) ** e / e

    elif l == 1:
        ex = ps.exp(ctx, ps.scale(ctx, gs, 1 / al, order), order)
        fser = ps.compose(ctx, rev, ps.mul(ctx, p, ex, order), order)

        def closed(z, c):
            return p_back(p_fwd(z, c) * c.exp(g(z, c) / _const(c, al)), c)

        def H(z, side="+", c=None):
            c = c or ctx
            return _const(c, al) * log_branch(c, p_fwd(z, c), side)

    else:
        a0, a1 = gs[0], gs[1]
        pg = ps.mul(ctx, p, gs, order)
        v = ps.zeros(ctx, order)
        one = [ctx.mpc(1)]
        for _ in range(order + 1):
            lg = ps.log(ctx, ps.add(ctx, one, v, order), order)
            t = ps.sub(ctx, pg, ps.scale(ctx, ps.mul(ctx, p, lg, order), a1, order), order)
            v = ps.scale(ctx, ps.mul(ctx, ps.add(ctx, one, v, order), t, order), 1 / a0, order)
        fser = ps.compose(ctx, rev, ps.mul(ctx, p, ps.add(ctx, one, v, order), order), order)

        def solve_v(z, c):
            ph = p_fwd(z, c)
            rhs = ph * g(z, c)
            A0, A1 = _const(c, a0), _const(c, a1)
            vv = ps.evaluate(ps.coerce(c, v, order), z) if c is ctx else rhs / A0
            for _ in range(60):
                F = A0 * vv / (1 + vv) + A1 * ph * c.log(1 + vv) - rhs
                dF = A0 / (1 + vv) ** 2 + A1 * ph / (1 + vv)
                step = F / dF
                vv -= step
                if abs(step) <= 4 * unit_roundoff(c) * max(1, abs(vv)):
                    break
            else:
                raise BranchError("Newton solve for h^-1 did not converge (z too large)")
            if not abs(vv) < 1:
                raise BranchError("h^-1 left the principal sheet (z too large)")
            return ph, vv

        def closed(z, c):
            ph, vv = solve_v(z, c)
            return p_back(ph * (1 + vv), c)

        def H(z, side="+", c=None):
            c = c or ctx
            ph = p_fwd(z, c)
            out = -_const(c, a0) / ph
            if a1 != 0:
                out += _const(c, a1) * log_branch(c, ph, side)
            return out

    coeffs = fser

    f = Germ(label=f"global[{phi.label};{g.label}]", series_fn=lambda c, n: _series_at(phi, g, c, n, coeffs, ctx, order),
             closed=closed, radius=min(phi.radius, 0.4))
    pts = check_points or [cnum(ctx, -0.05 + 0.01j * k) for k in range(-2, 3)]
    res = verify_solution(f, g, lambda z: H(z, "+", ctx), pts, ctx)
    return GlobalConstruction(f, phi, g, l, al, H, res)


def _series_at(phi, g, c, n, coeffs, ctx0, order0):
    if c is ctx0 and n <= order0:
        return coeffs[: n + 1]
    return construct_global(phi, g, c, max(n, 8), check_points=[cnum(c, -0.05)]).f.series(c, n)
