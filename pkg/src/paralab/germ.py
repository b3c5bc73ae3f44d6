"""Analytic germs fixing the origin.

A :class:`Germ` carries two representations: a series generator producing the
Taylor coefficients at any requested order and precision, and an optional
closed-form evaluator ``fn(z, ctx)`` written against the context's special
functions.  Compositions and inverses keep both representations in sync.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import series as ps
from .errors import ConvergenceError, DomainError, EscapeError, NotParabolicError, PrecisionError
from .hp import cnum, context, digits_of, is_fp, unit_roundoff

DEFAULT_ORDER = 32
NEWTON_ITERATIONS = 40

SeriesFn = Callable[[object, int], list]
ClosedFn = Callable[[object, object], object]


@dataclass(frozen=True, eq=False)
class Germ:
    """Germ ``a1 z + a2 z^2 + ...`` with optional closed form.

    ``series_fn(ctx, n)`` returns the coefficient list ``[0, a1, ..., an]``.
    ``radius`` bounds the region where the closed form (or, lacking one, the
    series) is trusted.
    """

    label: str
    series_fn: Optional[SeriesFn]
    closed: Optional[ClosedFn] = None
    deriv: Optional[ClosedFn] = None
    radius: float = math.inf
    order: int = DEFAULT_ORDER
    tag: Optional[str] = None
    inverse_closed: Optional[ClosedFn] = None
    inverse_deriv: Optional[ClosedFn] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- representations -------------------------------------------------
    def series(self, ctx, n: Optional[int] = None) -> list:
        n = self.order if n is None else n
        key = (id(ctx), digits_of(ctx), n)
        if key not in self._cache:
            if self.series_fn is None:
                coeffs = _cauchy_coefficients(self, ctx, n)
            else:
                coeffs = ps.coerce(ctx, self.series_fn(ctx, n), n)
            if coeffs[0] != 0:
                raise DomainError(f"germ {self.label} does not fix 0")
            self._cache[key] = coeffs
        return list(self._cache[key])

    def coefficients(self, ctx, n: Optional[int] = None) -> tuple:
        return tuple(self.series(ctx, n)[1:])

    def series_radius(self, ctx) -> float:
        if self.series_fn is None:
            return self.radius
        a = self.series(ctx, min(self.order, 24))
        tail = [abs(c) for c in a[len(a) // 2:] if c != 0]
        if not tail:
            return self.radius
        k0 = len(a) // 2
        growth = max(float(abs(c)) ** (1.0 / (k0 + i)) for i, c in enumerate(tail))
        return min(self.radius, 0.5 / growth if growth > 0 else self.radius)

    # -- evaluation ------------------------------------------------------
    def __call__(self, z, ctx=None):
        ctx = ctx or context()
        if self.closed is not None:
            if abs(z) > self.radius:
                raise DomainError(f"|z|={float(abs(z)):.3g} exceeds validity radius of {self.label}")
            return self.closed(z, ctx)
        if abs(z) > self.series_radius(ctx):
            raise DomainError(f"|z|={float(abs(z)):.3g} outside series radius of {self.label}")
        return ps.evaluate(self.series(ctx), z)

    def derivative(self, z, ctx=None):
        ctx = ctx or context()
        if self.deriv is not None:
            return self.deriv(z, ctx)
        if self.closed is not None:
            return _numeric_derivative(self, z, ctx)
        return ps.evaluate(ps.derivative(ctx, self.series(ctx)), z)

    @property
    def has_closed_form(self) -> bool:
        return self.closed is not None


def evaluate(g: Germ, z, ctx=None):
    """Value of ``g`` at ``z``: closed form when present, otherwise Horner on the series."""
    return g(z, ctx)


def taylor(g: Germ, order: int, ctx=None) -> tuple:
    """Coefficients (a1, ..., a_order)."""
    return g.coefficients(ctx or context(), order)


def _numeric_derivative(g: Germ, z, ctx):
    h = ctx.mpf(10) ** (-(digits_of(ctx) // 3)) * max(1, abs(z))
    return (g(z + h, ctx) - g(z - h, ctx) + 1j * (g(z - 1j * h, ctx) - g(z + 1j * h, ctx))) / (4 * h)


def _cauchy_coefficients(g: Germ, ctx, n: int) -> list:
    """Taylor coefficients of a closed form by trapezoidal Cauchy integrals on two radii."""
    if g.closed is None:
        raise DomainError("germ has neither series nor closed form")
    r0 = min(0.25, g.radius / 2)
    estimates = []
    for r in (r0, r0 * 0.8):
        m = 2 * n + 8
        vals = [g.closed(r * ctx.expjpi(ctx.mpf(2 * j) / m), ctx) for j in range(m)]
        coeffs = [ctx.mpc(0)]
        for k in range(1, n + 1):
            s = ctx.fsum(v * ctx.expjpi(-ctx.mpf(2 * j * k) / m) for j, v in enumerate(vals))
            coeffs.append(s / m / ctx.mpf(r) ** k)
        estimates.append(coeffs)
    scale = max(1, max(abs(c) for c in estimates[0]))
    err = max(abs(a - b) for a, b in zip(*estimates)) / scale
    if err > ctx.mpf(10) ** (-(digits_of(ctx) // 2)):
        raise PrecisionError(f"coefficient extraction for {g.label} lost more than half the digits")
    return estimates[0]


# -- constructors ----------------------------------------------------------
def _exact(ctx, c):
    if isinstance(c, Fraction):
        return ctx.mpc(ctx.mpf(c.numerator) / c.denominator)
    return cnum(ctx, c)


def from_coefficients(coeffs, label: str = "series", order: Optional[int] = None) -> Germ:
    """Polynomial/series germ from ``(a1, a2, ...)``; entries may be ints, Fractions, complex or strings."""
    stored = tuple(coeffs)
    n_default = order or max(DEFAULT_ORDER, len(stored))

    def series_fn(ctx, n):
        out = [ctx.mpc(0)] + [_exact(ctx, c) for c in stored[:n]]
        return out + [ctx.mpc(0)] * (n + 1 - len(out))

    poly = len(stored) <= n_default
    closed = None
    deriv = None
    if poly:
        def closed(z, ctx):
            acc = ctx.mpc(0)
            for c in reversed(stored):
                acc = (acc + _exact(ctx, c)) * z
            return acc

        def deriv(z, ctx):
            acc = ctx.mpc(0)
            for k in range(len(stored), 0, -1):
                acc = acc * z + k * _exact(ctx, stored[k - 1])
            return acc

    return Germ(label=label, series_fn=series_fn, closed=closed, deriv=deriv, order=n_default, tag=None)


def identity(order: int = DEFAULT_ORDER) -> Germ:
    return Germ(
        label="id",
        series_fn=lambda ctx, n: ps.identity(ctx, n),
        closed=lambda z, ctx: z,
        deriv=lambda z, ctx: ctx.mpc(1) if not is_fp(ctx) else 1.0 + 0j,
        order=order,
        tag="id",
        inverse_closed=lambda z, ctx: z,
        inverse_deriv=lambda z, ctx: ctx.mpc(1) if not is_fp(ctx) else 1.0 + 0j,
    )


def compose(g1: Germ, g2: Germ) -> Germ:
    """g1 o g2."""

    def series_fn(ctx, n):
        return ps.compose(ctx, g1.series(ctx, n), g2.series(ctx, n), n)

    closed = deriv = None
    if g1.closed is not None and g2.closed is not None:
        closed = lambda z, ctx: g1(g2(z, ctx), ctx)
        deriv = lambda z, ctx: g1.derivative(g2(z, ctx), ctx) * g2.derivative(z, ctx)
    inv = inv_d = None
    if g1.inverse_closed is not None and g2.inverse_closed is not None:
        inv = lambda z, ctx: g2.inverse_closed(g1.inverse_closed(z, ctx), ctx)
    tag = f"({g1.tag})o({g2.tag})" if g1.tag and g2.tag else None
    return Germ(
        label=f"{g1.label}o{g2.label}",
        series_fn=series_fn,
        closed=closed,
        deriv=deriv,
        radius=g2.radius,
        order=min(g1.order, g2.order),
        tag=tag,
        inverse_closed=inv,
        inverse_deriv=inv_d,
    )


def newton_inverse(g: Germ, w, ctx, start=None):
    """Solve g(z) = w by damped Newton from ``start`` (default w)."""
    z = w if start is None else start
    tol = unit_roundoff(ctx) * 64
    res = g(z, ctx) - w
    for _ in range(NEWTON_ITERATIONS):
        if abs(res) <= tol * max(1, abs(w)):
            return z
        step = res / g.derivative(z, ctx)
        lam = 1
        while True:
            cand = z - lam * step
            try:
                cres = g(cand, ctx) - w
            except (DomainError, ZeroDivisionError, ValueError):
                cres = None
            if cres is not None and abs(cres) < abs(res):
                break
            lam = lam / 2
            if lam < 1e-6:
                raise ConvergenceError(f"damped Newton stalled inverting {g.label}")
        z, res = cand, cres
    if abs(res) <= tol * 1e4 * max(1, abs(w)):
        return z
    raise ConvergenceError(f"Newton inversion of {g.label} did not converge in {NEWTON_ITERATIONS} steps")


def invert(g: Germ) -> Germ:
    """Compositional inverse (series reversion; closed or Newton evaluator)."""

    def series_fn(ctx, n):
        return ps.reversion(ctx, g.series(ctx, n), n)

    if g.inverse_closed is not None:
        closed = g.inverse_closed
        deriv = g.inverse_deriv
    elif g.closed is not None:
        closed = lambda w, ctx: newton_inverse(g, w, ctx)
        deriv = None
    else:
        closed = deriv = None
    if deriv is None and closed is not None:
        deriv = lambda w, ctx: 1 / g.derivative(closed(w, ctx), ctx)
    fwd = g.closed
    fwd_d = g.deriv if g.deriv is not None else (lambda z, ctx: g.derivative(z, ctx))
    return Germ(
        label=f"inv({g.label})",
        series_fn=series_fn,
        closed=closed,
        deriv=deriv,
        radius=g.radius,
        order=g.order,
        tag=f"inv({g.tag})" if g.tag else None,
        inverse_closed=fwd,
        inverse_deriv=fwd_d if fwd is not None else None,
    )


def conjugate(f: Germ, phi: Germ) -> Germ:
    """phi^{-1} o f o phi."""
    g = compose(invert(phi), compose(f, phi))
    return Germ(
        label=f"conj({f.label},{phi.label})",
        series_fn=g.series_fn,
        closed=g.closed,
        deriv=g.deriv,
        radius=min(f.radius, phi.radius),
        order=g.order,
        tag=g.tag,
        inverse_closed=g.inverse_closed,
        inverse_deriv=g.inverse_deriv,
    )


def iterate(g: Germ, n: int, z, ctx=None, escape_radius: Optional[float] = None):
    """n-fold composition by repeated evaluation; EscapeError on leaving the disc."""
    ctx = ctx or context()
    limit = escape_radius if escape_radius is not None else max(0.4, 2 * float(abs(z)))
    for _ in range(n):
        z = g(z, ctx)
        if abs(z) > limit:
            raise EscapeError(f"iterate of {g.label} left |z| <= {limit}")
    return z


# -- formal class ------------------------------------------------------------
@dataclass(frozen=True)
class FormalClassInfo:
    k: int
    rho_obstruction: complex
    conjugacy_coefficients: tuple
    scaling: complex = 1


def formal_class(f: Germ, order: int = 8, ctx=None) -> FormalClassInfo:
    """Order-by-order conjugacy to f0 = z/(1-z).

    After scaling so that a2 = 1, the equation phi(f) = f0(phi) fixes the
    coefficient b_{n-1} of phi at order n with multiplier n-3.  Order 3 is the
    only place where the multiplier vanishes; the residual left there is the
    obstruction.  It is reported as rho = 2*pi*i*(residual) so that
    f = z + z^2 + (1 - rho/(2 pi i)) z^3 + ... (time-one map of
    z^2/(1 + rho/(2 pi i) z) d/dz).  rho = 0 means the model class (1, 0).
    """
    ctx = ctx or context()
    n = max(order, 4)
    a = f.series(ctx, n)
    if abs(a[1] - 1) > 1e3 * unit_roundoff(ctx):
        raise NotParabolicError("formal class needs multiplier 1")
    k = next((j - 1 for j in range(2, n + 1) if a[j] != 0), None)
    if k is None:
        raise NotParabolicError(f"all nonlinear coefficients vanish through order {n}")
    if k != 1:
        raise NotParabolicError(f"tangency order k={k} > 1 is outside the supported class")
    c = a[2]
    scaled = [a[j] * c ** (j - 1) for j in range(n + 1)]
    model = [ctx.mpc(0)] + [ctx.mpc(1)] * n
    b = ps.identity(ctx, n)
    rho = ctx.mpc(0)
    for m in range(3, n + 1):
        lhs = ps.compose(ctx, b, scaled, m)
        rhs = ps.compose(ctx, model, b, m)
        resid = lhs[m] - rhs[m]
        if m == 3:
            rho = 2j * ctx.pi * resid
            continue
        b[m - 1] -= resid / (m - 3)
    return FormalClassInfo(k=1, rho_obstruction=rho, conjugacy_coefficients=tuple(b[1:]), scaling=c)


# -- petals ------------------------------------------------------------------
@dataclass(frozen=True)
class PetalSpec:
    kind: str
    bisector: complex
    opening: float
    radius: float = 0.4

    def contains(self, z) -> bool:
        if z == 0 or abs(z) > self.radius:
            return False
        if self.kind in ("upper-intersection", "lower-intersection"):
            plus = petal("+", radius=self.radius)
            minus = petal("-", radius=self.radius)
            sign = 1 if self.kind == "upper-intersection" else -1
            return plus.contains(z) and minus.contains(z) and sign * float(z.imag) > 0
        ang = abs(math.atan2(float((z / self.bisector).imag), float((z / self.bisector).real)))
        return ang < self.opening / 2

    @property
    def side(self) -> str:
        return {"attracting": "+", "repelling": "-", "upper-intersection": "up", "lower-intersection": "low"}[self.kind]


PETAL_OPENING = 3 * math.pi / 2 - 0.2


def petal(which: str, radius: float = 0.4, opening: float = PETAL_OPENING) -> PetalSpec:
    if which in ("+", "plus", "attracting"):
        return PetalSpec("attracting", -1 + 0j, opening, radius)
    if which in ("-", "minus", "repelling"):
        return PetalSpec("repelling", 1 + 0j, opening, radius)
    inter = opening - math.pi
    if which in ("up", "upper"):
        return PetalSpec("upper-intersection", 1j, inter, radius)
    if which in ("low", "lower"):
        return PetalSpec("lower-intersection", -1j, inter, radius)
    raise DomainError(f"unknown petal {which!r}")


# -- fixtures ----------------------------------------------------------------
def _f0_series(ctx, n):
    return [ctx.mpc(0)] + [ctx.mpc(1)] * n


def f0() -> Germ:
    return Germ(
        label="f0",
        series_fn=_f0_series,
        closed=lambda z, ctx: z / (1 - z),
        deriv=lambda z, ctx: 1 / (1 - z) ** 2,
        tag="f0",
        inverse_closed=lambda z, ctx: z / (1 + z),
        inverse_deriv=lambda z, ctx: 1 / (1 + z) ** 2,
    )


def _expm1_series(ctx, n, sign=1):
    e = ps.exp_coeffs(ctx, n)
    out = [ctx.mpc(0)] + [e[k] * (sign ** k) for k in range(1, n + 1)]
    return out


def _neg_log1m_series(ctx, n):
    # -log(1-u) = sum u^k / k
    return [ctx.mpc(0)] + [ctx.mpc(1) / k for k in range(1, n + 1)]


def _log2exp_series(ctx, n):
    return ps.compose(ctx, _neg_log1m_series(ctx, n), _expm1_series(ctx, n), n)


def log2exp() -> Germ:
    """-log(2 - e^z)."""
    return Germ(
        label="log2exp",
        series_fn=_log2exp_series,
        closed=lambda z, ctx: -ctx.log(2 - ctx.exp(z)),
        deriv=lambda z, ctx: ctx.exp(z) / (2 - ctx.exp(z)),
        radius=math.log(2),
        tag="log2exp",
        inverse_closed=lambda w, ctx: ctx.log(2 - ctx.exp(-w)),
        inverse_deriv=lambda w, ctx: ctx.exp(-w) / (2 - ctx.exp(-w)),
    )


def zexpz() -> Germ:
    def series_fn(ctx, n):
        e = ps.exp_coeffs(ctx, n)
        return [ctx.mpc(0)] + [e[k - 1] for k in range(1, n + 1)]

    def inv(w, ctx):
        return ctx.lambertw(w)

    return Germ(
        label="zexpz",
        series_fn=series_fn,
        closed=lambda z, ctx: z * ctx.exp(z),
        deriv=lambda z, ctx: (1 + z) * ctx.exp(z),
        tag="zexpz",
        inverse_closed=inv,
        inverse_deriv=lambda w, ctx: 1 / ((1 + inv(w, ctx)) * ctx.exp(inv(w, ctx))),
    )


@dataclass(frozen=True)
class Phi:
    name: str
    fn: ClosedFn
    dfn: ClosedFn
    inv: ClosedFn
    dinv: ClosedFn
    series_fn: SeriesFn
    radius: float


def _phi_registry():
    def oneminusexp_series(ctx, n):
        return [-c for c in _expm1_series(ctx, n, sign=-1)]

    def tan_series(ctx, n):
        s = ps.zeros(ctx, n)
        c = ps.zeros(ctx, n)
        e = ps.exp_coeffs(ctx, n)
        for k in range(n + 1):
            if k % 2:
                s[k] = e[k] * (-1) ** (k // 2)
            else:
                c[k] = e[k] * (-1) ** (k // 2)
        return ps.mul(ctx, s, ps.reciprocal(ctx, c, n), n)

    def quad_series(ctx, n):
        out = ps.zeros(ctx, n)
        out[1] = ctx.mpc(1)
        if n >= 2:
            out[2] = ctx.mpc(1)
        return out

    return {
        "id": Phi("id", lambda z, c: z, lambda z, c: 1 + 0 * z, lambda w, c: w, lambda w, c: 1 + 0 * w,
                  lambda ctx, n: ps.identity(ctx, n), math.inf),
        "oneminusexp": Phi(
            "oneminusexp",
            lambda z, c: -c.expm1(-z),
            lambda z, c: c.exp(-z),
            lambda w, c: -c.log(1 - w),
            lambda w, c: 1 / (1 - w),
            oneminusexp_series,
            0.6,
        ),
        "tan": Phi("tan", lambda z, c: c.tan(z), lambda z, c: 1 / c.cos(z) ** 2, lambda w, c: c.atan(w),
                   lambda w, c: 1 / (1 + w * w), tan_series, 0.6),
        "quad": Phi(
            "quad",
            lambda z, c: z + z * z,
            lambda z, c: 1 + 2 * z,
            lambda w, c: (c.sqrt(1 + 4 * w) - 1) / 2,
            lambda w, c: 1 / c.sqrt(1 + 4 * w),
            quad_series,
            0.2,
        ),
    }


PHIS = _phi_registry()


def phi_germ(name: str) -> Germ:
    if name not in PHIS:
        raise DomainError(f"unknown phi {name!r}; known: {sorted(PHIS)}")
    p = PHIS[name]
    return Germ(
        label=name,
        series_fn=p.series_fn,
        closed=p.fn,
        deriv=p.dfn,
        radius=p.radius,
        tag=f"phi:{name}",
        inverse_closed=p.inv,
        inverse_deriv=p.dinv,
    )


def exp_family(name: str) -> Germ:
    """phi^{-1}(e^z phi(z))."""
    phi = phi_germ(name)

    def series_fn(ctx, n):
        p = phi.series(ctx, n)
        inner = ps.mul(ctx, ps.exp_coeffs(ctx, n), p, n)
        return ps.compose(ctx, ps.reversion(ctx, p, n), inner, n)

    P = PHIS[name]

    def closed(z, ctx):
        return P.inv(ctx.exp(z) * P.fn(z, ctx), ctx)

    def deriv(z, ctx):
        u = ctx.exp(z) * P.fn(z, ctx)
        return P.dinv(u, ctx) * (u + ctx.exp(z) * P.dfn(z, ctx))

    return Germ(label=f"exp-family:{name}", series_fn=series_fn, closed=closed, deriv=deriv,
                radius=min(P.radius, 0.6), tag=f"exp-family:{name}")


def conj_f0(name: str) -> Germ:
    g = conjugate(f0(), phi_germ(name))
    return Germ(
        label=f"conj-f0:{name}",
        series_fn=g.series_fn,
        closed=g.closed,
        deriv=g.deriv,
        radius=min(PHIS[name].radius, 0.6),
        tag=f"conj-f0:{name}",
        inverse_closed=g.inverse_closed,
        inverse_deriv=g.inverse_deriv,
    )


def get_germ(name: str) -> Germ:
    """Fixture registry lookup."""
    if name == "f0":
        return f0()
    if name == "log2exp":
        return log2exp()
    if name == "zexpz":
        return zexpz()
    if name == "id":
        return identity()
    if name.startswith("exp-family:"):
        return exp_family(name.split(":", 1)[1])
    if name.startswith("conj-f0:"):
        return conj_f0(name.split(":", 1)[1])
    if name.startswith("phi:"):
        return phi_germ(name.split(":", 1)[1])
    raise DomainError(f"unknown germ {name!r}")


FIXTURES = ("f0", "log2exp", "zexpz", "exp-family:oneminusexp", "exp-family:tan", "conj-f0:oneminusexp",
            "conj-f0:tan")
MODEL_CLASS_FIXTURES = ("f0", "log2exp", "exp-family:oneminusexp", "conj-f0:oneminusexp", "conj-f0:tan")


def germ_to_json(g: Germ, ctx=None, order: Optional[int] = None) -> dict:
    ctx = ctx or context()
    coeffs = g.coefficients(ctx, order or min(g.order, 16))
    d = digits_of(ctx)
    return {
        "label": g.label,
        "coefficients": [[_fmt_real(c.real, d), _fmt_real(c.imag, d)] for c in coeffs],
        "closed_form_tag": g.tag,
    }


def _fmt_real(x, digits):
    import mpmath

    if isinstance(x, float):
        return repr(x)
    return mpmath.nstr(x, digits, strip_zeros=False)


def germ_from_json(doc: dict) -> Germ:
    """Rebuild a germ: registry lookup by tag when possible, else a series germ."""
    tag = doc.get("closed_form_tag")
    if tag:
        try:
            return get_germ(tag)
        except DomainError:
            pass
    coeffs = [f"({re})+({im})j" if isinstance(re, str) else complex(re, im) for re, im in doc["coefficients"]]
    return from_coefficients(coeffs, label=doc.get("label", "series"))
