"""Truncated power series over a precision context.

A series is a plain list ``a`` where ``a[k]`` is the coefficient of ``z**k``;
the list length is the truncation order plus one.  All routines take the
context first and return new lists.
"""
from __future__ import annotations

from .errors import DomainError


def zeros(ctx, n):
    return [ctx.mpc(0) for _ in range(n + 1)]


def identity(ctx, n):
    out = zeros(ctx, n)
    if n >= 1:
        out[1] = ctx.mpc(1)
    return out


def coerce(ctx, a, n):
    out = [ctx.mpc(c) for c in a[: n + 1]]
    return out + [ctx.mpc(0)] * (n + 1 - len(out))


def add(ctx, a, b, n):
    a, b = coerce(ctx, a, n), coerce(ctx, b, n)
    return [x + y for x, y in zip(a, b)]


def sub(ctx, a, b, n):
    a, b = coerce(ctx, a, n), coerce(ctx, b, n)
    return [x - y for x, y in zip(a, b)]


def scale(ctx, a, c, n):
    return [c * x for x in coerce(ctx, a, n)]


def mul(ctx, a, b, n):
    a, b = coerce(ctx, a, n), coerce(ctx, b, n)
    la = max((k for k, x in enumerate(a) if x != 0), default=-1)
    lb = max((k for k, x in enumerate(b) if x != 0), default=-1)
    out = zeros(ctx, n)
    for i in range(la + 1):
        ai = a[i]
        if ai == 0:
            continue
        for j in range(min(lb, n - i) + 1):
            out[i + j] += ai * b[j]
    return out


def reciprocal(ctx, a, n):
    a = coerce(ctx, a, n)
    if a[0] == 0:
        raise DomainError("series reciprocal needs a nonzero constant term")
    out = zeros(ctx, n)
    inv0 = 1 / a[0]
    out[0] = inv0
    for k in range(1, n + 1):
        s = ctx.mpc(0)
        for j in range(1, k + 1):
            s += a[j] * out[k - j]
        out[k] = -s * inv0
    return out


def divide(ctx, a, b, n):
    """Quotient a/b; leading zeros of b are cancelled against those of a."""
    a, b = coerce(ctx, a, n), coerce(ctx, b, n)
    v = valuation(b)
    if v is None:
        raise DomainError("division by the zero series")
    if any(a[k] != 0 for k in range(min(v, n + 1))):
        raise DomainError("quotient has a pole")
    a_s = a[v:] + [ctx.mpc(0)] * v
    b_s = b[v:] + [ctx.mpc(0)] * v
    return mul(ctx, a_s, reciprocal(ctx, b_s, n), n)


def valuation(a):
    for k, x in enumerate(a):
        if x != 0:
            return k
    return None


def derivative(ctx, a):
    return [k * a[k] for k in range(1, len(a))] + [ctx.mpc(0)]


def compose(ctx, a, b, n):
    """a(b(z)) truncated at order n; requires b(0) = 0."""
    a, b = coerce(ctx, a, n), coerce(ctx, b, n)
    if b[0] != 0:
        raise DomainError("inner series must vanish at 0")
    out = zeros(ctx, n)
    out[0] = a[n]
    for k in range(n - 1, -1, -1):
        out = mul(ctx, out, b, n)
        out[0] += a[k]
    return out


def power(ctx, a, m, n):
    out = identity(ctx, n)
    out[0], out[1] = ctx.mpc(1), ctx.mpc(0)
    base = coerce(ctx, a, n)
    while m:
        if m & 1:
            out = mul(ctx, out, base, n)
        m >>= 1
        if m:
            base = mul(ctx, base, base, n)
    return out


def reversion(ctx, a, n):
    """Compositional inverse of a series with a(0) = 0, a'(0) != 0 (Lagrange inversion)."""
    a = coerce(ctx, a, n)
    if a[0] != 0 or a[1] == 0:
        raise DomainError("reversion needs a(0) = 0 and a'(0) != 0")
    # p = z / a(z)
    shifted = a[1:] + [ctx.mpc(0)]
    p = reciprocal(ctx, shifted, n)
    out = zeros(ctx, n)
    pk = [ctx.mpc(1)] + [ctx.mpc(0)] * n
    for k in range(1, n + 1):
        pk = mul(ctx, pk, p, n)
        out[k] = pk[k - 1] / k
    return out


def exp(ctx, a, n):
    a = coerce(ctx, a, n)
    c0 = ctx.exp(a[0])
    out = zeros(ctx, n)
    out[0] = ctx.mpc(1)
    for k in range(1, n + 1):
        s = ctx.mpc(0)
        for j in range(1, k + 1):
            s += j * a[j] * out[k - j]
        out[k] = s / k
    return [c0 * x for x in out]


def log(ctx, a, n):
    """Principal log of a series with nonzero constant term."""
    a = coerce(ctx, a, n)
    if a[0] == 0:
        raise DomainError("log of a series vanishing at 0")
    q = mul(ctx, derivative(ctx, a), reciprocal(ctx, a, n), n)
    out = zeros(ctx, n)
    out[0] = ctx.log(a[0])
    for k in range(1, n + 1):
        out[k] = q[k - 1] / k
    return out


def pow_real(ctx, a, alpha, n):
    """a**alpha for a(0) = 1 (principal branch near 1)."""
    a = coerce(ctx, a, n)
    if a[0] != 1:
        raise DomainError("fractional power needs constant term 1")
    out = zeros(ctx, n)
    out[0] = ctx.mpc(1)
    # (k) a0 y_k = sum_{j=1}^{k} (alpha*j - (k-j)) a_j y_{k-j}
    for k in range(1, n + 1):
        s = ctx.mpc(0)
        for j in range(1, k + 1):
            s += (alpha * j - (k - j)) * a[j] * out[k - j]
        out[k] = s / k
    return out


def evaluate(a, z):
    acc = a[-1]
    for c in reversed(a[:-1]):
        acc = acc * z + c
    return acc


def exp_coeffs(ctx, n):
    out, f = [], ctx.mpf(1)
    for k in range(n + 1):
        out.append(ctx.mpc(1 / f))
        f *= k + 1
    return out
