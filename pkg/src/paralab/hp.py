"""Working-precision contexts.

Every numerical routine takes a context object instead of touching a global
precision setting.  Up to 16 digits the mpmath ``fp`` context is used (plain
Python floats and complex numbers); above that a private ``MPContext`` with
the requested number of decimal digits is created and cached.  Values created
in a context carry its precision, so contexts never interfere.
"""
from __future__ import annotations

import os
from functools import lru_cache

import mpmath

from .errors import BranchError, DomainError

ENV_PRECISION = "PARALAB_PRECISION"
DOUBLE_DIGITS = 16


def default_digits() -> int:
    raw = os.environ.get(ENV_PRECISION)
    if not raw:
        return DOUBLE_DIGITS
    try:
        digits = int(raw)
    except ValueError as exc:
        raise DomainError(f"{ENV_PRECISION} must be an integer, got {raw!r}") from exc
    if digits < 8:
        raise DomainError(f"{ENV_PRECISION} must be at least 8")
    return digits


@lru_cache(maxsize=None)
def _context(digits: int):
    if digits <= DOUBLE_DIGITS:
        return mpmath.fp
    ctx = mpmath.MPContext()
    ctx.dps = digits
    return ctx


def context(digits: int | None = None):
    """Return the (shared, never mutated) context for ``digits`` decimal digits."""
    if digits is None:
        digits = default_digits()
    return _context(int(digits))


def digits_of(ctx) -> int:
    return DOUBLE_DIGITS if ctx is mpmath.fp else int(ctx.dps)


def unit_roundoff(ctx):
    return ctx.mpf(2) ** (-(53 if ctx is mpmath.fp else ctx.prec))


def is_fp(ctx) -> bool:
    return ctx is mpmath.fp


def cnum(ctx, x):
    """Convert ``x`` (number, string, or value of another context) to a complex of ``ctx``."""
    if isinstance(x, str):
        x = x.strip().replace(" ", "")
        if is_fp(ctx):
            return complex(x.replace("i", "j"))
        return ctx.mpc(ctx.mpmathify(x.replace("i", "j")))
    if is_fp(ctx):
        return complex(x)
    if hasattr(x, "imag"):
        return ctx.mpc(ctx.mpf(x.real), ctx.mpf(x.imag))
    return ctx.mpc(x)


def rnum(ctx, x):
    if isinstance(x, str):
        return float(x) if is_fp(ctx) else ctx.mpf(x)
    return float(x) if is_fp(ctx) else ctx.mpf(x)


def log_branch(ctx, z, branch: str):
    """Logarithm with ``branch`` '+' (arg in (0, 2pi)) or '-' (arg in (-pi, pi])."""
    if z == 0:
        raise BranchError("logarithm of zero")
    val = ctx.log(z)
    if branch == "-":
        return val
    if branch != "+":
        raise ValueError(f"unknown branch {branch!r}")
    if val.imag == 0 and z.real > 0:
        raise BranchError("point lies on the cut of log+ (positive real axis)")
    if val.imag < 0:
        val += 2j * ctx.pi
    return val


def to_complex(x) -> complex:
    return complex(float(x.real), float(x.imag)) if hasattr(x, "imag") else complex(float(x))


def fmt(ctx, x, digits: int | None = None) -> str:
    """Full-precision decimal string of a real number."""
    d = digits or digits_of(ctx)
    if is_fp(ctx):
        return repr(float(x))
    return mpmath.nstr(x, d, strip_zeros=False, min_fixed=-3, max_fixed=3)
