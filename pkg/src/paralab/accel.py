"""Richardson extrapolation on geometric ladders."""
from __future__ import annotations

from .errors import ConvergenceError


def richardson(values, ratio, powers):
    """Extrapolate ``values[i] = L + sum_p c_p (M_0 ratio^i)^(-p)`` to M -> infinity.

    ``values`` are ordered from the coarsest to the finest ladder point and
    ``powers`` lists the exponents eliminated in turn.  Returns the final
    estimate and the difference to the previous best one as error proxy.
    """
    row = list(values)
    if len(row) < 2:
        raise ConvergenceError("Richardson needs at least two ladder points")
    best_prev, best = row[-2], row[-1]
    for p in powers:
        if len(row) < 2:
            break
        f = ratio ** p
        row = [(f * row[i + 1] - row[i]) / (f - 1) for i in range(len(row) - 1)]
        best_prev, best = best, row[-1]
    return best, abs(best - best_prev)


def ladder(n_max: int, levels: int, ratio: int = 2):
    """Geometric index ladder ending at ``n_max``, coarsest first."""
    m0 = n_max // ratio ** levels
    if m0 < 1:
        raise ConvergenceError("ladder too deep for the available sequence length")
    return [m0 * ratio ** i for i in range(levels + 1)]
