"""Small shared numerical routines: self-refining trapezoid quadrature and a
stable log-sum-exp."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


class NumericError(RuntimeError):
    """A numerical routine failed (non-convergence, non-finite statistic)."""


def adaptive_trapezoid(
    fn: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    *,
    tol: float = 1e-10,
    start_points: int = 1025,
    max_refinements: int = 16,
) -> float:
    """Integrate ``fn`` over [lo, hi] by composite trapezoid with grid doubling.

    The grid is refined (points roughly doubled) until two successive
    estimates differ by less than ``tol``.  Raises NumericError with the last
    residual if the budget of refinements is exhausted.  ``fn`` must accept a
    full grid as an ndarray.
    """
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValueError(f"integration window must be finite with lo < hi, got ({lo}, {hi})")
    pts = int(start_points)
    prev: float | None = None
    residual = np.inf
    for _ in range(max_refinements):
        xs = np.linspace(lo, hi, pts)
        val = float(_trapezoid(fn(xs), xs))
        if prev is not None:
            residual = abs(val - prev)
            if residual < tol:
                return val
        prev = val
        pts = 2 * pts - 1
    raise NumericError(
        f"trapezoid refinement did not converge on [{lo}, {hi}]: residual {residual:.3e} > tol {tol:.1e}"
    )


def logsumexp(values: np.ndarray, scratch: np.ndarray | None = None) -> float:
    """log(sum(exp(values))) with the running-max shift; values must be nonempty.

    ``scratch`` may supply a reusable buffer of at least values.size to avoid
    temporaries on hot paths.
    """
    m = float(values.max())
    if not math.isfinite(m):
        # all -inf collapses to -inf; a +inf/nan max propagates
        return m
    if scratch is None:
        return m + math.log(float(np.exp(values - m).sum()))
    out = scratch[: values.size]
    np.subtract(values, m, out=out)
    np.exp(out, out=out)
    return m + math.log(float(out.sum()))
