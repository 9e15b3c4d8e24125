"""Density families for change detection with stochastically growing signals.

Before the change the data are i.i.d. with density g.  After the change the
observation at post-change age n follows f_n, where the family {f_n} is
nondecreasing in monotone-likelihood-ratio (MLR) order, i.e. f_{n+1}/f_n is
nondecreasing, so samples become stochastically larger as the change ages.

The one fully built-in family is the unit-variance Gaussian location family

    g = N(0, 1),    f_n = N(mu_n, 1),    0 <= mu_n nondecreasing -> mu,

driven by a MeanSchedule.  It has closed forms for everything (per-sample
log-likelihood ratio mu_n * (x - mu_n / 2), KL divergence mu_n**2 / 2,
centered fourth moment 3 * mu_n**4), which makes it the reference model for
the condition checkers and the Monte Carlo studies.  All detector and
simulation code is written against the generic DensityModel interface, so
custom families (including deliberately broken ones used as counterexamples
in tests) plug in the same way.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .numerics import NumericError, adaptive_trapezoid

LOG_2PI = math.log(2.0 * math.pi)

SCHEDULE_KINDS = (
    "constant",
    "arctangent",
    "linear-saturating",
    "geometric-approach",
    "explicit-table",
)

#: half-width of the finite integration window, in pre-change standard
#: deviations, used to truncate Gaussian-like tails for quadrature
TAIL_HALFWIDTH = 10.0

MLR_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MeanSchedule:
    """The nondecreasing mean sequence mu_n defining a Gaussian growing family.

    Built-in kinds:

    - ``constant``:           mu_n = mu
    - ``arctangent``:         mu_n = arctan(n), limit pi/2
    - ``linear-saturating``:  mu_n = min(slope * n, mu)
    - ``geometric-approach``: mu_n = mu * (1 - ratio**n), 0 < ratio < 1
    - ``explicit-table``:     finite list, extended forever by its last value

    The built-in parametric kinds are nondecreasing with 0 <= mu_n <= limit_mu
    by construction.  Explicit tables are *not* forced to be nondecreasing:
    decreasing tables are the standard counterexample input for the MLR and
    dominance checkers, which is why construction accepts them.
    """

    kind: str
    limit_mu: float
    params: tuple[float, ...] = ()
    table: tuple[float, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}, expected one of {SCHEDULE_KINDS}")
        if not (math.isfinite(self.limit_mu) and self.limit_mu >= 0.0):
            raise ValueError(f"limit_mu must be finite and >= 0, got {self.limit_mu}")
        if self.kind == "explicit-table":
            if not self.table:
                raise ValueError("explicit-table schedule needs a non-empty table")
            vals = self.table
            if any(not math.isfinite(v) or v < 0.0 for v in vals):
                raise ValueError("table values must be finite and >= 0")
            if vals[-1] != self.limit_mu:
                raise ValueError("limit_mu of a table schedule is its last entry")
        elif self.table is not None:
            raise ValueError(f"{self.kind} schedule does not take a table")
        if self.kind == "linear-saturating":
            if len(self.params) != 1 or self.params[0] <= 0.0:
                raise ValueError("linear-saturating needs params=(slope,) with slope > 0")
        elif self.kind == "geometric-approach":
            if len(self.params) != 1 or not (0.0 < self.params[0] < 1.0):
                raise ValueError("geometric-approach needs params=(ratio,) with 0 < ratio < 1")
        elif self.params:
            raise ValueError(f"{self.kind} schedule takes no params")

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, mu: float) -> "MeanSchedule":
        return cls(kind="constant", limit_mu=float(mu))

    @classmethod
    def arctangent(cls) -> "MeanSchedule":
        return cls(kind="arctangent", limit_mu=math.pi / 2.0)

    @classmethod
    def linear_saturating(cls, slope: float, mu: float) -> "MeanSchedule":
        return cls(kind="linear-saturating", limit_mu=float(mu), params=(float(slope),))

    @classmethod
    def geometric_approach(cls, mu: float, ratio: float) -> "MeanSchedule":
        return cls(kind="geometric-approach", limit_mu=float(mu), params=(float(ratio),))

    @classmethod
    def from_table(cls, values) -> "MeanSchedule":
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ValueError("explicit-table schedule needs a non-empty table")
        return cls(kind="explicit-table", limit_mu=vals[-1], table=vals)

    # -- evaluation --------------------------------------------------------

    def _grown(self, upto: int) -> np.ndarray:
        arr = self._cache.get("mu")
        if arr is None or arr.size < upto:
            size = max(int(upto), 64, 2 * (arr.size if arr is not None else 0))
            n = np.arange(size, dtype=np.float64)
            if self.kind == "constant":
                vals = np.full(size, self.limit_mu)
            elif self.kind == "arctangent":
                vals = np.arctan(n)
            elif self.kind == "linear-saturating":
                vals = np.minimum(self.params[0] * n, self.limit_mu)
            elif self.kind == "geometric-approach":
                vals = self.limit_mu * (1.0 - self.params[0] ** n)
            else:  # explicit-table
                vals = np.full(size, self.table[-1])
                head = min(len(self.table), size)
                vals[:head] = self.table[:head]
            vals.setflags(write=False)
            # benign under concurrent growth: replacement arrays hold identical
            # values and old views stay valid
            self._cache["mu"] = vals
        return self._cache["mu"]

    def means(self, upto: int) -> np.ndarray:
        """Read-only view of (mu_0, ..., mu_{upto-1})."""
        if upto < 0:
            raise ValueError("upto must be >= 0")
        return self._grown(upto)[:upto]

    def mu(self, n: int) -> float:
        if n < 0:
            raise ValueError("schedule index must be >= 0")
        return float(self._grown(n + 1)[n])


@dataclass(frozen=True, kw_only=True)
class DensityModel:
    """A pre-change density plus an indexed post-change family.

    Log densities are numpy-vectorized in x (and in the index for the
    post-change family).  Samplers take a numpy Generator plus an optional
    ``size``; the post-change sampler also accepts an index array, drawing one
    sample per index.  ``finite_window(n)`` must return an interval holding
    essentially all mass of g and f_n, used to truncate quadrature when the
    support is infinite.  Instances are immutable and safe to share across
    concurrent workers; rng state is always owned by the caller.
    """

    pre_change_log_density: Callable
    post_change_log_density: Callable
    sampler_pre: Callable
    sampler_post: Callable
    support: tuple[float, float]
    kl_closed_form: Callable | None = None
    finite_window: Callable | None = None

    def quadrature_window(self, n: int | None = None) -> tuple[float, float]:
        """Finite interval used for numerical integration involving f_n and g."""
        lo, hi = self.support
        if self.finite_window is not None:
            wlo, whi = self.finite_window(n)
            lo, hi = max(lo, wlo), min(hi, whi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(
                "model has unbounded support and no finite_window; quadrature needs a finite interval"
            )
        return lo, hi


@dataclass(frozen=True, kw_only=True)
class GaussianModel(DensityModel):
    """Unit-variance Gaussian location family g = N(0,1), f_n = N(mu_n, 1)."""

    schedule: MeanSchedule
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def _half_mu_sq(self, upto: int) -> np.ndarray:
        arr = self._cache.get("halfsq")
        if arr is None or arr.size < upto:
            mu = self.schedule.means(max(upto, 64))
            vals = mu * mu / 2.0
            vals.setflags(write=False)
            self._cache["halfsq"] = vals
            arr = vals
        return arr[:upto]

    # fast per-sample log-likelihood-ratio paths; algebraically identical to
    # post_change_log_density - pre_change_log_density
    def _llr_indexed(self, index, x):
        idx = np.asarray(index)
        mu = self.schedule.means(int(idx.max()) + 1 if idx.size else 1)
        m = mu[idx]
        return m * x - m * m / 2.0

    def _llr_prefix(self, n: int, x: float, out: np.ndarray) -> np.ndarray:
        mu = self.schedule.means(n)
        np.multiply(mu, x, out=out[:n])
        out[:n] -= self._half_mu_sq(n)
        return out[:n]


def gaussian_model(schedule: MeanSchedule) -> GaussianModel:
    """Build the unit-variance Gaussian location model for a mean schedule."""

    def pre_logpdf(x):
        xs = np.asarray(x, dtype=np.float64)
        return -0.5 * xs * xs - 0.5 * LOG_2PI

    def post_logpdf(n, x):
        idx = np.asarray(n)
        mu = schedule.means(int(idx.max()) + 1 if idx.size else 1)[idx]
        d = np.asarray(x, dtype=np.float64) - mu
        return -0.5 * d * d - 0.5 * LOG_2PI

    def draw_pre(rng, size=None):
        return rng.normal(0.0, 1.0, size)

    def draw_post(n, rng, size=None):
        idx = np.asarray(n)
        mu = schedule.means(int(idx.max()) + 1 if idx.size else 1)[idx]
        return rng.normal(mu, 1.0, size)

    def window(n=None):
        hi_mean = 0.0 if n is None or n < 0 else schedule.mu(n)
        return (-TAIL_HALFWIDTH, hi_mean + TAIL_HALFWIDTH)

    if schedule.limit_mu == 0.0 and float(schedule.means(256).max(initial=0.0)) == 0.0:
        warnings.warn(
            "schedule is identically zero: pre- and post-change laws coincide, "
            "so the information number is 0 and detection is impossible",
            UserWarning,
            stacklevel=2,
        )

    return GaussianModel(
        pre_change_log_density=pre_logpdf,
        post_change_log_density=post_logpdf,
        sampler_pre=draw_pre,
        sampler_post=draw_post,
        support=(-math.inf, math.inf),
        kl_closed_form=lambda n: schedule.mu(n) ** 2 / 2.0,
        finite_window=window,
        schedule=schedule,
    )


# ---------------------------------------------------------------------------
# operations


def _validate_x(model: DensityModel, x):
    # scalar fast path: this sits inside every detector step
    if type(x) is float:
        lo, hi = model.support
        if not (lo <= x <= hi):  # also catches NaN
            raise ValueError(f"observation {x!r} outside support [{lo}, {hi}]")
        if not math.isfinite(x):
            raise ValueError("observation must be finite")
        return x
    xs = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(xs)):
        raise ValueError("observation must be finite")
    lo, hi = model.support
    if np.any(xs < lo) or np.any(xs > hi):
        raise ValueError(f"observation outside support [{lo}, {hi}]")
    return xs


def llr(model: DensityModel, post_index, x):
    """Per-sample log-likelihood ratio log f_{post_index}(x) - log g(x).

    Broadcasts over ``post_index`` and ``x``; returns a float for scalar
    inputs.  Raises ValueError for non-finite x or x outside the support.
    """
    xs = _validate_x(model, x)
    idx = np.asarray(post_index)
    if idx.dtype.kind not in "iu" or np.any(idx < 0):
        raise ValueError("post_index must be a nonnegative integer (or array thereof)")
    fast = getattr(model, "_llr_indexed", None)
    if fast is not None:
        val = fast(idx, xs)
    else:
        val = model.post_change_log_density(idx, xs) - model.pre_change_log_density(xs)
    if np.ndim(val) == 0:
        return float(val)
    return val


def llr_prefix(model: DensityModel, n: int, x: float, out: np.ndarray) -> np.ndarray:
    """Write llr(model, j, x) for j = 0..n-1 into out[:n] and return that view.

    Hot path for the detectors: x must already be validated.
    """
    fast = getattr(model, "_llr_prefix", None)
    if fast is not None:
        return fast(n, x, out)
    idx = np.arange(n)
    out[:n] = model.post_change_log_density(idx, x) - model.pre_change_log_density(x)
    return out[:n]


def kl_divergence(model: DensityModel, n: int, method: str = "closed") -> float:
    """KL divergence D(f_n || g), by closed form or trapezoid quadrature."""
    if n < 0:
        raise ValueError("index must be >= 0")
    if method == "closed":
        if model.kl_closed_form is None:
            raise ValueError("closed-form KL requested but the model does not provide one")
        return float(model.kl_closed_form(n))
    if method != "quadrature":
        raise ValueError(f"unknown KL method {method!r}, expected 'closed' or 'quadrature'")
    lo, hi = model.quadrature_window(n)

    def integrand(xs):
        logf = model.post_change_log_density(n, xs)
        logg = model.pre_change_log_density(xs)
        f = np.exp(logf)
        return np.where(f > 0.0, f * (logf - logg), 0.0)

    val = adaptive_trapezoid(integrand, lo, hi, tol=1e-10)
    return max(val, 0.0)


class MlrCheck(NamedTuple):
    ok: bool
    worst_violation: float


def _pair_log_densities(model: DensityModel, n: int):
    """Log densities of the ordered pair checked at n; n = -1 compares g vs f_0."""
    if n == -1:
        return model.pre_change_log_density, lambda xs: model.post_change_log_density(0, xs)
    if n < -1:
        raise ValueError("n must be >= 0, or the sentinel -1 for g vs f_0")
    return (
        lambda xs: model.post_change_log_density(n, xs),
        lambda xs: model.post_change_log_density(n + 1, xs),
    )


def _validate_grid(model: DensityModel, grid) -> np.ndarray:
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or g.size < 2:
        raise ValueError("grid must be a 1-d array with at least 2 points")
    if not np.all(np.isfinite(g)) or np.any(np.diff(g) <= 0.0):
        raise ValueError("grid must be finite and strictly increasing")
    lo, hi = model.support
    if g[0] < lo or g[-1] > hi:
        raise ValueError("grid extends outside the support")
    return g


def verify_mlr(model: DensityModel, n: int, grid, tol: float = MLR_TOLERANCE) -> MlrCheck:
    """Check that f_{n+1}/f_n is nondecreasing along a grid (n = -1: f_0/g).

    Works in the log domain; a grid point where the denominator density
    vanishes makes the log ratio non-finite and is reported as a violation.
    This is a necessary-condition check: monotonicity off the grid is not
    examined.
    """
    g = _validate_grid(model, grid)
    lower, upper = _pair_log_densities(model, n)
    with np.errstate(invalid="ignore"):  # -inf minus -inf where a density vanishes
        ratio = np.asarray(upper(g), dtype=np.float64) - np.asarray(lower(g), dtype=np.float64)
    if not np.all(np.isfinite(ratio)):
        return MlrCheck(False, math.inf)
    drops = -np.diff(ratio)
    worst = float(max(0.0, drops.max(initial=0.0)))
    return MlrCheck(worst <= tol, worst)


def _right_tails(log_density, grid: np.ndarray, hi: float, points: int) -> np.ndarray:
    """Upper-tail masses at the grid points, by trapezoid on a shared fine grid."""
    fine = np.union1d(grid, np.linspace(grid[0], hi, points))
    dens = np.exp(np.asarray(log_density(fine), dtype=np.float64))
    seg = 0.5 * (dens[1:] + dens[:-1]) * np.diff(fine)
    tails = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    return tails[np.searchsorted(fine, grid)]


def verify_stochastic_dominance(
    model: DensityModel, n: int, grid, *, points: int = 4001, slack: float = 1e-9
) -> bool:
    """Check P(f_n > x) <= P(f_{n+1} > x) at every grid point (n = -1: g vs f_0).

    Tail masses are computed by quadrature on a shared fine grid, so when the
    MLR check passes this check passes as well up to the stated slack.
    """
    g = _validate_grid(model, grid)
    lower, upper = _pair_log_densities(model, n)
    _, hi = model.quadrature_window(max(n + 1, 0))
    hi = max(hi, float(g[-1]))
    tails_lower = _right_tails(lower, g, hi, points)
    tails_upper = _right_tails(upper, g, hi, points)
    return bool(np.all(tails_lower <= tails_upper + slack))


def sample_pre(model: DensityModel, rng: np.random.Generator, size=None):
    """Draw from the pre-change density g; deterministic given the rng state."""
    return model.sampler_pre(rng, size)


def sample_post(model: DensityModel, n, rng: np.random.Generator, size=None):
    """Draw from f_n; n may be an index array (one draw per index)."""
    idx = np.asarray(n)
    if idx.dtype.kind not in "iu" or np.any(idx < 0):
        raise ValueError("post-change index must be a nonnegative integer (or array thereof)")
    return model.sampler_post(n, rng, size)


def default_grid(model: DensityModel, n: int | None = None, points: int = 2001) -> np.ndarray:
    """Equispaced evaluation grid covering ~8 standard-deviation-equivalents.

    Derived by shrinking the model's quadrature window (10 sigma-equivalents)
    by a factor 0.8 about its center.
    """
    lo, hi = model.quadrature_window(n)
    center, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return np.linspace(center - 0.8 * half, center + 0.8 * half, points)


def check_normalization(model: DensityModel, n: int | None = None, *, tol: float = 1e-8) -> float:
    """Integral of the density over its (truncated) support; should be ~1.

    n = None integrates the pre-change density, otherwise f_n.
    """
    lo, hi = model.quadrature_window(n)
    if n is None:
        fn = lambda xs: np.exp(model.pre_change_log_density(xs))
    else:
        fn = lambda xs: np.exp(model.post_change_log_density(n, xs))
    return adaptive_trapezoid(fn, lo, hi, tol=tol)
