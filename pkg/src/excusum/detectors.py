"""Sequential detectors: the growing-family CUSUM statistic, its
Shiryaev-Roberts companion, and the classic CUSUM baseline.

The main statistic at time n is

    W_n = max_{1 <= k <= n}  sum_{i=k}^{n}  log f_{i-k}(X_i) / g(X_i),

the best accumulated log-likelihood ratio over all change-point hypotheses k,
where the post-change density index is the age i - k of the hypothesized
change.  Because the per-sample ratio depends on that age, no constant-memory
recursion exists; states keep one running sum per retained candidate and cost
O(candidates) per observation.  An optional window caps the candidate count
at the price of an uncharacterized approximation.

The Shiryaev-Roberts variant replaces the max by a sum of likelihood-ratio
products; R_n - n is a martingale under the pre-change law, which is what
makes threshold exp(A) give a mean time to false alarm of at least exp(A).
All accumulation is in the log domain, with log-sum-exp for R_n.

States are single-owner: mutate them only from their owning run.  Distinct
runs can execute concurrently without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .models import DensityModel, llr, llr_prefix, _validate_x
from .numerics import NumericError, logsumexp

DETECTOR_KINDS = ("ex-cusum", "sr", "cusum")

_MIN_CAPACITY = 64


class _CandidateBuffer:
    """Right-aligned growable buffer of per-candidate running sums.

    After n observations the candidates occupy buf[cap - n:], newest first:
    position cap - n + j holds candidate k = n - j, whose increment at the
    next observation is the log-likelihood ratio at age index j.  That makes
    every per-step update a contiguous-slice operation.
    """

    def __init__(self) -> None:
        self.n = 0
        self._buf = np.zeros(_MIN_CAPACITY)
        self._tmp = np.zeros(_MIN_CAPACITY)

    def _grow(self, need: int) -> None:
        cap = self._buf.size
        if need <= cap:
            return
        new_cap = max(2 * cap, need)
        buf = np.zeros(new_cap)
        used = self.n - 1  # candidates present before the current step
        if used > 0:
            buf[new_cap - used :] = self._buf[cap - used :]
        self._buf = buf
        self._tmp = np.zeros(new_cap)

    def push(self, x: float, model: DensityModel, active: int) -> np.ndarray:
        """Register observation x, update the newest `active` candidates, and
        return the view of their sums (newest first)."""
        self.n += 1
        self._grow(self.n)
        pos = self._buf.size - self.n
        inc = llr_prefix(model, active, x, self._tmp)
        self._buf[pos] = 0.0
        self._buf[pos : pos + active] += inc
        return self._buf[pos : pos + active]

    def active_view(self, active: int) -> np.ndarray:
        pos = self._buf.size - self.n
        return self._buf[pos : pos + active]

    def scratch(self, size: int) -> np.ndarray:
        # _tmp's contents are dead once push() has folded them into the sums
        return self._tmp[:size]


class ExCusumState:
    """Incremental state of the growing-family CUSUM statistic.

    ``candidate_sums`` lists the retained candidates' running sums in
    candidate order (oldest hypothesis first); without a window there are n
    of them, with window M only the newest min(n, M).
    """

    def __init__(self, window: int | None = None) -> None:
        if window is not None and (not isinstance(window, int) or window < 1):
            raise ValueError(f"window must be a positive integer or None, got {window!r}")
        self.window = window
        self.statistic = -math.inf
        self._cands = _CandidateBuffer()

    @property
    def n(self) -> int:
        return self._cands.n

    @property
    def active_count(self) -> int:
        return self.n if self.window is None else min(self.n, self.window)

    @property
    def candidate_sums(self) -> np.ndarray:
        return self._cands.active_view(self.active_count)[::-1].copy()

    @property
    def argmax_candidate(self) -> int:
        """The change-point hypothesis k achieving the current statistic."""
        view = self._cands.active_view(self.active_count)
        return self.n - int(np.argmax(view))


def ex_cusum_step(state: ExCusumState, x: float, model: DensityModel) -> ExCusumState:
    """Advance the statistic by one observation (mutates and returns state).

    Every retained candidate k gains the log-likelihood ratio at age index
    n - k, a fresh candidate k = n enters at age index 0, candidates older
    than the window are dropped, and the statistic is the max over what
    remains.
    """
    _validate_x(model, x)
    n_next = state._cands.n + 1
    active = n_next if state.window is None else min(n_next, state.window)
    view = state._cands.push(x, model, active)
    state.statistic = float(view.max())
    return state


class SrState:
    """Incremental state of the Shiryaev-Roberts statistic (log domain).

    ``log_candidate_products`` holds, for each candidate k = 1..n, the log of
    the product of per-sample likelihood ratios since k; ``log_statistic`` is
    log R_n via log-sum-exp over them.
    """

    def __init__(self) -> None:
        self.log_statistic = -math.inf
        self._cands = _CandidateBuffer()

    @property
    def n(self) -> int:
        return self._cands.n

    @property
    def log_candidate_products(self) -> np.ndarray:
        return self._cands.active_view(self.n)[::-1].copy()


def sr_step(state: SrState, x: float, model: DensityModel) -> SrState:
    """Advance R_n by one observation (mutates and returns state)."""
    _validate_x(model, x)
    view = state._cands.push(x, model, state._cands.n + 1)
    state.log_statistic = logsumexp(view, scratch=state._cands.scratch(view.size))
    return state


class CusumState:
    """Classic CUSUM against the fixed first post-change density f_0.

    The reflected recursion max(statistic, 0) + llr(0, x) equals the
    max-over-candidates form with age-independent per-sample ratios, so with
    a constant schedule it reproduces the growing-family statistic exactly.
    """

    def __init__(self) -> None:
        self.n = 0
        self.statistic = 0.0


def cusum_step(state: CusumState, x: float, model: DensityModel) -> CusumState:
    state.n += 1
    z = llr(model, 0, x)
    state.statistic = max(state.statistic, 0.0) + z
    return state


def ex_cusum_brute(samples, model: DensityModel, n: int) -> float:
    """Literal O(n^2) recomputation of W_n by the double loop over k and i.

    The correctness oracle for the incremental state: scalar arithmetic, no
    shared code with the per-step update.
    """
    if n < 1 or n > len(samples):
        raise ValueError(f"n must be in 1..{len(samples)}, got {n}")
    best = -math.inf
    for k in range(1, n + 1):
        s = 0.0
        for i in range(k, n + 1):
            s += llr(model, i - k, float(samples[i - 1]))
        best = max(best, s)
    return best


def ex_cusum_brute_all(samples, model: DensityModel) -> np.ndarray:
    """W_n for every n <= len(samples), one cumulative-sum row per candidate.

    Same double loop over (k, i) as ex_cusum_brute with the inner loop
    vectorized; structurally independent of the incremental update.
    """
    xs = np.asarray(samples, dtype=np.float64)
    n_max = xs.size
    stats = np.full(n_max, -math.inf)
    for k in range(1, n_max + 1):
        ages = np.arange(n_max - k + 1)
        terms = llr(model, ages, xs[k - 1 :])
        np.maximum(stats[k - 1 :], np.cumsum(terms), out=stats[k - 1 :])
    return stats


@dataclass(frozen=True)
class StopResult:
    """Outcome of running a detector to its first alarm or to the horizon."""

    stopped: bool
    tau: int | None
    censored_at: int | None

    def __post_init__(self) -> None:
        if self.stopped and (self.tau is None or self.censored_at is not None):
            raise ValueError("stopped result must carry tau and no censoring point")
        if not self.stopped and (self.tau is not None or self.censored_at is None):
            raise ValueError("censored result must carry censored_at and no tau")


def _iter_samples(path_or_stream) -> Iterator[float]:
    samples = getattr(path_or_stream, "samples", path_or_stream)
    return iter(samples)


def _make_state(kind: str, window: int | None):
    if kind == "ex-cusum":
        return ExCusumState(window=window)
    if window is not None:
        raise ValueError(f"window only applies to the ex-cusum detector, not {kind!r}")
    if kind == "sr":
        return SrState()
    if kind == "cusum":
        return CusumState()
    raise ValueError(f"unknown detector kind {kind!r}, expected one of {DETECTOR_KINDS}")


def run_detector(
    kind: str,
    model: DensityModel,
    path_or_stream,
    threshold: float,
    horizon: int,
    *,
    window: int | None = None,
) -> StopResult:
    """Run a detector until its first alarm, censoring at the horizon.

    The threshold is on the log scale for every kind (the Shiryaev-Roberts
    rule stops when R_n > exp(threshold)).  Crossings are strict for
    "ex-cusum" and "sr"; the "cusum" baseline stops at >=.  A non-finite
    statistic aborts the run with a NumericError.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if math.isnan(threshold):
        raise ValueError("threshold must not be NaN")
    state = _make_state(kind, window)
    it = _iter_samples(path_or_stream)
    for t in range(1, horizon + 1):
        try:
            x = float(next(it))
        except StopIteration:
            raise ValueError(f"observation stream exhausted at step {t} before horizon {horizon}")
        if kind == "ex-cusum":
            stat = ex_cusum_step(state, x, model).statistic
            crossed = stat > threshold
        elif kind == "sr":
            stat = sr_step(state, x, model).log_statistic
            crossed = stat > threshold
        else:
            stat = cusum_step(state, x, model).statistic
            crossed = stat >= threshold
        if math.isnan(stat) or stat == math.inf:
            raise NumericError(f"{kind} statistic non-finite at step {t}: {stat} (x={x})")
        if crossed:
            return StopResult(stopped=True, tau=t, censored_at=None)
    return StopResult(stopped=False, tau=None, censored_at=horizon)


def statistic_trace(
    kind: str, model: DensityModel, samples, *, window: int | None = None
) -> np.ndarray:
    """Statistic value after each observation of a full sample sequence."""
    state = _make_state(kind, window)
    xs = getattr(samples, "samples", samples)
    out = np.empty(len(xs))
    for i, x in enumerate(xs):
        if kind == "ex-cusum":
            out[i] = ex_cusum_step(state, float(x), model).statistic
        elif kind == "sr":
            out[i] = sr_step(state, float(x), model).log_statistic
        else:
            out[i] = cusum_step(state, float(x), model).statistic
    return out
