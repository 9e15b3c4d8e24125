"""Monte Carlo estimation of the false-alarm / detection-delay tradeoff.

Two quantities are estimated by simulation: the mean time to false alarm
E_inf[tau] on pure pre-change paths, and the conditional average detection
delay E_nu[tau - nu | tau >= nu] on change-at-nu paths.  Setting the
threshold to log(gamma) guarantees a mean time to false alarm of at least
gamma, and the asymptotic delay floor is log(gamma) / I with I the
information number, which is the bound reported next to the estimates.

Censored false-alarm runs are included at their horizon value, so the ARL
estimate is a downward-biased lower bound; that is the conservative
direction for validating the >= gamma guarantee.  Under independent
observations the detection delay does not depend on the pre-change history,
so the worst-case (over nu) delay is scanned on a finite nu grid with no
essential-supremum machinery.

Trials are seeded individually (seed, trial index), making every estimate
bit-reproducible and order-independent, including under threaded execution.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .detectors import StopResult, run_detector
from .models import DensityModel, GaussianModel
from .process import NO_CHANGE, ChangeSpec, derive_seed, path_stream

Z95 = float(stats.norm.ppf(0.95))

#: caps for the default horizons: false-alarm runs 20 * exp(A) capped at 1e7
#: steps, delay runs nu + 10 * ceil(A / I)
ARL_HORIZON_FACTOR = 20.0
ARL_HORIZON_CAP = 10_000_000
DELAY_HORIZON_FACTOR = 10


class EstimationError(RuntimeError):
    """An estimate could not be formed (no usable trials)."""


@dataclass(frozen=True)
class TrialOutcome:
    """One simulated run: stopping time, censoring, and delay bookkeeping.

    Exactly one of the three outcomes holds: stopped at tau >= nu (a
    detection with delay tau - nu), stopped at tau < nu (a false alarm), or
    censored at the horizon.
    """

    tau: int | None
    censored_at: int | None
    nu: int | float
    delay: int | None
    false_alarm: bool

    @classmethod
    def from_stop(cls, result: StopResult, nu: int | float) -> "TrialOutcome":
        if not result.stopped:
            return cls(tau=None, censored_at=result.censored_at, nu=nu, delay=None, false_alarm=False)
        if result.tau < nu:
            return cls(tau=result.tau, censored_at=None, nu=nu, delay=None, false_alarm=True)
        return cls(tau=result.tau, censored_at=None, nu=nu, delay=int(result.tau - nu), false_alarm=False)

    @property
    def kind(self) -> str:
        if self.censored_at is not None:
            return "censored"
        return "false-alarm" if self.false_alarm else "detection"


def simulate_trials(
    model: DensityModel,
    detector: str,
    threshold: float,
    nu: int | float,
    horizon: int,
    trials: int,
    seed: int,
    *,
    window: int | None = None,
    threads: int = 1,
) -> list[TrialOutcome]:
    """Run independently seeded detector trials; results are order-independent."""
    if trials < 1:
        raise EstimationError("at least one trial is required")

    def one(i: int) -> TrialOutcome:
        spec = ChangeSpec(nu=nu, horizon=horizon, seed=derive_seed(seed, i))
        res = run_detector(detector, model, path_stream(model, spec), threshold, horizon, window=window)
        return TrialOutcome.from_stop(res, nu)

    if threads <= 1:
        return [one(i) for i in range(trials)]
    out: list[TrialOutcome | None] = [None] * trials
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for i, res in zip(range(trials), pool.map(one, range(trials))):
            out[i] = res
    return out  # type: ignore[return-value]


@dataclass(frozen=True)
class ArlEstimate:
    """Mean time to false alarm with censoring included at the horizon."""

    mean_tau: float
    stderr: float
    lcb95: float
    censored_fraction: float
    trials: int
    horizon: int
    threshold: float
    detector: str


def estimate_arl2fa(
    model: DensityModel,
    detector: str,
    threshold: float,
    trials: int,
    horizon: int,
    seed: int,
    *,
    window: int | None = None,
    threads: int = 1,
) -> ArlEstimate:
    """Estimate E_inf[tau] on no-change paths.

    Censored runs contribute their horizon, biasing the mean downward, which
    is conservative for checking the >= gamma guarantee; the 95% lower
    confidence bound uses the normal approximation.
    """
    recommended = ARL_HORIZON_FACTOR / 2.0 * math.exp(min(threshold, 700.0))
    if horizon < recommended:
        warnings.warn(
            f"horizon {horizon} is below 10*exp(threshold) ~ {recommended:.3g}; "
            "heavy censoring will depress the ARL estimate",
            UserWarning,
            stacklevel=2,
        )
    outcomes = simulate_trials(
        model, detector, threshold, NO_CHANGE, horizon, trials, seed, window=window, threads=threads
    )
    taus = np.array([o.tau if o.tau is not None else o.censored_at for o in outcomes], dtype=np.float64)
    censored = sum(o.censored_at is not None for o in outcomes)
    mean = float(taus.mean())
    sd = float(taus.std(ddof=1)) if trials > 1 else 0.0
    se = sd / math.sqrt(trials)
    return ArlEstimate(
        mean_tau=mean,
        stderr=se,
        lcb95=mean - Z95 * se,
        censored_fraction=censored / trials,
        trials=trials,
        horizon=horizon,
        threshold=threshold,
        detector=detector,
    )


def _information_or_default(model: DensityModel, info: float | None) -> float:
    if info is not None:
        return info
    if isinstance(model, GaussianModel):
        return model.schedule.limit_mu ** 2 / 2.0
    raise ValueError("pass info= (information number) for non-Gaussian models")


def default_delay_horizon(nu: int, threshold: float, info: float) -> int:
    return int(nu + DELAY_HORIZON_FACTOR * max(1, math.ceil(max(threshold, 0.0) / info)))


@dataclass(frozen=True)
class CaddEstimate:
    """Conditional average detection delay at a fixed change point."""

    nu: int
    mean_delay: float
    stderr: float
    accepted: int
    acceptance_rate: float
    censored: int
    trials: int
    horizon: int
    threshold: float
    detector: str


def estimate_cadd(
    model: DensityModel,
    detector: str,
    threshold: float,
    nu: int,
    trials: int,
    seed: int,
    *,
    horizon: int | None = None,
    info: float | None = None,
    window: int | None = None,
    threads: int = 1,
) -> CaddEstimate:
    """Estimate E_nu[tau - nu | tau >= nu] on change-at-nu paths.

    Runs stopping before nu are false alarms and fall outside the
    conditioning event; censored runs are reported but excluded from the
    average (the default horizon makes them vanishingly rare).  Raises
    EstimationError when no run is accepted.
    """
    if nu < 1 or (isinstance(nu, float) and math.isinf(nu)):
        raise ValueError("estimate_cadd needs a finite change point nu >= 1")
    if horizon is None:
        horizon = default_delay_horizon(nu, threshold, _information_or_default(model, info))
    outcomes = simulate_trials(
        model, detector, threshold, nu, horizon, trials, seed, window=window, threads=threads
    )
    delays = np.array([o.delay for o in outcomes if o.delay is not None], dtype=np.float64)
    censored = sum(o.censored_at is not None for o in outcomes)
    false_alarms = sum(o.false_alarm for o in outcomes)
    if delays.size == 0:
        raise EstimationError(
            f"no accepted runs at nu={nu}, threshold={threshold} "
            f"({false_alarms} false alarms, {censored} censored of {trials})"
        )
    mean = float(delays.mean())
    se = float(delays.std(ddof=1)) / math.sqrt(delays.size) if delays.size > 1 else 0.0
    return CaddEstimate(
        nu=nu,
        mean_delay=mean,
        stderr=se,
        accepted=int(delays.size),
        acceptance_rate=(trials - false_alarms) / trials,
        censored=censored,
        trials=trials,
        horizon=horizon,
        threshold=threshold,
        detector=detector,
    )


@dataclass(frozen=True)
class DelayScanCell:
    nu: int
    estimate: CaddEstimate | None
    error: str | None


@dataclass(frozen=True)
class DelayScan:
    """Per-nu conditional delays and their maximum over a finite nu grid.

    A finite-grid approximation to the worst case over all change points;
    under independent observations the delay is history-independent, so the
    grid scan is the whole story up to the grid resolution.
    """

    cells: tuple[DelayScanCell, ...]
    max_delay: float
    argmax_nu: int


def worst_case_delay_scan(
    model: DensityModel,
    detector: str,
    threshold: float,
    nu_grid: Sequence[int],
    trials: int,
    seed: int,
    *,
    info: float | None = None,
    window: int | None = None,
    threads: int = 1,
) -> DelayScan:
    """Estimate the conditional delay at every nu in the grid and report the max.

    A nu with no accepted runs is flagged in its cell rather than silently
    dropped; the scan fails only if every cell fails.
    """
    if not nu_grid:
        raise ValueError("nu_grid must be nonempty")
    cells = []
    for j, nu in enumerate(nu_grid):
        try:
            est = estimate_cadd(
                model,
                detector,
                threshold,
                int(nu),
                trials,
                derive_seed(seed, j),
                info=info,
                window=window,
                threads=threads,
            )
            cells.append(DelayScanCell(nu=int(nu), estimate=est, error=None))
        except EstimationError as exc:
            cells.append(DelayScanCell(nu=int(nu), estimate=None, error=str(exc)))
    valid = [c for c in cells if c.estimate is not None]
    if not valid:
        raise EstimationError("no nu in the grid produced accepted runs")
    best = max(valid, key=lambda c: c.estimate.mean_delay)
    return DelayScan(cells=tuple(cells), max_delay=best.estimate.mean_delay, argmax_nu=best.nu)


@dataclass(frozen=True)
class TradeoffRow:
    """One gamma on the tradeoff curve: ARL estimate, delay estimate, bound."""

    gamma: float
    threshold: float
    arl: ArlEstimate
    cadd: CaddEstimate
    bound: float


def tradeoff_curve(
    model: DensityModel,
    gammas: Sequence[float],
    trials: int,
    seed: int,
    *,
    detector: str = "ex-cusum",
    arl_trials: int | None = None,
    info: float | None = None,
    threads: int = 1,
) -> list[TradeoffRow]:
    """Estimate both sides of the tradeoff at threshold log(gamma) per gamma.

    The bound column is log(gamma) / I.  ARL runs use horizon
    20 * gamma capped at 1e7 steps; delay runs use the overshoot-safe default
    horizon.  ``arl_trials`` can reduce the (much costlier) false-alarm side.
    """
    gs = [float(g) for g in gammas]
    if not gs or any(g <= 1.0 for g in gs) or any(b <= a for a, b in zip(gs, gs[1:])):
        raise ValueError("gammas must be an increasing sequence of values > 1")
    eff_info = _information_or_default(model, info)
    rows = []
    for j, gamma in enumerate(gs):
        threshold = math.log(gamma)
        horizon = int(min(ARL_HORIZON_FACTOR * gamma, ARL_HORIZON_CAP))
        arl = estimate_arl2fa(
            model,
            detector,
            threshold,
            arl_trials or trials,
            horizon,
            derive_seed(seed, 2 * j),
            threads=threads,
        )
        cadd = estimate_cadd(
            model,
            detector,
            threshold,
            nu=1,
            trials=trials,
            seed=derive_seed(seed, 2 * j + 1),
            info=eff_info,
            threads=threads,
        )
        rows.append(
            TradeoffRow(
                gamma=gamma,
                threshold=threshold,
                arl=arl,
                cadd=cadd,
                bound=threshold / eff_info,
            )
        )
    return rows
