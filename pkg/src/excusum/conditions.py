"""Numerical checks of the sufficient conditions for asymptotic optimality.

Four pieces of evidence are produced for a model:

- Cesaro convergence of the KL divergences D(f_{k-1} || g) to an information
  number I > 0 (exact arithmetic, closed form when available);
- a uniform bound on the centered fourth moments of the per-sample
  log-likelihood ratio (Monte Carlo against the closed-form Gaussian bound
  3 * mu**4);
- concentration of the empirical average (1/n) sum llr(k-1, X_k) around I
  under change-at-1 sampling, reported as deviation quantiles that must
  shrink along a grid of growing n (almost-sure convergence itself is not
  machine-checkable; shrinking quantiles are reported as *consistent with*
  it, never as proof);
- stochastic dominance of shifted log-likelihood-ratio block sums: started
  further into the growing family, the block-average sum must be
  stochastically larger, checked by comparing empirical CDFs with a
  Dvoretzky-Kiefer-Wolfowitz style slack at 99% confidence.

``full_condition_report`` composes these with the MLR structure check from
the models module into a single pass/fail report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .models import (
    DensityModel,
    GaussianModel,
    default_grid,
    kl_divergence,
    llr,
    sample_post,
    verify_mlr,
)
from .process import derive_seed

DOMINANCE_CONFIDENCE = 0.99


def dkw_slack(trials: int, confidence: float = DOMINANCE_CONFIDENCE) -> float:
    """One-sided empirical-CDF comparison slack at the given confidence."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * trials))


def _kl_values(model: DensityModel, upto: int) -> np.ndarray:
    """D(f_{k-1} || g) for k = 1..upto, preferring closed forms."""
    if isinstance(model, GaussianModel):
        mu = model.schedule.means(upto)
        return mu * mu / 2.0
    if model.kl_closed_form is not None:
        return np.array([float(model.kl_closed_form(j)) for j in range(upto)])
    return np.array([kl_divergence(model, j, method="quadrature") for j in range(upto)])


def information_number(model: DensityModel) -> float:
    """Limit of the KL divergences; exact for the built-in schedule kinds."""
    if isinstance(model, GaussianModel):
        return model.schedule.limit_mu ** 2 / 2.0
    raise ValueError("no closed-form information number for this model; use cesaro_kl_average")


def _trace_indices(n_max: int) -> np.ndarray:
    dense = np.arange(1, min(n_max, 64) + 1)
    sparse = np.unique(np.geomspace(1, n_max, 200).astype(np.int64))
    return np.unique(np.concatenate([dense, sparse, [n_max]]))


@dataclass(frozen=True)
class CesaroTrace:
    """Running averages of D(f_{k-1} || g) and the resulting I estimate."""

    ns: np.ndarray
    averages: np.ndarray
    information_number: float
    n_max: int
    passed: bool  # I > 0 requirement


def cesaro_kl_average(model: DensityModel, n_max: int) -> CesaroTrace:
    """Running average (1/n) sum_{k<=n} D(f_{k-1} || g) up to n_max.

    The final value is the information-number estimate; the verdict fails for
    degenerate families whose divergences average to zero.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    vals = _kl_values(model, n_max)
    # running mean in recurrence form: exact on constant sequences, where a
    # cumsum-based mean would wobble in the last bits
    cumavg = np.empty(n_max)
    avg = 0.0
    for i in range(n_max):
        avg += (float(vals[i]) - avg) / (i + 1)
        cumavg[i] = avg
    ns = _trace_indices(n_max)
    estimate = float(cumavg[-1])
    return CesaroTrace(
        ns=ns,
        averages=cumavg[ns - 1],
        information_number=estimate,
        n_max=n_max,
        passed=estimate > 0.0,
    )


@dataclass(frozen=True)
class MomentCheck:
    """Centered fourth moments of the per-sample LLR versus a uniform bound."""

    ks: tuple[int, ...]
    estimates: np.ndarray
    stderrs: np.ndarray
    closed_forms: np.ndarray | None
    bound: float
    trials: int
    passed: bool


def fourth_moment_check(
    model: DensityModel,
    n_max: int | None = None,
    trials: int = 100_000,
    seed: int = 0,
    *,
    ks: tuple[int, ...] | None = None,
    bound: float | None = None,
) -> MomentCheck:
    """Monte Carlo centered fourth moment of llr(k-1, X_k) with X_k ~ f_{k-1}.

    Centering uses the exact KL mean.  Passes when every estimate is at most
    the bound plus three standard errors.  For the Gaussian family the bound
    defaults to 3 * limit_mu**4 and the exact values 3 * mu_{k-1}**4 are
    reported alongside.
    """
    if ks is None:
        if n_max is None:
            raise ValueError("give either n_max or an explicit ks grid")
        ks = tuple(int(v) for v in np.unique(np.geomspace(1, n_max, 8).astype(np.int64)))
    if any(k < 1 for k in ks):
        raise ValueError("moment check indices k must be >= 1")
    if bound is None:
        if isinstance(model, GaussianModel):
            bound = 3.0 * model.schedule.limit_mu ** 4
        else:
            raise ValueError("no default fourth-moment bound for this model; pass bound=")
    estimates = np.empty(len(ks))
    stderrs = np.empty(len(ks))
    closed = np.empty(len(ks)) if isinstance(model, GaussianModel) else None
    for j, k in enumerate(ks):
        rng = np.random.default_rng(derive_seed(seed, k))
        x = np.asarray(sample_post(model, k - 1, rng, size=trials))
        z = llr(model, np.full(trials, k - 1), x)
        center = kl_divergence(model, k - 1, "closed" if model.kl_closed_form else "quadrature")
        fourth = (z - center) ** 4
        estimates[j] = fourth.mean()
        stderrs[j] = fourth.std(ddof=1) / math.sqrt(trials)
        if closed is not None:
            closed[j] = 3.0 * model.schedule.mu(k - 1) ** 4
    passed = bool(np.all(estimates <= bound + 3.0 * stderrs))
    return MomentCheck(
        ks=tuple(ks),
        estimates=estimates,
        stderrs=stderrs,
        closed_forms=closed,
        bound=float(bound),
        trials=trials,
        passed=passed,
    )


@dataclass(frozen=True)
class SllnCheck:
    """Deviation quantiles of the change-at-1 empirical LLR average around I."""

    ns: tuple[int, ...]
    quantiles: Mapping[float, np.ndarray]
    variances: np.ndarray
    information_number: float
    trials: int
    passed: bool  # 95th-percentile deviation shrinks along the grid


def slln_empirical(
    model: DensityModel,
    n: int,
    trials: int = 1_000,
    seed: int = 0,
    *,
    grid: tuple[int, ...] | None = None,
    info: float | None = None,
    quantile_levels: tuple[float, ...] = (0.5, 0.9, 0.95),
) -> SllnCheck:
    """Simulate change-at-1 paths and track |(1/m) sum llr(k-1, X_k) - I|.

    Averages are taken at m on a coarsening grid (default n/16, n/4, n); the
    check passes when the 95th-percentile deviation strictly decreases, the
    Monte Carlo surrogate for almost-sure convergence.
    """
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    if grid is None:
        grid = tuple(sorted({max(n // 16, 1), max(n // 4, 1), n}))
    if any(m < 1 or m > n for m in grid):
        raise ValueError("grid entries must lie in 1..n")
    if info is None:
        info = information_number(model) if isinstance(model, GaussianModel) else cesaro_kl_average(model, n).information_number
    ages = np.arange(n)
    marks = np.asarray(grid)
    avgs = np.empty((trials, len(grid)))
    for t in range(trials):
        rng = np.random.default_rng(derive_seed(seed, t))
        x = np.asarray(sample_post(model, ages, rng))
        z = np.asarray(llr(model, ages, x), dtype=np.float64)
        cs = np.cumsum(z)
        avgs[t] = cs[marks - 1] / marks
    dev = np.abs(avgs - info)
    quantiles = {q: np.quantile(dev, q, axis=0) for q in quantile_levels}
    q95 = quantiles[0.95] if 0.95 in quantiles else np.quantile(dev, 0.95, axis=0)
    passed = bool(np.all(np.diff(q95) < 0.0)) if len(grid) > 1 else True
    return SllnCheck(
        ns=tuple(int(m) for m in grid),
        quantiles=quantiles,
        variances=avgs.var(axis=0, ddof=1),
        information_number=float(info),
        trials=trials,
        passed=passed,
    )


@dataclass(frozen=True)
class DominanceCheck:
    """One-sided empirical-CDF comparison of shifted block-average LLR sums."""

    k_small: int
    k_large: int
    n: int
    trials: int
    max_gap: float
    slack: float
    passed: bool


def _block_averages(model: DensityModel, k: int, n: int, trials: int, seed: int) -> np.ndarray:
    """(1/n) sum_{i=k}^{k+n} llr(i-k, X_i) with X_i ~ f_{i-1} (change at 1).

    The same (seed, k) always reproduces the same draws, so comparing a k
    against itself gives a gap of exactly zero.
    """
    rng = np.random.default_rng(derive_seed(seed, k))
    data_ages = np.arange(k - 1, k + n)  # X_i ~ f_{i-1} for i = k..k+n
    llr_ages = np.arange(n + 1)  # ratio index i-k
    out = np.empty(trials)
    chunk = max(1, min(trials, 2_000_000 // (n + 1)))
    done = 0
    while done < trials:
        take = min(chunk, trials - done)
        x = np.asarray(sample_post(model, np.tile(data_ages, (take, 1)), rng))
        z = llr(model, np.tile(llr_ages, (take, 1)), x)
        out[done : done + take] = z.sum(axis=1) / n
        done += take
    return out


def sum_dominance_check(
    model: DensityModel,
    k_small: int,
    k_large: int,
    n: int,
    trials: int = 10_000,
    seed: int = 0,
) -> DominanceCheck:
    """Check that the block sum started at k_large stochastically dominates
    the one started at k_small.

    Passes when the empirical CDF of the k_large sample lies below that of
    the k_small sample everywhere, up to the DKW-style slack for the trial
    count at 99% confidence.  Reports the worst one-sided CDF gap.  Swapping
    the two start indices on a strictly growing schedule flips the verdict;
    comparing an index against itself reuses the same draws and gives a gap
    of exactly zero.
    """
    if k_small < 1 or k_large < 1:
        raise ValueError("block start indices must be >= 1")
    if n < 1 or trials < 2:
        raise ValueError("n must be >= 1 and trials >= 2")
    a = np.sort(_block_averages(model, k_small, n, trials, seed))
    b = np.sort(_block_averages(model, k_large, n, trials, seed))
    pts = np.concatenate([a, b])
    gap = (
        np.searchsorted(b, pts, side="right") / trials
        - np.searchsorted(a, pts, side="right") / trials
    )
    max_gap = float(gap.max())
    slack = dkw_slack(trials)
    return DominanceCheck(
        k_small=k_small,
        k_large=k_large,
        n=n,
        trials=trials,
        max_gap=max_gap,
        slack=slack,
        passed=max_gap <= slack,
    )


@dataclass(frozen=True)
class ConditionBudgets:
    """Sampling and grid budgets for the full condition report."""

    mlr_ns: tuple[int, ...] = (-1, 0, 1, 2, 5, 10, 20, 50)
    mlr_points: int = 2001
    cesaro_n_max: int = 100_000
    moment_ks: tuple[int, ...] = (1, 10, 100)
    moment_trials: int = 100_000
    slln_n: int = 16_000
    slln_trials: int = 1_000
    dominance_pair: tuple[int, int] = (1, 5)
    dominance_n: int = 20
    dominance_trials: int = 100_000
    seed: int = 0


@dataclass(frozen=True)
class ConditionReport:
    """Verdicts and numeric evidence for all checked optimality conditions."""

    information_number_I: float
    cesaro_trace: CesaroTrace
    moment_check: MomentCheck
    slln_check: SllnCheck
    dominance_check: DominanceCheck
    mlr_results: Mapping[int, tuple[bool, float]]
    verdicts: Mapping[str, bool]
    passed: bool

    def to_dict(self) -> dict:
        return {
            "information_number_I": self.information_number_I,
            "passed": self.passed,
            "verdicts": dict(self.verdicts),
            "cesaro": {
                "n_max": self.cesaro_trace.n_max,
                "estimate": self.cesaro_trace.information_number,
                "trace": [
                    [int(n), float(a)]
                    for n, a in zip(self.cesaro_trace.ns, self.cesaro_trace.averages)
                ],
            },
            "fourth_moment": {
                "bound": self.moment_check.bound,
                "trials": self.moment_check.trials,
                "per_k": [
                    {
                        "k": int(k),
                        "estimate": float(e),
                        "stderr": float(s),
                        **(
                            {"closed_form": float(self.moment_check.closed_forms[j])}
                            if self.moment_check.closed_forms is not None
                            else {}
                        ),
                    }
                    for j, (k, e, s) in enumerate(
                        zip(self.moment_check.ks, self.moment_check.estimates, self.moment_check.stderrs)
                    )
                ],
            },
            "slln": {
                "trials": self.slln_check.trials,
                "ns": list(self.slln_check.ns),
                "q95": [float(v) for v in self.slln_check.quantiles[0.95]],
                "variances": [float(v) for v in self.slln_check.variances],
            },
            "sum_dominance": {
                "k_small": self.dominance_check.k_small,
                "k_large": self.dominance_check.k_large,
                "n": self.dominance_check.n,
                "trials": self.dominance_check.trials,
                "max_gap": self.dominance_check.max_gap,
                "slack": self.dominance_check.slack,
            },
            "mlr": {str(n): {"ok": ok, "worst_violation": w} for n, (ok, w) in self.mlr_results.items()},
        }

    def trace_rows(self) -> list[tuple]:
        """Rows (n, cesaro_avg, moment_est, slln_q95) with blanks where absent."""
        cesaro = {int(n): float(a) for n, a in zip(self.cesaro_trace.ns, self.cesaro_trace.averages)}
        moments = {int(k): float(e) for k, e in zip(self.moment_check.ks, self.moment_check.estimates)}
        slln = {int(n): float(q) for n, q in zip(self.slln_check.ns, self.slln_check.quantiles[0.95])}
        rows = []
        for n in sorted(set(cesaro) | set(moments) | set(slln)):
            rows.append((n, cesaro.get(n), moments.get(n), slln.get(n)))
        return rows


def full_condition_report(model: DensityModel, budgets: ConditionBudgets | None = None) -> ConditionReport:
    """Run every condition check and combine the verdicts.

    Overall pass means all sufficient conditions empirically hold at the given
    budgets, stated as evidence consistent with the asymptotic conditions, not
    as proof of them.
    """
    b = budgets or ConditionBudgets()
    mlr_results = {}
    for n in b.mlr_ns:
        grid = default_grid(model, max(n + 1, 0), points=b.mlr_points)
        check = verify_mlr(model, n, grid)
        mlr_results[n] = (check.ok, check.worst_violation)
    cesaro = cesaro_kl_average(model, b.cesaro_n_max)
    moment = fourth_moment_check(
        model, trials=b.moment_trials, seed=b.seed, ks=b.moment_ks
    )
    slln = slln_empirical(model, b.slln_n, trials=b.slln_trials, seed=b.seed)
    dom = sum_dominance_check(
        model, b.dominance_pair[0], b.dominance_pair[1], b.dominance_n, b.dominance_trials, b.seed
    )
    verdicts = {
        "mlr": all(ok for ok, _ in mlr_results.values()),
        "information_number": cesaro.passed,
        "fourth_moment": moment.passed,
        "slln_decay": slln.passed,
        "sum_dominance": dom.passed,
    }
    return ConditionReport(
        information_number_I=cesaro.information_number,
        cesaro_trace=cesaro,
        moment_check=moment,
        slln_check=slln,
        dominance_check=dom,
        mlr_results=mlr_results,
        verdicts=verdicts,
        passed=all(verdicts.values()),
    )
