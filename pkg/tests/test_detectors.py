"""Detector state machines against hand values, the brute-force oracle, and
the structural inequalities between the three statistics."""

import math

import hypothesis
import numpy as np
import pytest
from hypothesis import strategies as st

from excusum import (
    ChangeSpec,
    CusumState,
    ExCusumState,
    MeanSchedule,
    NumericError,
    SrState,
    cusum_step,
    ex_cusum_brute,
    ex_cusum_brute_all,
    ex_cusum_step,
    gaussian_model,
    generate_path,
    llr,
    path_stream,
    run_detector,
    sr_step,
    statistic_trace,
)
from excusum.process import derive_seed

from conftest import constant_model


def evolve(model, xs, window=None):
    state = ExCusumState(window=window)
    stats = []
    for x in xs:
        ex_cusum_step(state, float(x), model)
        stats.append(state.statistic)
    return np.array(stats), state


# ---------------------------------------------------------------------------
# hand values


def test_hand_worked_two_step_example():
    # schedule (0.5, 0.75), observations (1, 2):
    #   W_1 = 0.5 * (1 - 0.25) = 0.375
    #   candidate 1 gains 0.75 * (2 - 0.375) = 1.21875 -> 1.59375
    #   fresh candidate 2 enters at 0.5 * (2 - 0.25) = 0.875
    model = gaussian_model(MeanSchedule.from_table([0.5, 0.75]))
    stats, state = evolve(model, [1.0, 2.0])
    assert stats[0] == pytest.approx(0.375, abs=1e-15)
    assert stats[1] == pytest.approx(1.59375, abs=1e-15)
    assert state.candidate_sums == pytest.approx([1.59375, 0.875], abs=1e-15)
    assert state.argmax_candidate == 1


@pytest.mark.filterwarnings("ignore:schedule is identically zero")
def test_zero_schedule_statistic_is_zero():
    model = constant_model(0.0)
    stats, _ = evolve(model, np.random.default_rng(3).normal(size=50))
    assert np.all(stats == 0.0)


@hypothesis.given(st.floats(min_value=-30, max_value=30))
def test_single_observation_statistic_is_first_llr(x):
    model = gaussian_model(MeanSchedule.arctangent())
    stats, _ = evolve(model, [x])
    assert stats[0] == llr(model, 0, x)


def test_fresh_candidate_floor(arctan_model):
    # W_n is at least the newest candidate's single-term sum
    xs = generate_path(arctan_model, ChangeSpec(nu=10, horizon=120, seed=5)).samples
    state = ExCusumState()
    for x in xs:
        ex_cusum_step(state, float(x), arctan_model)
        assert state.statistic >= llr(arctan_model, 0, float(x)) - 1e-12
    assert state.n == 120
    assert len(state.candidate_sums) == 120  # no window: one candidate per step


# ---------------------------------------------------------------------------
# oracle equivalence


def test_incremental_matches_literal_brute_force(arctan_model):
    xs = generate_path(arctan_model, ChangeSpec(nu=7, horizon=40, seed=11)).samples
    stats, _ = evolve(arctan_model, xs)
    for n in (1, 3, 17, 40):
        assert stats[n - 1] == pytest.approx(ex_cusum_brute(xs, arctan_model, n), abs=1e-11)


def test_brute_all_matches_literal_brute_force(arctan_model):
    xs = generate_path(arctan_model, ChangeSpec(nu=3, horizon=25, seed=13)).samples
    all_stats = ex_cusum_brute_all(xs, arctan_model)
    for n in (1, 2, 9, 25):
        assert all_stats[n - 1] == pytest.approx(ex_cusum_brute(xs, arctan_model, n), abs=1e-11)


def test_incremental_matches_brute_all_on_random_paths(arctan_model):
    for t in range(10):
        nu = [1, 5, 40, 10**9][t % 4]
        xs = generate_path(arctan_model, ChangeSpec(nu=nu, horizon=120, seed=derive_seed(17, t))).samples
        stats, _ = evolve(arctan_model, xs)
        oracle = ex_cusum_brute_all(xs, arctan_model)
        assert np.max(np.abs(stats - oracle)) < 1e-9


def test_brute_validates_n(arctan_model):
    with pytest.raises(ValueError):
        ex_cusum_brute([1.0, 2.0], arctan_model, 3)
    with pytest.raises(ValueError):
        ex_cusum_brute([1.0, 2.0], arctan_model, 0)


# ---------------------------------------------------------------------------
# reduction to classic CUSUM and SR domination


def test_constant_schedule_reduces_to_classic_cusum_bitwise():
    model = constant_model(0.6)
    xs = generate_path(model, ChangeSpec(nu=50, horizon=400, seed=23)).samples
    ex = ExCusumState()
    cu = CusumState()
    for x in xs:
        ex_cusum_step(ex, float(x), model)
        cusum_step(cu, float(x), model)
        assert ex.statistic == cu.statistic  # identical float values, not just close


def test_cusum_recursion_matches_max_form(arctan_model):
    # stationary per-sample ratios: the reflected recursion IS the max form
    model = constant_model(0.8)
    xs = generate_path(model, ChangeSpec(nu=1, horizon=60, seed=29)).samples
    cu = CusumState()
    for n, x in enumerate(xs, start=1):
        cusum_step(cu, float(x), model)
        brute = max(
            sum(llr(model, 0, float(xs[i - 1])) for i in range(k, n + 1)) for k in range(1, n + 1)
        )
        assert cu.statistic == pytest.approx(brute, abs=1e-12)


def test_sr_log_statistic_dominates_max(arctan_model):
    xs = generate_path(arctan_model, ChangeSpec(nu=20, horizon=150, seed=31)).samples
    ex = ExCusumState()
    sr = SrState()
    for x in xs:
        ex_cusum_step(ex, float(x), arctan_model)
        sr_step(sr, float(x), arctan_model)
        assert sr.log_statistic >= ex.statistic  # sum of positives >= max
    assert len(sr.log_candidate_products) == 150


def test_sr_stops_no_later_than_ex_cusum(arctan_model):
    for t in range(5):
        spec = ChangeSpec(nu=40, horizon=300, seed=derive_seed(37, t))
        path = generate_path(arctan_model, spec)
        a = 5.0
        r_sr = run_detector("sr", arctan_model, path, a, 300)
        r_ex = run_detector("ex-cusum", arctan_model, path, a, 300)
        tau_sr = r_sr.tau if r_sr.stopped else math.inf
        tau_ex = r_ex.tau if r_ex.stopped else math.inf
        assert tau_sr <= tau_ex


def test_sr_first_step_is_first_likelihood_ratio(arctan_model):
    sr = SrState()
    sr_step(sr, 1.3, arctan_model)
    assert sr.log_statistic == pytest.approx(llr(arctan_model, 0, 1.3), abs=1e-15)


@pytest.mark.filterwarnings("ignore:schedule is identically zero")
def test_sr_zero_schedule_counts_candidates():
    # every likelihood ratio is 1, so R_n = n exactly
    model = constant_model(0.0)
    sr = SrState()
    for n in range(1, 30):
        sr_step(sr, float(np.sin(n)), model)
        assert math.exp(sr.log_statistic) == pytest.approx(n, rel=1e-12)


def test_sr_martingale_small_monte_carlo(arctan_model):
    # E[R_5] = 5 under the pre-change law
    trials = 20_000
    n = 5
    vals = np.empty(trials)
    for t in range(trials):
        rng = np.random.default_rng(derive_seed(20240815, t))
        sr = SrState()
        for x in rng.normal(0.0, 1.0, n):
            sr_step(sr, float(x), arctan_model)
        vals[t] = math.exp(sr.log_statistic)
    se = vals.std(ddof=1) / math.sqrt(trials)
    assert abs(vals.mean() - n) <= 3 * se


# ---------------------------------------------------------------------------
# windows


def test_window_at_least_horizon_changes_nothing(arctan_model):
    xs = generate_path(arctan_model, ChangeSpec(nu=25, horizon=200, seed=41)).samples
    full, _ = evolve(arctan_model, xs)
    windowed, _ = evolve(arctan_model, xs, window=200)
    assert np.array_equal(full, windowed)
    wider, _ = evolve(arctan_model, xs, window=10_000)
    assert np.array_equal(full, wider)


def test_window_drops_old_candidates(arctan_model):
    xs = generate_path(arctan_model, ChangeSpec(nu=1, horizon=50, seed=43)).samples
    _, state = evolve(arctan_model, xs, window=8)
    assert len(state.candidate_sums) == 8
    assert state.active_count == 8
    # windowed statistic is a max over a subset, so it can never exceed the full one
    full, _ = evolve(arctan_model, xs)
    windowed, _ = evolve(arctan_model, xs, window=8)
    assert np.all(windowed <= full + 1e-12)


def test_windowed_stop_is_never_earlier(arctan_model):
    for t in range(5):
        spec = ChangeSpec(nu=30, horizon=250, seed=derive_seed(47, t))
        path = generate_path(arctan_model, spec)
        full = run_detector("ex-cusum", arctan_model, path, 6.0, 250)
        small = run_detector("ex-cusum", arctan_model, path, 6.0, 250, window=6)
        tau_full = full.tau if full.stopped else math.inf
        tau_small = small.tau if small.stopped else math.inf
        assert tau_small >= tau_full


def test_window_validation():
    with pytest.raises(ValueError):
        ExCusumState(window=0)
    with pytest.raises(ValueError):
        ExCusumState(window=2.5)


# ---------------------------------------------------------------------------
# threshold monotonicity


@hypothesis.given(st.integers(min_value=0, max_value=2**32 - 1))
@hypothesis.settings(max_examples=20)
def test_stopping_time_is_monotone_in_threshold(seed):
    model = gaussian_model(MeanSchedule.arctangent())
    path = generate_path(model, ChangeSpec(nu=10, horizon=150, seed=seed))
    taus = []
    for a in (1.0, 3.0, 6.0):
        res = run_detector("ex-cusum", model, path, a, 150)
        taus.append(res.tau if res.stopped else math.inf)
    assert taus[0] <= taus[1] <= taus[2]


# ---------------------------------------------------------------------------
# run_detector semantics


def test_threshold_below_floor_stops_immediately(arctan_model):
    path = generate_path(arctan_model, ChangeSpec(nu=1, horizon=10, seed=53))
    res = run_detector("ex-cusum", arctan_model, path, -1.0, 10)
    assert res.stopped and res.tau == 1


def test_infinite_threshold_censors(arctan_model):
    path = generate_path(arctan_model, ChangeSpec(nu=1, horizon=25, seed=59))
    res = run_detector("ex-cusum", arctan_model, path, math.inf, 25)
    assert not res.stopped and res.censored_at == 25
    assert res.tau is None


@pytest.mark.filterwarnings("ignore:schedule is identically zero")
def test_strict_versus_weak_crossing_at_exact_threshold():
    # zero schedule keeps W_n = 0 exactly: the strict rule never fires at
    # threshold 0, the baseline's weak rule fires at once
    model = constant_model(0.0)
    xs = np.random.default_rng(61).normal(size=20)
    assert not run_detector("ex-cusum", model, xs, 0.0, 20).stopped
    assert run_detector("cusum", model, xs, 0.0, 20).tau == 1
    assert not run_detector("sr", model, xs, math.log(20.0), 20).stopped  # R_n = n < 20 until the end


def test_run_detector_validates_inputs(arctan_model):
    path = generate_path(arctan_model, ChangeSpec(nu=1, horizon=5, seed=67))
    with pytest.raises(ValueError):
        run_detector("bogus", arctan_model, path, 1.0, 5)
    with pytest.raises(ValueError):
        run_detector("ex-cusum", arctan_model, path, math.nan, 5)
    with pytest.raises(ValueError):
        run_detector("ex-cusum", arctan_model, path, 1.0, 0)
    with pytest.raises(ValueError):
        run_detector("sr", arctan_model, path, 1.0, 5, window=3)
    with pytest.raises(ValueError):
        run_detector("ex-cusum", arctan_model, path.samples[:3], 100.0, 5)  # stream too short


def test_non_finite_statistic_aborts_with_diagnostics():
    broken = gaussian_model(MeanSchedule.arctangent())
    xs = [0.5, float("nan"), 0.5]
    with pytest.raises(ValueError):
        # NaN observation is a domain error before the statistic is touched
        run_detector("ex-cusum", broken, xs, 10.0, 3)

    import excusum.models as m

    weird = m.DensityModel(
        pre_change_log_density=lambda x: np.zeros_like(np.asarray(x, float)),
        post_change_log_density=lambda n, x: np.where(np.asarray(x, float) > 1.0, np.inf, 0.0),
        sampler_pre=lambda rng, size=None: rng.normal(0.0, 1.0, size),
        sampler_post=lambda n, rng, size=None: rng.normal(0.0, 1.0, size),
        support=(-math.inf, math.inf),
    )
    with pytest.raises(NumericError, match="step 2"):
        run_detector("ex-cusum", weird, [0.0, 2.0, 0.0], 10.0, 3)


def test_median_stopping_time_after_immediate_change(arctan_model):
    taus = []
    a = math.log(1000.0)
    for t in range(10_000):
        spec = ChangeSpec(nu=1, horizon=80, seed=derive_seed(883, t))
        res = run_detector("ex-cusum", arctan_model, path_stream(arctan_model, spec), a, 80)
        assert res.stopped
        taus.append(res.tau)
    med = float(np.median(taus))
    assert 4 <= med <= 10


def test_statistic_trace_matches_stepping(arctan_model):
    path = generate_path(arctan_model, ChangeSpec(nu=5, horizon=60, seed=71))
    trace = statistic_trace("ex-cusum", arctan_model, path)
    manual, _ = evolve(arctan_model, path.samples)
    assert np.array_equal(trace, manual)
    sr_trace = statistic_trace("sr", arctan_model, path)
    assert np.all(sr_trace >= trace)
