"""Departure generator, null simulation, p-values, and the full test
pipeline."""

import math

import numpy as np
import pytest

from isinglab import (
    GRID_CRITICAL_THETA,
    DepartureSpec,
    IsingModel,
    PowerPoint,
    all_pairs_fn,
    distinct_ordered_sum,
    exact_pmf,
    generate_departure,
    mixing_schedule,
    null_distribution,
    p_value,
    power_curve,
    run_chain,
    run_test,
)
from isinglab.dynamics import random_config

# 99.9% point of the chi-square law with 4 degrees of freedom; for even
# dof the survival function is exp(-x/2)*(1 + x/2), so
# exp(-18.467/2)*(1 + 18.467/2) = 9.99e-4.
CHI2_4_CRIT = 18.467


# --- departure process -----------------------------------------------------

def test_tau_zero_is_exactly_the_iid_initialization():
    spec = DepartureSpec(5, 4, 0.0)
    x = generate_departure(spec, np.random.default_rng(99))
    y = 2 * np.random.default_rng(99).integers(0, 2, size=20) - 1
    assert np.array_equal(x, y.astype(np.int8))


def test_spin_balance_is_binomial_at_tau_zero():
    # aggregate chi-square against Binomial(4, 1/2) over 10^4 draws
    spec = DepartureSpec(2, 2, 0.0)
    gen = np.random.default_rng(20240817)
    counts = np.zeros(5)
    for _ in range(10_000):
        x = generate_departure(spec, gen)
        counts[int(np.sum(x == 1))] += 1
    expected = 10_000 * np.array([1, 4, 6, 4, 1]) / 16.0
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    assert chi2 < CHI2_4_CRIT


def test_tau_one_floods_the_grid_with_the_first_spin():
    # every node has an earlier in-grid converter, so one pass at tau=1
    # propagates the first node's initial value everywhere
    for seed in (0, 1, 2):
        x = generate_departure(DepartureSpec(6, 5, 1.0), np.random.default_rng(seed))
        first = 2 * int(np.random.default_rng(seed).integers(0, 2)) - 1
        assert np.all(x == first)


def test_tau_one_adjacent_agreement_beats_coin_flips():
    gen = np.random.default_rng(314)
    rates = np.empty(10_000)
    for k in range(10_000):
        x = generate_departure(DepartureSpec(3, 3, 1.0), gen)
        grid = x.reshape(3, 3)
        agree = np.concatenate(
            [
                (grid[:, 1:] == grid[:, :-1]).ravel(),
                (grid[1:, :] == grid[:-1, :]).ravel(),
            ]
        )
        rates[k] = agree.mean()
    stderr = rates.std(ddof=1) / math.sqrt(rates.size)
    assert rates.mean() > 0.5 + 3 * stderr


def test_intermediate_tau_mixes_converted_and_free_spins():
    x = generate_departure(DepartureSpec(20, 20, 0.3), np.random.default_rng(8))
    assert set(np.unique(x)) == {-1, 1}


def test_degenerate_grids_are_safe():
    for w, h in [(1, 1), (1, 5), (5, 1), (2, 2)]:
        x = generate_departure(DepartureSpec(w, h, 0.7), np.random.default_rng(3))
        assert x.shape == (w * h,)
        assert np.all(np.abs(x) == 1)


def test_spec_seed_matches_explicit_generator():
    spec = DepartureSpec(4, 4, 0.6, seed=123)
    a = generate_departure(spec)
    b = generate_departure(DepartureSpec(4, 4, 0.6), np.random.default_rng(123))
    assert np.array_equal(a, b)


def test_spec_validation():
    with pytest.raises(ValueError, match="tau"):
        DepartureSpec(3, 3, -0.1)
    with pytest.raises(ValueError, match="tau"):
        DepartureSpec(3, 3, 1.0001)
    with pytest.raises(ValueError, match="positive"):
        DepartureSpec(0, 3, 0.5)


# --- null distribution -----------------------------------------------------

def test_single_replica_is_seed_reproducible():
    model = IsingModel.grid(3, 3, 0.2)
    schedule = mixing_schedule(model, 1.0)
    fn = all_pairs_fn(9)
    a = null_distribution(model, fn.evaluate, 1, schedule, 21)
    b = null_distribution(model, fn.evaluate, 1, schedule, 21)
    assert a.shape == (1,)
    assert np.array_equal(a, b)


def test_empty_graph_null_values_center_on_zero():
    model = IsingModel.empty(30)
    schedule = mixing_schedule(model, 1.0)
    vals = null_distribution(
        model,
        lambda X: np.array([distinct_ordered_sum(row, 2) for row in X]),
        2000,
        schedule,
        np.random.default_rng(11),
    )
    stderr = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean()) <= 3 * stderr


def test_null_distribution_matches_exact_law_on_small_path():
    model = IsingModel(6, edges=[(i, i + 1, 0.25) for i in range(5)])
    fn = all_pairs_fn(6)
    dist = exact_pmf(model)
    exact = {}
    for cfg, p in zip(dist.configs, dist.probs):
        v = float(fn.evaluate(cfg))
        exact[v] = exact.get(v, 0.0) + p
    schedule = mixing_schedule(model, 1.0)
    vals = null_distribution(
        model, fn.evaluate, 100_000, schedule, np.random.default_rng(12)
    )
    emp = {}
    for v in vals:
        emp[float(v)] = emp.get(float(v), 0.0) + 1e-5
    keys = set(exact) | set(emp)
    tv = 0.5 * sum(abs(exact.get(k, 0.0) - emp.get(k, 0.0)) for k in keys)
    assert tv < 0.02


def test_null_distribution_rejects_bad_inputs():
    model = IsingModel.grid(3, 3, 0.2)
    schedule = mixing_schedule(model, 1.0)
    fn = all_pairs_fn(9)
    with pytest.raises(ValueError, match="replica"):
        null_distribution(model, fn.evaluate, 0, schedule, 1)
    with pytest.raises(ValueError, match="slack"):
        null_distribution(IsingModel.grid(3, 3, 0.9), fn.evaluate, 5, schedule, 1)
    with pytest.raises(ValueError, match="one value per replica"):
        null_distribution(model, lambda X: np.zeros(3), 5, schedule, 1)


# --- p-values ---------------------------------------------------------------

def test_p_value_above_all_nulls():
    null = np.arange(99, dtype=np.float64)
    assert p_value(null, 99.5) == pytest.approx(0.02)


def test_p_value_at_symmetric_median_clamps_to_one():
    null = np.arange(-50, 51, dtype=np.float64)
    assert p_value(null, 0.0) == 1.0


def test_p_value_never_zero_and_floor_is_two_over_m_plus_one():
    null = np.linspace(0, 1, 199)
    assert p_value(null, 50.0) == pytest.approx(2.0 / 200.0)
    assert p_value(null, -50.0) == pytest.approx(2.0 / 200.0)


def test_p_value_counts_ties_on_both_sides():
    assert p_value(np.array([1.0, 1.0, 1.0]), 1.0) == 1.0


def test_p_value_requires_nulls():
    with pytest.raises(ValueError):
        p_value(np.empty(0), 0.0)


# --- run_test ---------------------------------------------------------------

def test_gate_skips_simulation_and_rejects():
    model = IsingModel.grid(4, 4, 0.0)
    report = run_test(model, np.ones(16, dtype=np.int8), rng=1)
    assert report.gate_rejected
    assert report.mple.degenerate
    assert report.null_values.size == 0
    assert report.p_value is None
    assert report.verdict == "reject"
    assert report.threshold_used == GRID_CRITICAL_THETA


def test_gate_fires_below_critical_when_fitted_slack_vanishes():
    # fit lands between the Dobrushin bound and the lattice threshold;
    # the null cannot be scheduled there, so the gate still closes
    strong = IsingModel.grid(10, 10, 0.3)
    gen = np.random.default_rng(0)
    obs = run_chain(strong, random_config(100, gen), 60_000, gen)
    report = run_test(IsingModel.grid(10, 10, 0.0), obs, rng=2)
    assert report.mple.theta_hat == pytest.approx(0.3390790521936965, rel=1e-9)
    assert report.mple.theta_hat < GRID_CRITICAL_THETA
    assert report.gate_rejected
    assert report.verdict == "reject"


def test_null_draw_is_retained():
    null = IsingModel.grid(15, 15, 0.1)
    schedule = mixing_schedule(null, 1.0)
    gen = np.random.default_rng(42)
    obs = run_chain(null, random_config(225, gen), schedule.t_star, gen)
    report = run_test(IsingModel.grid(15, 15, 0.0), obs, rng=np.random.default_rng(43))
    assert not report.gate_rejected
    assert report.verdict == "retain"
    assert report.statistic_name == "zlocal"
    assert report.null_values.shape == (100,)
    assert 0.0 < report.p_value <= 1.0
    assert math.isfinite(report.observed_value)


def test_threshold_modes():
    model = IsingModel.grid(6, 6, 0.0)
    obs = generate_departure(DepartureSpec(6, 6, 0.1), np.random.default_rng(9))
    by_name = run_test(model, obs, threshold="dobrushin", null_samples=10, rng=4)
    assert by_name.threshold_used == pytest.approx(math.atanh(0.25))
    numeric = run_test(model, obs, threshold=0.7, null_samples=10, rng=4)
    assert numeric.threshold_used == 0.7
    with pytest.raises(ValueError, match="threshold"):
        run_test(model, obs, threshold="bogus")
    with pytest.raises(ValueError, match="alpha"):
        run_test(model, obs, alpha=1.0)


def test_run_test_is_deterministic_given_seed():
    model = IsingModel.grid(8, 8, 0.0)
    obs = generate_departure(DepartureSpec(8, 8, 0.15), np.random.default_rng(14))
    a = run_test(model, obs, null_samples=40, rng=np.random.default_rng(15))
    b = run_test(model, obs, null_samples=40, rng=np.random.default_rng(15))
    assert np.array_equal(a.null_values, b.null_values)
    assert a.p_value == b.p_value
    assert a.verdict == b.verdict


def test_run_test_with_field_and_neighbor_statistic():
    null = IsingModel.grid(8, 8, 0.1)
    schedule = mixing_schedule(null, 1.0)
    gen = np.random.default_rng(16)
    obs = run_chain(null, random_config(64, gen), schedule.t_star, gen)
    report = run_test(
        IsingModel.grid(8, 8, 0.0),
        obs,
        statistic="zk",
        k=1,
        zero_field=False,
        null_samples=50,
        rng=17,
    )
    assert report.statistic_name == "z1"
    # recentering uses the fitted marginal, so the observed value shifts
    # with h_hat; it only needs to be finite and scored against the null
    assert math.isfinite(report.observed_value)
    assert report.verdict in ("reject", "retain")


def test_run_test_with_custom_coefficients():
    model = IsingModel.grid(5, 5, 0.0)
    obs = generate_departure(DepartureSpec(5, 5, 0.2), np.random.default_rng(18))
    report = run_test(model, obs, statistic=all_pairs_fn(25), null_samples=30, rng=19)
    assert report.statistic_name == "coeffs"
    assert report.null_values.shape == (30,)


# --- power curve ------------------------------------------------------------

def test_power_is_calibrated_at_tau_zero():
    rows = power_curve(12, 12, [0.0], reps=30, rng=np.random.default_rng(5150))
    rate = rows[0].stat_reject_rate
    assert abs(rate - 0.05) <= 3 * math.sqrt(0.05 * 0.95 / 30)
    assert rows[0].gate_reject_rate == 0.0


def test_power_rises_with_departure_strength():
    taus = [0.0, 0.2, 0.5, 1.0]
    rows = power_curve(12, 12, taus, reps=25, rng=np.random.default_rng(5151))
    assert [r.tau for r in rows] == taus
    slack = 3 * math.sqrt(0.25 / 25)
    for lo, hi in zip(rows, rows[1:]):
        assert hi.stat_reject_rate >= lo.stat_reject_rate - slack
        assert hi.gate_reject_rate >= lo.gate_reject_rate - slack
    assert rows[-1].stat_reject_rate == 1.0
    assert rows[-1].gate_reject_rate == 1.0


def test_power_curve_validation():
    with pytest.raises(ValueError, match="repetition"):
        power_curve(4, 4, [0.5], reps=0)


def test_power_point_fields():
    rows = power_curve(5, 5, [0.4], reps=2, rng=np.random.default_rng(6))
    assert isinstance(rows[0], PowerPoint)
    assert rows[0].reps == 2
