"""Glauber dynamics: schedules, stationarity, couplings, contraction,
and the reproducibility contract."""

import math

import numpy as np
import pytest

from helpers import random_model
from isinglab import (
    ChainEnsemble,
    IsingModel,
    MixingSchedule,
    contraction_diagnostic,
    coupled_step,
    dobrushin_slack,
    enumerate_configs,
    exact_pmf,
    glauber_step,
    hamming,
    hamming_trace,
    mixing_schedule,
    random_config,
    run_chain,
    run_coupled,
    sample_states,
    transition_matrix,
)


# --- schedules -------------------------------------------------------------

def test_schedule_known_values():
    sched = mixing_schedule(IsingModel.empty(100))
    assert sched.t_mix == 461  # ceil(100 ln 100)
    assert sched.t_star == 3 * 461
    grid = IsingModel.grid(40, 40, 0.035)
    sched = mixing_schedule(grid)
    assert sched.t_mix == 13726
    sched2 = mixing_schedule(grid, multiplier=2.0)
    assert sched2.t_star == math.ceil(4.0 * 13726)


def test_schedule_slack_override_and_errors():
    model = IsingModel.grid(3, 3, 0.2)
    sched = mixing_schedule(model, slack=0.5)
    assert sched.t_mix == math.ceil(9 * math.log(9) / 0.5)
    with pytest.raises(ValueError, match="slack"):
        mixing_schedule(model, slack=-0.1)
    with pytest.raises(ValueError, match="multiplier"):
        mixing_schedule(model, multiplier=0.0)
    hot = IsingModel(4, [(u, v, 2.0) for u in range(4) for v in range(u + 1, 4)])
    with pytest.raises(ValueError, match="slack"):
        mixing_schedule(hot)


def test_single_node_schedule():
    assert mixing_schedule(IsingModel.empty(1)).t_mix == 1


# --- single steps ----------------------------------------------------------

def test_glauber_step_record_and_immutability(rng):
    model = IsingModel.grid(3, 3, 0.2)
    x = random_config(model.n, rng)
    before = x.copy()
    y, rec = glauber_step(model, x, rng)
    assert np.array_equal(x, before)
    assert 0 <= rec.node < model.n
    assert 0.0 <= rec.draw < 1.0
    assert rec.flipped == (y[rec.node] != x[rec.node])
    assert hamming(x, y) <= 1


def test_run_chain_matches_folded_steps():
    model = IsingModel.grid(4, 4, 0.25, 0.1)
    start = random_config(16, 0)
    fast = run_chain(model, start, 500, 123)
    rng = np.random.default_rng(123)
    x = start
    for _ in range(500):
        x, _ = glauber_step(model, x, rng)
    assert np.array_equal(fast, x)


def test_run_chain_zero_steps_and_errors():
    model = IsingModel.empty(4)
    start = np.array([1, -1, 1, -1], dtype=np.int8)
    assert np.array_equal(run_chain(model, start, 0, 1), start)
    with pytest.raises(ValueError):
        run_chain(model, start, -1, 1)


# --- exact stationarity ----------------------------------------------------

def test_transition_matrix_fixes_exact_pmf(rng):
    model = random_model(rng, n_max=6)
    T = transition_matrix(model)
    assert np.allclose(T.sum(axis=1), 1.0, atol=1e-14)
    pi = exact_pmf(model).probs
    assert np.max(np.abs(pi @ T - pi)) < 1e-12


def test_transition_matrix_cap():
    with pytest.raises(ValueError):
        transition_matrix(IsingModel.empty(13))


def test_equilibrated_chain_matches_exact_distribution():
    # path on 6 nodes; total variation against the brute-force law
    model = IsingModel(
        6, [(i, i + 1, 0.3) for i in range(5)], field=[0.1, 0, 0, 0, 0, -0.1]
    )
    sched = mixing_schedule(model)
    reps = 100_000
    X = sample_states(model, reps, sched.t_star, rng=2024)
    bits = (X > 0) @ (1 << np.arange(6))
    counts = np.bincount(bits, minlength=64)
    tv = 0.5 * np.abs(counts / reps - exact_pmf(model).probs).sum()
    assert tv < 0.02


# --- couplings -------------------------------------------------------------

def test_coupled_run_matches_stepwise_ensemble():
    model = IsingModel.grid(4, 4, 0.25, 0.1)
    starts = np.stack([random_config(16, s) for s in (1, 2, 3)])
    fast = ChainEnsemble(model, starts, 9)
    fast.run(400)
    slow = ChainEnsemble(model, starts, 9)
    for _ in range(400):
        slow.step()
    assert np.array_equal(fast.configs, slow.configs)
    assert fast.step_count == slow.step_count == 400


def test_coupled_step_shares_node_and_draw():
    model = IsingModel.grid(3, 3, 0.2)
    starts = np.stack([random_config(9, s) for s in (4, 5, 6, 7)])
    ens = ChainEnsemble(model, starts, 11)
    ens2, records = coupled_step(ens)
    assert ens2 is ens
    assert len(records) == 4
    assert len({r.node for r in records}) == 1
    assert len({r.draw for r in records}) == 1


def test_identical_chains_stay_identical():
    model = IsingModel.grid(3, 3, 0.3)
    start = random_config(9, 0)
    finals = run_coupled(model, np.stack([start, start]), 300, 5)
    assert np.array_equal(finals[0], finals[1])


def test_shared_draw_rule_is_monotone_in_probability():
    # chains ordered by conditional probability get +1 in a nested way:
    # whenever a lower-probability chain lands +1, every higher one does
    model = IsingModel(
        3, [(0, 1, 0.8), (1, 2, 0.8)], field=[0.5, -0.2, 0.3]
    )
    starts = enumerate_configs(3)[:4]
    ens = ChainEnsemble(model, starts, 31)
    from isinglab import conditional_plus_prob

    for _ in range(2000):
        pre = ens.configs
        records = ens.step()
        u = records[0].node
        ps = [conditional_plus_prob(model, pre[i], u) for i in range(ens.k)]
        post = ens.configs
        outcomes = post[:, u]
        for i in range(ens.k):
            for j in range(ens.k):
                if ps[i] <= ps[j] and outcomes[i] == 1:
                    assert outcomes[j] == 1


def test_coalescence_matches_coupon_collection():
    # on independent spins the two coupled chains agree at a node as
    # soon as it is updated once, so the time to full agreement is
    # exactly the time to touch every node
    n, reps = 20, 3000
    model = IsingModel.empty(n)
    steps = math.ceil(n * math.log(n) + 2 * n)
    x0 = np.ones(n, dtype=np.int8)
    y0 = -x0
    rng = np.random.default_rng(99)
    children = rng.spawn(reps)
    not_coalesced = 0
    for child in children:
        finals = run_coupled(model, np.stack([x0, y0]), steps, child)
        not_coalesced += hamming(finals[0], finals[1]) > 0
    rate = not_coalesced / reps

    sim = np.random.default_rng(100)
    miss = 0
    for _ in range(reps):
        touched = np.unique(sim.integers(0, n, size=steps)).size
        miss += touched < n
    oracle = miss / reps

    stderr = math.sqrt((rate * (1 - rate) + oracle * (1 - oracle)) / reps + 1e-12)
    assert abs(rate - oracle) <= 3 * stderr + 1e-9
    # the classical bound at this step count
    assert rate <= math.exp(-2.0) + 3 * math.sqrt(0.1353 * 0.8647 / reps)


def test_hamming_trace_consistency():
    model = IsingModel.grid(3, 3, 0.2)
    x0 = np.ones(9, dtype=np.int8)
    y0 = -x0
    trace = hamming_trace(model, x0, y0, 400, 7)
    assert trace.shape == (400,)
    assert np.all(np.abs(np.diff(np.concatenate([[9], trace]))) <= 1)
    finals = run_coupled(model, np.stack([x0, y0]), 400, 7)
    assert trace[-1] == hamming(finals[0], finals[1])


def test_contraction_mean_distance_under_bound():
    model = IsingModel.grid(3, 3, 0.2)
    eta = dobrushin_slack(model).slack
    x0 = np.ones(9, dtype=np.int8)
    y0 = -x0
    t = 60
    mean, se = contraction_diagnostic(model, x0, y0, t, 2000, 17)
    bound = 9.0 * (1.0 - eta / 9.0) ** t
    assert mean <= bound + 3 * se


# --- replica plumbing ------------------------------------------------------

def test_sample_states_worker_invariance_and_determinism():
    model = IsingModel.grid(4, 4, 0.2)
    a = sample_states(model, 8, 300, 42, workers=1)
    b = sample_states(model, 8, 300, 42, workers=4)
    c = sample_states(model, 8, 300, 42)
    assert np.array_equal(a, b)
    assert np.array_equal(a, c)
    d = sample_states(model, 8, 300, 43)
    assert not np.array_equal(a, d)


def test_sample_states_fixed_start():
    model = IsingModel.empty(6)
    start = np.array([1, 1, -1, -1, 1, -1], dtype=np.int8)
    X = sample_states(model, 4, 0, 1, start=start)
    assert np.array_equal(X, np.tile(start, (4, 1)))


def test_contraction_diagnostic_worker_invariance():
    model = IsingModel.grid(3, 3, 0.2)
    x0 = np.ones(9, dtype=np.int8)
    a = contraction_diagnostic(model, x0, -x0, 50, 64, 3, workers=1)
    b = contraction_diagnostic(model, x0, -x0, 50, 64, 3, workers=4)
    assert a == b


def test_ensemble_validates_shapes():
    model = IsingModel.empty(4)
    with pytest.raises(ValueError):
        ChainEnsemble(model, np.ones((2, 3), dtype=np.int8))
    with pytest.raises(ValueError):
        sample_states(model, 0, 10, 1)


def test_schedule_type_is_value_like():
    assert MixingSchedule(5, 15, 1.0) == MixingSchedule(5, 15, 1.0)
