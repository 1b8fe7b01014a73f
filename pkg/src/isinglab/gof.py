"""Goodness-of-fit testing for the uniform (h, theta) Ising null.

The pipeline: fit the null parameters by pseudo-likelihood, reject
outright when the fitted coupling leaves the high-temperature region
(the gate), otherwise simulate the fitted null by Glauber dynamics,
score the observation against the simulated null distribution of a
recentered pair statistic, and convert its rank to a two-sided
empirical p-value.

A synthetic alternative for power studies lives here too: a grid
"departure" process in which every node tries to convert each of six
nearby nodes to its own value, succeeding with probability tau per
node, interpolating between independent spins (tau=0) and strong local
alignment (tau=1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dynamics import MixingSchedule, as_generator, mixing_schedule, sample_states
from .estimation import MpleResult, mple_fit, mple_fit_zero_field
from .model import IsingModel, dobrushin_slack
from .stats import MultilinearFn, centered_bilinear_eval, distance_pairs, pair_statistic

__all__ = [
    "GRID_CRITICAL_THETA",
    "DepartureSpec",
    "TestReport",
    "PowerPoint",
    "generate_departure",
    "null_distribution",
    "p_value",
    "run_test",
    "power_curve",
]

# Uniform-coupling threshold for the square-lattice gate: couplings at
# or below this keep the lattice model subcritical.
GRID_CRITICAL_THETA = math.log(1.0 + math.sqrt(2.0)) / 2.0

# Offsets a node at (i, j) may convert, column-major grid layout.
_DEPARTURE_OFFSETS = ((0, 1), (0, 2), (1, 1), (1, 0), (2, 0), (1, -1))


@dataclass(frozen=True)
class DepartureSpec:
    """Parameters of the synthetic departure process on a grid."""

    width: int
    height: int
    tau: float
    seed: int | None = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be positive")
        if not (0.0 <= self.tau <= 1.0):
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")


def generate_departure(
    spec: DepartureSpec, rng: int | np.random.Generator | None = None
) -> np.ndarray:
    """One draw of the departure process.

    Every node starts at an independent uniform spin.  Nodes are then
    visited in column-major order; the node at (i, j) attempts to
    convert each of the six offsets (i,j+1), (i,j+2), (i+1,j+1),
    (i+1,j), (i+2,j), (i+1,j-1) to its own current value, each attempt
    succeeding independently with probability tau.  Targets outside the
    grid are skipped; all six coins are drawn either way, so the random
    stream does not depend on boundary effects.  A node converted
    earlier in the pass spreads its new value when its own turn comes.
    """
    gen = as_generator(rng if rng is not None else spec.seed)
    w, h = spec.width, spec.height
    n = w * h
    x = (2 * gen.integers(0, 2, size=n) - 1).astype(np.int8)
    for v in range(n):
        i, j = divmod(v, h)
        coins = gen.random(6)
        for o, (di, dj) in enumerate(_DEPARTURE_OFFSETS):
            ti, tj = i + di, j + dj
            if 0 <= ti < w and 0 <= tj < h and coins[o] < spec.tau:
                x[ti * h + tj] = x[v]
    return x


def null_distribution(
    model: IsingModel,
    evaluator: Callable[[np.ndarray], np.ndarray],
    count: int,
    schedule: MixingSchedule,
    rng: int | np.random.Generator | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Statistic values on ``count`` independent equilibrated draws.

    Each replica starts at its own uniform random configuration and
    runs ``schedule.t_star`` updates; with that budget the start does
    not matter.  ``evaluator`` maps a batch of configurations (rows) to
    a value per row.  Deterministic given the seed, whatever ``workers``
    is.
    """
    if count < 1:
        raise ValueError("need at least one null replica")
    if dobrushin_slack(model).slack <= 0:
        raise ValueError("null simulation requires positive Dobrushin slack")
    X = sample_states(model, count, schedule.t_star, rng, workers=workers)
    values = np.asarray(evaluator(X), dtype=np.float64)
    if values.shape != (count,):
        raise ValueError(
            f"evaluator must return one value per replica, got shape {values.shape}"
        )
    return values


def p_value(null_values: np.ndarray, observed: float) -> float:
    """Two-sided empirical p-value with add-one smoothing.

    p = 2 min( (1 + #{null >= obs}) / (M+1), (1 + #{null <= obs}) / (M+1) ),
    clamped to 1.  Never returns 0: the observation itself counts once.
    """
    null_values = np.asarray(null_values, dtype=np.float64)
    if null_values.size == 0:
        raise ValueError("p-value needs at least one null value")
    m = null_values.size
    ge = int(np.count_nonzero(null_values >= observed))
    le = int(np.count_nonzero(null_values <= observed))
    p = 2.0 * min(1 + ge, 1 + le) / (m + 1)
    return min(1.0, p)


@dataclass(frozen=True)
class TestReport:
    """Everything the pipeline decided and why.

    When the gate fires (fitted coupling above the threshold, a
    degenerate fit, or a fit outside the high-temperature region) no
    null simulation is run: ``null_values`` is empty and ``p_value`` is
    None.  ``verdict`` is "reject" iff the gate fired or p <= alpha.
    """

    mple: MpleResult
    gate_rejected: bool
    threshold_used: float
    statistic_name: str
    observed_value: float
    null_values: np.ndarray
    p_value: float | None
    alpha: float
    verdict: str


def _resolve_statistic(
    model: IsingModel, statistic: str | MultilinearFn, k: int
) -> tuple[str, Callable[[np.ndarray, np.ndarray], np.ndarray]]:
    """Returns (name, evaluator(batch, centers) -> values)."""
    if isinstance(statistic, MultilinearFn):
        if statistic.degree <= 2:
            return "coeffs", lambda X, m: np.atleast_1d(
                centered_bilinear_eval(statistic, m, X)
            )
        # higher-degree custom statistics are evaluated uncentered
        return "coeffs", lambda X, m: np.atleast_1d(statistic.evaluate(X))
    if statistic == "zlocal":
        pairs = distance_pairs(model, 2)
        return "zlocal", lambda X, m: np.atleast_1d(pair_statistic(pairs, X, m))
    if statistic == "zk":
        pairs = distance_pairs(model, k)
        return f"z{k}", lambda X, m: np.atleast_1d(pair_statistic(pairs, X, m))
    raise ValueError(f"unknown statistic {statistic!r}")


def run_test(
    model: IsingModel,
    observation: np.ndarray,
    statistic: str | MultilinearFn = "zlocal",
    k: int = 2,
    alpha: float = 0.05,
    threshold: float | str = "grid-critical",
    null_samples: int = 100,
    multiplier: float = 1.0,
    zero_field: bool = True,
    rng: int | np.random.Generator | None = None,
    workers: int = 1,
) -> TestReport:
    """Full goodness-of-fit test of ``observation`` against the uniform
    Ising null on the graph of ``model`` (its stored parameters are
    ignored; only the structure matters).

    ``threshold`` is the gate on the fitted coupling: "grid-critical"
    for the lattice threshold, "dobrushin" to gate exactly when the
    fitted model leaves the high-temperature region, or a number.
    Whatever the threshold, a fitted null with non-positive Dobrushin
    slack is rejected at the gate, because the null simulation's step
    budget is only meaningful at high temperature.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    gen = as_generator(rng)
    fit = mple_fit_zero_field(model, observation) if zero_field else mple_fit(
        model, observation
    )

    if threshold == "grid-critical":
        threshold_used = GRID_CRITICAL_THETA
    elif threshold == "dobrushin":
        # uniform coupling keeps slack positive iff tanh|theta| < 1/max_degree
        deg = model.max_degree
        threshold_used = math.atanh(1.0 / deg) if deg > 1 else math.inf
    elif isinstance(threshold, str):
        raise ValueError(f"unknown threshold {threshold!r}")
    else:
        threshold_used = float(threshold)

    null_model = model.with_uniform(fit.theta_hat, fit.h_hat)
    slack = dobrushin_slack(null_model).slack
    gate = fit.theta_hat > threshold_used or fit.degenerate or slack <= 0.0

    name, evaluator = _resolve_statistic(model, statistic, k)
    centers = np.full(model.n, math.tanh(fit.h_hat))
    observed = float(evaluator(observation[None, :], centers)[0])

    if gate:
        return TestReport(
            mple=fit,
            gate_rejected=True,
            threshold_used=threshold_used,
            statistic_name=name,
            observed_value=observed,
            null_values=np.empty(0),
            p_value=None,
            alpha=alpha,
            verdict="reject",
        )

    schedule = mixing_schedule(null_model, multiplier, slack=slack)
    null_values = null_distribution(
        null_model,
        lambda X: evaluator(X, centers),
        null_samples,
        schedule,
        gen,
        workers=workers,
    )
    p = p_value(null_values, observed)
    return TestReport(
        mple=fit,
        gate_rejected=False,
        threshold_used=threshold_used,
        statistic_name=name,
        observed_value=observed,
        null_values=null_values,
        p_value=p,
        alpha=alpha,
        verdict="reject" if p <= alpha else "retain",
    )


@dataclass(frozen=True)
class PowerPoint:
    """Rejection rates at one departure strength."""

    tau: float
    stat_reject_rate: float
    gate_reject_rate: float
    reps: int


def power_curve(
    width: int,
    height: int,
    taus: list[float],
    reps: int,
    rng: int | np.random.Generator | None = None,
    alpha: float = 0.05,
    threshold: float | str = "grid-critical",
    null_samples: int = 100,
    multiplier: float = 1.0,
    workers: int = 1,
) -> list[PowerPoint]:
    """Rejection rates of the full test and of the gate alone against
    departure data, one row per tau.

    Each repetition draws a fresh departure sample and runs the whole
    pipeline on it with the local pair statistic.
    """
    if reps < 1:
        raise ValueError("need at least one repetition")
    gen = as_generator(rng)
    graph = IsingModel.grid(width, height, 0.0)
    rows = []
    for tau in taus:
        children = gen.spawn(reps)
        stat_hits = 0
        gate_hits = 0
        for i in range(reps):
            obs = generate_departure(DepartureSpec(width, height, float(tau)), children[i])
            report = run_test(
                graph,
                obs,
                statistic="zlocal",
                alpha=alpha,
                threshold=threshold,
                null_samples=null_samples,
                multiplier=multiplier,
                rng=children[i],
                workers=workers,
            )
            stat_hits += report.verdict == "reject"
            gate_hits += report.gate_rejected
        rows.append(
            PowerPoint(
                tau=float(tau),
                stat_reject_rate=stat_hits / reps,
                gate_reject_rate=gate_hits / reps,
                reps=reps,
            )
        )
    return rows
