"""Single-site Glauber dynamics, mixing-time schedules, and couplings.

Randomness contract: every stochastic routine takes either an integer
seed or a ``numpy.random.Generator`` (PCG64 via ``default_rng``).  Each
chain step consumes exactly one ``integers(0, n)`` call (node choice)
and one ``random()`` call (acceptance draw), in that order, so runs are
reproducible across entry points and chunk sizes.  Multi-replica
routines hand each replica a generator spawned from the parent, which
makes results independent of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import IsingModel, conditional_plus_prob, dobrushin_slack, validate_config

__all__ = [
    "StepRecord",
    "MixingSchedule",
    "mixing_schedule",
    "glauber_step",
    "run_chain",
    "sample_states",
    "ChainEnsemble",
    "coupled_step",
    "run_coupled",
    "hamming",
    "hamming_trace",
    "contraction_diagnostic",
    "transition_matrix",
    "random_config",
]


def as_generator(rng: int | np.random.Generator | None) -> np.random.Generator:
    """Normalise a seed or generator argument to a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def random_config(n: int, rng: int | np.random.Generator | None = None) -> np.ndarray:
    """Uniform random configuration in {-1,+1}^n."""
    gen = as_generator(rng)
    return (2 * gen.integers(0, 2, size=n) - 1).astype(np.int8)


@dataclass(frozen=True)
class StepRecord:
    """What one update did: the node chosen, the uniform draw spent on
    it, and whether the spin changed."""

    node: int
    draw: float
    flipped: bool


@dataclass(frozen=True)
class MixingSchedule:
    """Step budgets derived from the Dobrushin slack.

    ``t_mix`` is ``ceil(n log n / slack)``; after ``t_star`` steps the
    chain is within ``n**-multiplier`` of stationarity in total
    variation, which is what the sampling and testing routines use.
    """

    t_mix: int
    t_star: int
    multiplier: float


def mixing_schedule(
    model: IsingModel, multiplier: float = 1.0, slack: float | None = None
) -> MixingSchedule:
    """Conservative step counts for ``model`` at the requested accuracy.

    ``slack`` overrides the computed Dobrushin slack (useful when a
    sharper bound is known).  Raises if the model is not in the
    high-temperature regime.
    """
    if multiplier <= 0:
        raise ValueError(f"accuracy multiplier must be positive, got {multiplier}")
    if slack is None:
        slack = dobrushin_slack(model).slack
    if slack <= 0:
        raise ValueError(
            f"Dobrushin slack is {slack:.6g}; mixing guarantees need it positive"
        )
    n = model.n
    t_mix = max(1, math.ceil(n * math.log(n) / slack)) if n > 1 else 1
    t_star = math.ceil((multiplier + 2.0) * t_mix)
    return MixingSchedule(t_mix=t_mix, t_star=t_star, multiplier=multiplier)


def glauber_step(
    model: IsingModel, x: np.ndarray, rng: int | np.random.Generator | None = None
) -> tuple[np.ndarray, StepRecord]:
    """One update: pick a node uniformly, resample it from its
    conditional law.  Returns the new configuration and a record."""
    gen = as_generator(rng)
    x = validate_config(model, x).copy()
    u = int(gen.integers(0, model.n))
    draw = float(gen.random())
    p = conditional_plus_prob(model, x, u)
    new = np.int8(1) if draw < p else np.int8(-1)
    flipped = bool(new != x[u])
    x[u] = new
    return x, StepRecord(node=u, draw=draw, flipped=flipped)


def run_chain(
    model: IsingModel,
    start: np.ndarray,
    steps: int,
    rng: int | np.random.Generator | None = None,
) -> np.ndarray:
    """Run one chain for ``steps`` updates; returns the final
    configuration.  Equivalent to folding ``glauber_step``, draw for
    draw."""
    if steps < 0:
        raise ValueError("step count must be nonnegative")
    gen = as_generator(rng)
    x = validate_config(model, start).copy()
    _kernels.glauber_run(
        gen, model.indptr, model.indices, model.weights, model.field, x, steps
    )
    return x


def _replica_starts(
    model: IsingModel,
    count: int,
    start: np.ndarray | None,
    children: list[np.random.Generator],
) -> np.ndarray:
    if start is not None:
        base = validate_config(model, start)
        return np.tile(base, (count, 1))
    rows = [random_config(model.n, children[i]) for i in range(count)]
    return np.stack(rows)


def sample_states(
    model: IsingModel,
    count: int,
    steps: int,
    rng: int | np.random.Generator | None = None,
    start: np.ndarray | None = None,
    workers: int = 1,
) -> np.ndarray:
    """``count`` independent chains run for ``steps`` updates each.

    Without ``start`` every replica begins at its own uniform random
    configuration.  Each replica consumes a spawned child generator, so
    the output depends only on the seed, not on ``workers``.
    """
    if count < 1:
        raise ValueError("need at least one replica")
    gen = as_generator(rng)
    children = gen.spawn(count)
    out = _replica_starts(model, count, start, children)

    def one(i: int) -> None:
        _kernels.glauber_run(
            children[i],
            model.indptr,
            model.indices,
            model.weights,
            model.field,
            out[i],
            steps,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(count)))
    else:
        for i in range(count):
            one(i)
    return out


class ChainEnsemble:
    """Several chains on one model advanced under the shared-draw
    coupling.

    Each step picks a single node and a single uniform draw used by
    every chain; chain ``i`` sets the node to +1 exactly when the draw
    is below its own conditional probability.  Ordering the chains by
    that probability shows this is the monotone rule: the draw landing
    between two thresholds sends the low-probability chains to -1 and
    the rest to +1.  Marginally each chain still follows plain Glauber
    dynamics.
    """

    def __init__(
        self,
        model: IsingModel,
        configs: np.ndarray,
        rng: int | np.random.Generator | None = None,
    ):
        configs = np.asarray(configs)
        if configs.ndim != 2 or configs.shape[1] != model.n:
            raise ValueError(
                f"configs must be (k, {model.n}), got {configs.shape}"
            )
        self.model = model
        self._configs = np.stack([validate_config(model, row) for row in configs])
        self._rng = as_generator(rng)
        self.step_count = 0

    @property
    def k(self) -> int:
        return self._configs.shape[0]

    @property
    def configs(self) -> np.ndarray:
        """Current configurations, one chain per row (copy)."""
        return self._configs.copy()

    def step(self) -> list[StepRecord]:
        """Advance every chain by one coupled update."""
        u = int(self._rng.integers(0, self.model.n))
        draw = float(self._rng.random())
        records = []
        for i in range(self.k):
            p = conditional_plus_prob(self.model, self._configs[i], u)
            new = np.int8(1) if draw < p else np.int8(-1)
            records.append(
                StepRecord(node=u, draw=draw, flipped=bool(new != self._configs[i, u]))
            )
            self._configs[i, u] = new
        self.step_count += 1
        return records

    def run(self, steps: int) -> None:
        """Advance ``steps`` coupled updates through the compiled
        kernel (same draw-for-draw stream as ``step``)."""
        _kernels.coupled_run(
            self._rng,
            self.model.indptr,
            self.model.indices,
            self.model.weights,
            self.model.field,
            self._configs,
            steps,
        )
        self.step_count += steps


def coupled_step(ensemble: ChainEnsemble) -> tuple[ChainEnsemble, list[StepRecord]]:
    """One shared-draw update of the ensemble; returns it with the
    per-chain records."""
    records = ensemble.step()
    return ensemble, records


def run_coupled(
    model: IsingModel,
    starts: np.ndarray,
    steps: int,
    rng: int | np.random.Generator | None = None,
) -> np.ndarray:
    """Advance coupled chains from ``starts`` (one per row) and return
    the final configurations."""
    ens = ChainEnsemble(model, starts, rng)
    ens.run(steps)
    return ens.configs


def hamming(x: np.ndarray, y: np.ndarray) -> int:
    """Number of coordinates where two configurations differ."""
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    return int(np.count_nonzero(x != y))


def hamming_trace(
    model: IsingModel,
    x0: np.ndarray,
    y0: np.ndarray,
    steps: int,
    rng: int | np.random.Generator | None = None,
) -> np.ndarray:
    """Hamming distance between two coupled chains after each step."""
    gen = as_generator(rng)
    xa = validate_config(model, x0).copy()
    xb = validate_config(model, y0).copy()
    trace = np.empty(steps, dtype=np.int64)
    _kernels.coupled_pair_trace(
        gen, model.indptr, model.indices, model.weights, model.field, xa, xb,
        steps, trace,
    )
    return trace


def contraction_diagnostic(
    model: IsingModel,
    x0: np.ndarray,
    y0: np.ndarray,
    steps: int,
    reps: int,
    rng: int | np.random.Generator | None = None,
    workers: int = 1,
) -> tuple[float, float]:
    """Mean Hamming distance of coupled pairs after ``steps`` updates,
    estimated over ``reps`` independent runs.  Returns (mean, standard
    error)."""
    if reps < 2:
        raise ValueError("need at least two repetitions for a standard error")
    gen = as_generator(rng)
    children = gen.spawn(reps)
    xa0 = validate_config(model, x0)
    xb0 = validate_config(model, y0)
    dists = np.empty(reps, dtype=np.float64)

    def one(i: int) -> None:
        dists[i] = _kernels.coupled_pair_final(
            children[i],
            model.indptr,
            model.indices,
            model.weights,
            model.field,
            xa0.copy(),
            xb0.copy(),
            steps,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(reps)))
    else:
        for i in range(reps):
            one(i)
    mean = float(dists.mean())
    stderr = float(dists.std(ddof=1) / math.sqrt(reps))
    return mean, stderr


def transition_matrix(model: IsingModel, cap: int = 12) -> np.ndarray:
    """Dense one-step transition matrix over all 2^n configurations.

    Row order matches ``enumerate_configs``.  Only meant for small
    exactness checks; refuses n > cap.
    """
    from .model import enumerate_configs

    if model.n > cap:
        raise ValueError(f"transition matrix needs n <= {cap}, got n={model.n}")
    configs = enumerate_configs(model.n)
    size = configs.shape[0]
    n = model.n
    T = np.zeros((size, size), dtype=np.float64)
    for i in range(size):
        x = configs[i]
        for u in range(n):
            p = conditional_plus_prob(model, x, u)
            bit = 1 << u
            j_plus = i | bit
            j_minus = i & ~bit
            T[i, j_plus] += p / n
            T[i, j_minus] += (1.0 - p) / n
    return T
