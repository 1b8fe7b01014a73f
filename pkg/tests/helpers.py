"""Shared test utilities: random model factories and small oracles."""

from __future__ import annotations

import numpy as np

from isinglab import IsingModel, dobrushin_slack


def random_high_temp_model(
    rng: np.random.Generator,
    n_max: int = 10,
    zero_field: bool = True,
    min_slack: float = 0.05,
) -> IsingModel:
    """Random graph with couplings rescaled until the Dobrushin slack
    clears ``min_slack``."""
    n = int(rng.integers(2, n_max + 1))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]
    raw = rng.uniform(-1.0, 1.0, size=len(pairs))
    field = None if zero_field else rng.uniform(-0.5, 0.5, size=n)
    scale = 1.0
    for _ in range(60):
        model = IsingModel(
            n, [(u, v, w * scale) for (u, v), w in zip(pairs, raw)], field
        )
        if dobrushin_slack(model).slack >= min_slack:
            return model
        scale *= 0.5
    raise AssertionError("could not scale the model into the high-temperature region")


def random_model(rng: np.random.Generator, n_max: int = 8) -> IsingModel:
    """Random graph with unrestricted couplings and fields (any
    temperature)."""
    n = int(rng.integers(2, n_max + 1))
    edges = [
        (u, v, float(rng.uniform(-1.5, 1.5)))
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < 0.5
    ]
    field = rng.uniform(-1.0, 1.0, size=n)
    return IsingModel(n, edges, field)
