"""Ising models on finite graphs, with exact computations for small instances.

Conventions used throughout the package:

* A model on ``n`` nodes assigns each spin configuration ``x`` in
  ``{-1,+1}^n`` probability proportional to
  ``exp(sum_v field[v]*x[v] + sum_{(u,v)} weight[u,v]*x[u]*x[v])``,
  the sum running over the undirected edges of the interaction graph.
* Configurations are numpy ``int8`` arrays of +1/-1 entries.  Functions
  never mutate a configuration they were given unless documented to.
* Node ids are ``0..n-1``.  Edges are stored once (``u < v``) and the
  adjacency is also kept in CSR form for fast per-node access.

High temperature, wherever the package needs it, means positive
Dobrushin slack: ``1 - max_v sum_{u != v} tanh|weight[u,v]| > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "IsingModel",
    "ExactDistribution",
    "DobrushinReport",
    "BRUTE_FORCE_CAP",
    "enumerate_configs",
    "validate_config",
    "log_weight",
    "conditional_plus_prob",
    "exact_pmf",
    "exact_expectation",
    "dobrushin_slack",
]

# Exact enumeration walks all 2^n states; past this it is refused.
BRUTE_FORCE_CAP = 20


class IsingModel:
    """Pairwise interaction model over +1/-1 spins on a finite graph.

    Parameters
    ----------
    n:
        Number of nodes.
    edges:
        Iterable of ``(u, v, weight)`` triples with ``u != v``.  Each
        unordered pair may appear at most once.
    field:
        Per-node external field, length ``n``.  Omitted means zero.

    Instances are immutable: the arrays exposed as attributes are
    read-only views and should be treated as such.
    """

    __slots__ = (
        "n",
        "field",
        "edge_u",
        "edge_v",
        "edge_weight",
        "indptr",
        "indices",
        "weights",
        "grid_shape",
    )

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int, float]] = (),
        field: Sequence[float] | np.ndarray | None = None,
        grid_shape: tuple[int, int] | None = None,
    ):
        if n < 1:
            raise ValueError(f"need at least one node, got n={n}")
        self.n = int(n)

        if field is None:
            h = np.zeros(n, dtype=np.float64)
        else:
            h = np.asarray(field, dtype=np.float64).copy()
            if h.shape != (n,):
                raise ValueError(f"field must have shape ({n},), got {h.shape}")
            if not np.all(np.isfinite(h)):
                raise ValueError("field entries must be finite")

        triples = [(int(u), int(v), float(w)) for u, v, w in edges]
        seen: set[tuple[int, int]] = set()
        for u, v, w in triples:
            if u == v:
                raise ValueError(f"self-interaction on node {u} is not allowed")
            if not (0 <= u < n and 0 <= v < n):
                raise IndexError(f"edge ({u},{v}) references a node outside 0..{n - 1}")
            if not np.isfinite(w):
                raise ValueError(f"edge ({u},{v}) has non-finite weight")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge between {key[0]} and {key[1]}")
            seen.add(key)

        m = len(triples)
        eu = np.empty(m, dtype=np.int64)
        ev = np.empty(m, dtype=np.int64)
        ew = np.empty(m, dtype=np.float64)
        for i, (u, v, w) in enumerate(triples):
            eu[i], ev[i], ew[i] = min(u, v), max(u, v), w
        order = np.lexsort((ev, eu))
        eu, ev, ew = eu[order], ev[order], ew[order]

        # CSR over the symmetrised edge set.
        deg = np.zeros(n, dtype=np.int64)
        np.add.at(deg, eu, 1)
        np.add.at(deg, ev, 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = np.empty(2 * m, dtype=np.int64)
        weights = np.empty(2 * m, dtype=np.float64)
        fill = indptr[:-1].copy()
        for u, v, w in zip(eu, ev, ew):
            indices[fill[u]] = v
            weights[fill[u]] = w
            fill[u] += 1
            indices[fill[v]] = u
            weights[fill[v]] = w
            fill[v] += 1

        for arr in (h, eu, ev, ew, indptr, indices, weights):
            arr.flags.writeable = False
        self.field = h
        self.edge_u, self.edge_v, self.edge_weight = eu, ev, ew
        self.indptr, self.indices, self.weights = indptr, indices, weights
        self.grid_shape = grid_shape

    @classmethod
    def grid(
        cls, width: int, height: int, theta: float, h: float = 0.0
    ) -> "IsingModel":
        """Nearest-neighbour lattice with uniform coupling and field.

        Node ``(i, j)`` (column ``i``, row ``j``) has id ``i * height + j``.
        """
        if width < 1 or height < 1:
            raise ValueError("grid dimensions must be positive")
        edges = []
        for i in range(width):
            for j in range(height):
                v = i * height + j
                if j + 1 < height:
                    edges.append((v, v + 1, theta))
                if i + 1 < width:
                    edges.append((v, v + height, theta))
        n = width * height
        field = np.full(n, h, dtype=np.float64)
        return cls(n, edges, field, grid_shape=(width, height))

    @classmethod
    def empty(cls, n: int, h: float = 0.0) -> "IsingModel":
        """Model with no interactions: n independent spins."""
        return cls(n, (), np.full(n, h, dtype=np.float64))

    @property
    def n_edges(self) -> int:
        return self.edge_u.shape[0]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def max_degree(self) -> int:
        if self.n_edges == 0:
            return 0
        return int(np.max(np.diff(self.indptr)))

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbour ids and coupling weights of node ``v`` (read-only views)."""
        if not (0 <= v < self.n):
            raise IndexError(f"node {v} outside 0..{self.n - 1}")
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def with_uniform(self, theta: float, h: float = 0.0) -> "IsingModel":
        """Same graph, every coupling set to ``theta`` and every field to ``h``."""
        edges = zip(self.edge_u, self.edge_v, np.full(self.n_edges, theta))
        return IsingModel(
            self.n, edges, np.full(self.n, h), grid_shape=self.grid_shape
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IsingModel):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.edge_u, other.edge_u)
            and np.array_equal(self.edge_v, other.edge_v)
            and np.array_equal(self.edge_weight, other.edge_weight)
            and np.array_equal(self.field, other.field)
        )

    def __repr__(self) -> str:
        return f"IsingModel(n={self.n}, edges={self.n_edges})"


def validate_config(model: IsingModel, x: np.ndarray) -> np.ndarray:
    """Check shape and +1/-1 entries; returns ``x`` as an int8 array."""
    x = np.asarray(x)
    if x.shape != (model.n,):
        raise ValueError(f"configuration must have shape ({model.n},), got {x.shape}")
    x = x.astype(np.int8, copy=False)
    if not np.all(np.abs(x) == 1):
        raise ValueError("configuration entries must be +1 or -1")
    return x


def log_weight(model: IsingModel, x: np.ndarray) -> float:
    """Unnormalised log probability of configuration ``x``."""
    x = validate_config(model, x)
    xf = x.astype(np.float64)
    pair = float(np.dot(model.edge_weight, xf[model.edge_u] * xf[model.edge_v]))
    return float(np.dot(model.field, xf)) + pair


def conditional_plus_prob(model: IsingModel, x: np.ndarray, u: int) -> float:
    """Probability that node ``u`` is +1 given all other spins of ``x``.

    Equals ``sigmoid(2 * (field[u] + sum_{v ~ u} weight[u,v] * x[v]))``.
    """
    if not (0 <= u < model.n):
        raise IndexError(f"node {u} outside 0..{model.n - 1}")
    x = validate_config(model, x)
    nbr, w = model.neighbors(u)
    local = model.field[u] + float(np.dot(w, x[nbr].astype(np.float64)))
    # sigmoid(2*local), written to stay finite for any field strength
    if local >= 0:
        return float(1.0 / (1.0 + np.exp(-2.0 * local)))
    e = np.exp(2.0 * local)
    return float(e / (1.0 + e))


def enumerate_configs(n: int) -> np.ndarray:
    """All 2^n configurations, one per row; row ``i`` has node ``j`` at +1
    iff bit ``j`` of ``i`` is set."""
    if n > BRUTE_FORCE_CAP:
        raise ValueError(
            f"enumeration over n={n} nodes exceeds the cap of {BRUTE_FORCE_CAP}"
        )
    idx = np.arange(2**n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n)) & 1
    return (2 * bits - 1).astype(np.int8)


@dataclass(frozen=True)
class ExactDistribution:
    """Exhaustive probability table over all 2^n spin configurations."""

    configs: np.ndarray
    probs: np.ndarray
    log_z: float

    @property
    def n(self) -> int:
        return self.configs.shape[1]

    def index_of(self, x: np.ndarray) -> int:
        x = np.asarray(x)
        bits = (x > 0).astype(np.int64)
        return int(np.dot(bits, 1 << np.arange(self.n, dtype=np.int64)))

    def prob(self, x: np.ndarray) -> float:
        return float(self.probs[self.index_of(x)])

    def expectation(self, f: Callable[[np.ndarray], float]) -> float:
        vals = np.array([f(row) for row in self.configs], dtype=np.float64)
        return float(np.dot(vals, self.probs))

    def marginals(self) -> np.ndarray:
        """``E[X_v]`` for every node."""
        return self.configs.astype(np.float64).T @ self.probs


def exact_pmf(model: IsingModel, cap: int = BRUTE_FORCE_CAP) -> ExactDistribution:
    """Exact distribution by full enumeration.  Refuses n > cap."""
    if model.n > cap:
        raise ValueError(f"exact enumeration needs n <= {cap}, got n={model.n}")
    configs = enumerate_configs(model.n)
    xf = configs.astype(np.float64)
    logw = xf @ model.field
    if model.n_edges:
        logw = logw + (xf[:, model.edge_u] * xf[:, model.edge_v]) @ model.edge_weight
    # log-sum-exp normalisation
    top = float(np.max(logw))
    z = np.exp(logw - top)
    total = float(z.sum())
    probs = z / total
    probs.flags.writeable = False
    configs.flags.writeable = False
    return ExactDistribution(configs=configs, probs=probs, log_z=top + np.log(total))


def exact_expectation(
    model: IsingModel,
    f: Callable[[np.ndarray], float],
    cap: int = BRUTE_FORCE_CAP,
) -> float:
    """Exact ``E[f(X)]`` by enumeration.  Refuses n > cap."""
    return exact_pmf(model, cap=cap).expectation(f)


@dataclass(frozen=True)
class DobrushinReport:
    """Interaction-strength summary.

    ``slack`` is ``1 - max_v sum_{u != v} tanh|weight[u,v]|``; positive
    slack is the high-temperature regime the mixing and tail machinery
    relies on.  ``influence`` holds the per-node sums, ``worst_node`` the
    argmax.
    """

    slack: float
    worst_node: int
    influence: np.ndarray

    @property
    def high_temperature(self) -> bool:
        return self.slack > 0.0


def dobrushin_slack(model: IsingModel) -> DobrushinReport:
    """Per-node influence sums and the resulting slack."""
    influence = np.zeros(model.n, dtype=np.float64)
    if model.n_edges:
        t = np.tanh(np.abs(model.edge_weight))
        np.add.at(influence, model.edge_u, t)
        np.add.at(influence, model.edge_v, t)
    worst = int(np.argmax(influence)) if model.n else 0
    influence.flags.writeable = False
    return DobrushinReport(
        slack=float(1.0 - influence[worst]), worst_node=worst, influence=influence
    )
