"""Multilinear statistics of spin configurations and their deviation
bounds.

A multilinear function is a finite sum ``sum_S a_S prod_{i in S} x_i``
over nonempty sets of distinct nodes.  For such statistics on
high-temperature models the package provides exponential upper bounds
on ``P(|f(X)| >= r)`` driven by the Dobrushin slack, a matching
lower-bound curve for the independent-spin case showing the exponent is
the right one, empirical tail estimators, and a bound on sums of
d-fold marginal products.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .model import BRUTE_FORCE_CAP, IsingModel, exact_pmf

__all__ = [
    "MultilinearFn",
    "TailBoundQuery",
    "TailBound",
    "EmpiricalTail",
    "empirical_tail",
    "binomial_stderr",
    "bilinear_tail_bound",
    "multilinear_tail_bound",
    "default_constants",
    "empty_graph_lower_bound",
    "marginal_sum_bound",
    "marginal_sum_exact",
    "centered_bilinear_eval",
    "two_sample_bilinear_eval",
    "graph_distances_from",
    "distance_pairs",
    "graph_distance_statistic",
    "all_pairs_fn",
    "distance_fn",
    "distinct_ordered_sum",
]


def _normalise_terms(
    coeffs: Mapping[tuple[int, ...], float] | Iterable[tuple[tuple[int, ...], float]],
    n: int,
) -> dict[tuple[int, ...], float]:
    items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    out: dict[tuple[int, ...], float] = {}
    for subset, a in items:
        key = tuple(sorted(int(i) for i in subset))
        if len(key) == 0:
            raise ValueError("empty subsets (constant terms) are not representable")
        if len(set(key)) != len(key):
            raise ValueError(f"subset {subset} repeats a node")
        if key[0] < 0 or key[-1] >= n:
            raise IndexError(f"subset {subset} references a node outside 0..{n - 1}")
        if key in out:
            raise ValueError(f"coefficient for subset {key} given twice")
        a = float(a)
        if not math.isfinite(a):
            raise ValueError(f"coefficient for subset {key} is not finite")
        if a != 0.0:
            out[key] = a
    return out


class MultilinearFn:
    """Sparse multilinear statistic ``sum_S a_S prod_{i in S} x_i``.

    Coefficients are keyed by sorted tuples of distinct node ids, so any
    index ordering refers to the same term.  Zero coefficients are
    dropped.  Instances are immutable.
    """

    __slots__ = ("n", "coeffs", "degree", "inf_norm", "_by_size")

    def __init__(
        self,
        n: int,
        coeffs: Mapping[tuple[int, ...], float]
        | Iterable[tuple[tuple[int, ...], float]],
    ):
        self.n = int(n)
        self.coeffs = _normalise_terms(coeffs, self.n)
        self.degree = max((len(s) for s in self.coeffs), default=0)
        self.inf_norm = max((abs(a) for a in self.coeffs.values()), default=0.0)
        by_size: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for size in {len(s) for s in self.coeffs}:
            keys = sorted(s for s in self.coeffs if len(s) == size)
            idx = np.array(keys, dtype=np.int64).reshape(len(keys), size)
            vals = np.array([self.coeffs[k] for k in keys], dtype=np.float64)
            by_size[size] = (idx, vals)
        self._by_size = by_size

    def evaluate(self, x: np.ndarray) -> float | np.ndarray:
        """Value at one configuration, or a vector of values for a
        batch given as rows."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        X = x[None, :] if single else x
        if X.shape[1] != self.n:
            raise ValueError(f"configurations must have {self.n} entries")
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for idx, vals in self._by_size.values():
            acc += np.prod(X[:, idx], axis=2) @ vals
        return float(acc[0]) if single else acc

    def restrict(self, pins: Iterable[int]) -> "MultilinearFn":
        """Pin the given nodes out of the function.

        The result keeps every monomial whose support contains all pins,
        with the pins deleted and the coefficient unchanged.  A monomial
        equal to the pin set would leave a constant behind, which this
        representation cannot store; the pin count must stay below the
        degree so the result is a genuine lower-degree statistic.
        """
        pins = tuple(int(v) for v in pins)
        if len(set(pins)) != len(pins):
            raise ValueError("pinned nodes must be distinct")
        if len(pins) >= self.degree:
            raise ValueError(
                f"can pin at most {self.degree - 1} nodes of a degree-{self.degree} function"
            )
        pinset = set(pins)
        new: dict[tuple[int, ...], float] = {}
        for subset, a in self.coeffs.items():
            if pinset.issubset(subset):
                rest = tuple(i for i in subset if i not in pinset)
                if rest:
                    new[rest] = a
        return MultilinearFn(self.n, new)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultilinearFn):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return (
            f"MultilinearFn(n={self.n}, terms={len(self.coeffs)}, "
            f"degree={self.degree})"
        )


def all_pairs_fn(n: int, value: float = 1.0) -> MultilinearFn:
    """Coefficient ``value`` on every unordered pair of nodes."""
    coeffs = {(u, v): value for u in range(n) for v in range(u + 1, n)}
    return MultilinearFn(n, coeffs)


def graph_distances_from(model: IsingModel, source: int, cutoff: int) -> np.ndarray:
    """Graph distances from ``source``, breadth-first, truncated at
    ``cutoff``; unreached nodes get -1."""
    dist = np.full(model.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if dist[u] == cutoff:
            continue
        nbr, _ = model.neighbors(u)
        for v in nbr:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(int(v))
    return dist


def distance_pairs(model: IsingModel, k: int) -> np.ndarray:
    """Unordered node pairs (u < v) at graph distance between 1 and
    ``k``, as an (m, 2) array."""
    if k < 1:
        raise ValueError("distance cutoff must be at least 1")
    pairs = []
    for u in range(model.n):
        dist = graph_distances_from(model, u, k)
        for v in np.nonzero(dist > 0)[0]:
            if v > u:
                pairs.append((u, int(v)))
    return np.array(pairs, dtype=np.int64).reshape(len(pairs), 2)


def distance_fn(model: IsingModel, k: int, value: float = 1.0) -> MultilinearFn:
    """Coefficient ``value`` on every unordered pair at graph distance
    at most ``k``."""
    pairs = distance_pairs(model, k)
    return MultilinearFn(model.n, {(int(u), int(v)): value for u, v in pairs})


def graph_distance_statistic(
    model: IsingModel, k: int, x: np.ndarray, m: np.ndarray | None = None
) -> float | np.ndarray:
    """Recentered pair statistic over ordered pairs within graph
    distance ``k``.

    ``Z_k = sum over ordered pairs (u, v), u != v, d(u,v) <= k of
    (x_u - m_u)(x_v - m_v)``; the ordered-pair convention makes it twice
    the unordered sum.  Self-pairs are excluded: their squared factors
    carry no sign information and only dilute the statistic.  Accepts a
    batch of configurations as rows.
    """
    pairs = distance_pairs(model, k)
    return pair_statistic(pairs, x, m)


def pair_statistic(
    pairs: np.ndarray, x: np.ndarray, m: np.ndarray | None = None
) -> float | np.ndarray:
    """Ordered-pair sum 2 * sum_{(u,v) in pairs} (x_u - m_u)(x_v - m_v)
    for precomputed unordered pairs; batch rows welcome."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    c = X if m is None else X - np.asarray(m, dtype=np.float64)[None, :]
    if pairs.shape[0] == 0:
        out = np.zeros(X.shape[0])
    else:
        out = 2.0 * np.sum(c[:, pairs[:, 0]] * c[:, pairs[:, 1]], axis=1)
    return float(out[0]) if single else out


def centered_bilinear_eval(
    fn: MultilinearFn, m: np.ndarray, x: np.ndarray
) -> float | np.ndarray:
    """``sum a_uv (x_u - m_u)(x_v - m_v)`` for a degree-2 function.

    Linear terms of ``fn``, if present, are centered the same way.
    """
    if fn.degree > 2:
        raise ValueError(f"centered evaluation needs degree <= 2, got {fn.degree}")
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (fn.n,):
        raise ValueError(f"means must have shape ({fn.n},), got {m.shape}")
    if np.any(np.abs(m) > 1.0 + 1e-12):
        raise ValueError("per-node means must lie in [-1, 1]")
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    c = X - m[None, :]
    acc = np.zeros(X.shape[0], dtype=np.float64)
    for idx, vals in fn._by_size.values():
        acc += np.prod(c[:, idx], axis=2) @ vals
    return float(acc[0]) if single else acc


def two_sample_bilinear_eval(
    fn: MultilinearFn, x1: np.ndarray, x2: np.ndarray
) -> float:
    """``sum a_uv (x1_u - x2_u)(x1_v - x2_v)`` for a degree-2 function."""
    if fn.degree > 2:
        raise ValueError(f"two-sample evaluation needs degree <= 2, got {fn.degree}")
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.shape != x2.shape:
        raise ValueError(f"sample shapes differ: {x1.shape} vs {x2.shape}")
    d = x1 - x2
    acc = 0.0
    for idx, vals in fn._by_size.values():
        acc += float(np.prod(d[idx], axis=1) @ vals)
    return acc


# ---------------------------------------------------------------------------
# Tail bounds

# Rate and validity-radius constants of the pair-statistic bound.
BILINEAR_C1 = 300.0
BILINEAR_C2 = 1735.0


class TailBound(NamedTuple):
    """A bound value and whether the queried radius is inside the
    bound's validity range.  The raw value can exceed 1 near the
    validity edge; reports clamp it."""

    bound: float
    radius_valid: bool


@dataclass(frozen=True)
class TailBoundQuery:
    """Inputs of a deviation-bound evaluation: model size ``n``,
    Dobrushin slack ``eta``, coefficient sup-norm, statistic degree, and
    the deviation radius."""

    n: int
    eta: float
    inf_norm: float
    degree: int
    radius: float

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"slack must be in (0, 1], got {self.eta}")
        if self.radius <= 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.degree < 1:
            raise ValueError(f"degree must be at least 1, got {self.degree}")
        if self.inf_norm <= 0.0:
            raise ValueError(f"coefficient norm must be positive, got {self.inf_norm}")
        if self.n < 2:
            raise ValueError("bounds need at least two nodes")


def bilinear_tail_bound(q: TailBoundQuery) -> TailBound:
    """Exponential bound on P(|f(X)| >= r) for degree-2 statistics.

    bound = 5 exp(-eta r / (1735 |a|_inf n ln n)), valid for
    r >= 300 |a|_inf n ln^2 n / eta + 2.
    """
    if q.degree != 2:
        raise ValueError(f"this bound is for degree 2, got degree {q.degree}")
    ln_n = math.log(q.n)
    bound = 5.0 * math.exp(-q.eta * q.radius / (BILINEAR_C2 * q.inf_norm * q.n * ln_n))
    threshold = BILINEAR_C1 * q.inf_norm * q.n * ln_n * ln_n / q.eta + 2.0
    return TailBound(bound=bound, radius_valid=q.radius >= threshold)


def default_constants(degree: int) -> tuple[float, float]:
    """Rate constants for the degree-d bound.

    Degree 2 uses the pair-statistic constants.  No usable values are
    known to us beyond degree 2, so higher degrees scale them by d! as a
    deliberately conservative placeholder; override per call when a
    sharper pair is available.
    """
    if degree <= 2:
        return BILINEAR_C1, BILINEAR_C2
    fact = float(math.factorial(degree))
    return BILINEAR_C1 * fact, BILINEAR_C2 * fact


def multilinear_tail_bound(
    q: TailBoundQuery, c1: float | None = None, c2: float | None = None
) -> TailBound:
    """Exponential bound on P(|f(X)| >= r) for degree-d statistics.

    bound = 2 exp(-eta r^{2/d} / (c2 |a|_inf^{2/d} n ln n)), valid for
    r >= c1 |a|_inf (n ln^2 n / eta)^{d/2}.  At d=2 the exponent matches
    the dedicated bilinear bound; only the prefactor differs.
    """
    if c1 is None or c2 is None:
        d1, d2 = default_constants(q.degree)
        c1 = d1 if c1 is None else c1
        c2 = d2 if c2 is None else c2
    if c1 <= 0 or c2 <= 0:
        raise ValueError("rate constants must be positive")
    d = q.degree
    ln_n = math.log(q.n)
    expo = -q.eta * q.radius ** (2.0 / d) / (c2 * q.inf_norm ** (2.0 / d) * q.n * ln_n)
    bound = 2.0 * math.exp(expo)
    threshold = c1 * q.inf_norm * (q.n * ln_n * ln_n / q.eta) ** (d / 2.0)
    return TailBound(bound=bound, radius_valid=q.radius >= threshold)


def empty_graph_lower_bound(n: int, r: float) -> float:
    """Lower bound on P(|f(X)| > r) for the all-ordered-pairs statistic
    f = sum_{u != v} X_u X_v under n independent symmetric spins:
    exp(-9/4) exp(-9r / (8n)).  Witnesses that the pair bound's
    exponential rate in r/n cannot be improved."""
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    return math.exp(-2.25) * math.exp(-9.0 * r / (8.0 * n))


def marginal_sum_bound(n: int, eta: float, d: int) -> float:
    """Bound on |sum over d-tuples of E[X_{u_1} ... X_{u_d}]| (indices
    ranging independently): 2 (4 n d ln n / eta)^{d/2}."""
    if eta <= 0:
        raise ValueError(f"slack must be positive, got {eta}")
    if d < 1:
        raise ValueError(f"degree must be at least 1, got {d}")
    return 2.0 * (4.0 * n * d * math.log(n) / eta) ** (d / 2.0)


def marginal_sum_exact(
    model: IsingModel, d: int, cap: int = BRUTE_FORCE_CAP
) -> float:
    """Exact |E[(sum_v X_v)^d]| by enumeration; the power expands to the
    sum over all d-tuples of marginal products."""
    dist = exact_pmf(model, cap=cap)
    s = dist.configs.astype(np.float64).sum(axis=1)
    return abs(float(np.dot(s**d, dist.probs)))


# ---------------------------------------------------------------------------
# Empirical tails

@dataclass(frozen=True)
class EmpiricalTail:
    """Monte-Carlo estimate of a deviation tail.

    Holds the sorted absolute deviations |value - center|; the tail at
    radius r is the fraction of deviations >= r (closed tail, matching
    the bounds' left-hand sides).
    """

    sample_count: int
    sorted_deviations: np.ndarray
    center: float

    def query(self, r: float | np.ndarray) -> float | np.ndarray:
        """Fraction of deviations at least ``r``; non-increasing and
        right-continuous in ``r``."""
        pos = np.searchsorted(self.sorted_deviations, r, side="left")
        out = (self.sample_count - pos) / self.sample_count
        return float(out) if np.isscalar(r) else np.asarray(out, dtype=np.float64)

    def stderr(self, r: float | np.ndarray) -> float | np.ndarray:
        return binomial_stderr(self.query(r), self.sample_count)


def empirical_tail(values: np.ndarray, center: float) -> EmpiricalTail:
    """Build the tail estimator from raw statistic values.

    Center with an exact mean when one is computable, otherwise with the
    mean of an independent batch; centering by the same batch would bias
    the tail downward.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("need at least one value")
    dev = np.sort(np.abs(values - float(center)))
    dev.flags.writeable = False
    return EmpiricalTail(
        sample_count=values.size, sorted_deviations=dev, center=float(center)
    )


def binomial_stderr(p_hat: float | np.ndarray, count: int) -> float | np.ndarray:
    """Standard error of an empirical proportion."""
    p = np.asarray(p_hat, dtype=np.float64)
    out = np.sqrt(p * (1.0 - p) / count)
    return float(out) if np.isscalar(p_hat) else out


def distinct_ordered_sum(x: np.ndarray, degree: int) -> float | np.ndarray:
    """Sum of spin products over ordered tuples of distinct nodes.

    For +1/-1 entries this reduces to a polynomial in the plain sum
    S = sum_i x_i, which makes large-n tail experiments cheap:
    degree 2 gives S^2 - n, the all-ordered-pairs statistic.  Supports
    degrees 1 to 4; accepts a batch of configurations as rows.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    n = X.shape[1]
    s = X.sum(axis=1)
    if degree == 1:
        out = s
    elif degree == 2:
        out = s**2 - n
    elif degree == 3:
        out = s**3 - (3.0 * n - 2.0) * s
    elif degree == 4:
        out = s**4 - (6.0 * n - 8.0) * s**2 + 3.0 * n**2 - 6.0 * n
    else:
        raise ValueError(f"degrees 1..4 supported, got {degree}")
    return float(out[0]) if single else out
