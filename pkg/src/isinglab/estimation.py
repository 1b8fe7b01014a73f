"""Pseudo-likelihood fitting of the two-parameter (h, theta) null model.

The null family puts a common coupling ``theta`` on every edge of a
given graph and a common field ``h`` on every node.  The pseudo
log-likelihood of an observed configuration is the sum over nodes of
the log conditional probability of the observed spin given its observed
neighbourhood:

    PL(h, theta) = sum_v log sigmoid(2 x_v (h + theta * m_v)),
    m_v = sum_{u ~ v} x_u.

This is the product-of-conditionals objective standard for binary
Markov random fields; it is smooth and concave, so a safeguarded Newton
iteration finds the maximizer whenever one exists.  Perfectly separable
configurations (for example all spins equal) push the maximizer to
infinity; the fit then stops at a parameter cap and is flagged
degenerate rather than reported as an estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import IsingModel, validate_config

__all__ = [
    "MpleResult",
    "neighbor_sums",
    "pseudo_log_likelihood",
    "pseudo_likelihood_gradient",
    "pseudo_likelihood_hessian",
    "mple_fit",
    "mple_fit_zero_field",
]

GRADIENT_TOL = 1e-8
MAX_ITER = 200
PARAM_CAP = 20.0


@dataclass(frozen=True)
class MpleResult:
    """Outcome of a pseudo-likelihood fit.

    ``converged`` means the gradient sup-norm fell under tolerance.  A
    ``degenerate`` result carries cap values in the parameters and the
    reason in ``degenerate_reason``; it is never marked converged.
    """

    h_hat: float
    theta_hat: float
    gradient_norm: float
    converged: bool
    degenerate: bool
    degenerate_reason: str = ""


def neighbor_sums(model: IsingModel, x: np.ndarray) -> np.ndarray:
    """``m_v = sum of x_u over neighbours u of v`` (graph structure
    only; edge weights play no role here)."""
    x = validate_config(model, x).astype(np.float64)
    s = np.zeros(model.n, dtype=np.float64)
    np.add.at(s, model.edge_u, x[model.edge_v])
    np.add.at(s, model.edge_v, x[model.edge_u])
    return s


def _margins(model: IsingModel, x: np.ndarray, h: float, theta: float):
    x = validate_config(model, x).astype(np.float64)
    m = neighbor_sums(model, x)
    t = 2.0 * x * (h + theta * m)
    return x, m, t


def pseudo_log_likelihood(
    model: IsingModel, x: np.ndarray, h: float, theta: float
) -> float:
    """Log product of per-node conditional probabilities of ``x``."""
    _, _, t = _margins(model, x, h, theta)
    # log sigmoid(t) = -log(1 + exp(-t))
    return float(-np.logaddexp(0.0, -t).sum())


def pseudo_likelihood_gradient(
    model: IsingModel, x: np.ndarray, h: float, theta: float
) -> np.ndarray:
    """Gradient of the objective in (h, theta)."""
    xf, m, t = _margins(model, x, h, theta)
    # d/dt log sigmoid(t) = 1 - sigmoid(t) = sigmoid(-t)
    w = _sigmoid(-t)
    g_h = float(np.sum(2.0 * xf * w))
    g_theta = float(np.sum(2.0 * xf * m * w))
    return np.array([g_h, g_theta])


def pseudo_likelihood_hessian(
    model: IsingModel, x: np.ndarray, h: float, theta: float
) -> np.ndarray:
    """Hessian in (h, theta); negative semidefinite everywhere."""
    _, m, t = _margins(model, x, h, theta)
    s = _sigmoid(t)
    w = 4.0 * s * (1.0 - s)
    h_hh = -float(np.sum(w))
    h_ht = -float(np.sum(w * m))
    h_tt = -float(np.sum(w * m * m))
    return np.array([[h_hh, h_ht], [h_ht, h_tt]])


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _separation_reason(x: np.ndarray, m: np.ndarray, zero_field: bool) -> str:
    """Nonempty when the likelihood has no finite maximizer.

    The fit is a logistic regression of the spins on (1, m_v); it
    diverges exactly when some direction gives every observation a
    nonnegative margin and at least one a positive margin.
    """
    if zero_field:
        s = x.astype(np.float64) * m
        if np.all(s >= 0.0) and s.max() > 0.0:
            return "spins perfectly aligned with neighbor sums"
        if np.all(s <= 0.0) and s.min() < 0.0:
            return "spins perfectly anti-aligned with neighbor sums"
        return ""
    plus = m[x == 1]
    minus = m[x == -1]
    if plus.size == 0 or minus.size == 0:
        return "all spins equal"
    if m.max() > m.min() and (
        plus.min() >= minus.max() or plus.max() <= minus.min()
    ):
        return "neighbor sums separate the spin labels"
    return ""


def _newton(
    objective, gradient, hessian, start: np.ndarray, tolerance_stop: bool = True
) -> tuple[np.ndarray, float, bool, str]:
    """Maximize a smooth concave objective; returns (params, grad norm,
    converged, degeneracy reason).

    With ``tolerance_stop`` off the iteration ignores the gradient test
    and climbs until a parameter reaches the cap; used when the optimum
    is known to sit at infinity, where the gradient also vanishes.
    """
    params = start.astype(np.float64).copy()
    value = objective(params)
    for _ in range(MAX_ITER):
        g = gradient(params)
        gnorm = float(np.max(np.abs(g)))
        if tolerance_stop and gnorm < GRADIENT_TOL:
            return params, gnorm, True, ""
        H = hessian(params)
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            step = g.copy()
        if not np.all(np.isfinite(step)):
            step = g.copy()
        # backtrack until the objective does not decrease
        for _ in range(60):
            cand = params + step
            cand_value = objective(cand)
            if cand_value >= value - 1e-12:
                break
            step = 0.5 * step
        params = params + step
        value = objective(params)
        if np.max(np.abs(params)) >= PARAM_CAP:
            np.clip(params, -PARAM_CAP, PARAM_CAP, out=params)
            gnorm = float(np.max(np.abs(gradient(params))))
            return params, gnorm, False, "no finite maximizer: parameter cap reached"
    gnorm = float(np.max(np.abs(gradient(params))))
    return params, gnorm, False, ""


def _solve(obj, grad, hess, dim: int, separation: str) -> tuple[np.ndarray, float, bool, str]:
    """Run the Newton loop and reconcile its outcome with a separation
    diagnosis: separated data is always reported degenerate, on the cap
    box, never converged."""
    params, gnorm, ok, cap_reason = _newton(
        obj, grad, hess, np.zeros(dim), tolerance_stop=not separation
    )
    if separation:
        if np.max(np.abs(params)) < PARAM_CAP:
            # iteration budget ran out short of the box
            i = int(np.argmax(np.abs(params)))
            params[i] = np.copysign(PARAM_CAP, params[i] if params[i] else 1.0)
            gnorm = float(np.max(np.abs(grad(params))))
        return params, gnorm, False, separation
    return params, gnorm, ok, cap_reason


def mple_fit(model: IsingModel, x: np.ndarray) -> MpleResult:
    """Fit (h, theta) by maximizing the pseudo log-likelihood.

    On a graph with no edges theta is unidentifiable and pinned to 0.
    """
    x = validate_config(model, x)
    if model.n_edges == 0:
        def obj(p):
            return pseudo_log_likelihood(model, x, p[0], 0.0)

        def grad(p):
            return pseudo_likelihood_gradient(model, x, p[0], 0.0)[:1]

        def hess(p):
            return pseudo_likelihood_hessian(model, x, p[0], 0.0)[:1, :1]

        separation = "all spins equal" if np.all(x == x[0]) else ""
        params, gnorm, ok, reason = _solve(obj, grad, hess, 1, separation)
        return MpleResult(
            h_hat=float(params[0]),
            theta_hat=0.0,
            gradient_norm=gnorm,
            converged=ok,
            degenerate=bool(reason),
            degenerate_reason=reason,
        )

    def obj(p):
        return pseudo_log_likelihood(model, x, p[0], p[1])

    def grad(p):
        return pseudo_likelihood_gradient(model, x, p[0], p[1])

    def hess(p):
        return pseudo_likelihood_hessian(model, x, p[0], p[1])

    separation = _separation_reason(x, neighbor_sums(model, x), zero_field=False)
    params, gnorm, ok, reason = _solve(obj, grad, hess, 2, separation)
    return MpleResult(
        h_hat=float(params[0]),
        theta_hat=float(params[1]),
        gradient_norm=gnorm,
        converged=ok,
        degenerate=bool(reason),
        degenerate_reason=reason,
    )


def mple_fit_zero_field(model: IsingModel, x: np.ndarray) -> MpleResult:
    """Fit theta alone with the field pinned to zero."""
    x = validate_config(model, x)

    def obj(p):
        return pseudo_log_likelihood(model, x, 0.0, p[0])

    def grad(p):
        return pseudo_likelihood_gradient(model, x, 0.0, p[0])[1:]

    def hess(p):
        return pseudo_likelihood_hessian(model, x, 0.0, p[0])[1:, 1:]

    separation = _separation_reason(x, neighbor_sums(model, x), zero_field=True)
    params, gnorm, ok, reason = _solve(obj, grad, hess, 1, separation)
    return MpleResult(
        h_hat=0.0,
        theta_hat=float(params[0]),
        gradient_norm=gnorm,
        converged=ok,
        degenerate=bool(reason),
        degenerate_reason=reason,
    )
