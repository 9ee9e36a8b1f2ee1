"""Surrogate line search and per-round constrained minimizers.

The drifting-quadratic family has a closed-form constrained minimizer (the
projection of the round's center).  Families without one are solved by
offline Frank-Wolfe with the surrogate line search, stopped once the FW gap
<grad f(x), x - v> certifies the requested suboptimality.
"""

import numpy as np

from . import sets, streams
from .exceptions import ContractError, ConvergenceError
from .sets import FeasibleSet
from .streams import LossStream

CLOSED_FORM_TOL = 1e-10
FW_GAP_TOL = 1e-8
FW_MAX_ITER = 10**6


def line_search_sigma(gradient, x, v, alpha: float) -> float:
    """Minimizer over [0, 1] of s*<g, v-x> + (alpha*s^2/2)*||x-v||^2.

    Closed form min{<g, x-v> / (alpha*||x-v||^2), 1}, clamped to [0, 1];
    returns 0 for the degenerate direction v = x.
    """
    if alpha <= 0:
        raise ContractError("alpha must be positive")
    g = np.asarray(gradient, dtype=np.float64)
    return _line_search_raw(
        g, np.asarray(x, dtype=np.float64), np.asarray(v, dtype=np.float64), alpha
    )


def _line_search_raw(g: np.ndarray, x: np.ndarray, v: np.ndarray, alpha: float) -> float:
    diff = x - v
    denom = alpha * float(np.dot(diff, diff))
    if denom <= 0.0:
        return 0.0
    sigma = float(np.dot(g, diff)) / denom
    return min(max(sigma, 0.0), 1.0)


def fw_minimize(
    grad_fn,
    set_: FeasibleSet,
    alpha: float,
    x0: np.ndarray,
    gap_tol: float = FW_GAP_TOL,
    max_iter: int = FW_MAX_ITER,
) -> tuple[np.ndarray, float, int]:
    """Offline FW with line search until the FW gap drops below ``gap_tol``.

    Returns (point, final gap, iterations).  The gap upper-bounds the
    suboptimality of the returned point for convex objectives.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    gap = np.inf
    for it in range(max_iter):
        g = grad_fn(x)
        v = sets._lmo_raw(set_, g)
        gap = float(np.dot(g, x - v))
        if gap <= gap_tol:
            return x, gap, it
        s = _line_search_raw(g, x, v, alpha)
        x = (1.0 - s) * x + s * v
    raise ConvergenceError(
        f"FW minimizer did not reach gap {gap_tol:g} within {max_iter} iterations "
        f"(final gap {gap:g})"
    )


def per_round_minimizer(
    stream: LossStream,
    set_: FeasibleSet,
    t: int,
    tol: float | None = None,
    max_iter: int = FW_MAX_ITER,
) -> tuple[np.ndarray, float]:
    """Constrained minimizer of f_t over the set, with its value.

    Drifting-quadratic: the projection of c_t (exact).  Otherwise offline FW
    iterated until the FW gap is below ``tol``, so the reported value is
    within ``tol`` of the true minimum.
    """
    if tol is not None and tol <= 0:
        raise ContractError("tol must be positive")
    if stream.family == streams.DRIFTING:
        x_star = sets.project(set_, stream.spec.centers[t - 1])
        return x_star, streams.evaluate(stream, t, x_star)[0]
    gap_tol = FW_GAP_TOL if tol is None else tol
    x_star, _, _ = fw_minimize(
        lambda x: streams.evaluate(stream, t, x)[1],
        set_,
        stream.alpha,
        sets.default_start(set_),
        gap_tol=gap_tol,
        max_iter=max_iter,
    )
    return x_star, streams.evaluate(stream, t, x_star)[0]
