"""Sampled property suites certifying the assumptions behind the bounds.

Each check draws seeded random points from the paired set and verifies one
inequality the regret certificates rely on: smoothness, strong convexity,
the gradient lower bound and quadratic growth of strongly convex losses,
the interior-minimizer smooth upper bound, the set strong convexity witness
of the ball, domination of the certified M/G constants, and agreement of
analytic gradients with central finite differences.

Every check returns ``(passed, worst)`` where ``worst`` is the largest
observed violation (negative or tiny positive values mean the property
holds with slack).
"""

import math

import numpy as np

from . import _minimize, sets, streams
from .sets import FeasibleSet
from .streams import LossStream

DEFAULT_TOL = 1e-9


def _sample_rounds(stream: LossStream, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(1, stream.horizon + 1, size=n)


def smoothness_check(
    stream: LossStream, set_: FeasibleSet, n: int, rng: np.random.Generator,
    tol: float = DEFAULT_TOL,
) -> tuple[bool, float]:
    """f_t(y) <= f_t(x) + <grad f_t(x), y-x> + (alpha/2)||x-y||^2 on samples."""
    ts = _sample_rounds(stream, n, rng)
    xs = sets.sample_points(set_, n, rng)
    ys = sets.sample_points(set_, n, rng)
    alpha = stream.alpha
    worst = -math.inf
    for t, x, y in zip(ts, xs, ys):
        fx, gx = streams.evaluate(stream, int(t), x)
        fy, _ = streams.evaluate(stream, int(t), y)
        diff = y - x
        surplus = fy - fx - float(np.dot(gx, diff)) - 0.5 * alpha * float(np.dot(diff, diff))
        worst = max(worst, surplus)
    return worst <= tol, worst


def strong_convexity_check(
    stream: LossStream, set_: FeasibleSet, n: int, rng: np.random.Generator,
    tol: float = DEFAULT_TOL,
) -> tuple[bool, float]:
    """f_t(y) >= f_t(x) + <grad f_t(x), y-x> + (beta_f/2)||x-y||^2 on samples."""
    beta = stream.beta_f
    ts = _sample_rounds(stream, n, rng)
    xs = sets.sample_points(set_, n, rng)
    ys = sets.sample_points(set_, n, rng)
    worst = -math.inf
    for t, x, y in zip(ts, xs, ys):
        fx, gx = streams.evaluate(stream, int(t), x)
        fy, _ = streams.evaluate(stream, int(t), y)
        diff = y - x
        deficit = fx + float(np.dot(gx, diff)) + 0.5 * beta * float(np.dot(diff, diff)) - fy
        worst = max(worst, deficit)
    return worst <= tol, worst


def _minimizers_by_round(stream: LossStream, set_: FeasibleSet):
    cache = {}
    for t in range(1, stream.horizon + 1):
        cache[t] = _minimize.per_round_minimizer(stream, set_, t)
    return cache


def gradient_lower_bound_check(
    stream: LossStream, set_: FeasibleSet, n: int, rng: np.random.Generator,
    tol: float = DEFAULT_TOL,
) -> tuple[bool, float]:
    """||grad f_t(x)|| >= sqrt(beta_f/2) sqrt(f_t(x) - f_t*) on samples."""
    beta = stream.beta_f
    stars = _minimizers_by_round(stream, set_)
    ts = _sample_rounds(stream, n, rng)
    xs = sets.sample_points(set_, n, rng)
    worst = -math.inf
    for t, x in zip(ts, xs):
        fx, gx = streams.evaluate(stream, int(t), x)
        gap = max(fx - stars[int(t)][1], 0.0)
        deficit = math.sqrt(beta / 2.0) * math.sqrt(gap) - float(np.linalg.norm(gx))
        worst = max(worst, deficit)
    return worst <= tol, worst


def quadratic_growth_check(
    stream: LossStream, set_: FeasibleSet, n: int, rng: np.random.Generator,
    tol: float = DEFAULT_TOL,
) -> tuple[bool, float]:
    """f_t(x) - f_t* >= (beta_f/2)||x - x_t*||^2 on samples."""
    beta = stream.beta_f
    stars = _minimizers_by_round(stream, set_)
    ts = _sample_rounds(stream, n, rng)
    xs = sets.sample_points(set_, n, rng)
    worst = -math.inf
    for t, x in zip(ts, xs):
        fx, _ = streams.evaluate(stream, int(t), x)
        x_star, f_star = stars[int(t)]
        diff = x - x_star
        deficit = 0.5 * beta * float(np.dot(diff, diff)) - (fx - f_star)
        worst = max(worst, deficit)
    return worst <= tol, worst


def interior_smooth_check(
    stream: LossStream, set_: FeasibleSet, n: int, rng: np.random.Generator,
    tol: float = DEFAULT_TOL,
) -> tuple[bool, float]:
    """Interior minimizers: grad f_t(x_t*) = 0 and the alpha/2 upper bound.

    Checks ||grad f_t(x_t*)|| <= tol for every round and
    f_t(x) - f_t* <= (alpha/2)||x_t* - x||^2 on samples.
    """
    if stream.interior_radius_r is None:
        raise ValueError("interior_smooth_check needs an interior-feasible stream")
    alpha = stream.alpha
    stars = _minimizers_by_round(stream, set_)
    worst = -math.inf
    for t, (x_star, _) in stars.items():
        worst = max(worst, float(np.linalg.norm(streams.evaluate(stream, t, x_star)[1])))
    ts = _sample_rounds(stream, n, rng)
    xs = sets.sample_points(set_, n, rng)
    for t, x in zip(ts, xs):
        fx, _ = streams.evaluate(stream, int(t), x)
        x_star, f_star = stars[int(t)]
        diff = x_star - x
        surplus = (fx - f_star) - 0.5 * alpha * float(np.dot(diff, diff))
        worst = max(worst, surplus)
    return worst <= tol, worst


def ball_witness_check(
    set_: FeasibleSet, n: int, rng: np.random.Generator, beta: float | None = None,
    tol: float = DEFAULT_TOL,
) -> tuple[bool, float]:
    """Sampled set-strong-convexity witnesses for the declared beta of a ball."""
    if set_.kind != sets.BALL:
        raise ValueError("ball_witness_check applies to the Euclidean ball")
    beta = set_.set_strong_convexity if beta is None else beta
    if beta is None:
        raise ValueError("the ball declares no strong-convexity modulus")
    xs = sets.sample_points(set_, n, rng)
    ys = sets.sample_points(set_, n, rng)
    gammas = rng.random(n)
    zs = rng.standard_normal((n, set_.dimension))
    zs /= np.linalg.norm(zs, axis=1, keepdims=True)
    worst = -math.inf
    all_inside = True
    for x, y, gamma, z in zip(xs, ys, gammas, zs):
        z = z / float(np.linalg.norm(z))  # renormalize to the op's tolerance
        all_inside &= sets.strong_convexity_sample_check(set_, x, y, float(gamma), z, beta)
        witness = sets.strong_convexity_witness(x, y, float(gamma), z, beta)
        worst = max(worst, sets.membership_residual(set_, witness))
    return all_inside and worst <= tol, worst


def bounds_domination_check(
    stream: LossStream, set_: FeasibleSet, n: int, rng: np.random.Generator,
) -> tuple[bool, float]:
    """bound_M dominates 2|f_t| and grad_bound_G dominates ||grad f_t||."""
    ts = _sample_rounds(stream, n, rng)
    xs = sets.sample_points(set_, n, rng)
    worst = -math.inf
    for t, x in zip(ts, xs):
        fx, gx = streams.evaluate(stream, int(t), x)
        worst = max(
            worst,
            2.0 * abs(fx) - stream.bound_M,
            float(np.linalg.norm(gx)) - stream.grad_bound_G,
        )
    return worst <= 0.0, worst


def gradient_fd_check(
    stream: LossStream, set_: FeasibleSet, n: int, rng: np.random.Generator,
    rel_tol: float = 1e-6,
) -> tuple[bool, float]:
    """Analytic gradients match central finite differences to rel_tol."""
    ts = _sample_rounds(stream, n, rng)
    xs = sets.sample_points(set_, n, rng)
    worst = -math.inf
    for t, x in zip(ts, xs):
        _, gx = streams.evaluate(stream, int(t), x)
        scale = max(1.0, float(np.linalg.norm(gx)))
        for i in range(x.size):
            h = 1e-6 * max(1.0, abs(x[i]))
            e = np.zeros_like(x)
            e[i] = h
            fp, _ = streams.evaluate(stream, int(t), x + e)
            fm, _ = streams.evaluate(stream, int(t), x - e)
            worst = max(worst, abs((fp - fm) / (2.0 * h) - gx[i]) / scale - rel_tol)
    return worst <= 0.0, worst


def grid_search_sigma(a: float, b: float, resolution: float = 1e-6) -> float:
    """Grid minimizer of q(s) = a s + (b/2) s^2 over {0, res, ..., 1}.

    Staged refinement over subgrids: exact for convex surrogates because the
    grid argmin of a convex function lies next to its continuous minimizer.
    """
    coarse = np.linspace(0.0, 1.0, 1001)
    k = int(np.argmin(a * coarse + 0.5 * b * coarse * coarse)) * 1000
    lo = max(k - 2000, 0)
    hi = min(k + 2000, 10**6)
    fine = np.arange(lo, hi + 1) * resolution
    return float(fine[np.argmin(a * fine + 0.5 * b * fine * fine)])


def line_search_grid_check(
    n: int, rng: np.random.Generator, sigma_tol: float = 2e-6, value_tol: float = 1e-12,
) -> tuple[bool, float]:
    """Closed-form line search vs an independent staged grid search."""
    worst = -math.inf
    dims = (2, 10, 50)
    for i in range(n):
        d = dims[i % len(dims)]
        g = rng.standard_normal(d)
        x = rng.standard_normal(d)
        x /= max(1.0, float(np.linalg.norm(x)))
        v = rng.standard_normal(d)
        v /= max(1.0, float(np.linalg.norm(v)))
        alpha = rng.uniform(0.2, 1.5)
        s_closed = _minimize.line_search_sigma(g, x, v, alpha)
        a = float(np.dot(g, v - x))
        b = alpha * float(np.dot(x - v, x - v))
        s_grid = grid_search_sigma(a, b)
        q = lambda s: a * s + 0.5 * b * s * s  # noqa: E731
        worst = max(
            worst,
            abs(s_closed - s_grid) - sigma_tol,
            abs(q(s_closed) - q(s_grid)) - value_tol,
        )
    return worst <= 0.0, worst


def _standard_scenarios():
    schedule = streams.DriftSchedule(kind=streams.RANDOM_WALK, magnitude=0.02, seed=11)
    ball = sets.ball(np.zeros(3), 1.0, set_strong_convexity=1.0)
    interior = streams.make_stream(
        streams.DRIFTING, 1.5, schedule, ball, 40,
        base_center=[0.1, 0.0, -0.05], interior=True, interior_radius=0.4,
    )
    bx = sets.box([-1.0, -0.5], [0.5, 1.0])
    drifting_box = streams.make_stream(
        streams.DRIFTING, 2.0,
        streams.DriftSchedule(kind=streams.SINUSOID, magnitude=0.1, period=8, seed=5),
        bx, 40, base_center=[0.2, 0.1],
    )
    rank1 = streams.make_stream(
        streams.RANK1, 1.0,
        streams.DriftSchedule(kind=streams.PIECEWISE, magnitude=0.3, period=10, seed=7),
        bx, 40, base_target=0.1, direction=[1.0, -0.5],
    )
    return ball, interior, bx, drifting_box, rank1


def run_all(samples: int = 2000, seed: int = 0) -> list[tuple[str, bool, float]]:
    """Run every suite on the standard scenarios; returns (name, ok, worst) rows."""
    rng = np.random.default_rng(seed)
    ball, interior, bx, drifting_box, rank1 = _standard_scenarios()
    results = [
        ("smoothness/interior-ball", *smoothness_check(interior, ball, samples, rng)),
        ("smoothness/rank1-box", *smoothness_check(rank1, bx, samples, rng)),
        ("strong-convexity", *strong_convexity_check(interior, ball, samples, rng)),
        ("gradient-lower-bound", *gradient_lower_bound_check(drifting_box, bx, samples, rng)),
        ("quadratic-growth", *quadratic_growth_check(interior, ball, samples, rng)),
        ("interior-smooth-bound", *interior_smooth_check(interior, ball, samples, rng)),
        ("ball-witness", *ball_witness_check(ball, samples, rng)),
        ("bounds-domination", *bounds_domination_check(interior, ball, samples, rng)),
        ("bounds-domination/rank1", *bounds_domination_check(rank1, bx, samples, rng)),
        ("gradient-fd", *gradient_fd_check(rank1, bx, min(samples, 300), rng)),
        ("line-search-grid", *line_search_grid_check(min(samples, 2000), rng)),
    ]
    return results
