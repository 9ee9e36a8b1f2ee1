"""Loss streams: seeded non-stationary sequences of smooth quadratic losses.

Two families are supported, both with exact oracles and exact certified
constants over a paired feasible set:

* drifting-quadratic   f_t(x) = (alpha/2) ||x - c_t||^2
  (alpha-smooth and alpha-strongly convex),
* rank1-quadratic      f_t(x) = (alpha / (2 ||a||^2)) (<a, x> - b_t)^2
  (alpha-smooth, not strongly convex for dimension > 1).

Consecutive losses in both families differ by an affine function of x, so
the per-round variation max_{x in K} |f_t(x) - f_{t-1}(x)| is computed
exactly with two LMO calls instead of sampling.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import sets
from .exceptions import ContractError
from .sets import FeasibleSet

DRIFTING = "drifting-quadratic"
RANK1 = "rank1-quadratic"
FAMILIES = (DRIFTING, RANK1)

STATIC = "static"
RANDOM_WALK = "random-walk"
PIECEWISE = "piecewise-constant"
SINUSOID = "sinusoid"
SCHEDULE_KINDS = (STATIC, RANDOM_WALK, PIECEWISE, SINUSOID)


@dataclass(frozen=True)
class DriftSchedule:
    """Seeded description of how the loss minimizer moves between rounds.

    ``magnitude`` bounds the per-round drift of the generated path:
    consecutive path points never move by more than ``magnitude``.
    ``period`` is the block length for piecewise-constant switches and the
    cycle length for sinusoids.
    """

    kind: str
    magnitude: float = 0.0
    period: int | None = None
    switch_count: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ContractError(f"unknown schedule kind {self.kind!r}")
        if self.magnitude < 0:
            raise ContractError("magnitude must be nonnegative")
        if self.period is not None and self.period < 1:
            raise ContractError("period must be a positive integer")
        if self.switch_count is not None and self.switch_count < 0:
            raise ContractError("switch_count must be nonnegative")
        if self.kind == PIECEWISE and self.period is None and self.switch_count is None:
            raise ContractError("piecewise-constant needs period or switch_count")
        if self.kind == SINUSOID and self.period is None:
            raise ContractError("sinusoid needs a period")


@dataclass(frozen=True)
class LossSpec:
    """Family payload: constants plus the materialized parameter path."""

    family: str
    alpha: float
    beta_f: float
    centers: np.ndarray | None = None    # (T, d) for drifting-quadratic
    direction: np.ndarray | None = None  # (d,) for rank1-quadratic
    targets: np.ndarray | None = None    # (T,) for rank1-quadratic


@dataclass(frozen=True)
class LossStream:
    """A horizon of losses with certified value/gradient bounds.

    ``bound_M`` dominates 2|f_t(x)| and ``grad_bound_G`` dominates
    ||grad f_t(x)|| over the paired set for every round; both are exact
    closed-form maxima for the supported (family, set) pairs.
    ``interior_radius_r`` is the declared clearance of every per-round
    minimizer from the set boundary, recorded only when the stream was
    built interior-feasible.
    """

    spec: LossSpec
    horizon: int
    bound_M: float
    grad_bound_G: float
    schedule: DriftSchedule
    interior_radius_r: float | None = None

    @property
    def family(self) -> str:
        return self.spec.family

    @property
    def alpha(self) -> float:
        return self.spec.alpha

    @property
    def beta_f(self) -> float:
        return self.spec.beta_f


def _check_round(stream: LossStream, t: int, minimum: int = 1) -> None:
    if not minimum <= t <= stream.horizon:
        raise IndexError(f"round {t} outside [{minimum}, {stream.horizon}]")


def evaluate(stream: LossStream, t: int, x) -> tuple[float, np.ndarray]:
    """Exact (f_t(x), grad f_t(x)) for 1-based round t."""
    _check_round(stream, t)
    xv = np.asarray(x, dtype=np.float64)
    expected = (
        stream.spec.centers.shape[1]
        if stream.spec.family == DRIFTING
        else stream.spec.direction.size
    )
    if xv.shape != (expected,):
        raise ContractError("x has the wrong dimension")
    return _evaluate_raw(stream, t, xv)


def _evaluate_raw(stream: LossStream, t: int, xv: np.ndarray) -> tuple[float, np.ndarray]:
    # Hot path: trusts the round index and the shape of xv.
    spec = stream.spec
    if spec.family == DRIFTING:
        diff = xv - spec.centers[t - 1]
        return 0.5 * spec.alpha * float(np.dot(diff, diff)), spec.alpha * diff
    a = spec.direction
    asq = float(np.dot(a, a))
    resid = float(np.dot(a, xv)) - float(spec.targets[t - 1])
    value = spec.alpha / (2.0 * asq) * resid * resid
    grad = (spec.alpha / asq * resid) * a
    return value, grad


def _difference_affine(stream: LossStream, t: int) -> tuple[np.ndarray, float]:
    # f_t - f_{t-1} = <w, x> + const for both families.
    spec = stream.spec
    if spec.family == DRIFTING:
        c_now, c_prev = spec.centers[t - 1], spec.centers[t - 2]
        w = -spec.alpha * (c_now - c_prev)
        const = 0.5 * spec.alpha * (float(np.dot(c_now, c_now)) - float(np.dot(c_prev, c_prev)))
        return w, const
    a = spec.direction
    asq = float(np.dot(a, a))
    b_now, b_prev = stream.spec.targets[t - 1], stream.spec.targets[t - 2]
    w = (spec.alpha / asq) * (b_prev - b_now) * a
    const = spec.alpha / (2.0 * asq) * (b_now * b_now - b_prev * b_prev)
    return w, const


def variation_term(stream: LossStream, set_: FeasibleSet, t: int) -> float:
    """max_{x in K} |f_t(x) - f_{t-1}(x)|, exact via two LMO calls (t >= 2)."""
    _check_round(stream, t, minimum=2)
    w, const = _difference_affine(stream, t)
    lo = float(np.dot(w, sets._lmo_raw(set_, w))) + const
    hi = float(np.dot(w, sets._lmo_raw(set_, -w))) + const
    return max(abs(lo), abs(hi))


def total_variation(stream: LossStream, set_: FeasibleSet) -> float:
    """V_T: sum of the per-round variation terms over t = 2..T."""
    return sum(variation_term(stream, set_, t) for t in range(2, stream.horizon + 1))


def unconstrained_minimizer(stream: LossStream, t: int) -> np.ndarray | None:
    """c_t for the drifting family; None for rank1 (a hyperplane, not a point)."""
    _check_round(stream, t)
    if stream.spec.family == DRIFTING:
        return stream.spec.centers[t - 1].copy()
    return None


def _safe_project(set_: FeasibleSet, margin: float, p: np.ndarray) -> np.ndarray:
    # Projection onto {x : interior_radius(set, x) >= margin}.
    if set_.kind == sets.BALL:
        inner = sets.ball(set_.center, set_.radius - margin)
        return sets.project(inner, p)
    if set_.kind == sets.BOX:
        return np.clip(p, set_.lower + margin, set_.upper - margin)
    if set_.kind == sets.L1_BALL:
        shrunk = set_.radius - margin * float(np.sqrt(set_.dimension))
        return sets.project(sets.l1_ball(set_.dimension, shrunk), p)
    raise ContractError("interior-feasible streams require a full-dimensional set")


def _validate_safe_shrinkage(set_: FeasibleSet, margin: float) -> None:
    if set_.kind == sets.BALL and margin >= set_.radius:
        raise ContractError("interior radius is too large for the ball")
    if set_.kind == sets.BOX and np.any(set_.lower + margin >= set_.upper - margin):
        raise ContractError("interior radius is too large for the box")
    if set_.kind == sets.L1_BALL and margin * np.sqrt(set_.dimension) >= set_.radius:
        raise ContractError("interior radius is too large for the l1-ball")
    if set_.kind == sets.SIMPLEX:
        raise ContractError(
            "the simplex has no full-dimensional interior; interior-feasible "
            "streams require ball, box, or l1-ball"
        )


def _unit(rng: np.random.Generator, d: int) -> np.ndarray:
    u = rng.standard_normal(d)
    norm = float(np.linalg.norm(u))
    if norm == 0.0:
        u = np.zeros(d)
        u[0] = 1.0
        return u
    return u / norm


def _resolve_period(schedule: DriftSchedule, T: int) -> int:
    if schedule.period is not None:
        return schedule.period
    return max(1, int(np.ceil(T / (schedule.switch_count + 1))))


def _vector_path(
    schedule: DriftSchedule,
    base: np.ndarray,
    T: int,
    clip,
) -> np.ndarray:
    d = base.size
    rng = np.random.default_rng(schedule.seed)
    path = np.empty((T, d))
    if schedule.kind == STATIC:
        path[:] = base
        return path
    if schedule.kind == SINUSOID:
        direction = _unit(rng, d)
        period = schedule.period
        amplitude = schedule.magnitude * period / (2.0 * np.pi)
        phases = np.sin(2.0 * np.pi * np.arange(T) / period)
        path[:] = base + amplitude * phases[:, None] * direction
        return path
    path[0] = base
    if schedule.kind == RANDOM_WALK:
        for t in range(1, T):
            step = schedule.magnitude * _unit(rng, d)
            path[t] = clip(path[t - 1] + step)
        return path
    period = _resolve_period(schedule, T)
    for t in range(1, T):
        if t % period == 0:
            step = schedule.magnitude * _unit(rng, d)
            path[t] = clip(path[t - 1] + step)
        else:
            path[t] = path[t - 1]
    return path


def _scalar_path(schedule: DriftSchedule, base: float, T: int) -> np.ndarray:
    rng = np.random.default_rng(schedule.seed)
    path = np.empty(T)
    if schedule.kind == STATIC:
        path[:] = base
        return path
    if schedule.kind == SINUSOID:
        period = schedule.period
        amplitude = schedule.magnitude * period / (2.0 * np.pi)
        path[:] = base + amplitude * np.sin(2.0 * np.pi * np.arange(T) / period)
        return path
    path[0] = base
    if schedule.kind == RANDOM_WALK:
        for t in range(1, T):
            path[t] = path[t - 1] + schedule.magnitude * rng.uniform(-1.0, 1.0)
        return path
    period = _resolve_period(schedule, T)
    for t in range(1, T):
        if t % period == 0:
            path[t] = path[t - 1] + schedule.magnitude * rng.uniform(-1.0, 1.0)
        else:
            path[t] = path[t - 1]
    return path


def _drifting_bounds(set_: FeasibleSet, alpha: float, centers: np.ndarray) -> tuple[float, float]:
    # max 2|f_t| = alpha * maxdist^2, max ||grad|| = alpha * maxdist, where
    # maxdist is the farthest set point from the round's center.
    worst = max(sets.farthest_distance(set_, c) for c in centers)
    return alpha * worst * worst, alpha * worst


def _rank1_bounds(
    set_: FeasibleSet, alpha: float, a: np.ndarray, targets: np.ndarray
) -> tuple[float, float]:
    s_lo, s_hi = sets.support_bounds(set_, a)
    worst = float(max(max(abs(s_lo - b), abs(s_hi - b)) for b in targets))
    asq = float(np.dot(a, a))
    return alpha / asq * worst * worst, alpha / math.sqrt(asq) * worst


def make_stream(
    family: str,
    alpha: float,
    schedule: DriftSchedule,
    set_: FeasibleSet,
    T: int,
    base_center=None,
    base_target: float = 0.0,
    direction=None,
    interior: bool = False,
    interior_radius: float | None = None,
) -> LossStream:
    """Materialize a seeded loss stream over ``set_`` with certified bounds.

    With ``interior=True`` the center path is kept at clearance
    ``interior_radius`` from the boundary (random walks are clipped into the
    safe region; deterministic schedules that leave it raise a construction
    error naming the first offending round).
    """
    if family not in FAMILIES:
        raise ContractError(f"unknown loss family {family!r}")
    if alpha <= 0:
        raise ContractError("alpha must be positive")
    if T < 1:
        raise ContractError("horizon must be at least 1")

    if family == DRIFTING:
        if interior:
            if interior_radius is None or interior_radius <= 0:
                raise ContractError("interior-feasible streams need interior_radius > 0")
            _validate_safe_shrinkage(set_, interior_radius)
            clip = lambda p: _safe_project(set_, interior_radius, p)  # noqa: E731
        else:
            clip = lambda p: p  # noqa: E731
        base = (
            sets.default_start(set_)
            if base_center is None
            else np.asarray(base_center, dtype=np.float64)
        )
        if base.shape != (set_.dimension,):
            raise ContractError("base_center has the wrong dimension")
        centers = _vector_path(schedule, base, T, clip)
        if interior:
            for t in range(T):
                ok = sets.contains(set_, centers[t], sets.MEMBERSHIP_TOL)
                if ok:
                    ok = sets.interior_radius(set_, centers[t]) >= interior_radius - 1e-12
                if not ok:
                    raise ContractError(
                        f"schedule violates the interior-feasible flag at round {t + 1}"
                    )
        centers.flags.writeable = False
        bound_m, bound_g = _drifting_bounds(set_, alpha, centers)
        spec = LossSpec(family=DRIFTING, alpha=alpha, beta_f=alpha, centers=centers)
        return LossStream(
            spec=spec,
            horizon=T,
            bound_M=bound_m,
            grad_bound_G=bound_g,
            schedule=schedule,
            interior_radius_r=interior_radius if interior else None,
        )

    if interior:
        raise ContractError(
            "rank1-quadratic minimizers form a hyperplane; the interior-feasible "
            "flag does not apply"
        )
    if direction is None:
        raise ContractError("rank1-quadratic needs a direction vector")
    a = np.asarray(direction, dtype=np.float64)
    if a.shape != (set_.dimension,) or float(np.dot(a, a)) == 0.0:
        raise ContractError("direction must be a nonzero vector of the set dimension")
    a = a.copy()
    a.flags.writeable = False
    targets = _scalar_path(schedule, float(base_target), T)
    targets.flags.writeable = False
    bound_m, bound_g = _rank1_bounds(set_, alpha, a, targets)
    beta_f = alpha if set_.dimension == 1 else 0.0
    spec = LossSpec(family=RANK1, alpha=alpha, beta_f=beta_f, direction=a, targets=targets)
    return LossStream(
        spec=spec,
        horizon=T,
        bound_M=bound_m,
        grad_bound_G=bound_g,
        schedule=schedule,
    )
