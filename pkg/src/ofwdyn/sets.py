"""Constraint-set geometry: LMOs, projections, membership and set constants.

Supported sets are the Euclidean ball, an axis-aligned box, the probability
simplex and the l1-ball.  Every set supports an exact linear minimization
oracle and an exact Euclidean projection, plus the geometric quantities the
regret certificates need (diameter, interior radius, declared set strong
convexity).  All operations are pure; ``FeasibleSet`` values are immutable
and safe to share across threads.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ContractError, InvalidInputError

MEMBERSHIP_TOL = 1e-9

BALL = "euclidean-ball"
BOX = "box"
SIMPLEX = "simplex"
L1_BALL = "l1-ball"

KINDS = (BALL, BOX, SIMPLEX, L1_BALL)


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class FeasibleSet:
    """Geometric description of the decision set.

    Use the ``ball``/``box``/``simplex``/``l1_ball`` constructors rather than
    instantiating directly; they fill in the derived diameter and validate
    the shape parameters.
    """

    kind: str
    dimension: int
    center: np.ndarray | None = None
    radius: float | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    set_strong_convexity: float | None = None
    declared_interior_radius: float | None = None
    diameter: float = field(default=0.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown set kind {self.kind!r}")
        if self.dimension < 1:
            raise ContractError("dimension must be positive")
        if self.set_strong_convexity is not None and self.kind != BALL:
            raise ContractError("set_strong_convexity only applies to the Euclidean ball")


def _check_declared_radius(value) -> float | None:
    if value is not None and value <= 0:
        raise ContractError("declared_interior_radius must be positive")
    return value


def ball(
    center, radius: float, set_strong_convexity: float | None = None,
    declared_interior_radius: float | None = None,
) -> FeasibleSet:
    """Euclidean ball {x : ||x - center||_2 <= radius}.

    ``set_strong_convexity`` is the declared beta_K of the ball; the shipped
    default 1/radius is certified empirically by the sampled witness suite,
    not assumed.
    """
    c = _frozen(np.atleast_1d(center))
    if radius <= 0:
        raise ContractError("radius must be positive")
    if set_strong_convexity is not None and set_strong_convexity <= 0:
        raise ContractError("set_strong_convexity must be positive")
    return FeasibleSet(
        kind=BALL,
        dimension=c.size,
        center=c,
        radius=float(radius),
        set_strong_convexity=set_strong_convexity,
        declared_interior_radius=_check_declared_radius(declared_interior_radius),
        diameter=2.0 * float(radius),
    )


def box(lower, upper, declared_interior_radius: float | None = None) -> FeasibleSet:
    """Axis-aligned box {x : lower <= x <= upper} with lower < upper elementwise."""
    lo = _frozen(np.atleast_1d(lower))
    hi = _frozen(np.atleast_1d(upper))
    if lo.shape != hi.shape:
        raise ContractError("lower and upper must have the same shape")
    if not np.all(lo < hi):
        raise ContractError("box requires lower < upper elementwise")
    return FeasibleSet(
        kind=BOX,
        dimension=lo.size,
        lower=lo,
        upper=hi,
        declared_interior_radius=_check_declared_radius(declared_interior_radius),
        diameter=float(np.linalg.norm(hi - lo)),
    )


def simplex(dimension: int) -> FeasibleSet:
    """Probability simplex {x >= 0, sum(x) = 1} in R^dimension (dimension >= 2)."""
    if dimension < 2:
        raise ContractError("simplex requires dimension >= 2")
    return FeasibleSet(kind=SIMPLEX, dimension=dimension, diameter=float(np.sqrt(2.0)))


def l1_ball(
    dimension: int, radius: float, declared_interior_radius: float | None = None
) -> FeasibleSet:
    """l1-ball {x : ||x||_1 <= radius} centered at the origin."""
    if dimension < 1:
        raise ContractError("dimension must be positive")
    if radius <= 0:
        raise ContractError("radius must be positive")
    return FeasibleSet(
        kind=L1_BALL,
        dimension=dimension,
        radius=float(radius),
        declared_interior_radius=_check_declared_radius(declared_interior_radius),
        diameter=2.0 * float(radius),
    )


def _as_vector(set_: FeasibleSet, v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (set_.dimension,):
        raise ContractError(
            f"{name} has shape {arr.shape}, expected ({set_.dimension},)"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def lmo(set_: FeasibleSet, direction) -> np.ndarray:
    """argmin_{v in K} <direction, v>, exact for every supported kind.

    Ties (zero direction, or directions with repeated extreme coordinates)
    resolve deterministically: polytopes return the lexicographically
    smallest minimizing vertex, the ball returns its center for the zero
    direction.
    """
    return _lmo_raw(set_, _as_vector(set_, direction, "direction"))


def _lmo_raw(set_: FeasibleSet, g: np.ndarray) -> np.ndarray:
    # Hot path: trusts shape and finiteness of g.
    if set_.kind == BALL:
        norm = float(np.linalg.norm(g))
        if norm == 0.0:
            return set_.center.copy()
        return set_.center - (set_.radius / norm) * g
    if set_.kind == BOX:
        # g > 0 -> lower, g < 0 -> upper; zero entries take lower, which is
        # the lexicographically smallest choice.
        return np.where(g < 0, set_.upper, set_.lower).astype(np.float64)
    if set_.kind == SIMPLEX:
        # Vertex e_i with minimal g_i; on ties the largest index gives the
        # lexicographically smallest vertex.
        rev = set_.dimension - 1 - int(np.argmin(g[::-1]))
        out = np.zeros(set_.dimension)
        out[rev] = 1.0
        return out
    # l1 ball: vertex -r*sign(g_i)*e_i at a maximal |g_i|.  A vertex with a
    # negative entry always precedes one with a positive entry in
    # lexicographic order, so prefer indices where g_i = +max |g| (smallest
    # such index); otherwise take the largest index with g_i = -max |g|.
    m = float(np.max(np.abs(g)))
    out = np.zeros(set_.dimension)
    neg_candidates = np.nonzero(g == m)[0]
    if neg_candidates.size > 0:
        out[int(neg_candidates[0])] = -set_.radius
    else:
        pos_candidates = np.nonzero(g == -m)[0]
        out[int(pos_candidates[-1])] = set_.radius
    return out


def _project_simplex(p: np.ndarray, target: float) -> np.ndarray:
    # Exact sort-and-threshold projection onto {x >= 0, sum(x) = target}.
    u = np.sort(p)[::-1]
    shifted = np.cumsum(u) - target
    ks = np.arange(1, p.size + 1)
    valid = u - shifted / ks > 0
    k = int(ks[valid][-1])
    tau = shifted[k - 1] / k
    return np.maximum(p - tau, 0.0)


def project(set_: FeasibleSet, point) -> np.ndarray:
    """Unique Euclidean projection of ``point`` onto the set.

    Ball and box are closed form; simplex uses the exact sort-and-threshold
    method and the l1-ball reduces to a simplex projection on magnitudes.
    """
    return _project_raw(set_, _as_vector(set_, point, "point"))


def _project_raw(set_: FeasibleSet, p: np.ndarray) -> np.ndarray:
    if set_.kind == BALL:
        delta = p - set_.center
        norm = float(np.linalg.norm(delta))
        if norm <= set_.radius:
            return p.copy()
        return set_.center + (set_.radius / norm) * delta
    if set_.kind == BOX:
        return np.clip(p, set_.lower, set_.upper)
    if set_.kind == SIMPLEX:
        return _project_simplex(p, 1.0)
    if float(np.sum(np.abs(p))) <= set_.radius:
        return p.copy()
    return np.sign(p) * _project_simplex(np.abs(p), set_.radius)


def membership_residual(set_: FeasibleSet, point) -> float:
    """Constraint residual of ``point``: <= 0 exactly on the set."""
    return _residual_raw(set_, _as_vector(set_, point, "point"))


def _residual_raw(set_: FeasibleSet, p: np.ndarray) -> float:
    if set_.kind == BALL:
        return float(np.linalg.norm(p - set_.center)) - set_.radius
    if set_.kind == BOX:
        return float(max(np.max(set_.lower - p), np.max(p - set_.upper)))
    if set_.kind == SIMPLEX:
        return float(max(np.max(-p), abs(float(np.sum(p)) - 1.0)))
    return float(np.sum(np.abs(p))) - set_.radius


def contains(set_: FeasibleSet, point, tol: float = MEMBERSHIP_TOL) -> bool:
    """True iff ``point`` is within ``tol`` of the set in constraint residual."""
    if tol < 0:
        raise ContractError("tol must be nonnegative")
    return membership_residual(set_, point) <= tol


def interior_radius(set_: FeasibleSet, point) -> float:
    """Largest rho with the rho-ball around ``point`` inside the set.

    For the simplex, which has empty interior in R^d, the radius is measured
    inside its affine hull (distance to the relative boundary); full
    dimensional sets use the literal Euclidean ball.  Boundary points give 0.
    """
    p = _as_vector(set_, point, "point")
    if not contains(set_, p, MEMBERSHIP_TOL):
        raise ContractError("point must belong to the set")
    if set_.kind == BALL:
        rho = set_.radius - float(np.linalg.norm(p - set_.center))
    elif set_.kind == BOX:
        rho = float(min(np.min(p - set_.lower), np.min(set_.upper - p)))
    elif set_.kind == SIMPLEX:
        d = set_.dimension
        rho = float(np.min(p)) * float(np.sqrt(d / (d - 1.0)))
    else:
        rho = (set_.radius - float(np.sum(np.abs(p)))) / float(np.sqrt(set_.dimension))
    return max(rho, 0.0)


def strong_convexity_witness(x, y, gamma: float, z, beta: float) -> np.ndarray:
    """The displaced chord point whose membership defines set strong convexity."""
    return (
        gamma * x
        + (1.0 - gamma) * y
        + gamma * (1.0 - gamma) * 0.5 * beta * float(np.dot(x - y, x - y)) * z
    )


def strong_convexity_sample_check(
    set_: FeasibleSet, x, y, gamma: float, z, beta: float
) -> bool:
    """Check one sampled witness of set strong convexity with modulus ``beta``.

    Evaluates whether gamma*x + (1-gamma)*y + gamma*(1-gamma)*(beta/2)
    *||x-y||^2 * z stays in the set.  Property suites drive this over random
    tuples to certify the declared modulus of the ball empirically.
    """
    xv = _as_vector(set_, x, "x")
    yv = _as_vector(set_, y, "y")
    zv = _as_vector(set_, z, "z")
    if not contains(set_, xv, MEMBERSHIP_TOL) or not contains(set_, yv, MEMBERSHIP_TOL):
        raise ContractError("x and y must belong to the set")
    if not 0.0 <= gamma <= 1.0:
        raise ContractError("gamma must lie in [0, 1]")
    if abs(float(np.linalg.norm(zv)) - 1.0) > 1e-9:
        raise ContractError("z must be a unit vector")
    if beta <= 0:
        raise ContractError("beta must be positive")
    return contains(set_, strong_convexity_witness(xv, yv, gamma, zv, beta), MEMBERSHIP_TOL)


def default_start(set_: FeasibleSet) -> np.ndarray:
    """Canonical initial point: center for ball/box/l1, barycenter for simplex."""
    if set_.kind == BALL:
        return set_.center.copy()
    if set_.kind == BOX:
        return 0.5 * (set_.lower + set_.upper)
    if set_.kind == SIMPLEX:
        return np.full(set_.dimension, 1.0 / set_.dimension)
    return np.zeros(set_.dimension)


def farthest_distance(set_: FeasibleSet, point) -> float:
    """Exact max over the set of the Euclidean distance to ``point``."""
    p = _as_vector(set_, point, "point")
    if set_.kind == BALL:
        return float(np.linalg.norm(p - set_.center)) + set_.radius
    if set_.kind == BOX:
        # The farthest point of a box sits at a vertex.
        per_coord = np.maximum(np.abs(set_.lower - p), np.abs(set_.upper - p))
        return float(np.linalg.norm(per_coord))
    if set_.kind == SIMPLEX:
        sq = float(np.dot(p, p)) + 1.0 - 2.0 * float(np.min(p))
        return float(np.sqrt(sq))
    r = set_.radius
    sq = float(np.dot(p, p)) + r * r + 2.0 * r * float(np.max(np.abs(p)))
    return float(np.sqrt(sq))


def support_bounds(set_: FeasibleSet, direction) -> tuple[float, float]:
    """(min, max) of <direction, x> over the set, via two LMO calls."""
    g = _as_vector(set_, direction, "direction")
    lo = float(np.dot(g, lmo(set_, g)))
    hi = float(np.dot(g, lmo(set_, -g)))
    return lo, hi


def _project_simplex_many(P: np.ndarray, target: float) -> np.ndarray:
    # Row-wise sort-and-threshold, operation-identical to _project_simplex.
    d = P.shape[1]
    u = np.sort(P, axis=1)[:, ::-1]
    shifted = np.cumsum(u, axis=1) - target
    ks = np.arange(1, d + 1)
    valid = u - shifted / ks > 0
    k_idx = d - 1 - np.argmax(valid[:, ::-1], axis=1)
    tau = shifted[np.arange(P.shape[0]), k_idx] / (k_idx + 1)
    return np.maximum(P - tau[:, None], 0.0)


def project_many(set_: FeasibleSet, points: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean projection of an (n, d) array onto the set."""
    P = np.asarray(points, dtype=np.float64)
    if set_.kind == BALL:
        deltas = P - set_.center
        norms = np.linalg.norm(deltas, axis=1)
        out = P.copy()
        far = norms > set_.radius
        if np.any(far):
            out[far] = set_.center + deltas[far] * (set_.radius / norms[far])[:, None]
        return out
    if set_.kind == BOX:
        return np.clip(P, set_.lower, set_.upper)
    if set_.kind == SIMPLEX:
        return _project_simplex_many(P, 1.0)
    out = P.copy()
    far = np.sum(np.abs(P), axis=1) > set_.radius
    if np.any(far):
        out[far] = np.sign(P[far]) * _project_simplex_many(np.abs(P[far]), set_.radius)
    return out


def residual_many(set_: FeasibleSet, points: np.ndarray) -> np.ndarray:
    """Row-wise membership residuals of an (n, d) array."""
    P = np.asarray(points, dtype=np.float64)
    if set_.kind == BALL:
        return np.linalg.norm(P - set_.center, axis=1) - set_.radius
    if set_.kind == BOX:
        return np.maximum(
            np.max(set_.lower - P, axis=1), np.max(P - set_.upper, axis=1)
        )
    if set_.kind == SIMPLEX:
        return np.maximum(np.max(-P, axis=1), np.abs(np.sum(P, axis=1) - 1.0))
    return np.sum(np.abs(P), axis=1) - set_.radius


def sample_points(set_: FeasibleSet, n: int, rng: np.random.Generator) -> np.ndarray:
    """n points sampled inside the set, for property suites. Shape (n, d)."""
    d = set_.dimension
    if set_.kind == BALL:
        dirs = rng.standard_normal((n, d))
        norms = np.linalg.norm(dirs, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        radii = set_.radius * rng.random(n) ** (1.0 / d)
        return set_.center + dirs / norms * radii[:, None]
    if set_.kind == BOX:
        u = rng.random((n, d))
        return set_.lower + u * (set_.upper - set_.lower)
    if set_.kind == SIMPLEX:
        return rng.dirichlet(np.ones(d), size=n)
    weights = rng.dirichlet(np.ones(d), size=n)
    signs = np.where(rng.random((n, d)) < 0.5, -1.0, 1.0)
    radii = set_.radius * rng.random(n) ** (1.0 / d)
    return signs * weights * radii[:, None]
