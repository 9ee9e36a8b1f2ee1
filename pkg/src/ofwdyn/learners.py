"""The five online learners behind one init/step interface.

* ofw-fixed       v_t = LMO(grad f_t(x_t)); x_{t+1} = (1-sigma) x_t + sigma v_t
                  with a constant step size sigma.
* ofw-linesearch  same update with sigma_t chosen by the surrogate line
                  search min_{s in [0,1]} s <g, v-x> + (alpha s^2/2)||x-v||^2.
* ofw-multi       K line-search FW iterations against the same loss per
                  round, z^0 = x_t, ..., x_{t+1} = z^K.
* ogd             x_{t+1} = project(x_t - grad f_t(x_t) / alpha).
* greedy          x_{t+1} = argmin_{x in K} f_t(x).

``run_learner`` plays the full protocol: the decision of round t is committed
before f_t is observed.  The round loop dispatches to the compiled kernels
when they are available and the (learner, family, set) combination is
supported; the in-module Python loop is the reference fallback.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend, _minimize, sets, streams
from .exceptions import ContractError
from .sets import FeasibleSet
from .streams import LossStream
from .trace import RoundRecord, Trace

OFW_FIXED = "ofw-fixed"
OFW_LINESEARCH = "ofw-linesearch"
OFW_MULTI = "ofw-multi"
OGD = "ogd"
GREEDY = "greedy"
KINDS = (OFW_FIXED, OFW_LINESEARCH, OFW_MULTI, OGD, GREEDY)

SIGMA_RULES = ("explicit", "inv-sqrt-T", "oracle")

line_search_sigma = _minimize.line_search_sigma

_LEARNER_CODE = {OFW_FIXED: 0, OFW_LINESEARCH: 1, OFW_MULTI: 2, OGD: 3, GREEDY: 4}
_SET_CODE = {sets.BALL: 0, sets.BOX: 1, sets.SIMPLEX: 2, sets.L1_BALL: 3}
_FAMILY_CODE = {streams.DRIFTING: 0, streams.RANK1: 1}


@dataclass(frozen=True)
class LearnerConfig:
    """Static description of a learner instance.

    ``sigma``/``sigma_rule`` apply to ofw-fixed only: an explicit sigma, the
    1/sqrt(T) default, or the oracle tuning sqrt((V_T + M) / (M T)) for runs
    where the stream (hence V_T) is known up front.  ``inner_iterations``
    applies to ofw-multi; "auto" resolves K from the contraction constants.
    ``alpha_declared`` overrides the stream's smoothness constant handed to
    the line search and the OGD step size; overestimates are allowed and
    propagate into every certificate.
    """

    kind: str
    sigma: float | None = None
    sigma_rule: str | None = None
    inner_iterations: int | str = "auto"
    alpha_declared: float | None = None
    initial_point: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown learner kind {self.kind!r}")
        if self.sigma is not None:
            if self.kind != OFW_FIXED:
                raise ContractError("sigma applies to ofw-fixed only")
            if not 0.0 <= self.sigma <= 1.0:
                raise ContractError("sigma must lie in [0, 1]")
        if self.sigma_rule is None:
            # Default rule: an explicit sigma wins, 1/sqrt(T) otherwise.
            object.__setattr__(
                self, "sigma_rule", "explicit" if self.sigma is not None else "inv-sqrt-T"
            )
        if self.sigma_rule not in SIGMA_RULES:
            raise ContractError(f"unknown sigma rule {self.sigma_rule!r}")
        if self.sigma is not None and self.sigma_rule != "explicit":
            raise ContractError("an explicit sigma conflicts with a sigma rule")
        if isinstance(self.inner_iterations, str):
            if self.inner_iterations != "auto":
                raise ContractError("inner_iterations must be an integer or 'auto'")
        elif self.inner_iterations < 1:
            raise ContractError("inner_iterations must be at least 1")
        if self.alpha_declared is not None and self.alpha_declared <= 0:
            raise ContractError("alpha_declared must be positive")


@dataclass(frozen=True)
class LearnerState:
    """Decision and last-step diagnostics; immutable between rounds."""

    x: np.ndarray
    t: int
    last_loss: float | None = None
    last_gradient: np.ndarray | None = None
    last_sigma: float | np.ndarray | None = None
    last_lmo: np.ndarray | None = None
    last_inner: np.ndarray | None = None


def compute_K(alpha: float, beta_f: float, D: float, r: float, M: float):
    """Per-round FW iteration count for the multi-update learner.

    K = ceil(ln(beta_f / 4 alpha) / ln C) with C = 1 - beta_f r~^2 /
    (4 alpha D^2) and r~ = min{r, sqrt(2) alpha D^2 / sqrt(beta_f M)}.
    Returns (K, C, r~).
    """
    if not (alpha >= beta_f > 0):
        raise ContractError("requires alpha >= beta_f > 0")
    if D <= 0 or r <= 0 or M <= 0:
        raise ContractError("D, r, and M must be positive")
    r_tilde = min(r, math.sqrt(2.0) * alpha * D * D / math.sqrt(beta_f * M))
    C = 1.0 - beta_f * r_tilde * r_tilde / (4.0 * alpha * D * D)
    if not 0.0 < C < 1.0:
        raise ContractError(f"contraction factor C={C} outside (0, 1)")
    K = int(math.ceil(math.log(beta_f / (4.0 * alpha)) / math.log(C)))
    return max(K, 1), C, r_tilde


def resolve_sigma(config: LearnerConfig, stream: LossStream, set_: FeasibleSet, T: int) -> float:
    """Constant step size for ofw-fixed under the configured rule."""
    if config.sigma_rule == "explicit":
        if config.sigma is None:
            raise ContractError("ofw-fixed with the explicit rule needs sigma")
        return config.sigma
    if config.sigma_rule == "inv-sqrt-T":
        return min(1.0, 1.0 / math.sqrt(T))
    v_total = streams.total_variation(stream, set_)
    m = stream.bound_M
    return min(1.0, math.sqrt((v_total + m) / (m * T)))


def resolve_inner_k(config: LearnerConfig, stream: LossStream, set_: FeasibleSet) -> int:
    """Inner iteration count for ofw-multi; 'auto' uses ``compute_K``."""
    if config.inner_iterations != "auto":
        return int(config.inner_iterations)
    missing = []
    if stream.beta_f <= 0:
        missing.append("beta_f > 0")
    if stream.interior_radius_r is None:
        missing.append("interior radius r")
    if missing:
        raise ContractError(
            "auto inner_iterations needs " + " and ".join(missing)
            + "; construct the stream interior-feasible"
        )
    K, _, _ = compute_K(
        stream.alpha, stream.beta_f, set_.diameter, stream.interior_radius_r, stream.bound_M
    )
    return K


def _declared_alpha(config: LearnerConfig, stream: LossStream) -> float:
    if config.alpha_declared is None:
        return stream.alpha
    if config.alpha_declared < stream.alpha:
        raise ContractError(
            "alpha_declared below the stream's smoothness constant breaks the "
            "line-search surrogate"
        )
    return config.alpha_declared


def init_state(config: LearnerConfig, stream: LossStream, set_: FeasibleSet) -> LearnerState:
    """Round-1 state at the configured (or canonical) initial point."""
    if config.initial_point is None:
        x0 = sets.default_start(set_)
    else:
        x0 = np.asarray(config.initial_point, dtype=np.float64).copy()
        if not sets.contains(set_, x0, sets.MEMBERSHIP_TOL):
            raise ContractError("initial_point must belong to the set")
    return LearnerState(x=x0, t=1)


def _fw_inner(x, g, set_: FeasibleSet, alpha: float):
    v = sets._lmo_raw(set_, g)
    s = _minimize._line_search_raw(g, x, v, alpha)
    return (1.0 - s) * x + s * v, s, v


def ofw_step(
    state: LearnerState,
    stream: LossStream,
    set_: FeasibleSet,
    config: LearnerConfig,
    sigma: float | None = None,
) -> LearnerState:
    """One OFW round: LMO at grad f_t(x_t), then a convex-combination move.

    ``sigma`` fixes the step size (ofw-fixed); with None the surrogate line
    search picks it.  Feasibility of the new point follows from convexity.
    """
    streams._check_round(stream, state.t)
    loss, g = streams._evaluate_raw(stream, state.t, state.x)
    alpha = _declared_alpha(config, stream)
    if sigma is None and config.kind == OFW_FIXED:
        sigma = config.sigma
        if sigma is None:
            raise ContractError(
                "ofw-fixed without an explicit sigma: resolve it first "
                "(resolve_sigma) or pass sigma to ofw_step"
            )
    if sigma is None:
        x_next, s, v = _fw_inner(state.x, g, set_, alpha)
    else:
        v = sets._lmo_raw(set_, g)
        s = float(sigma)
        x_next = (1.0 - s) * state.x + s * v
    return LearnerState(
        x=x_next, t=state.t + 1, last_loss=loss, last_gradient=g, last_sigma=s, last_lmo=v
    )


def ofw_multi_step(
    state: LearnerState,
    stream: LossStream,
    set_: FeasibleSet,
    config: LearnerConfig,
    inner_k: int | None = None,
) -> LearnerState:
    """K line-search FW iterations against f_t, starting from z^0 = x_t.

    With K = 1 the output is bit-identical to the line-search ``ofw_step``.
    """
    streams._check_round(stream, state.t)
    K = resolve_inner_k(config, stream, set_) if inner_k is None else inner_k
    alpha = _declared_alpha(config, stream)
    d = set_.dimension
    sigmas = np.empty(K)
    vs = np.empty((K, d))
    zs = np.empty((K + 1, d))
    z = state.x
    zs[0] = z
    loss = None
    grad = None
    for i in range(K):
        val_i, g_i = streams._evaluate_raw(stream, state.t, z)
        if i == 0:
            loss, grad = val_i, g_i
        z, s, v = _fw_inner(z, g_i, set_, alpha)
        sigmas[i] = s
        vs[i] = v
        zs[i + 1] = z
    return LearnerState(
        x=z,
        t=state.t + 1,
        last_loss=loss,
        last_gradient=grad,
        last_sigma=sigmas,
        last_lmo=vs,
        last_inner=zs,
    )


def ogd_step(
    state: LearnerState, stream: LossStream, set_: FeasibleSet, config: LearnerConfig
) -> LearnerState:
    """Projected gradient step with the fixed step size 1/alpha."""
    streams._check_round(stream, state.t)
    loss, g = streams._evaluate_raw(stream, state.t, state.x)
    alpha = _declared_alpha(config, stream)
    x_next = sets._project_raw(set_, state.x - g / alpha)
    return LearnerState(x=x_next, t=state.t + 1, last_loss=loss, last_gradient=g)


def greedy_step(
    state: LearnerState, stream: LossStream, set_: FeasibleSet,
    minimizer_tol: float | None = None,
) -> LearnerState:
    """Move to the current round's constrained minimizer x_t*."""
    streams._check_round(stream, state.t)
    loss, g = streams._evaluate_raw(stream, state.t, state.x)
    x_star, _ = _minimize.per_round_minimizer(stream, set_, state.t, tol=minimizer_tol)
    return LearnerState(x=x_star, t=state.t + 1, last_loss=loss, last_gradient=g)


def _kernel_supported(config: LearnerConfig, stream: LossStream) -> bool:
    # Greedy on rank1 goes through the FW minimizer oracle, which stays in
    # Python by design.
    return not (config.kind == GREEDY and stream.family == streams.RANK1)


def _run_kernel(kernel, config, stream, set_, T, sigma_fixed, inner_k, alpha, x0, record_inner):
    d = set_.dimension
    zeros = np.zeros(d)
    spec = stream.spec
    if stream.family == streams.DRIFTING:
        centers, avec, bs = spec.centers, zeros, np.zeros(1)
    else:
        centers, avec, bs = np.zeros((1, d)), spec.direction, spec.targets
    return kernel.run_trajectory(
        _LEARNER_CODE[config.kind],
        inner_k,
        sigma_fixed,
        _SET_CODE[set_.kind],
        set_.center if set_.center is not None else zeros,
        float(set_.radius) if set_.radius is not None else 0.0,
        set_.lower if set_.lower is not None else zeros,
        set_.upper if set_.upper is not None else zeros,
        _FAMILY_CODE[stream.family],
        alpha,
        np.ascontiguousarray(centers),
        np.ascontiguousarray(avec),
        np.ascontiguousarray(bs),
        np.ascontiguousarray(x0),
        T,
        bool(record_inner),
    )


def _records_from_arrays(config, out, T, record_inner):
    xs, fvals, grads, sigmas, vs, zs = out
    records = []
    multi = config.kind == OFW_MULTI
    single = config.kind in (OFW_FIXED, OFW_LINESEARCH)
    for t in range(T):
        records.append(
            RoundRecord(
                t=t + 1,
                x=xs[t],
                loss=float(fvals[t]),
                gradient=grads[t],
                x_next=xs[t + 1],
                sigma=float(sigmas[t, 0]) if single else (sigmas[t] if multi else None),
                lmo_point=vs[t, 0] if single else (vs[t] if multi else None),
                inner_points=zs[t] if (multi and record_inner) else None,
            )
        )
    return records


def _run_python(config, stream, set_, T, sigma_fixed, inner_k, x0, record_inner, minimizer_tol):
    state = LearnerState(x=x0, t=1)
    records = []
    for t in range(1, T + 1):
        try:
            if config.kind == OFW_FIXED:
                new = ofw_step(state, stream, set_, config, sigma=sigma_fixed)
            elif config.kind == OFW_LINESEARCH:
                new = ofw_step(state, stream, set_, config)
            elif config.kind == OFW_MULTI:
                new = ofw_multi_step(state, stream, set_, config, inner_k=inner_k)
            elif config.kind == OGD:
                new = ogd_step(state, stream, set_, config)
            else:
                new = greedy_step(state, stream, set_, minimizer_tol=minimizer_tol)
        except Exception as exc:
            raise type(exc)(f"learner aborted at round {t}: {exc}") from exc
        records.append(
            RoundRecord(
                t=t,
                x=state.x,
                loss=new.last_loss,
                gradient=new.last_gradient,
                x_next=new.x,
                sigma=new.last_sigma,
                lmo_point=new.last_lmo,
                inner_points=new.last_inner if record_inner else None,
            )
        )
        state = new
    return records


def run_learner(
    config: LearnerConfig,
    stream: LossStream,
    set_: FeasibleSet,
    T: int | None = None,
    record_inner: bool = True,
    backend: str | None = None,
    minimizer_tol: float | None = None,
) -> Trace:
    """Play the online protocol for T rounds and return the trace.

    The decision of round t is committed before f_t is observed; records
    store x_t, f_t(x_t), grad f_t(x_t) and the step diagnostics, with the
    per-round minimizers left to the metrics layer.  Deterministic given the
    stream.  ``backend`` forces "python" or "cython" (None picks the active
    one).
    """
    T = stream.horizon if T is None else T
    if T < 1 or T > stream.horizon:
        raise ContractError(f"T must lie in [1, {stream.horizon}]")
    alpha = _declared_alpha(config, stream)
    sigma_fixed = resolve_sigma(config, stream, set_, T) if config.kind == OFW_FIXED else None
    inner_k = resolve_inner_k(config, stream, set_) if config.kind == OFW_MULTI else None
    x0 = init_state(config, stream, set_).x

    kernel = _backend.kernel_module(backend)
    if kernel is not None and _kernel_supported(config, stream):
        out = _run_kernel(
            kernel, config, stream, set_, T,
            0.0 if sigma_fixed is None else sigma_fixed,
            1 if inner_k is None else inner_k,
            alpha, x0, record_inner,
        )
        records = _records_from_arrays(config, out, T, record_inner)
    else:
        records = _run_python(
            config, stream, set_, T, sigma_fixed, inner_k, x0, record_inner, minimizer_tol
        )
    return Trace(
        learner_kind=config.kind,
        records=records,
        alpha_used=alpha,
        sigma_fixed=sigma_fixed,
        inner_k=inner_k,
    )
