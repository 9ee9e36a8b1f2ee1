"""Dynamic-regret accounting, exact theorem-bound values, lemma checkers.

``fill_minimizers`` attaches the per-round constrained minimizers to a
trace; ``trace_metrics`` then produces the regret report (regret, variation
quantities, constants).  ``theorem_bound`` evaluates the right-hand side of
a selected regret theorem with supplied constants, and ``lemma_check`` runs
a per-round inequality checker along a matching trace.

Theorem right-hand sides replace f_1(x_1) - f_T(x_T*) by its upper bound M,
the same relaxation the proofs make, so the certificates stay valid for any
realization.  All constants may be certified upper bounds (M, G): every
bound below is nondecreasing in them.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _minimize, learners, sets, streams
from .exceptions import ContractError
from .sets import FeasibleSet
from .streams import LossStream
from .trace import Trace

per_round_minimizer = _minimize.per_round_minimizer

THEOREM_IDS = ("thm1", "thm2", "thm3", "thm4", "thm5", "thm8")
LEMMA_IDS = ("lemma2", "lemma4", "lemma5", "lemma6", "lemma8")

LEMMA_TOL = 1e-7
SIGMA_GRID = tuple(np.round(np.linspace(0.0, 1.0, 11), 10))

_LEMMA_LEARNER = {
    "lemma2": learners.OFW_FIXED,
    "lemma4": learners.OFW_LINESEARCH,
    "lemma5": learners.OFW_LINESEARCH,
    "lemma6": learners.OFW_LINESEARCH,
    "lemma8": learners.OFW_MULTI,
}


@dataclass
class LemmaVerdict:
    """Outcome of a per-round inequality check along a trace."""

    lemma_id: str
    passed: bool
    worst_slack: float
    worst_round: int
    rounds_checked: int


@dataclass
class RegretReport:
    """Cumulative regret, variation quantities and certificate inputs."""

    regret: float
    V_T: float
    D_T: float
    P_T_star: float
    S_T_star: float
    T: int
    alpha: float
    beta_f: float
    D: float
    M: float
    G: float
    beta_K: float | None = None
    r: float | None = None
    r_tilde: float | None = None
    sigma: float | None = None
    bound_values: dict = field(default_factory=dict)
    lemma_verdicts: dict = field(default_factory=dict)


def fill_minimizers(
    trace: Trace,
    stream: LossStream,
    set_: FeasibleSet,
    tol: float | None = None,
    max_iter: int = _minimize.FW_MAX_ITER,
) -> Trace:
    """Attach x_t* and f_t* to every record of the trace, in place."""
    slack = 1e-9 + (0.0 if tol is None else tol)
    if stream.family == streams.DRIFTING:
        # Closed form: the projections of all round centers at once.
        T = len(trace.records)
        stars = sets.project_many(set_, stream.spec.centers[:T])
        if np.any(sets.residual_many(set_, stars) > sets.MEMBERSHIP_TOL):
            raise ContractError("a projected minimizer left the set")
        for rec, x_star in zip(trace.records, stars):
            rec.x_star = x_star
            rec.f_star = streams._evaluate_raw(stream, rec.t, x_star)[0]
    else:
        for rec in trace.records:
            rec.x_star, rec.f_star = per_round_minimizer(
                stream, set_, rec.t, tol=tol, max_iter=max_iter
            )
            if not sets.contains(set_, rec.x_star, sets.MEMBERSHIP_TOL):
                raise ContractError(f"round {rec.t}: minimizer left the set")
    for rec in trace.records:
        if rec.f_star > rec.loss + slack:
            raise ContractError(
                f"round {rec.t}: reported minimum {rec.f_star} exceeds the played loss"
            )
    trace.minimizer_tol = (
        _minimize.CLOSED_FORM_TOL if stream.family == streams.DRIFTING else
        (tol if tol is not None else _minimize.FW_GAP_TOL)
    )
    return trace


def trace_metrics(trace: Trace, stream: LossStream, set_: FeasibleSet) -> RegretReport:
    """Regret, V_T, D_T, P_T*, S_T* and the constants of the paired scenario."""
    if not trace.minimizers_filled():
        raise ContractError("trace is missing per-round minimizers; run fill_minimizers")
    recs = trace.records
    T = len(recs)
    regret = 0.0
    for rec in recs:
        regret += rec.loss - rec.f_star
    if regret < -1e-6:
        raise ContractError(f"negative regret {regret}: per-round minima are inconsistent")
    v_total = 0.0
    d_total = 0.0
    p_star = 0.0
    s_star = 0.0
    for t in range(2, T + 1):
        v_total += float(streams.variation_term(stream, set_, t))
        gdiff = recs[t - 1].gradient - recs[t - 2].gradient
        d_total += float(np.dot(gdiff, gdiff))
        hop = float(np.linalg.norm(recs[t - 1].x_star - recs[t - 2].x_star))
        p_star += hop
        s_star += hop * hop
    alpha = trace.alpha_used
    beta_f = stream.beta_f
    r = stream.interior_radius_r
    r_tilde = None
    if r is not None and beta_f > 0:
        r_tilde = min(
            r, math.sqrt(2.0) * alpha * set_.diameter**2 / math.sqrt(beta_f * stream.bound_M)
        )
    return RegretReport(
        regret=regret,
        V_T=v_total,
        D_T=d_total,
        P_T_star=p_star,
        S_T_star=s_star,
        T=T,
        alpha=alpha,
        beta_f=beta_f,
        D=set_.diameter,
        M=stream.bound_M,
        G=stream.grad_bound_G,
        beta_K=set_.set_strong_convexity,
        r=r,
        r_tilde=r_tilde,
        sigma=trace.sigma_fixed,
    )


def _need(constants: dict, key: str, theorem_id: str) -> float:
    if key not in constants or constants[key] is None:
        raise ContractError(f"{theorem_id} needs constant {key!r}")
    return float(constants[key])


def theorem_bound(
    theorem_id: str,
    constants: dict,
    T: int,
    V_T: float = 0.0,
    P_T_star: float | None = None,
    S_T_star: float | None = None,
) -> float:
    """Exact right-hand side of the selected regret theorem.

    ``constants`` supplies alpha, D, M and, per theorem, sigma (thm1),
    beta_f/beta_K (thm3), beta_f/r (thm4), beta_f/G (thm5).  thm5 also needs
    the path lengths P_T* and S_T*.
    """
    if theorem_id not in THEOREM_IDS:
        raise ContractError(f"unknown theorem id {theorem_id!r}")
    alpha = _need(constants, "alpha", theorem_id)
    M = _need(constants, "M", theorem_id)
    D = _need(constants, "D", theorem_id)
    if theorem_id == "thm1":
        sigma = _need(constants, "sigma", theorem_id)
        if not 0.0 < sigma <= 1.0:
            raise ContractError("thm1 needs sigma in (0, 1]")
        return (M + V_T) / sigma + alpha * sigma * (T - 1) * D * D / 2.0
    if theorem_id == "thm2":
        return math.sqrt(M * T * (V_T + M)) + alpha * D * D / 2.0 * math.sqrt(
            (V_T + M) * T / M
        )
    if theorem_id == "thm3":
        beta_f = _need(constants, "beta_f", theorem_id)
        beta_K = _need(constants, "beta_K", theorem_id)
        if beta_f <= 0 or beta_K <= 0:
            raise ContractError("thm3 needs beta_f > 0 and beta_K > 0")
        lead = (8.0 * math.sqrt(2.0) * alpha / (math.sqrt(beta_f) * beta_K) * (M + V_T)) ** (
            2.0 / 3.0
        ) * T ** (1.0 / 3.0)
        return lead + 2.0 * (M + V_T)
    if theorem_id == "thm4":
        beta_f = _need(constants, "beta_f", theorem_id)
        r = _need(constants, "r", theorem_id)
        if beta_f <= 0 or r <= 0:
            raise ContractError("thm4 needs beta_f > 0 and r > 0")
        r_tilde = min(r, math.sqrt(2.0) * alpha * D * D / math.sqrt(beta_f * M))
        return 4.0 * alpha * (M + V_T) * D * D / (beta_f * r_tilde * r_tilde)
    if theorem_id == "thm5":
        beta_f = _need(constants, "beta_f", theorem_id)
        G = _need(constants, "G", theorem_id)
        if beta_f <= 0:
            raise ContractError("thm5 needs beta_f > 0")
        if P_T_star is None or S_T_star is None:
            raise ContractError("thm5 needs P_T_star and S_T_star")
        return min(
            4.0 * alpha * (M + V_T) / (4.0 * alpha - beta_f),
            2.0 * G * D + 2.0 * G * P_T_star,
            alpha * D * D + 2.0 * alpha * S_T_star,
        )
    return M + V_T + math.sqrt(2.0 * alpha * D * D * (T - 1) * (M + V_T))


def _require_pairing(lemma_id: str, trace: Trace) -> None:
    expected = _LEMMA_LEARNER[lemma_id]
    if trace.learner_kind != expected:
        raise ContractError(
            f"{lemma_id} checks traces of {expected}, got {trace.learner_kind}"
        )


def lemma_check(
    lemma_id: str,
    trace: Trace,
    stream: LossStream,
    set_: FeasibleSet,
    constants: dict | None = None,
    tol: float = LEMMA_TOL,
) -> LemmaVerdict:
    """Evaluate the lemma's per-round inequality at every applicable round.

    Slack is RHS - LHS; the verdict passes when the worst slack stays above
    ``-tol``.  ``constants`` may override the scenario-derived alpha, D,
    beta_f, beta_K, r, M.
    """
    if lemma_id not in LEMMA_IDS:
        raise ContractError(f"unknown lemma id {lemma_id!r}")
    _require_pairing(lemma_id, trace)
    if not trace.minimizers_filled():
        raise ContractError("trace is missing per-round minimizers; run fill_minimizers")
    c = dict(constants) if constants else {}
    alpha = c.get("alpha", trace.alpha_used)
    D = c.get("D", set_.diameter)
    recs = trace.records
    T = len(recs)

    worst = math.inf
    worst_round = 0
    checked = 0

    def note(slack: float, t: int):
        nonlocal worst, worst_round, checked
        checked += 1
        if slack < worst:
            worst = slack
            worst_round = t

    if lemma_id == "lemma8":
        beta_f = c.get("beta_f", stream.beta_f)
        r = c.get("r", stream.interior_radius_r)
        M = c.get("M", stream.bound_M)
        if r is None:
            raise ContractError("lemma8 needs the interior radius r")
        _, C, _ = learners.compute_K(alpha, beta_f, D, r, M)
        contraction = C ** trace.inner_k
        for rec in recs:
            lhs = streams._evaluate_raw(stream, rec.t, rec.x_next)[0] - rec.f_star
            rhs = contraction * (rec.loss - rec.f_star)
            note(rhs - lhs, rec.t)
        return LemmaVerdict(lemma_id, worst >= -tol, worst, worst_round, checked)

    if lemma_id == "lemma5":
        beta_K = c.get("beta_K", set_.set_strong_convexity)
        if beta_K is None:
            raise ContractError("lemma5 needs a strongly convex set (beta_K)")
    if lemma_id == "lemma6":
        beta_f = c.get("beta_f", stream.beta_f)
        r = c.get("r", stream.interior_radius_r)
        M = c.get("M", stream.bound_M)
        if r is None:
            raise ContractError("lemma6 needs the interior radius r")
        _, C6, _ = learners.compute_K(alpha, beta_f, D, r, M)

    for t in range(1, T):
        cur, nxt = recs[t - 1], recs[t]
        gap_t = cur.loss - cur.f_star
        gap_next = nxt.loss - nxt.f_star
        vterm = streams.variation_term(stream, set_, t + 1)
        drift = cur.f_star - nxt.f_star
        if lemma_id == "lemma2":
            s = trace.sigma_fixed
            rhs = vterm + (1.0 - s) * gap_t + alpha * s * s * D * D / 2.0 + drift
            note(rhs - gap_next, t)
        elif lemma_id == "lemma4":
            for s in tuple(SIGMA_GRID) + (float(cur.sigma),):
                rhs = vterm + (1.0 - s) * gap_t + alpha * s * s * D * D / 2.0 + drift
                note(rhs - gap_next, t)
        elif lemma_id == "lemma5":
            gnorm = float(np.linalg.norm(cur.gradient))
            c_t = max(1.0 - beta_K * gnorm / (8.0 * alpha), 0.5)
            note(vterm + c_t * gap_t + drift - gap_next, t)
        else:
            note(vterm + C6 * gap_t + drift - gap_next, t)

    if checked == 0:
        worst, worst_round = math.inf, 0
    return LemmaVerdict(lemma_id, worst >= -tol, worst, worst_round, checked)
