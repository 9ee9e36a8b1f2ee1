"""Projection-free online convex optimization with dynamic-regret certificates.

Online Frank-Wolfe learners (fixed step, surrogate line search, multiple
updates per round) plus projected-gradient and greedy baselines, over exact
constraint-set oracles and seeded non-stationary loss streams.  The metrics
layer measures dynamic regret against per-round minimizers and certifies it
against the matching closed-form bounds; lemma checkers validate the
per-round inequalities along real trajectories.
"""

from ._backend import active_name as backend_name
from ._backend import compiled_available
from .exceptions import ConfigError, ContractError, ConvergenceError, InvalidInputError
from .harness import (
    ExperimentConfig,
    ResultRow,
    emit_results,
    fit_slope,
    load_config,
    parse_config,
    run_experiment,
    verify_experiment,
)
from .learners import (
    LearnerConfig,
    LearnerState,
    compute_K,
    greedy_step,
    init_state,
    line_search_sigma,
    ofw_multi_step,
    ofw_step,
    ogd_step,
    run_learner,
)
from .metrics import (
    LemmaVerdict,
    RegretReport,
    fill_minimizers,
    lemma_check,
    per_round_minimizer,
    theorem_bound,
    trace_metrics,
)
from .sets import (
    FeasibleSet,
    ball,
    box,
    contains,
    interior_radius,
    l1_ball,
    lmo,
    project,
    simplex,
    strong_convexity_sample_check,
)
from .streams import (
    DriftSchedule,
    LossStream,
    evaluate,
    make_stream,
    total_variation,
    unconstrained_minimizer,
    variation_term,
)
from .trace import RoundRecord, Trace

__version__ = "0.1.0"
