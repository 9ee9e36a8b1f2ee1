"""Public API surface stays importable from the package root."""

import ofwdyn

API = [
    # sets
    "FeasibleSet", "ball", "box", "simplex", "l1_ball", "lmo", "project",
    "contains", "interior_radius", "strong_convexity_sample_check",
    # streams
    "DriftSchedule", "LossStream", "make_stream", "evaluate", "variation_term",
    "total_variation", "unconstrained_minimizer",
    # learners
    "LearnerConfig", "LearnerState", "compute_K", "line_search_sigma",
    "ofw_step", "ofw_multi_step", "ogd_step", "greedy_step", "init_state",
    "run_learner",
    # metrics
    "RoundRecord", "Trace", "RegretReport", "LemmaVerdict",
    "per_round_minimizer", "fill_minimizers", "trace_metrics",
    "theorem_bound", "lemma_check",
    # harness
    "ExperimentConfig", "ResultRow", "parse_config", "load_config",
    "run_experiment", "verify_experiment", "fit_slope", "emit_results",
    # misc
    "backend_name", "compiled_available",
    "ContractError", "InvalidInputError", "ConfigError", "ConvergenceError",
]


def test_names_exported():
    for name in API:
        assert hasattr(ofwdyn, name), name


def test_version():
    assert ofwdyn.__version__
