"""Configuration-driven experiment runner.

Configs are YAML documents describing one scenario: a feasible set, a loss
stream, a list of learners with the certificates to evaluate, horizons, and
output paths.  ``run_experiment`` produces one result row per (learner, T),
deterministic for a fixed (config, seed) down to the output bytes, at any
parallelism level.  Wall-clock times are recorded only when
``output.record_wall_time`` is set, since they would break byte-level
reproducibility.
"""

import csv
import io
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np
import yaml

from . import learners, metrics, sets, streams
from .exceptions import ConfigError
from .sets import FeasibleSet

CSV_COLUMNS = [
    "scenario", "learner", "T", "seed", "regret", "V_T", "D_T", "P_T_star",
    "S_T_star", "M", "G", "bound_thm1", "bound_thm2", "bound_thm3",
    "bound_thm4", "bound_thm5", "bound_thm8", "lemma_failures", "wall_ms",
]

BOUND_SLACK = 1e-6


@dataclass(frozen=True)
class Tolerances:
    lemma_slack: float = metrics.LEMMA_TOL
    minimizer_gap: float = 1e-8
    minimizer_max_iter: int = 10**6
    bound_slack: float = BOUND_SLACK


@dataclass(frozen=True)
class LearnerSpec:
    id: str
    kind: str
    sigma: float | None = None
    sigma_rule: str | None = None
    inner_iterations: int | str = "auto"
    alpha_declared: float | None = None
    theorems: tuple[str, ...] = ()
    lemmas: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    seed: int
    T_values: tuple[int, ...]
    set_: FeasibleSet
    stream_family: str
    stream_alpha: float
    schedule: streams.DriftSchedule
    learners: tuple[LearnerSpec, ...]
    base_center: tuple[float, ...] | None = None
    base_target: float = 0.0
    direction: tuple[float, ...] | None = None
    interior: bool = False
    interior_radius: float | None = None
    csv_path: str | None = None
    json_path: str | None = None
    record_wall_time: bool = False
    tolerances: Tolerances = field(default_factory=Tolerances)


@dataclass
class ResultRow:
    scenario: str
    learner: str
    T: int
    seed: int
    regret: float | None = None
    V_T: float | None = None
    D_T: float | None = None
    P_T_star: float | None = None
    S_T_star: float | None = None
    M: float | None = None
    G: float | None = None
    bound_thm1: float | None = None
    bound_thm2: float | None = None
    bound_thm3: float | None = None
    bound_thm4: float | None = None
    bound_thm5: float | None = None
    bound_thm8: float | None = None
    lemma_failures: str = ""
    wall_ms: float = 0.0


def _reject_unknown(table: dict, allowed: set[str], path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key: {path}.{key}")


def _require(table: dict, key: str, path: str):
    if key not in table:
        raise ConfigError(f"missing required key: {path}.{key}")
    return table[key]


def _parse_set(table: dict) -> FeasibleSet:
    _reject_unknown(
        table,
        {"kind", "dimension", "center", "radius", "lower", "upper", "set_strong_convexity"},
        "set",
    )
    kind = _require(table, "kind", "set")
    try:
        if kind == sets.BALL:
            center = table.get("center")
            if center is None:
                center = [0.0] * int(_require(table, "dimension", "set"))
            return sets.ball(
                center,
                float(_require(table, "radius", "set")),
                set_strong_convexity=table.get("set_strong_convexity"),
            )
        if kind == sets.BOX:
            return sets.box(_require(table, "lower", "set"), _require(table, "upper", "set"))
        if kind == sets.SIMPLEX:
            return sets.simplex(int(_require(table, "dimension", "set")))
        if kind == sets.L1_BALL:
            return sets.l1_ball(
                int(_require(table, "dimension", "set")),
                float(_require(table, "radius", "set")),
            )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"set: {exc}") from exc
    raise ConfigError(f"set.kind: unknown kind {kind!r}")


def _parse_schedule(table: dict, default_seed: int) -> streams.DriftSchedule:
    _reject_unknown(
        table, {"kind", "magnitude", "period", "switch_count", "seed"}, "stream.schedule"
    )
    try:
        return streams.DriftSchedule(
            kind=_require(table, "kind", "stream.schedule"),
            magnitude=float(table.get("magnitude", 0.0)),
            period=table.get("period"),
            switch_count=table.get("switch_count"),
            seed=int(table.get("seed", default_seed)),
        )
    except ValueError as exc:
        raise ConfigError(f"stream.schedule: {exc}") from exc


def _parse_learner(table: dict, index: int) -> LearnerSpec:
    path = f"learners[{index}]"
    _reject_unknown(
        table,
        {"id", "kind", "sigma", "sigma_rule", "inner_iterations", "alpha_declared",
         "theorems", "lemmas"},
        path,
    )
    kind = _require(table, "kind", path)
    if kind not in learners.KINDS:
        raise ConfigError(f"{path}.kind: unknown learner kind {kind!r}")
    theorems = tuple(table.get("theorems", ()))
    lemmas = tuple(table.get("lemmas", ()))
    for thm in theorems:
        if thm not in metrics.THEOREM_IDS:
            raise ConfigError(f"{path}.theorems: unknown theorem id {thm!r}")
    for lem in lemmas:
        if lem not in metrics.LEMMA_IDS:
            raise ConfigError(f"{path}.lemmas: unknown lemma id {lem!r}")
    sigma = table.get("sigma")
    return LearnerSpec(
        id=str(_require(table, "id", path)),
        kind=kind,
        sigma=None if sigma is None else float(sigma),
        sigma_rule=table.get("sigma_rule"),
        inner_iterations=table.get("inner_iterations", "auto"),
        alpha_declared=table.get("alpha_declared"),
        theorems=theorems,
        lemmas=lemmas,
    )


_THEOREM_LEARNER = {
    "thm1": learners.OFW_FIXED,
    "thm2": learners.OFW_LINESEARCH,
    "thm3": learners.OFW_LINESEARCH,
    "thm4": learners.OFW_LINESEARCH,
    "thm5": learners.OFW_MULTI,
    "thm8": learners.OGD,
}


def _check_assumptions(config: ExperimentConfig) -> None:
    ball_with_beta = (
        config.set_.kind == sets.BALL and config.set_.set_strong_convexity is not None
    )
    strongly_convex_losses = (
        config.stream_family == streams.DRIFTING or config.set_.dimension == 1
    )
    interior_ok = config.interior and (config.interior_radius or 0) > 0
    for spec in config.learners:
        path = f"learners[{spec.id}]"
        for thm in spec.theorems:
            expected = _THEOREM_LEARNER[thm]
            if spec.kind != expected:
                raise ConfigError(f"{path}: {thm} certifies {expected}, not {spec.kind}")
            if thm == "thm3":
                if not ball_with_beta:
                    raise ConfigError(
                        f"{path}: thm3 needs a strongly convex set; "
                        f"{config.set_.kind} declares no set_strong_convexity"
                    )
                if not strongly_convex_losses:
                    raise ConfigError(f"{path}: thm3 needs strongly convex losses")
            if thm in ("thm4", "thm5"):
                if not strongly_convex_losses:
                    raise ConfigError(f"{path}: {thm} needs strongly convex losses")
                if not interior_ok:
                    raise ConfigError(
                        f"{path}: {thm} needs an interior-feasible stream with r > 0"
                    )
            if thm == "thm5" and spec.inner_iterations != "auto":
                raise ConfigError(f"{path}: thm5 certifies the auto inner-iteration count")
        for lem in spec.lemmas:
            expected = metrics._LEMMA_LEARNER[lem]
            if spec.kind != expected:
                raise ConfigError(f"{path}: {lem} checks {expected}, not {spec.kind}")
            if lem == "lemma5" and not ball_with_beta:
                raise ConfigError(f"{path}: lemma5 needs a ball with set_strong_convexity")
            if lem in ("lemma6", "lemma8"):
                if not interior_ok or not strongly_convex_losses:
                    raise ConfigError(
                        f"{path}: {lem} needs strongly convex losses and an "
                        "interior-feasible stream"
                    )


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a YAML experiment config."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a YAML mapping")
    _reject_unknown(
        doc, {"experiment", "set", "stream", "learners", "output", "tolerances"}, "config"
    )

    exp = _require(doc, "experiment", "config")
    _reject_unknown(exp, {"name", "seed", "T_values"}, "experiment")
    name = str(_require(exp, "name", "experiment"))
    seed = int(_require(exp, "seed", "experiment"))
    t_values = _require(exp, "T_values", "experiment")
    if not t_values or any(int(t) < 1 for t in t_values):
        raise ConfigError("experiment.T_values must be a nonempty list of positive ints")

    set_ = _parse_set(_require(doc, "set", "config"))

    stream_tbl = _require(doc, "stream", "config")
    _reject_unknown(
        stream_tbl,
        {"family", "alpha", "base_center", "base_target", "direction", "interior",
         "interior_radius", "schedule"},
        "stream",
    )
    family = _require(stream_tbl, "family", "stream")
    if family not in streams.FAMILIES:
        raise ConfigError(f"stream.family: unknown family {family!r}")
    alpha = float(_require(stream_tbl, "alpha", "stream"))
    schedule = _parse_schedule(_require(stream_tbl, "schedule", "stream"), seed)

    learner_tables = _require(doc, "learners", "config")
    if not learner_tables:
        raise ConfigError("learners must be a nonempty list")
    specs = tuple(_parse_learner(tbl, i) for i, tbl in enumerate(learner_tables))
    ids = [s.id for s in specs]
    if len(set(ids)) != len(ids):
        raise ConfigError("learners: duplicate learner ids")

    out = doc.get("output", {})
    _reject_unknown(out, {"csv", "json", "record_wall_time"}, "output")
    tol_tbl = doc.get("tolerances", {})
    _reject_unknown(
        tol_tbl,
        {"lemma_slack", "minimizer_gap", "minimizer_max_iter", "bound_slack"},
        "tolerances",
    )
    tol = Tolerances(
        lemma_slack=float(tol_tbl.get("lemma_slack", metrics.LEMMA_TOL)),
        minimizer_gap=float(tol_tbl.get("minimizer_gap", 1e-8)),
        minimizer_max_iter=int(tol_tbl.get("minimizer_max_iter", 10**6)),
        bound_slack=float(tol_tbl.get("bound_slack", BOUND_SLACK)),
    )

    base_center = stream_tbl.get("base_center")
    direction = stream_tbl.get("direction")
    config = ExperimentConfig(
        name=name,
        seed=seed,
        T_values=tuple(int(t) for t in t_values),
        set_=set_,
        stream_family=family,
        stream_alpha=alpha,
        schedule=schedule,
        learners=specs,
        base_center=None if base_center is None else tuple(float(v) for v in base_center),
        base_target=float(stream_tbl.get("base_target", 0.0)),
        direction=None if direction is None else tuple(float(v) for v in direction),
        interior=bool(stream_tbl.get("interior", False)),
        interior_radius=stream_tbl.get("interior_radius"),
        csv_path=out.get("csv"),
        json_path=out.get("json"),
        record_wall_time=bool(out.get("record_wall_time", False)),
        tolerances=tol,
    )
    if config.interior and (config.interior_radius is None or config.interior_radius <= 0):
        raise ConfigError("stream.interior_radius must be positive when stream.interior is set")
    _check_assumptions(config)
    return config


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def build_stream(config: ExperimentConfig, T: int) -> streams.LossStream:
    """Materialize the config's stream at horizon T (same seed at every T)."""
    return streams.make_stream(
        config.stream_family,
        config.stream_alpha,
        config.schedule,
        config.set_,
        T,
        base_center=config.base_center,
        base_target=config.base_target,
        direction=config.direction,
        interior=config.interior,
        interior_radius=config.interior_radius,
    )


def _learner_config(spec: LearnerSpec) -> learners.LearnerConfig:
    return learners.LearnerConfig(
        kind=spec.kind,
        sigma=spec.sigma,
        sigma_rule=spec.sigma_rule,
        inner_iterations=spec.inner_iterations,
        alpha_declared=spec.alpha_declared,
    )


def run_scenario_unit(
    config: ExperimentConfig, spec: LearnerSpec, stream: streams.LossStream, T: int
) -> tuple[ResultRow, metrics.RegretReport | None]:
    """Run one (learner, T) unit and evaluate its selected certificates."""
    tol = config.tolerances
    started = time.perf_counter()
    row = ResultRow(scenario=config.name, learner=spec.id, T=T, seed=config.seed)
    try:
        trace = learners.run_learner(
            _learner_config(spec), stream, config.set_, T, minimizer_tol=tol.minimizer_gap
        )
        metrics.fill_minimizers(
            trace, stream, config.set_, tol=tol.minimizer_gap, max_iter=tol.minimizer_max_iter
        )
        report = metrics.trace_metrics(trace, stream, config.set_)
        constants = {
            "alpha": report.alpha, "beta_f": report.beta_f, "beta_K": report.beta_K,
            "D": report.D, "M": report.M, "G": report.G, "r": report.r,
            "sigma": report.sigma,
        }
        for thm in spec.theorems:
            value = metrics.theorem_bound(
                thm, constants, T, V_T=report.V_T,
                P_T_star=report.P_T_star, S_T_star=report.S_T_star,
            )
            report.bound_values[thm] = value
            setattr(row, f"bound_{thm}", value)
        failed = []
        for lem in spec.lemmas:
            verdict = metrics.lemma_check(
                lem, trace, stream, config.set_, tol=tol.lemma_slack
            )
            report.lemma_verdicts[lem] = verdict
            if not verdict.passed:
                failed.append(lem)
        row.regret = report.regret
        row.V_T = report.V_T
        row.D_T = report.D_T
        row.P_T_star = report.P_T_star
        row.S_T_star = report.S_T_star
        row.M = report.M
        row.G = report.G
        row.lemma_failures = ";".join(failed)
    except Exception as exc:  # failed unit: keep the row, continue the rest
        row.lemma_failures = f"error:{type(exc).__name__}:{exc}"
        report = None
    if config.record_wall_time:
        row.wall_ms = (time.perf_counter() - started) * 1000.0
    return row, report


def run_experiment(config: ExperimentConfig, parallel: int = 1) -> list[ResultRow]:
    """All (learner, T) units of the scenario, rows sorted deterministically.

    Output is independent of ``parallel``; failed units keep their row with
    an ``error:`` token in ``lemma_failures`` while the rest proceed.
    """
    return run_experiment_detailed(config, parallel=parallel)[0]


def run_experiment_detailed(
    config: ExperimentConfig, parallel: int = 1
) -> tuple[list[ResultRow], dict]:
    """Like ``run_experiment`` but also returns {(learner id, T): report}."""
    stream_by_t = {T: build_stream(config, T) for T in sorted(set(config.T_values))}
    units = [(spec, T) for spec in config.learners for T in config.T_values]

    def task(unit):
        spec, T = unit
        return unit, run_scenario_unit(config, spec, stream_by_t[T], T)

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(task, units))
    else:
        outcomes = [task(u) for u in units]

    rows = []
    reports = {}
    for (spec, T), (row, report) in outcomes:
        rows.append(row)
        if report is not None:
            reports[(spec.id, T)] = report
    rows.sort(key=lambda r: (r.scenario, r.learner, r.T))
    return rows, reports


def verify_experiment(config: ExperimentConfig, parallel: int = 1):
    """Run the scenario's checkers; returns (rows, failure messages)."""
    rows, reports = run_experiment_detailed(config, parallel=parallel)
    slack = config.tolerances.bound_slack
    failures = []
    for row in rows:
        if row.lemma_failures.startswith("error:"):
            failures.append(f"{row.learner}@T={row.T}: {row.lemma_failures}")
            continue
        report = reports[(row.learner, row.T)]
        for lem, verdict in report.lemma_verdicts.items():
            if not verdict.passed:
                failures.append(
                    f"{row.learner}@T={row.T}: {lem} failed "
                    f"(worst slack {verdict.worst_slack:.3e} at round {verdict.worst_round})"
                )
        for thm, bound in report.bound_values.items():
            if row.regret > bound + slack:
                failures.append(
                    f"{row.learner}@T={row.T}: regret {row.regret:.6g} exceeds "
                    f"{thm} bound {bound:.6g}"
                )
    return rows, failures


def fit_slope(points) -> tuple[float, float]:
    """Least-squares slope of log(regret) against log(T).

    ``points`` is an iterable of (T, regret) pairs.  Nonpositive regrets are
    excluded with a warning; at least 3 usable points spanning two decades
    of T are required.  Returns (exponent, r_squared).
    """
    usable = []
    for T, regret in points:
        if regret <= 0:
            warnings.warn(f"fit_slope: dropping nonpositive regret at T={T}")
            continue
        usable.append((float(T), float(regret )))
    if len(usable) < 3:
        raise ConfigError("fit_slope needs at least 3 points with positive regret")
    ts = np.array([p[0] for p in usable])
    if ts.max() / ts.min() < 100.0:
        raise ConfigError("fit_slope needs T values spanning at least two decades")
    logs_t = np.log(ts)
    logs_r = np.log(np.array([p[1] for p in usable]))
    slope, intercept = np.polyfit(logs_t, logs_r, 1)
    fitted = slope * logs_t + intercept
    ss_res = float(np.sum((logs_r - fitted) ** 2))
    ss_tot = float(np.sum((logs_r - logs_r.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), r_squared


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # numpy scalars repr differently
    return str(value)


def rows_to_csv(rows: list[ResultRow]) -> str:
    """Fixed-column CSV with full double precision and '\\n' row endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_cell(getattr(row, col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: list[ResultRow]) -> str:
    payload = [{col: getattr(row, col) for col in CSV_COLUMNS} for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def emit_results(rows: list[ResultRow], format: str, path: str) -> None:
    """Write rows as 'csv' or 'json' with identical field names."""
    if format == "csv":
        text = rows_to_csv(rows)
    elif format == "json":
        text = rows_to_json(rows)
    else:
        raise ConfigError(f"unknown output format {format!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def parse_csv(text: str) -> list[ResultRow]:
    """Inverse of ``rows_to_csv`` (used by round-trip checks)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_COLUMNS:
        raise ConfigError("unexpected CSV header")
    float_fields = {
        f.name for f in fields(ResultRow)
        if f.name not in ("scenario", "learner", "T", "seed", "lemma_failures")
    }
    rows = []
    for parts in reader:
        kwargs = {}
        for col, cell in zip(CSV_COLUMNS, parts):
            if col in ("scenario", "learner", "lemma_failures"):
                kwargs[col] = cell
            elif col in ("T", "seed"):
                kwargs[col] = int(cell)
            elif col in float_fields:
                kwargs[col] = None if cell == "" else float(cell)
        rows.append(ResultRow(**kwargs))
    return rows
