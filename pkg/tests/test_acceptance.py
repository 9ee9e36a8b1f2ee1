"""Acceptance suite: one test per exit criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines.  Every tolerance is pinned here; nothing defers to calibration.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from ofwdyn import harness, learners, metrics, selfcheck, sets, streams
from ofwdyn.cli import main as cli_main
from ofwdyn.learners import LearnerConfig, compute_K
from ofwdyn.metrics import lemma_check


@contextmanager
def criterion(name: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[criterion {name}] FAIL ({time.perf_counter() - start:.1f}s)")
        raise
    print(f"[criterion {name}] PASS ({time.perf_counter() - start:.1f}s)")


# --- criterion 1: line-search oracle equivalence ---------------------------

def _staged_grid_argmin(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Independent oracle: argmin of a*s + b*s^2/2 over the 1e-6 grid.

    Two-stage subgrid refinement; exact for convex surrogates because the
    grid argmin of a convex function is adjacent to its continuous
    minimizer, hence inside the +-2000-step fine window around the coarse
    argmin.
    """
    out = np.empty(a.size)
    coarse = np.arange(0, 10**6 + 1, 1000)
    offsets = np.arange(-2000, 2001)
    for lo in range(0, a.size, 1000):
        hi = min(lo + 1000, a.size)
        ab, bb = a[lo:hi, None], b[lo:hi, None]
        s = coarse[None, :] / 1e6
        k = coarse[np.argmin(ab * s + 0.5 * bb * s * s, axis=1)]
        idx = np.clip(k[:, None] + offsets[None, :], 0, 10**6)
        s = idx / 1e6
        qf = ab * s + 0.5 * bb * s * s
        out[lo:hi] = s[np.arange(hi - lo), np.argmin(qf, axis=1)]
    return out


def test_criterion_1_line_search_oracle():
    with criterion("1 line-search oracle equivalence"):
        start = time.perf_counter()
        rng = np.random.default_rng(101)
        n = 10**4
        dims = (2, 10, 50)
        a = np.empty(n)
        b = np.empty(n)
        sigma_cf = np.empty(n)
        for i in range(n):
            d = dims[i % 3]
            g = rng.standard_normal(d)
            x = rng.standard_normal(d)
            x /= max(1.0, float(np.linalg.norm(x)))
            v = rng.standard_normal(d)
            v /= max(1.0, float(np.linalg.norm(v)))
            alpha = float(rng.uniform(0.2, 1.5))
            sigma_cf[i] = learners.line_search_sigma(g, x, v, alpha)
            a[i] = float(np.dot(g, v - x))
            b[i] = alpha * float(np.dot(x - v, x - v))
        sigma_grid = _staged_grid_argmin(a, b)
        sigma_err = np.max(np.abs(sigma_cf - sigma_grid))
        q_cf = a * sigma_cf + 0.5 * b * sigma_cf**2
        q_grid = a * sigma_grid + 0.5 * b * sigma_grid**2
        value_err = np.max(np.abs(q_cf - q_grid))
        elapsed = time.perf_counter() - start
        assert sigma_err <= 2e-6, sigma_err
        assert value_err <= 1e-12, value_err
        assert elapsed < 5.0, elapsed


# --- criterion 2: lemma certificate banks -----------------------------------

def _bank_set(i: int, d: int):
    kind = i % 4
    if kind == 0:
        rho = (0.5, 1.0, 2.0)[i % 3]
        return sets.ball(np.zeros(d), rho, set_strong_convexity=1.0 / rho)
    if kind == 1:
        return sets.box(-np.ones(d), 0.5 + 0.5 * np.ones(d))
    if kind == 2:
        return sets.simplex(d)
    return sets.l1_ball(d, 1.0 + 0.5 * (i % 2))


def _bank_schedule(i: int, seed: int):
    j = i % 4
    if j == 0:
        return streams.DriftSchedule(kind=streams.STATIC, seed=seed)
    if j == 1:
        mag = (0.005, 0.01, 0.02)[i % 3]
        return streams.DriftSchedule(kind=streams.RANDOM_WALK, magnitude=mag, seed=seed)
    if j == 2:
        return streams.DriftSchedule(
            kind=streams.PIECEWISE, magnitude=0.05, period=100 + 50 * (i % 4), seed=seed
        )
    return streams.DriftSchedule(
        kind=streams.SINUSOID, magnitude=0.02, period=50 + 25 * (i % 5), seed=seed
    )


def _smooth_bank(i: int, T: int):
    d = (2, 3, 5)[i % 3]
    set_ = _bank_set(i, d)
    alpha = (0.5, 1.0, 1.7, 2.0)[i % 4]
    schedule = _bank_schedule(i, 1000 + i)
    base = sets.default_start(set_)
    stream = streams.make_stream(
        streams.DRIFTING, alpha, schedule, set_, T, base_center=base
    )
    return stream, set_


def _interior_bank(i: int, T: int):
    # Clearances large enough that the auto iteration count stays moderate
    # (K ~ 40 for the balls, ~55 for the boxes).
    d = (2, 3)[i % 2]
    if i % 2 == 0:
        rho = (1.0, 2.0)[(i // 2) % 2]
        set_ = sets.ball(np.zeros(d), rho, set_strong_convexity=1.0 / rho)
        r = 0.75 * rho
    else:
        set_ = sets.box(-np.ones(d), np.ones(d))
        r = 0.9
    alpha = (0.5, 1.0, 2.0)[i % 3]
    schedule = _bank_schedule(i if i % 4 != 3 else i + 1, 2000 + i)  # skip big sinusoids
    stream = streams.make_stream(
        streams.DRIFTING, alpha, schedule, set_, T,
        base_center=sets.default_start(set_), interior=True, interior_radius=r,
    )
    return stream, set_


def _run_and_check(lemma_id, kind, stream, set_, tol=1e-7, **cfg):
    trace = learners.run_learner(
        LearnerConfig(kind=kind, **cfg), stream, set_,
        record_inner=False,
    )
    metrics.fill_minimizers(trace, stream, set_)
    verdict = lemma_check(lemma_id, trace, stream, set_, tol=tol)
    assert verdict.passed, (lemma_id, stream.schedule, set_.kind, verdict)
    return verdict


def test_criterion_2_lemma_certificates():
    with criterion("2 lemma certificates (50 scenarios each)"):
        start = time.perf_counter()
        T = 1000
        sigmas = (0.01, 1.0 / np.sqrt(T), 0.5)
        for i in range(50):
            stream, set_ = _smooth_bank(i, T)
            for sigma in sigmas:
                _run_and_check("lemma2", "ofw-fixed", stream, set_, sigma=sigma)
            _run_and_check("lemma4", "ofw-linesearch", stream, set_)
        for i in range(50):
            rho = (0.5, 1.0, 2.0)[i % 3]
            d = (2, 3, 5)[i % 3]
            ball = sets.ball(np.zeros(d), rho, set_strong_convexity=1.0 / rho)
            stream = streams.make_stream(
                streams.DRIFTING, (0.5, 1.0, 2.0)[i % 3],
                _bank_schedule(i, 3000 + i), ball, T,
                base_center=sets.default_start(ball),
            )
            _run_and_check("lemma5", "ofw-linesearch", stream, ball)
        for i in range(50):
            stream, set_ = _interior_bank(i, T)
            _run_and_check("lemma6", "ofw-linesearch", stream, set_)
            _run_and_check("lemma8", "ofw-multi", stream, set_)
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, elapsed


# --- criterion 3: theorem bound certificates --------------------------------

def _with_horizons(config, horizons):
    return harness.ExperimentConfig(**{**config.__dict__, "T_values": tuple(horizons)})


def test_criterion_3_theorem_certificates():
    with criterion("3 theorem bound certificates at T in {1e2, 1e3, 1e4}"):
        start = time.perf_counter()
        horizons = (100, 1000, 10000)
        seen = set()
        for path in ("configs/certificates_ball.yaml", "configs/certificates_interior.yaml"):
            config = _with_horizons(harness.load_config(path), horizons)
            rows, reports = harness.run_experiment_detailed(config, parallel=2)
            for row in rows:
                assert not row.lemma_failures.startswith("error:"), row
                report = reports[(row.learner, row.T)]
                for thm, bound in report.bound_values.items():
                    assert row.regret <= bound + 1e-6, (thm, row.T, row.regret, bound)
                    seen.add(thm)
        assert seen == {"thm1", "thm2", "thm3", "thm4", "thm5", "thm8"}
        elapsed = time.perf_counter() - start
        assert elapsed < 120.0, elapsed


# --- criterion 4: constant-regret plateau -----------------------------------

PLATEAU_CONFIG = """
experiment: {name: plateau, seed: 11, T_values: [1000, 10000]}
set: {kind: euclidean-ball, dimension: 3, center: [0.0, 0.0, 0.0], radius: 1.0,
      set_strong_convexity: 1.0}
stream:
  family: drifting-quadratic
  alpha: 1.0
  base_center: [0.1, 0.05, 0.0]
  interior: true
  interior_radius: 0.8
  schedule: {kind: static}
learners:
  - {id: ls, kind: ofw-linesearch, theorems: [thm4]}
"""


def test_criterion_4_constant_regret_plateau():
    with criterion("4 constant-regret plateau (thm4, V_T = 0)"):
        config = harness.parse_config(PLATEAU_CONFIG)
        rows = harness.run_experiment(config)
        by_t = {row.T: row for row in rows}
        assert by_t[10000].V_T == 0.0
        growth = by_t[10000].regret - by_t[1000].regret
        assert growth <= 1e-3 * by_t[10000].bound_thm4, growth


# --- criterion 5: best-of-three behavior ------------------------------------

def _multi_report(stream, set_):
    trace = learners.run_learner(LearnerConfig(kind="ofw-multi"), stream, set_,
                                 record_inner=False)
    metrics.fill_minimizers(trace, stream, set_)
    return metrics.trace_metrics(trace, stream, set_)


def test_criterion_5_best_of_three():
    with criterion("5 best-of-three branches (thm5)"):
        ball = sets.ball(np.zeros(3), 1.0, set_strong_convexity=1.0)
        scenarios = {
            "single-switch": streams.DriftSchedule(
                kind=streams.PIECEWISE, magnitude=0.08, period=500, seed=51
            ),
            "slow-drift": streams.DriftSchedule(
                kind=streams.RANDOM_WALK, magnitude=1e-3, seed=52
            ),
        }
        for name, schedule in scenarios.items():
            stream = streams.make_stream(
                streams.DRIFTING, 1.0, schedule, ball, 1000,
                base_center=[0.05, 0.0, 0.0], interior=True, interior_radius=0.8,
            )
            report = _multi_report(stream, ball)
            branch_v = 4 * report.alpha * (report.M + report.V_T) / (
                4 * report.alpha - report.beta_f
            )
            branch_p = 2 * report.G * report.D + 2 * report.G * report.P_T_star
            branch_s = report.alpha * report.D**2 + 2 * report.alpha * report.S_T_star
            for label, branch in [("V", branch_v), ("P", branch_p), ("S", branch_s)]:
                assert report.regret <= branch + 1e-6, (name, label, report.regret, branch)


# --- criterion 6: contraction of the multi-update learner -------------------

def test_criterion_6_contraction():
    with criterion("6 per-round contraction and C^K cap"):
        ball = sets.ball(np.zeros(2), 1.0, set_strong_convexity=1.0)
        stream = streams.make_stream(
            streams.DRIFTING, 1.3,
            streams.DriftSchedule(kind=streams.RANDOM_WALK, magnitude=0.02, seed=61),
            ball, 500, base_center=[0.1, 0.0], interior=True, interior_radius=0.5,
        )
        trace = learners.run_learner(LearnerConfig(kind="ofw-multi"), stream, ball)
        metrics.fill_minimizers(trace, stream, ball)
        verdict = lemma_check("lemma8", trace, stream, ball, tol=1e-9)
        assert verdict.passed, verdict
        K, C, _ = compute_K(stream.alpha, stream.beta_f, ball.diameter, 0.5, stream.bound_M)
        assert trace.inner_k == K
        assert C**K <= stream.beta_f / (4.0 * stream.alpha) + 1e-12


# --- criterion 7: assumption property suites --------------------------------

def test_criterion_7_assumption_suites():
    with criterion("7 assumption property suites (1e4 samples each)"):
        start = time.perf_counter()
        rng = np.random.default_rng(71)
        n = 10**4
        ball = sets.ball(np.zeros(3), 1.0, set_strong_convexity=1.0)
        interior = streams.make_stream(
            streams.DRIFTING, 1.5,
            streams.DriftSchedule(kind=streams.RANDOM_WALK, magnitude=0.03, seed=72),
            ball, 50, base_center=[0.1, 0.0, 0.0], interior=True, interior_radius=0.4,
        )
        checks = {
            "smoothness": selfcheck.smoothness_check(interior, ball, n, rng),
            "strong-convexity": selfcheck.strong_convexity_check(interior, ball, n, rng),
            "gradient-lower-bound": selfcheck.gradient_lower_bound_check(
                interior, ball, n, rng
            ),
            "quadratic-growth": selfcheck.quadratic_growth_check(interior, ball, n, rng),
            "interior-smooth-bound": selfcheck.interior_smooth_check(interior, ball, n, rng),
            "ball-witness": selfcheck.ball_witness_check(ball, n, rng),
        }
        small_ball = sets.ball(np.zeros(2), 0.5, set_strong_convexity=2.0)
        checks["ball-witness-r0.5"] = selfcheck.ball_witness_check(small_ball, n, rng)
        for name, (ok, worst) in checks.items():
            assert ok, (name, worst)
            assert worst <= 1e-9, (name, worst)
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, elapsed


# --- criterion 8: byte-identical determinism --------------------------------

def test_criterion_8_determinism(tmp_path):
    with criterion("8 byte-identical runs, serial and parallel"):
        out = tmp_path / "rows.csv"
        config_text = (
            open("configs/certificates_ball.yaml").read()
            + f"\n# output override below\n"
        )
        config_path = tmp_path / "config.yaml"
        config_path.write_text(config_text.replace(
            "output:\n  record_wall_time: false",
            f"output:\n  record_wall_time: false\n  csv: {out}",
        ))
        assert cli_main(["run", str(config_path)]) == 0
        first = out.read_bytes()
        assert cli_main(["run", str(config_path)]) == 0
        assert out.read_bytes() == first
        assert cli_main(["run", str(config_path), "--parallel", "8"]) == 0
        assert out.read_bytes() == first


# --- criterion 9: brute-force minimizer cross-check -------------------------

def test_criterion_9_rank1_minimizer_grid():
    with criterion("9 rank1 minimizer vs 1e-3 grid (20 rounds)"):
        bx = sets.box([-1.0, -0.8], [1.0, 1.2])
        stream = streams.make_stream(
            streams.RANK1, 1.3,
            streams.DriftSchedule(kind=streams.RANDOM_WALK, magnitude=0.25, seed=91),
            bx, 20, base_target=0.3, direction=[0.8, -0.6],
        )
        xs = np.arange(-1.0, 1.0 + 1e-3, 1e-3)
        ys = np.arange(-0.8, 1.2 + 1e-3, 1e-3)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        a = stream.spec.direction
        s = a[0] * gx + a[1] * gy
        asq = float(np.dot(a, a))
        for t in range(1, 21):
            _, f_star = metrics.per_round_minimizer(stream, bx, t, tol=1e-6)
            grid_min = float(
                (stream.alpha / (2 * asq) * (s - stream.spec.targets[t - 1]) ** 2).min()
            )
            assert abs(f_star - grid_min) <= 1e-3, (t, f_star, grid_min)
