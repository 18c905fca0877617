"""Acceptance suite: one test per release criterion, each printing a PASS/FAIL line.

Run with ``pytest -v tests/test_acceptance.py`` (add ``-s`` to see the lines
on passing runs too).
"""

import json
import time
from pathlib import Path

import numpy as np

from bfpde.cli import run
from bfpde.engine import (
    BF_SOLUTION,
    EQUALITY_FAILS,
    DomainBox,
    GridSpec,
    ProblemSpec,
    envelope,
    gamma_curves,
    verify,
)
from bfpde.expr import (
    EvalDomainError,
    differentiate,
    evaluate,
    finite_difference,
    parse,
)
from bfpde.fuzzy import TriangularFuzzyNumber, alpha_cut
from bfpde.io import emit_curves, load_problem

from randexpr import (
    random_binding,
    random_crisp_pde_instance,
    random_monotone_instance,
    random_smooth_expression,
)

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"


def _criterion(number, description, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"{status} criterion {number}: {description}{suffix}")
    assert ok, f"criterion {number} failed: {description}{suffix}"


def test_criterion_1_worked_example_end_to_end():
    problem = load_problem(PROBLEMS / "worked_example.json")
    assert (problem.grid.n_x1, problem.grid.n_x2, problem.grid.n_alpha) == (41, 41, 21)
    start = time.perf_counter()
    verdict = verify(problem)
    elapsed = time.perf_counter() - start
    worst = verdict.report("equality").worst_violation
    ok = verdict.outcome == BF_SOLUTION and worst <= 1e-8 and elapsed < 5.0
    _criterion(1, "worked example verifies as BF_SOLUTION", ok,
               f"outcome={verdict.outcome}, equality violation={worst:.3e}, {elapsed:.2f}s")


def test_criterion_2_gamma_csv_matches_closed_form(tmp_path):
    problem = load_problem(PROBLEMS / "worked_example.json")
    gamma = gamma_curves(problem.g, problem.parameters, problem.box, problem.grid)
    path = tmp_path / "gamma.csv"
    emit_curves([gamma], path)
    worst = 0.0
    rows = 0
    for line in path.read_text().strip().splitlines()[1:]:
        role, x1, x2, alpha, lower, upper = line.split(",")
        assert role == "GAMMA"
        x1, x2, alpha = float(x1), float(x2), float(alpha)
        b1 = 0.25 + alpha * 0.25
        b2 = 0.75 - alpha * 0.25
        worst = max(worst,
                    abs(float(lower) - b1 * x2 / x1),
                    abs(float(upper) - b2 * x2 / x1))
        rows += 1
    ok = rows == 41 * 41 * 21 and worst <= 1e-8
    _criterion(2, "emitted GAMMA CSV matches b_i(alpha)*x2/x1", ok,
               f"{rows} rows, worst |err|={worst:.3e}")


def test_criterion_3_negative_control():
    verdict = verify(load_problem(PROBLEMS / "wrong_F.json"))
    report = verdict.report("equality")
    ok = (
        verdict.outcome == EQUALITY_FAILS
        and report.worst_violation > 0.1
        and report.location is not None
        and report.location[1] > 4.5
    )
    _criterion(3, "wrong right-hand side fails the equality gate near x2=5", ok,
               f"outcome={verdict.outcome}, worst={report.worst_violation:.3f}, loc={report.location}")


def test_criterion_4_differentiability_margins():
    problem = load_problem(PROBLEMS / "worked_example.json")
    gamma = gamma_curves(problem.g, problem.parameters, problem.box, problem.grid)
    cond1_margin = float(np.diff(gamma.lower, axis=2).min())
    cond2_margin = float((-np.diff(gamma.upper, axis=2)).min())
    core_gap = float(np.abs(gamma.lower[:, :, -1] - gamma.upper[:, :, -1]).max())
    ok = cond1_margin >= 0.0 and cond2_margin >= 0.0 and core_gap <= 1e-12
    _criterion(4, "monotonicity margins non-negative, core cut closes", ok,
               f"cond1 min={cond1_margin:.3e}, cond2 min={cond2_margin:.3e}, |gap(alpha=1)|={core_gap:.3e}")


def test_criterion_5_crisp_reduction_family():
    rng = np.random.default_rng(20260501)
    box = DomainBox(1.0, 5.0, 0.0, 5.0, x2_min_open=True)
    grid = GridSpec(9, 9, 5)
    solved = failed = 0
    for _ in range(100):
        g_text, f_text, params = random_crisp_pde_instance(rng, perturb=False)
        problem = ProblemSpec("crisp", g_text, f_text, parse(g_text, params.names),
                              parse(f_text, params.names), params, box, grid)
        solved += verify(problem).outcome == BF_SOLUTION
    for _ in range(100):
        g_text, f_text, params = random_crisp_pde_instance(rng, perturb=True)
        problem = ProblemSpec("crisp-perturbed", g_text, f_text, parse(g_text, params.names),
                              parse(f_text, params.names), params, box, grid)
        failed += verify(problem).outcome == EQUALITY_FAILS
    ok = solved == 100 and failed == 100
    _criterion(5, "crisp family: 100/100 solve, 100/100 perturbed fail equality", ok,
               f"solved={solved}, failed={failed}")


def test_criterion_6_envelope_oracle_equivalence():
    rng = np.random.default_rng(20260502)
    worst = 0.0
    for _ in range(200):
        g_text, params, box = random_monotone_instance(rng)
        g = parse(g_text, params.names)
        for _ in range(50):
            x1 = float(rng.uniform(box.x1_min, box.x1_max))
            x2 = float(rng.uniform(box.x2_min, box.x2_max))
            alpha = float(rng.uniform(0.0, 1.0))
            lo, hi = envelope(g, params, x1, x2, alpha)
            cuts = [alpha_cut(t, alpha) for t in params.numbers]
            axes = [np.linspace(c.lo, c.hi, 33) for c in cuts]
            mesh = np.meshgrid(*axes, indexing="ij")
            binding = {"x1": x1, "x2": x2}
            for name, vals in zip(params.names, mesh):
                binding[name] = vals.ravel()
            sampled = np.asarray(evaluate(g, binding))
            blo, bhi = float(sampled.min()), float(sampled.max())
            worst = max(worst,
                        abs(lo - blo) / (1.0 + abs(blo)),
                        abs(hi - bhi) / (1.0 + abs(bhi)))
    ok = worst <= 1e-6
    _criterion(6, "corner envelope agrees with dense 33-per-axis brute force", ok,
               f"worst relative gap={worst:.3e} over 200x50 samples")


def test_criterion_7_derivative_cross_check():
    rng = np.random.default_rng(20260810)
    checked = 0
    worst = 0.0
    while checked < 500:
        e, var = random_smooth_expression(rng)
        binding = random_binding(rng)
        try:
            sym = evaluate(differentiate(e, var), binding)
            fd = finite_difference(e, var, binding, 1e-5)
        except EvalDomainError:
            continue
        if not (np.isfinite(sym) and np.isfinite(fd)):
            continue
        if abs(sym) > 50.0 or abs(evaluate(e, binding)) > 50.0:
            continue
        worst = max(worst, abs(sym - fd) / (1.0 + abs(sym)))
        checked += 1
    ok = worst <= 1e-6
    _criterion(7, "symbolic derivative matches central differences on 500 expressions", ok,
               f"worst scaled error={worst:.3e}")


def test_criterion_8_alpha_cut_property_suite():
    rng = np.random.default_rng(20260503)
    failures = 0
    for _ in range(10_000):
        left = float(rng.uniform(-100.0, 100.0))
        peak = left + float(rng.uniform(0.0, 50.0))
        right = peak + float(rng.uniform(0.0, 50.0))
        tri = TriangularFuzzyNumber(left, peak, right)
        a_lo, a_hi = sorted(rng.uniform(0.0, 1.0, size=2))
        outer = alpha_cut(tri, float(a_lo))
        inner = alpha_cut(tri, float(a_hi))
        core = alpha_cut(tri, 1.0)
        nested = outer.lo <= inner.lo and outer.hi >= inner.hi
        degenerate = core.lo == tri.peak == core.hi
        ordered = outer.lo <= outer.hi and inner.lo <= inner.hi
        if not (nested and degenerate and ordered):
            failures += 1
    ok = failures == 0
    _criterion(8, "alpha-cut nesting/degeneracy/ordering over 10,000 random triangles", ok,
               f"failures={failures}")


def test_criterion_9_determinism(tmp_path, capsys):
    digests = []
    for tag in ("first", "second"):
        report = tmp_path / f"report_{tag}.json"
        curves = tmp_path / f"curves_{tag}.csv"
        code = run([
            "check", str(PROBLEMS / "worked_example.json"),
            "--report", str(report), "--curves", str(curves),
        ])
        assert code == 0
        digests.append((report.read_bytes(), curves.read_bytes()))
    capsys.readouterr()
    ok = digests[0] == digests[1]
    report_bytes = len(digests[0][0])
    curve_bytes = len(digests[0][1])
    _criterion(9, "two consecutive check runs are byte-identical", ok,
               f"report {report_bytes} bytes, curves {curve_bytes} bytes")
    data = json.loads(digests[0][0])
    assert data["outcome"] == "BF_SOLUTION"
