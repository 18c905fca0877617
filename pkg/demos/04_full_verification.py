"""End-to-end verification of several problem files.

Runs the full gate sequence (structure, fuzzy validity, differentiability,
equality, boundary) on the shipped problems and shows how the verdict and the
emitted artifacts look.  The same flow is available from the command line:

    bfpde check problems/worked_example.json --report report.json --curves curves.csv
"""

import tempfile
from pathlib import Path

from bfpde import compute_curves, emit_curves, emit_report, load_problem, verify

ROOT = Path(__file__).resolve().parents[1]


def show(filename):
    problem = load_problem(ROOT / "problems" / filename)
    verdict = verify(problem)
    print(f"{filename}: {verdict.outcome}")
    for check in verdict.checks:
        status = "pass" if check.passed else "FAIL"
        note = f"  ({check.note})" if check.note else ""
        print(f"    {check.name:<18} {status}  worst={check.worst_violation:.3e}{note}")
    print()
    return problem, verdict


problem, verdict = show("worked_example.json")
show("boundary_example.json")
show("wrong_F.json")
show("not_differentiable.json")

# artifacts: a byte-stable JSON report and a CSV of the Y/F/GAMMA curves
with tempfile.TemporaryDirectory() as tmp:
    report_path = Path(tmp) / "report.json"
    curves_path = Path(tmp) / "curves.csv"
    emit_report(verdict, report_path)
    emit_curves(compute_curves(problem), curves_path)
    print("report head:")
    print("\n".join(report_path.read_text().splitlines()[:8]))
    print()
    print("curves head:")
    print("\n".join(curves_path.read_text().splitlines()[:4]))
