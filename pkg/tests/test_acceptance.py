"""The ten acceptance criteria, each run through its registry experiment.

Every criterion prints one line ``criterion N [experiment]: PASS|FAIL``; the
lines are repeated in the terminal summary.
"""
import pytest

from sdstein.experiments import ExperimentConfig, report_passed, run_experiment

CRITERIA = [
    (1, "identity-check", "characterization identity within 3 combined SE, < 60 s per law"),
    (2, "stein-residual", "Stein residual <= 3 (1e-2 + SE) at 5 points, < 5 min per law"),
    (3, "derivative-bounds", "derivative sup bounds of f_h on 10^3-point grids, d = 1, 2"),
    (4, "semigroup-laws", "composition, invariance and exact t = 0"),
    (5, "discrepancy-bound", "smooth W2 <= (d/2) sqrt(m2) S + 3 combined errors"),
    (6, "galerkin-kernel", "Galerkin kernel discrepancy, energy identity and energy bound"),
    (7, "poincare", "Rayleigh ratios <= 1 + 3 SE, coordinate ratio = 1 +- 3 SE"),
    (8, "smoothing-rate", "W1(X, X_t) decreasing, finite C_hat, stable scaling curve, < 10 min"),
    (9, "distance-orderings", "lb_r2 <= lb_r1 <= W1 <= W2 within 1e-10"),
    (10, "convergence-sequence", "smooth W2 along the flow decreases below 2 SE"),
]

LINES = []


def _failed(report):
    bad = [c["name"] for c in report["checks"] if c["verdict"] == "fail" and c.get("gating", True)]
    bad += [f"runtime {r['name']}" for r in report["wall_clock"]["budgets"] if r.get("verdict") == "fail"]
    return bad


@pytest.mark.parametrize("number,experiment,what", CRITERIA, ids=[c[1] for c in CRITERIA])
def test_criterion(number, experiment, what, tmp_path, capsys):
    report = run_experiment(ExperimentConfig.from_dict({"experiment": experiment, "seed": 7},
                                                       output_dir=str(tmp_path)))
    ok = report_passed(report)
    line = (f"criterion {number:2d} [{experiment}]: {'PASS' if ok else 'FAIL'}  ({what}; "
            f"{report['n_checks']} checks, {report['wall_clock']['seconds']:.0f} s)")
    LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert ok, _failed(report)
