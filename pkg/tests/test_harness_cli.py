import json

import pytest

from sdstein.cli import main
from sdstein.errors import ConfigInvalid, UnknownExperiment
from sdstein.experiments import (
    REGISTRY,
    ExperimentConfig,
    list_registry,
    recheck,
    report_json,
    run_experiment,
)


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def _strip_clock(text):
    doc = json.loads(text)
    doc.pop("wall_clock")
    return json.dumps(doc, sort_keys=True)


def test_registry_contents():
    rows = list_registry()
    ids = [r["id"] for r in rows]
    assert len(ids) >= 9 and len(set(ids)) == len(ids)
    for key in ("catalog-check", "identity-check", "stein-residual", "derivative-bounds", "discrepancy-bound",
                "galerkin-kernel", "poincare", "smoothing-rate", "convergence-sequence"):
        assert key in REGISTRY
    anchors = {r["id"]: r["anchor"] for r in rows}
    assert "smoothing" in anchors["smoothing-rate"]
    assert "Stein kernel" in anchors["discrepancy-bound"]


def test_identity_check_passes_and_is_deterministic(tmp_path):
    cfg = {"experiment": "identity-check", "seed": 7, "law": "gamma1d", "budgets": {"n_samples": 100000}}
    a = run_experiment(ExperimentConfig.from_dict(cfg))
    b = run_experiment(ExperimentConfig.from_dict(cfg))
    assert a["passed"]
    assert _strip_clock(report_json(a)) == _strip_clock(report_json(b))
    assert recheck(a)


def test_cli_exit_codes(tmp_path, capsys):
    ok = _write(tmp_path, {"experiment": "catalog-check", "seed": 1, "law": "gamma1d"})
    assert main(["run", "--config", str(ok), "--out", str(tmp_path / "out")]) == 0
    report = json.loads((tmp_path / "out" / "catalog-check.json").read_text())
    assert report["passed"] and report["config"]["seed"] == 1
    assert main(["run", "--config", str(ok), "--seed", "5", "--out", str(tmp_path / "o2")]) == 0
    assert json.loads((tmp_path / "o2" / "catalog-check.json").read_text())["config"]["seed"] == 5

    bad = _write(tmp_path, {"experiment": "no-such-thing", "seed": 1}, "bad.json")
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["bogus-command"]) == 2
    assert main(["run"]) == 2

    # an impossible tolerance makes a check fail: exit 1
    fail = _write(tmp_path, {"experiment": "identity-check", "seed": 7, "law": "gamma1d",
                             "budgets": {"n_samples": 2000}, "tolerances": {"se_mult": 1e-9}}, "f.json")
    assert main(["run", "--config", str(fail), "--out", str(tmp_path / "o3")]) == 1
    assert main(["list"]) == 0
    assert main(["catalog"]) == 0
    out = capsys.readouterr().out
    assert "smoothing-rate" in out and "gamma1d" in out


def test_config_validation(tmp_path):
    with pytest.raises(ConfigInvalid) as exc:
        ExperimentConfig.from_dict({"experiment": "poincare", "colour": "red"})
    assert "seed" in exc.value.errors and "colour" in exc.value.errors
    with pytest.raises(ConfigInvalid) as exc:
        ExperimentConfig.from_dict({"experiment": "poincare", "seed": 1, "budgets": {"n_mc": -4, "x": 1}})
    assert set(exc.value.errors) == {"budgets.n_mc", "budgets.x"}
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_dict({"experiment": "poincare", "seed": "7"})
    with pytest.raises(UnknownExperiment):
        run_experiment(ExperimentConfig.from_dict({"experiment": "nope", "seed": 0}))


def test_law_from_file(tmp_path):
    law = _write(tmp_path, {"family": "multi_gamma", "params": {"alpha": [2.0], "beta": [1.0]}}, "law.json")
    cfg = _write(tmp_path, {"experiment": "catalog-check", "seed": 3, "law": "law.json"})
    report = run_experiment(ExperimentConfig.load(cfg))
    assert report["passed"]
    inline = _write(tmp_path, {"experiment": "catalog-check", "seed": 3,
                               "law": {"family": "rot_inv_stable", "dimension": 2, "params": {"alpha": 1.7}}},
                    "inline.json")
    assert run_experiment(ExperimentConfig.load(inline))["passed"]


def test_recheck_detects_tampering():
    report = run_experiment(ExperimentConfig.from_dict({"experiment": "catalog-check", "seed": 0,
                                                        "law": "gamma1d"}))
    assert recheck(report)
    c = report["checks"][5]
    c["estimate"] = 1.0  # hermitian symmetry error far above its bound
    assert not recheck(report)
