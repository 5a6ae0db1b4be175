import json

import pytest

from heavywalk.harness import cli
from heavywalk.harness.config import ConfigError, ExperimentConfig
from heavywalk.harness.io import STOPPING_COLUMNS, STRIP_COLUMNS, WALK_COLUMNS, read_csv
from heavywalk.harness.presets import PRESETS, list_presets, preset_config
from heavywalk.harness.runner import run
from heavywalk.tails import TailLaw
from heavywalk.walk import IncrementLaw

UNIT_UP = IncrementLaw(TailLaw.constant(1.0), TailLaw.zero(), 1.0).to_dict()
ESCAPE = IncrementLaw(TailLaw.pareto(0.5), TailLaw.uniform(1.0), 0.5).to_dict()


def _cfg(**over):
    cfg = {"name": "tiny", "model": {"type": "walk", "law": UNIT_UP}, "horizon": 4096,
           "replicas": 1, "master_seed": 0,
           "checks": [{"check": "upper-envelope",
                       "params": {"theta": 1.0, "eps": 0.5, "burn_in": 16}}]}
    cfg.update(over)
    return cfg


def test_trivial_run():
    rep = run(_cfg())
    p = rep.payload
    assert p["passed"] and len(p["checks"]) == 1
    assert p["checks"][0]["value"] == 1
    assert p["replicas_completed"] == 1 and not p["reduced_replicas"]


def test_repeat_runs_identical():
    cfg = _cfg(model={"type": "walk", "law": ESCAPE}, replicas=6, levels=[0.0, 50.0],
               checks=[{"check": "loglog-slope", "params": {"lo": 0, "hi": 10, "burn_in": 8}},
                       {"check": "passage-survival", "gating": False,
                        "params": {"level": 50.0, "lo": -5, "hi": 0}}])
    assert run(cfg).payload == run(cfg).payload


def test_workers_do_not_change_results(monkeypatch):
    cfg = _cfg(model={"type": "walk", "law": ESCAPE}, replicas=8,
               checks=[{"check": "growth-ratio", "params": {"lo": 0, "hi": 10}}])
    serial = run(cfg).payload
    monkeypatch.setenv("HEAVYWALK_WORKERS", "2")
    assert run(cfg).payload == serial


def test_invalid_config_lists_every_field():
    bad = {"model": {"type": "walk", "law": ESCAPE}, "horizon": 1, "replicas": 0,
           "master_seed": -3, "bogus": 1,
           "checks": [{"check": "nope"}, {"check": "upper-envelope", "params": {"theta": 2.0}}]}
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_dict(bad)
    fields = err.value.fields
    for f in ("horizon", "replicas", "master_seed", "bogus", "checks[0].check"):
        assert f in fields
    assert any(f.startswith("checks[1].params.theta") for f in fields)


def test_missing_keys_and_model_type():
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_dict({"model": {"type": "lattice"}})
    assert {"horizon", "replicas", "master_seed", "model.type"} <= set(err.value.fields)


def test_config_hash_ignores_output_dir(tmp_path):
    a = ExperimentConfig.from_dict(_cfg())
    b = ExperimentConfig.from_dict(_cfg(output_dir=str(tmp_path)))
    c = ExperimentConfig.from_dict(_cfg(master_seed=1))
    assert a.config_hash() == b.config_hash() != c.config_hash()


def test_presets_catalog():
    names = set(list_presets())
    assert {"cor2-rate", "upper-envelope", "lower-envelope", "passage-moments", "last-exit-tail",
            "lamperti-gamma", "strip-ergodic", "strip-boundary", "strip-bulk",
            "drift-regions", "analytic-oracles", "risk-invariance"} <= names
    for name in PRESETS:
        ExperimentConfig.from_dict(preset_config(name))
    with pytest.raises(ConfigError):
        preset_config("no-such-preset")


def test_preset_overrides():
    cfg = ExperimentConfig.from_dict({"preset": "cor2-rate", "replicas": 3, "horizon": 1000})
    assert cfg.replicas == 3 and cfg.horizon == 1000 and cfg.name == "cor2-rate"


def test_csv_outputs(tmp_path):
    run(_cfg(model={"type": "walk", "law": ESCAPE}, replicas=2, levels=[0.0, 5.0],
             output_dir=str(tmp_path)))
    walk = read_csv(tmp_path / "walk_checkpoints.csv")
    assert tuple(walk[0]) == WALK_COLUMNS
    assert {r["seed"] for r in walk} == {"0", "1"}
    stop = read_csv(tmp_path / "stopping.csv")
    assert tuple(stop[0]) == STOPPING_COLUMNS and len(stop) == 4
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["payload"]["config_hash"] and "wall_clock_seconds" in report


def test_strip_csv_outputs(tmp_path):
    cfg = preset_config("strip-boundary")
    cfg.update(horizon=2000, replicas=2, output_dir=str(tmp_path))
    run(cfg)
    rows = read_csv(tmp_path / "strip_checkpoints.csv")
    assert tuple(rows[0]) == STRIP_COLUMNS
    exc = read_csv(tmp_path / "excursions.csv")
    assert tuple(exc[0]) == ("seed", "n", "sigma", "nu")
    assert all(int(r["nu"]) >= 2 for r in exc)


def test_crash_isolation():
    blowup = IncrementLaw(TailLaw.pareto(0.002), TailLaw.uniform(1.0), 0.5).to_dict()
    rep = run(_cfg(model={"type": "walk", "law": blowup}, horizon=2, replicas=40,
                   checks=[{"check": "growth-ratio", "params": {"lo": 0, "hi": 1e4}}]))
    p = rep.payload
    assert p["reduced_replicas"]
    assert 0 < p["replicas_completed"] < 40
    assert p["replicas_completed"] + len(p["aborted"]) == 40
    assert all("non-finite" in a["reason"] for a in p["aborted"])


def test_check_domain_error_is_recorded():
    rep = run(_cfg(levels=[5.0],
                   checks=[{"check": "passage-survival", "params": {"level": 5.0, "lo": -1, "hi": 0}}]))
    c = rep.payload["checks"][0]
    assert not c["passed"] and "slope_error" in c["details"]
    rep = run(_cfg(levels=[5.0],
                   checks=[{"check": "passage-survival",
                            "params": {"level": 5.0, "lo": -1, "hi": 0, "moments": {"1": "converging"}}}]))
    c = rep.payload["checks"][0]
    assert not c["passed"] and "1000 samples" in c["error"]


def test_static_checks():
    rep = run({"model": {"type": "none"}, "horizon": 2, "replicas": 1, "master_seed": 0,
               "checks": [{"check": "truncated-mean-identity",
                           "params": {"law": TailLaw.pareto(0.5).to_dict(), "z": 100.0, "rtol": 1e-9}},
                          {"check": "karamata-ratio",
                           "params": {"law": TailLaw.pareto(0.5).to_dict(), "z": 1e8, "tol": 1e-3}}]})
    assert rep.passed


def test_cli_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(_cfg()))
    assert cli.main(["run", str(good)]) == 0
    assert "overall: PASS" in capsys.readouterr().out
    failing = tmp_path / "fail.json"
    failing.write_text(json.dumps(_cfg(checks=[{"check": "growth-ratio", "params": {"lo": 5, "hi": 6}}])))
    assert cli.main(["run", str(failing)]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"horizon": 1}))
    assert cli.main(["run", str(bad)]) == 2
    assert "horizon" in capsys.readouterr().err
    assert cli.main(["accept", "unknown"]) == 2
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["list-presets"]) == 0
    assert "cor2-rate" in capsys.readouterr().out
    assert cli.main(["schema"]) == 0
    assert json.loads(capsys.readouterr().out)["title"] == "heavywalk experiment"
