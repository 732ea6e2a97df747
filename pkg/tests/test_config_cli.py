import json

import pytest

import socialplan as sp
from socialplan.cli import main
from socialplan.config import load_config, save_config
from socialplan.scenarios import case_scenario, fixture_scenario, write_scenario_config


@pytest.fixture
def case_config(tmp_path):
    cfg = write_scenario_config(case_scenario("I"), tmp_path, seed=0)
    save_config(cfg, tmp_path / "config.json")
    return tmp_path / "config.json"


def test_config_roundtrip(case_config, tmp_path):
    cfg = load_config(case_config)
    assert cfg.sampler.dt == 0.25
    assert cfg.rewards.theta_ego == (1.0, 0.5, 10.0)
    again = tmp_path / "again.json"
    save_config(cfg, again)
    assert json.loads(again.read_text()) == json.loads(case_config.read_text())


def test_config_rejects_bad_version(tmp_path, case_config):
    data = json.loads(case_config.read_text())
    data["schema_version"] = 99
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    with pytest.raises(sp.SchemaError):
        load_config(bad)


def test_config_rejects_missing_keys(tmp_path, case_config):
    data = json.loads(case_config.read_text())
    del data["paths"]["ego"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    with pytest.raises(sp.SchemaError):
        load_config(bad)


def test_config_rejects_invalid_json(tmp_path):
    bad = tmp_path / "nope.json"
    bad.write_text("{not json")
    with pytest.raises(sp.SchemaError):
        load_config(bad)


def test_cli_missing_config_is_data_error(tmp_path, capsys):
    code = main(["sim", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path / "o")])
    assert code == 2


def test_cli_usage_errors(tmp_path, case_config):
    assert main(["frobnicate", "--config", str(case_config), "--out", str(tmp_path)]) == 1
    assert main(["sim", "--out", str(tmp_path)]) == 1  # missing --config
    assert main(["sim", "--config", str(case_config), "--out", str(tmp_path), "--policy", "bogus"]) == 1


def test_cli_json_errors(tmp_path, capsys):
    code = main(["--json-errors", "infer", "--config", str(tmp_path / "x.json"), "--out", str(tmp_path)])
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert set(err) == {"error", "message"}


def test_cli_sim_outputs(case_config, tmp_path):
    out = tmp_path / "simout"
    code = main(["sim", "--config", str(case_config), "--out", str(out)])
    assert code == 0
    stats = json.loads((out / "stats.json").read_text())
    assert set(stats["policies"]) == {"egoism", "courtesy", "confidence"}
    for name in ("egoism", "courtesy", "confidence"):
        trace = (out / f"trace_{name}.csv").read_text().splitlines()
        assert trace[0].startswith("t,s_ego,v_ego")
        assert stats["policies"][name]["terminated"]


def test_cli_sim_custom_policy(case_config, tmp_path):
    out = tmp_path / "custom"
    assert main(["sim", "--config", str(case_config), "--out", str(out), "--policy", "0.2,0.5,0.3"]) == 0
    assert (out / "trace_0.2_0.5_0.3.csv").exists()


def test_cli_fixture_infer_regen(tmp_path):
    template_dir = tmp_path / "template"
    cfg = write_scenario_config(fixture_scenario("courtesy"), template_dir, seed=0)
    save_config(cfg, template_dir / "config.json")

    fix = tmp_path / "fix"
    assert main([
        "fixture", "--config", str(template_dir / "config.json"), "--out", str(fix),
        "--lambda", "courtesy",
    ]) == 0
    assert (fix / "tracks.csv").exists()

    inf = tmp_path / "inf"
    assert main(["infer", "--config", str(fix / "scenario.json"), "--out", str(inf)]) == 0
    report = json.loads((inf / "inference.json").read_text())
    agents = report["pairs"]["0"]["agents"]
    assert agents["0"]["dop"]["courtesy"] > 0.5

    reg = tmp_path / "reg"
    assert main(["regen", "--config", str(fix / "scenario.json"), "--out", str(reg)]) == 0
    table = json.loads((reg / "regen.json").read_text())
    ego_mse = table["pairs"]["0"]["mse"]["ego"]
    assert ego_mse["estimated"]["1.0"] < ego_mse["egoism"]["1.0"]


def test_cli_deterministic_bytes_across_runs_and_threads(case_config, tmp_path):
    outs = []
    for name, threads in (("r1", "1"), ("r2", "1"), ("r3", "2")):
        out = tmp_path / name
        assert main([
            "sim", "--config", str(case_config), "--out", str(out), "--threads", threads,
        ]) == 0
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    for other in outs[1:]:
        assert sorted(p.name for p in other.iterdir()) == files
        for name in files:
            assert (outs[0] / name).read_bytes() == (other / name).read_bytes()


def test_seed_override(case_config, tmp_path):
    cfg = load_config(case_config)
    assert cfg.seed == 0
    out = tmp_path / "seeded"
    assert main(["fixture", "--config", str(case_config), "--out", str(out), "--seed", "9"]) == 0
    written = load_config(out / "scenario.json")
    assert written.seed == 9


def test_config_prior_variants_roundtrip(tmp_path, case_config):
    data = json.loads(case_config.read_text())
    data["inference"]["prior"] = {"kind": "dop", "fractions": [0.27, 0.49, 0.23]}
    f = tmp_path / "dop.json"
    f.write_text(json.dumps(data))
    cfg = load_config(f)
    assert cfg.inference.prior.kind == "dop"
    assert cfg.inference.prior.fractions == (0.27, 0.49, 0.23)
    pset = sp.init_particles(cfg.inference, seed=0)
    assert abs(pset.weights.sum() - 1.0) < 1e-9

    data["inference"]["prior"] = {"kind": "dirichlet", "alpha": [2.0, 1.0, 1.0]}
    f.write_text(json.dumps(data))
    cfg = load_config(f)
    assert cfg.inference.prior.dirichlet_alpha().tolist() == [2.0, 1.0, 1.0]

    data["inference"]["prior"] = {"kind": "dop"}  # missing fractions
    f.write_text(json.dumps(data))
    with pytest.raises(sp.SchemaError):
        load_config(f)
