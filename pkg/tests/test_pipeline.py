import json

import pytest

import config
import main
from conftest import write_json
from owc.channeldb import load_db
from owc.manifest import RunManifest

TINY_SCENARIO = {
    "name": "tiny",
    "description": "dois usuários em cantos opostos",
    "users": [
        {"user": 1, "location": [0.5, 0.5, 0.5]},
        {"user": 2, "location": [1.5, 1.5, 0.5]},
    ],
    "published": {
        "imr": [
            {"user": 1, "ap": 1, "element": 5, "wavelength": "red"},
            {"user": 2, "ap": 2, "element": 5, "wavelength": "red"},
        ]
    },
}


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("OWC_SCENE", "OWC_RECEIVER", "OWC_SCENARIO", "OWC_DB", "OWC_OUT"):
        monkeypatch.setattr(config, name, "")
    monkeypatch.setattr(config, "OWC_ORDERS", "1")
    monkeypatch.setattr(config, "OWC_SINR_MODE", "linear")
    monkeypatch.setattr(config, "OWC_THREADS", "1")


@pytest.fixture
def scenario_file(tmp_path):
    return write_json(tmp_path / "tiny_scenario.json", TINY_SCENARIO)


def _run_args(scene, scenario, out, threads):
    return [
        "run",
        "--scene", str(scene),
        "--receiver", "imr",
        "--scenario", str(scenario),
        "--out", str(out),
        "--threads", str(threads),
    ]


def test_run_writes_every_output(tmp_path, tiny_scene_file, scenario_file):
    out = tmp_path / "out"
    assert main.main(_run_args(tiny_scene_file, scenario_file, out, 1)) == 0

    names = sorted(p.name for p in out.iterdir())
    assert names == [
        "allocation-tiny-imr.csv",
        "bandwidth-imr.csv",
        "cdf-imr.csv",
        "channel-imr.owcdb",
        "manifest-run.json",
        "published-tiny-imr.csv",
    ]

    manifest_data = json.loads((out / "manifest-run.json").read_text(encoding="utf-8"))
    assert "threads" not in manifest_data
    assert manifest_data["max_order"] == 1
    assert manifest_data["sinr_mode"] == "linear"
    assert manifest_data["lds_per_unit"] == 12
    assert manifest_data["results"]["objective"] >= manifest_data["results"]["published_objective"]
    convention = manifest_data["results"]["bandwidth_convention"]
    assert convention["selection"] == "max_dc_gain per location"
    assert convention["nyquist_hz"] == pytest.approx(5e10)
    assert 0 <= manifest_data["results"]["f3db_nyquist_capped_locations"] <= 4
    assert 0.0 <= manifest_data["results"]["max_diffuse_share"] <= 1.0

    digest = RunManifest(**manifest_data).digest
    for csv_name in ("allocation-tiny-imr.csv", "bandwidth-imr.csv", "cdf-imr.csv"):
        first_line = (out / csv_name).read_text(encoding="utf-8").splitlines()[0]
        assert first_line == f"# manifest=manifest-run.json id={digest}"

    assert len(load_db(out / "channel-imr.owcdb")) == 4 * 2 * 9


def test_run_is_byte_identical_across_thread_counts(tmp_path, tiny_scene_file, scenario_file):
    out = tmp_path / "out"
    assert main.main(_run_args(tiny_scene_file, scenario_file, out, 1)) == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main.main(_run_args(tiny_scene_file, scenario_file, out, 8)) == 0
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    assert first == second


def test_separate_commands(tmp_path, tiny_scene_file, scenario_file):
    out = tmp_path / "out"
    db = out / "tiny.owcdb"
    assert main.main(
        ["build-db", "--scene", str(tiny_scene_file), "--receiver", "imr", "--db", str(db),
         "--out", str(out), "--export-csv"]
    ) == 0
    assert db.exists()
    assert (out / "channel-imr.csv").exists()

    assert main.main(["analyze", "--db", str(db), "--out", str(out)]) == 0
    assert (out / "cdf-imr.csv").exists()

    assert main.main(
        ["optimize", "--db", str(db), "--scenario", str(scenario_file), "--out", str(out)]
    ) == 0
    report = (out / "allocation-tiny-imr.csv").read_text(encoding="utf-8").splitlines()
    assert len(report) == 2 + 2

    for command in ("build-db", "analyze", "optimize"):
        assert (out / f"manifest-{command}.json").exists()


def test_environment_supplies_missing_flags(monkeypatch, tmp_path, tiny_scene_file):
    env_out = tmp_path / "env_out"
    flag_out = tmp_path / "flag_out"
    monkeypatch.setattr(config, "OWC_SCENE", str(tiny_scene_file))
    monkeypatch.setattr(config, "OWC_RECEIVER", "pd")
    monkeypatch.setattr(config, "OWC_OUT", str(env_out))

    assert main.main(["build-db"]) == 0
    assert (env_out / "channel-pd.owcdb").exists()

    assert main.main(["build-db", "--out", str(flag_out)]) == 0
    assert (flag_out / "channel-pd.owcdb").exists()


def test_analyze_requires_db(tmp_path, capsys):
    assert main.main(["analyze", "--out", str(tmp_path)]) == 2
    assert "erro [config]" in capsys.readouterr().err


def test_corrupt_scene_names_field(tmp_path, tiny_dict, capsys):
    del tiny_dict["access_points"]["positions"]
    scene = write_json(tmp_path / "bad_scene.json", tiny_dict)
    assert main.main(["build-db", "--scene", str(scene), "--out", str(tmp_path / "out")]) == 2
    err = capsys.readouterr().err
    assert "erro [config]" in err
    assert "positions" in err
    assert not (tmp_path / "out").exists()


def test_receiver_mismatch(tmp_path, tiny_scene_file, capsys):
    db = tmp_path / "tiny.owcdb"
    assert main.main(
        ["build-db", "--scene", str(tiny_scene_file), "--receiver", "pd", "--db", str(db),
         "--out", str(tmp_path)]
    ) == 0
    assert main.main(["analyze", "--db", str(db), "--receiver", "imr", "--out", str(tmp_path)]) == 2
    assert "erro [db]" in capsys.readouterr().err


def test_unknown_user_location(tmp_path, tiny_scene_file, capsys):
    db = tmp_path / "tiny.owcdb"
    assert main.main(
        ["build-db", "--scene", str(tiny_scene_file), "--receiver", "imr", "--db", str(db),
         "--out", str(tmp_path)]
    ) == 0
    scenario = dict(TINY_SCENARIO, users=[*TINY_SCENARIO["users"], {"user": 3, "location": [0.7, 0.5, 0.5]}])
    path = write_json(tmp_path / "scenario.json", scenario)
    assert main.main(["optimize", "--db", str(db), "--scenario", str(path), "--out", str(tmp_path)]) == 2
    assert "erro [allocation]" in capsys.readouterr().err


def test_optimize_requires_scenario(tmp_path, capsys):
    assert main.main(["optimize", "--db", str(tmp_path / "x.owcdb")]) == 2
    assert "cenário" in capsys.readouterr().err


@pytest.mark.parametrize("name", ["OWC_DT", "OWC_IR_LENGTH", "OWC_ORDERS", "OWC_THREADS"])
def test_malformed_numeric_env_is_config_error(monkeypatch, tmp_path, tiny_scene_file, capsys, name):
    monkeypatch.setattr(config, name, "abc")
    args = ["build-db", "--scene", str(tiny_scene_file), "--out", str(tmp_path)]
    assert main.main(args) == 2
    err = capsys.readouterr().err
    assert "erro [config]" in err
    assert name in err


def test_numeric_flag_overrides_malformed_env(monkeypatch, tmp_path, tiny_scene_file):
    monkeypatch.setattr(config, "OWC_THREADS", "abc")
    args = ["build-db", "--scene", str(tiny_scene_file), "--receiver", "pd", "--threads", "1",
            "--out", str(tmp_path)]
    assert main.main(args) == 0
