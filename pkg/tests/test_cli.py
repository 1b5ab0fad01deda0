import json

from cf_alloc.cli import main


def write_config(tmp_path, **overrides):
    data = {
        "config": {"M": 6, "K": 4, "n": 2, "seed": 3, "trials": 2},
        "snr_grid_db": [0, 10],
        "schedulers": ["CESG"],
        "power_allocators": ["EPL"],
        "csi_modes": ["IMPERFECT"],
        "output_path": str(tmp_path / "out.csv"),
    }
    data.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return path


def test_run_writes_csv(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--no-timestamp"]) == 0
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert len(lines) == 3
    assert "wrote 2 rows" in capsys.readouterr().out


def test_run_overrides(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "other.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--trials", "3", "--seed", "9", "--no-timestamp"]) == 0
    assert out.read_text().splitlines()[1].endswith(",3")


def test_validate_prints_resolved_spec(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["validate", "--config", str(cfg)]) == 0
    resolved = json.loads(capsys.readouterr().out)
    assert resolved["config"]["P_budget"] == 2.0
    assert resolved["lsf_mode"] == "LogDistance"


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, bogus=True)
    assert main(["validate", "--config", str(cfg)]) == 2
    assert "unknown experiment keys" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2


def test_io_error_exit_code(tmp_path):
    cfg = write_config(tmp_path, output_path=str(tmp_path / "no" / "dir.csv"))
    assert main(["run", "--config", str(cfg)]) == 3


def test_oracle_fixture(capsys):
    assert main(["oracle", "--fixture", "trace"]) == 0
    assert capsys.readouterr().out.startswith("[PASS] trace-expansion")
