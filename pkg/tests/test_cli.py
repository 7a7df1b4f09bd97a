import orjson
import pandas as pd
import pytest

from lorentz_lab.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_NUMERICAL, EXIT_USAGE, main

SMALL_TOML = """
seed = 2

[certificate]
t0 = 1.0
c = 0.75
sample_budget = 256

[net]
epsilon = 0.1
T_values = [1.0, 1.5]

[covers]
count = 3
max_nodes = 30
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL_TOML)
    return path


def write_config(tmp_path, text: str):
    path = tmp_path / "extra.toml"
    path.write_text(text)
    return path


def test_verify_writes_reports(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["verify", "hypothesis", "--config", str(config_path), "--out", str(out)]) == 0
    assert "PASS" in capsys.readouterr().out
    data = orjson.loads((out / "hypothesis" / "report.json").read_bytes())
    assert data["passed"] is True
    assert data["seed"] == 2


def test_seed_flag_overrides_the_file(config_path, tmp_path):
    out = tmp_path / "out"
    assert main(["verify", "cover-diameter", "--config", str(config_path), "--out", str(out), "--seed", "9"]) == 0
    data = orjson.loads((out / "cover-diameter" / "report.json").read_bytes())
    assert data["seed"] == 9
    assert (out / "cover-diameter" / "covers.csv").exists()


def test_csv_format(config_path, tmp_path):
    out = tmp_path / "out"
    args = ["verify", "hypothesis", "--config", str(config_path), "--out", str(out), "--format", "csv"]
    assert main(args) == 0
    assert pd.read_csv(out / "hypothesis" / "report.csv")["suite"][0] == "hypothesis"


def test_failing_suite_exits_with_one(tmp_path):
    path = write_config(tmp_path, '[certificate]\nt0 = 1.0\nc = 0.75\nsample_budget = 256\nexpect = "rejected"\n')
    out = tmp_path / "out"
    assert main(["verify", "hypothesis", "--config", str(path), "--out", str(out)]) == EXIT_FAILED
    assert main(["report", str(out)]) == EXIT_FAILED


def test_unknown_suite_is_a_usage_error(capsys):
    assert main(["verify", "curvature"]) == EXIT_USAGE
    assert "usage error" in capsys.readouterr().err


def test_configuration_errors(tmp_path):
    assert main(["verify", "hypothesis", "--config", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    path = write_config(tmp_path, "[family]\ndim = 7\n")
    assert main(["verify", "hypothesis", "--config", str(path)]) == EXIT_CONFIG


def test_precondition_errors(tmp_path):
    path = write_config(tmp_path, '[family]\nwarp = "exp"\n\n[certificate]\nsample_budget = 256\n')
    out = tmp_path / "out"
    assert main(["verify", "affine-length", "--config", str(path), "--out", str(out)]) == EXIT_CONFIG


def test_numerical_anomaly_exits_with_four(tmp_path, capsys):
    path = write_config(tmp_path, SMALL_TOML + "\n[cover]\nepsilon = 0.3\nmin_radius = 1.0\n")
    out = tmp_path / "out"
    assert main(["verify", "slab-cover", "--config", str(path), "--out", str(out)]) == EXIT_NUMERICAL
    assert "numerical anomaly" in capsys.readouterr().err
    assert not (out / "slab-cover").exists()


def test_unwritable_output(config_path, tmp_path, capsys):
    blocked = tmp_path / "blocked"
    blocked.write_text("not a directory")
    assert main(["verify", "hypothesis", "--config", str(config_path), "--out", str(blocked)]) == EXIT_FAILED
    assert "cannot write" in capsys.readouterr().err


def test_report_command(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["report", str(out)]) == EXIT_FAILED
    main(["verify", "hypothesis", "--config", str(config_path), "--out", str(out)])
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    assert "hypothesis" in capsys.readouterr().out


def test_geodesic_command(config_path, tmp_path):
    out = tmp_path / "out"
    args = ["geodesic", "--config", str(config_path), "--out", str(out), "--t", "0.5", "--x", "0.3",
            "--dt", "0.0", "--dx", "0.5", "--u-max", "1.0"]
    assert main(args) == 0
    frame = pd.read_csv(out / "geodesic" / "trajectory.csv")
    assert frame["u"].iloc[0] == 0.0
    assert frame["u"].iloc[-1] == pytest.approx(1.0)


def test_geodesic_component_mismatch(config_path, tmp_path):
    args = ["geodesic", "--config", str(config_path), "--out", str(tmp_path), "--t", "0.5", "--x", "0.3",
            "--dt", "0.0", "--dx", "0.5", "0.1"]
    assert main(args) == EXIT_USAGE


def test_diameter_command(config_path, tmp_path):
    out = tmp_path / "out"
    assert main(["diameter", "--config", str(config_path), "--out", str(out), "--T", "1.0", "1.5"]) == 0
    frame = pd.read_csv(out / "diameter" / "diameter_curve.csv")
    assert frame["T"].tolist() == [1.0, 1.5]


def test_missing_command():
    with pytest.raises(SystemExit) as error:
        main([])
    assert error.value.code == 2
