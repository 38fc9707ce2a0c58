import json

import numpy as np
import pytest

from phaselab.cli import main, parse_config_file


def run(args):
    return main(args)


def test_validate_exits_zero(capsys):
    assert run(["validate"]) == 0
    out = capsys.readouterr().out
    assert "all" in out and "passed" in out


def test_table1_single_row(tmp_path, capsys):
    code = run([
        "table1", "--nbar", "1", "--trials", "2000", "--seed", "5",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == 0
    lines = (tmp_path / "table1.csv").read_text().splitlines()
    assert lines[0] == "nbar,mean_estimate,rmse,rmse_stderr,heisenberg,cr_bound"
    assert len(lines) == 2
    rmse = float(lines[1].split(",")[2])
    assert 0.02 < rmse < 0.05


def test_table1_rerun_byte_identical(tmp_path):
    args = ["table1", "--nbar", "2", "--trials", "1000", "--seed", "9",
            "--out", str(tmp_path), "--no-timestamp"]
    assert run(args) == 0
    first = (tmp_path / "table1.csv").read_bytes()
    assert run(args) == 0
    assert (tmp_path / "table1.csv").read_bytes() == first


def test_density_default_shape(tmp_path, capsys):
    code = run(["density", "--out", str(tmp_path), "--no-timestamp"])
    assert code == 0
    lines = (tmp_path / "density.csv").read_text().splitlines()
    assert lines[0] == "x,pdf"
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    x, pdf = data[:, 0], data[:, 1]
    # narrow central spike on a broad background (the nbar=25 default)
    i0 = np.argmin(np.abs(x))
    background = np.exp(-x**2 / 2.0) / np.sqrt(2.0 * np.pi)
    assert pdf[i0] > 1.4 * background[i0]


def test_fisher_command(capsys):
    code = run(["fisher", "--nbar", "10", "--nu", "1.0", "--mode", "exact"])
    assert code == 0
    out = capsys.readouterr().out
    assert "439.089" in out


def test_scaling_needs_three_points(tmp_path, capsys):
    code = run(["scaling", "--nbar", "1", "--nbar", "2", "--trials", "1000",
                "--out", str(tmp_path)])
    assert code == 2


def test_scaling_writes_fit(tmp_path, capsys):
    # the reciprocal rule is the scaling default, no flag needed
    code = run([
        "scaling", "--nbar", "1", "--nbar", "2", "--nbar", "3",
        "--trials", "2000", "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == 0
    record = json.loads((tmp_path / "scaling_fit.json").read_text())
    assert 1.2 < record["exponent"] < 1.8
    assert (tmp_path / "scaling.csv").exists()


def test_scaling_constant_rule_flag(tmp_path, capsys):
    code = run([
        "scaling", "--nbar", "1", "--nbar", "2", "--nbar", "3",
        "--nu-rule", "constant", "--trials", "2000",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == 0
    record = json.loads((tmp_path / "scaling_fit.json").read_text())
    assert 0.3 < record["exponent"] < 0.7


def test_convergence_command(tmp_path, capsys):
    code = run(["convergence", "--nbar", "1", "--trials", "2000",
                "--out", str(tmp_path), "--no-timestamp"])
    assert code == 0
    lines = (tmp_path / "convergence.csv").read_text().splitlines()
    assert lines[0] == "trials,rmse"
    assert lines[-1].startswith("2000,")


def test_sample_command(tmp_path, capsys):
    code = run(["sample", "--nbar", "1", "--count", "500", "--seed", "3",
                "--out", str(tmp_path), "--no-timestamp"])
    assert code == 0
    lines = (tmp_path / "samples.csv").read_text().splitlines()
    assert lines[0] == "x"
    assert len(lines) == 501


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("trials = 1000\nseed = 21\nnbar = 3\n# comment\nno_timestamp = true\n")
    out1 = tmp_path / "a"
    code = run(["table1", "--config", str(cfg), "--out", str(out1)])
    assert code == 0
    lines = (out1 / "table1.csv").read_text().splitlines()
    assert float(lines[1].split(",")[0]) == 3.0
    # flag wins over the file
    out2 = tmp_path / "b"
    code = run(["table1", "--config", str(cfg), "--nbar", "2", "--out", str(out2)])
    assert code == 0
    lines = (out2 / "table1.csv").read_text().splitlines()
    assert float(lines[1].split(",")[0]) == 2.0


def test_config_file_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 1\n")
    with pytest.raises(ValueError):
        parse_config_file(str(cfg))
    assert run(["table1", "--config", str(cfg)]) == 2


def test_invalid_nu_rejected(tmp_path):
    assert run(["table1", "--nu", "1.5", "--trials", "1000", "--out", str(tmp_path)]) == 2


def test_squeezed_only_rows_do_not_violate(tmp_path, capsys):
    # nu = 1 runs in the exact family; its uncertainty sits below the
    # 1/(2 nbar) value, so the violation exit contract reports success
    code = run(["table1", "--nbar", "1", "--nu", "1.0", "--mode", "exact",
                "--trials", "2000", "--out", str(tmp_path), "--no-timestamp"])
    lines = (tmp_path / "table1.csv").read_text().splitlines()
    rmse = float(lines[1].split(",")[2])
    assert code == 0
    assert rmse < 0.5
