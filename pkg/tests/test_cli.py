import json

import pytest

from deconvgof.cli import main, parse_class
from deconvgof.errors import ConfigError
from deconvgof.models import DensityModel, NoiseModel, observe, write_data_file

LAP1 = '{"kind":"laplace_k","k":1,"scale":1}'
NULL = '{"kind":"gaussian","loc":1.0,"scale":1.0}'


@pytest.fixture
def data_file(tmp_path):
    path = tmp_path / "y.txt"
    write_data_file(path, observe(DensityModel.gaussian(1.0, 1.0), NoiseModel.laplace(1, 1.0), 300, 1).values)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_class():
    assert parse_class("sobolev:beta=1,L=1").beta == 1.0
    c = parse_class("supersmooth:alpha=1,r=2")
    assert (c.alpha, c.r) == (1.0, 2.0)
    with pytest.raises(ConfigError, match="'class'"):
        parse_class("sobolev:beta")


def test_estimate_prints_result(capsys, data_file):
    code, out, _ = run(capsys, "estimate", "--data", data_file, "--noise", LAP1,
                       "--class", "sobolev:beta=1,L=1", "--seed", "1")
    assert code == 0
    assert out.startswith("d_n = ") and "h = " in out and "regime = " in out


def test_gof_test_rejects_n1(capsys, tmp_path):
    path = tmp_path / "one.txt"
    path.write_text("0.5\n", encoding="utf-8")
    code, _, err = run(capsys, "gof-test", "--data", str(path), "--null", NULL, "--noise", LAP1,
                       "--class", "sobolev:beta=2,L=1", "--seed", "1")
    assert code == 2 and "n ≥ 2 required" in err


def test_gof_test_reject_exits_zero(capsys, tmp_path):
    path = tmp_path / "far.txt"
    write_data_file(path, observe(DensityModel.gaussian(1.0, 3.0), NoiseModel.laplace(1, 1.0), 300, 4).values)
    code, out, _ = run(capsys, "gof-test", "--data", str(path), "--null", NULL, "--noise", LAP1,
                       "--class", "sobolev:beta=2,L=1", "--seed", "9", "--B", "100")
    assert code == 0
    for key in ("T = ", "threshold = ", "decision = reject", "h = ", "t_n = ", "C* = "):
        assert key in out


def test_gof_test_needs_seed_unless_constant(capsys, data_file, tmp_path):
    args = ["gof-test", "--data", data_file, "--null", NULL, "--noise", LAP1, "--class", "sobolev:beta=2,L=1"]
    code, _, err = run(capsys, *args)
    assert code == 2 and "--seed" in err
    out_path = tmp_path / "t.json"
    code, out, _ = run(capsys, *args, "--c-star", "1e6", "--out", str(out_path))
    assert code == 0 and "decision = accept" in out
    assert json.loads(out_path.read_text())["reject"] is False


def test_missing_field_named(capsys, data_file):
    code, _, err = run(capsys, "estimate", "--data", data_file)
    assert code == 2 and "'noise'" in err


def test_misspelt_descriptor_field(capsys, data_file):
    code, _, err = run(capsys, "gof-test", "--data", data_file, "--null", '{"kind":"gaussian","mean":1}',
                       "--noise", LAP1, "--class", "sobolev:beta=2,L=1", "--c-star", "1")
    assert code == 2 and "'mean'" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "estimate", "--data", str(tmp_path / "nope.txt"), "--noise", LAP1, "--h", "0.5")
    assert code == 2 and "nope.txt" in err


def test_numerical_failure_exit_3(capsys, data_file):
    code, _, err = run(capsys, "estimate", "--data", data_file, "--noise",
                       '{"kind":"gaussian","scale":1.0}', "--h", "0.005", "--kernel", "sinc")
    assert code == 3 and "numerical failure in estimate_d" in err


def test_calibrate(capsys):
    code, out, _ = run(capsys, "calibrate", "--null", NULL, "--noise", LAP1, "--class", "sobolev:beta=2,L=1",
                       "--n", "100", "--B", "100", "--seed", "3")
    assert code == 0 and out.startswith("C* = ")
    code, _, err = run(capsys, "calibrate", "--null", NULL, "--noise", LAP1, "--class", "sobolev:beta=2,L=1",
                       "--n", "100", "--B", "10", "--seed", "3")
    assert code == 2 and "B ≥ 100" in err


def test_simulate_round_trip(capsys, tmp_path):
    out = tmp_path / "sim.txt"
    args = ["simulate", "--signal", NULL, "--noise", LAP1, "--n", "50", "--out", str(out)]
    code, _, err = run(capsys, *args)
    assert code == 2 and "--seed" in err
    assert run(capsys, *args, "--seed", "2")[0] == 0
    first = out.read_bytes()
    run(capsys, *args, "--seed", "2")
    assert out.read_bytes() == first


def test_study_requires_seed(capsys):
    code, _, err = run(capsys, "power-study", "--preset", "gauss-shift")
    assert code == 2 and "--seed" in err


def test_rate_study_byte_identical(capsys, tmp_path):
    cfg = tmp_path / "rates.json"
    cfg.write_text(json.dumps({"preset": "rate-parametric", "n_ladder": [200, 400, 800, 1600], "N": 20,
                               "n_boot": 200, "grid_count": 1024}), encoding="utf-8")
    outs = []
    for name in ("a.csv", "b.csv"):
        code, stdout, _ = run(capsys, "rate-study", "--config", str(cfg), "--seed", "7",
                              "--out", str(tmp_path / name))
        assert code == 0 and "slope" in stdout
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    summary = json.loads((tmp_path / "a.json").read_text())
    assert summary["config"]["seed"] == 7


def test_summary_json_reruns(capsys, tmp_path):
    args = ["mse-study", "--preset", "gauss-scale-laplace1", "--n", "200", "--N", "10", "--seed", "4"]
    assert run(capsys, *args, "--out", str(tmp_path / "a.csv"))[0] == 0
    assert run(capsys, "mse-study", "--config", str(tmp_path / "a.json"), "--seed", "4",
               "--out", str(tmp_path / "b.csv"))[0] == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_jobs_env_fallback(capsys, tmp_path, monkeypatch):
    args = ["power-study", "--preset", "gauss-shift", "--n", "200", "--N", "10", "--B", "100", "--seed", "5"]
    monkeypatch.setenv("DECONV_JOBS", "2")
    assert run(capsys, *args, "--out", str(tmp_path / "two.csv"))[0] == 0
    monkeypatch.setenv("DECONV_JOBS", "one")
    code, _, err = run(capsys, *args, "--out", str(tmp_path / "bad.csv"))
    assert code == 2 and "DECONV_JOBS" in err
    monkeypatch.delenv("DECONV_JOBS")
    assert run(capsys, *args, "--out", str(tmp_path / "one.csv"))[0] == 0
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()


def test_normality_check_stdout(capsys):
    code, out, _ = run(capsys, "normality-check", "--preset", "normality", "--n", "200", "--N", "10",
                       "--seed", "1")
    assert code == 0
    assert "ks_distance" in json.loads(out)["summary"]
