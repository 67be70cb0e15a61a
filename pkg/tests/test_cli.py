import json
import subprocess
import sys

import pytest

from synthetic import write_pair
from tsdecouple.cli import main


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    pa, pb = write_pair(root, n=900)
    cfg = root / "config.json"
    cfg.write_text(json.dumps({
        "tech_csv": "tech.csv",
        "nontech_csv": "nontech.csv",
        "output_dir": str(root / "out"),
        "acf_max_lag": 200,
        "ccf_max_lag": 100,
        "pacf_max_lag": 20,
        "volatility_window": 50,
    }))
    return root, pa, pb, cfg


def test_run(data, capsys):
    root, _, _, cfg = data
    assert main(["run", str(cfg), "--output-dir", str(root / "o2"), "--svg"]) == 0
    assert (root / "o2" / "manifest.json").exists()
    assert (root / "o2" / "plots" / "ccf.svg").exists()
    assert "wrote" in capsys.readouterr().out


def test_run_stage_error(data, capsys):
    root, _, _, cfg = data
    assert main(["run", str(cfg), "--output-dir", str(root / "o3"), "--window", "5000"]) == 1
    assert "volatility" in capsys.readouterr().err


def test_adf(data, capsys):
    _, pa, _, _ = data
    assert main(["adf", str(pa)]) == 0
    out = capsys.readouterr().out
    assert "ADF statistic" in out and "first difference" in out


def test_arima_order(data, capsys):
    _, pa, _, _ = data
    assert main(["arima", str(pa), "--order", "1,1,1"]) == 0
    assert "ARIMA(1,1,1)" in capsys.readouterr().out


def test_arima_auto(data, capsys):
    _, pa, _, _ = data
    assert main(["arima", str(pa), "--auto"]) == 0
    assert "converged True" in capsys.readouterr().out


def test_volatility(data, tmp_path):
    _, pa, _, _ = data
    out = tmp_path / "v.csv"
    assert main(["volatility", str(pa), "--window", "20", "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "date,volatility" and len(lines) == 1 + 899 - 20


def test_decouple(data, capsys, tmp_path):
    _, pa, pb, _ = data
    periods = tmp_path / "p.json"
    periods.write_text(json.dumps({"one": [{"label": "All", "start": "2000-01-01", "end": "2030-01-01"}]}))
    assert main(["decouple", str(pa), str(pb), "--periods", str(periods)]) == 0
    out = capsys.readouterr().out
    assert "Full sample" in out and "All" in out


def test_lead(data, capsys):
    _, pa, pb, _ = data
    assert main(["lead", str(pa), str(pb), "--lags", "5"]) == 0
    assert "F(5," in capsys.readouterr().out


def test_engine_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("Date,Close\n2020-01-01,1\n")
    assert main(["adf", str(bad)]) == 1
    assert "SchemaError" in capsys.readouterr().err


def test_bad_order_exit_2(data):
    _, pa, _, _ = data
    assert main(["arima", str(pa), "--order", "1,x"]) == 2


def test_bad_config_exit_2(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert main(["run", str(cfg)]) == 2


def test_usage_exit_2():
    proc = subprocess.run([sys.executable, "-m", "tsdecouple"], capture_output=True)
    assert proc.returncode == 2
    proc = subprocess.run([sys.executable, "-m", "tsdecouple", "volatility", "x.csv"], capture_output=True)
    assert proc.returncode == 2
