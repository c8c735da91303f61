import json

import numpy as np
import pytest

from fqatest import load_csv
from fqatest.cli import main, parse_float_range, parse_int_range, parse_sweep, UsageError


def test_range_parsers():
    assert parse_float_range("0.05:0.95:0.05")[-1] == 0.95
    assert len(parse_float_range("0.05:0.95:0.05")) == 19
    assert parse_float_range("0.1,0.5") == [0.1, 0.5]
    assert parse_int_range("1..10") == list(range(1, 11))
    assert parse_int_range("2,4") == [2, 4]
    assert parse_sweep("c=0:0.8:0.2") == ("c", [0.0, 0.2, 0.4, 0.6, 0.8])
    assert parse_sweep("T=100:300:100") == ("T", [100, 200, 300])
    with pytest.raises(UsageError):
        parse_float_range("0:1:0.3")


def test_simulate_then_test(tmp_path, capsys):
    out = tmp_path / "data.csv"
    assert main(["simulate", "--scenario", "far1", "--T", "120", "--p", "40", "--c", "0.6",
                 "--contaminate", "0.1,0.1,10", "--seed", "3", "--out", str(out)]) == 0
    m = load_csv(out)
    assert m.shape == (120, 40)
    side = json.loads(out.with_suffix(".json").read_text())
    assert side["kind"] == "far1" and side["contamination"]["height"] == 10.0
    report = tmp_path / "report.json"
    assert main(["test", str(out), "--lags", "1..3", "--alpha", "0.05,0.01", "--mc", "2000",
                 "--out", str(report)]) == 0
    printed = capsys.readouterr().out
    assert "p-value" in printed
    res = json.loads(report.read_text())
    assert [r["lag"] for r in res] == [1, 2, 3]
    assert set(res[0]["critical_values"]) == {"0.05", "0.01"}


def test_general_grid_flag(tmp_path):
    out = tmp_path / "d.csv"
    main(["simulate", "--scenario", "gaussian_wn", "--T", "80", "--p", "30", "--out", str(out)])
    report = tmp_path / "r.json"
    assert main(["test", str(out), "--general", "--levels", "0.25,0.5,0.75", "--thresholds", "0.3,0.7",
                 "--mc", "1000", "--bandwidth", "0", "--out", str(report)]) == 0
    assert json.loads(report.read_text())[0]["eigenvalue_count"] <= 36


def test_validation_exit_code(tmp_path, capsys):
    prices = tmp_path / "p.csv"
    prices.write_text("\n".join(",".join(["2.0"] * 5) for _ in range(20)) + "\n")
    assert main(["test", str(prices), "--log-returns"]) == 2
    assert "masked" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3\n")
    assert main(["test", str(bad)]) == 2
    assert main(["test", str(tmp_path / "missing.csv")]) == 2


def test_size_cli_byte_identical(tmp_path):
    args = ["size", "--scenario", "brownian", "--T", "50", "--p", "30", "--N", "6",
            "--alpha", "0.05,0.01", "--mc", "1000", "--seed", "7"]
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    main(args + ["--workers", "8", "--out", str(c)])
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    assert a.with_suffix(".json").exists()


def test_power_cli_outputs(tmp_path):
    out = tmp_path / "power.csv"
    assert main(["power", "--scenario", "far1", "--noise", "brownian", "--sweep", "c=0:0.6:0.3",
                 "--T", "50", "--p", "30", "--N", "3", "--mc", "1000", "--alpha", "0.05,0.1",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 3 * 2
    dat = (tmp_path / "power_alpha0.05.dat").read_text().splitlines()
    assert [line.split()[0] for line in dat[1:]] == ["0", "0.3", "0.6"]
    assert (tmp_path / "power_alpha0.1.dat").exists()


def test_bad_usage_exits():
    with pytest.raises(SystemExit):
        main(["size", "--scenario", "nope", "--out", "x"])
    with pytest.raises(SystemExit):
        main(["power", "--scenario", "far1", "--sweep", "c=0:1:0.3", "--out", "x"])
