import json
import subprocess
import sys

import numpy as np
import pytest

from warpsim.cli import main, parse_periods
from warpsim.moments import asymptotic_profile, exact_profile
from warpsim.rng import RngStream
from warpsim.samplers import CdfConfig, simulate_cdf
from warpsim.warps import WarpPath


def test_simulate_fig1_configuration(tmp_path):
    out = tmp_path / "cdf"
    rc = main(["simulate", "--algo", "cdf", "--n", "25", "--theta", "10", "--p", "0.5", "--target", "phi3",
               "--paths", "30", "--seed", "4", "--out", str(out)])
    assert rc == 0
    files = sorted(out.glob("path_*.csv"))
    assert len(files) == 30
    w = WarpPath.from_csv(files[7])
    ref = simulate_cdf(CdfConfig(25, 10.0, 0.5, "phi3"), RngStream(4).child(7))
    assert np.array_equal(w.xs, ref.xs) and np.array_equal(w.ys, ref.ys)
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "simulate" and man["master_seed"] == 4
    assert man["parameters"]["theta"] == 10.0 and man["schema_version"] == 1


def test_simulate_rerun_from_manifest_is_identical(tmp_path):
    a = tmp_path / "a"
    main(["simulate", "--algo", "bk", "--n", "6", "--theta", "2", "--paths", "3", "--out", str(a)])
    argv = json.loads((a / "manifest.json").read_text())["argv"]
    b = tmp_path / "b"
    argv[argv.index("--out") + 1] = str(b)
    assert main(argv) == 0
    for f in a.glob("path_*.csv"):
        assert f.read_text() == (b / f.name).read_text()


@pytest.mark.parametrize("argv", [
    ["simulate", "--algo", "bk", "--n", "5"],                           # missing --theta
    ["simulate", "--algo", "mzw", "--theta", "1"],                       # missing --m
    ["simulate", "--algo", "cdf", "--n", "5", "--m", "3", "--theta", "1"],  # conflicting
    ["simulate", "--algo", "mzw-original", "--m", "3", "--theta", "1"],
    ["simulate", "--algo", "cdf", "--n", "5", "--theta", "-1"],
    ["simulate", "--algo", "cdf", "--n", "5", "--theta", "1", "--target", "phi7"],
    ["simulate", "--algo", "nope", "--n", "5", "--theta", "1"],
    ["oracle", "--algo", "bk", "--n", "200", "--theta", "1"],
    ["--threads", "0", "oracle", "--algo", "bk", "--n", "5", "--theta", "1"],
])
def test_usage_errors_exit_2(argv, tmp_path, capsys):
    if "--out" not in argv and argv[-1] != "--out":
        argv = argv + ["--out", str(tmp_path / "o")]
    assert main(argv) == 2


def test_simulate_mzw_and_original(tmp_path):
    assert main(["simulate", "--algo", "mzw", "--m", "800", "--theta", "10", "--target", "phi3",
                 "--paths", "2", "--out", str(tmp_path / "m")]) == 0
    w = WarpPath.from_csv(tmp_path / "m" / "path_0.csv")
    assert w.xs.size == 2048
    assert main(["simulate", "--algo", "mzw-original", "--m", "5", "--paths", "1", "--grid-size", "65",
                 "--out", str(tmp_path / "o")]) == 0


def test_oracle_matches_library(tmp_path):
    out = tmp_path / "o"
    assert main(["oracle", "--algo", "cdf", "--n", "6", "--theta", "1", "--target", "phi1",
                 "--grid-size", "5", "--out", str(out)]) == 0
    data = np.genfromtxt(out / "oracle_cdf.csv", delimiter=",", names=True, dtype=None, encoding="utf-8")
    grid = np.linspace(0, 1, 5)
    prof = exact_profile("cdf", grid, 6, 1.0, 0.5, "phi1")
    assert np.array_equal(data["mean"], prof.mean)
    assert np.array_equal(data["variance"], prof.variance)
    asy = asymptotic_profile(grid, 1.0, "phi1")
    assert data["asymptotic_variance"][2] == 0.125
    assert np.allclose(data["variance_gap"], prof.variance - asy.variance)


def test_target_from_file(tmp_path):
    knots = tmp_path / "t.csv"
    WarpPath([0.0, 0.4, 1.0], [0.0, 0.7, 1.0]).to_csv(knots)
    assert main(["simulate", "--algo", "bk", "--n", "4", "--theta", "5", "--target", f"file:{knots}",
                 "--paths", "2", "--out", str(tmp_path / "s")]) == 0


def test_validate_reports_and_exit_code(tmp_path):
    out = tmp_path / "v"
    rc = main(["validate", "--suite", "mzw-limit", "--quick", "--seed", "2", "--out", str(out)])
    report = json.loads((out / "validation.json").read_text())
    assert rc == (0 if report["mzw-limit"]["passed"] else 1)
    assert all("name" in c for c in report["mzw-limit"]["checks"])
    rc2 = main(["validate", "--suite", "mzw-limit", "--quick", "--seed", "2", "--out", str(tmp_path / "v2")])
    again = json.loads((tmp_path / "v2" / "validation.json").read_text())
    strip = lambda r: [{k: v for k, v in c.items()} for c in r["mzw-limit"]["checks"]]
    assert strip(report) == strip(again) and rc == rc2


def test_validate_failure_exits_1(monkeypatch, tmp_path, capsys):
    from warpsim import validation as val

    monkeypatch.setitem(val.SUITES, "moments", lambda seed, quick: [val.Check(1, "forced", False)])
    assert main(["validate", "--suite", "moments", "--out", str(tmp_path)]) == 1
    assert "forced" in capsys.readouterr().err


def test_parse_periods(tmp_path):
    assert parse_periods("a=2000-01-01..2001-01-01, b=2001-01-01T00:00:00..2002-01-01") == [
        ("a", "2000-01-01", "2001-01-01"), ("b", "2001-01-01T00:00:00", "2002-01-01")]
    p = tmp_path / "p.json"
    p.write_text(json.dumps([{"label": "x", "start": "2000-01-01", "end": "2000-02-01"}]))
    assert parse_periods(str(p)) == [("x", "2000-01-01", "2000-02-01")]


def test_analyze_data_file(tmp_path):
    from warpsim import analysis as an

    spec = [an.SyntheticPeriod("ref", "1990-01-01T00:00:00", 5 * 8760),
            an.SyntheticPeriod("late", "2000-01-01T00:00:00", 8760, shift=2.0)]
    obs = an.synthesize_temperature(spec, RngStream(3))
    data = tmp_path / "d.csv"
    an.write_observations_csv(obs, data)
    out = tmp_path / "a"
    rc = main(["analyze", "--data", str(data), "--reference", "ref",
               "--periods", "ref=1990-01-01..1995-01-01,late=2000-01-01..2001-01-01",
               "--m", "20", "--B", "20", "--seed", "1", "--out", str(out)])
    assert rc == 0
    bands = json.loads((out / "bands.json").read_text())
    late = next(b for b in bands if b["label"] == "late")
    assert not late["contains_zero"] and late["fraction_above_zero"] > 0.5
    assert (out / "band_late.csv").read_text().startswith("prob,phi_hat,centered,lower,upper")


def test_analyze_errors(tmp_path):
    assert main(["analyze", "--data", str(tmp_path / "none.csv"), "--reference", "a",
                 "--periods", "a=2000-01-01..2001-01-01", "--out", str(tmp_path / "o")]) == 3
    assert main(["analyze", "--out", str(tmp_path / "o")]) == 2
    assert main(["analyze", "--synthesize", "demo", "--m", "100000", "--out", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("timestamp,value\n")
    assert main(["analyze", "--data", str(bad), "--reference", "a",
                 "--periods", "a=2000-01-01..2001-01-01", "--out", str(tmp_path / "o")]) == 3


def test_console_script_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "warpsim.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "0.1.0" in r.stdout
