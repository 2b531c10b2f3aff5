import csv
import json
import subprocess
import sys

import pytest

from polybilliards import __version__
from polybilliards.cli import main


def run_cli(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_simulate_writes_moments_fit_and_record(tmp_path):
    code, out = run_cli(tmp_path, "simulate", "--table", "polygon", "--m", "5",
                        "--particles", "300", "--t-max", "200", "--seed", "7")
    assert code == 0
    rows = read_csv(out / "moments.csv")
    assert len(rows) == 64 and set(rows[0]) == {"t", "mean_n", "var_n", "usable", "flagged"}
    fit = read_csv(out / "fit.csv")[0]
    assert float(fit["z"]) > 0
    rec = json.loads((out / "run.json").read_text())
    assert rec["version"] == __version__ and rec["seed"] == 7
    assert rec["config"]["m"] == 5 and rec["config"]["particles"] == 300
    assert rec["result"]["z"] == pytest.approx(float(fit["z"]))


def test_reruns_are_byte_identical(tmp_path):
    args = ("simulate", "--table", "sinai", "--particles", "200", "--t-max", "50", "--seed", "3")
    main([*args, "--out", str(tmp_path / "a")])
    main([*args, "--out", str(tmp_path / "b"), "--workers", "4"])
    for name in ("moments.csv", "fit.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_histogram(tmp_path):
    code, out = run_cli(tmp_path, "histogram", "--table", "circle", "--particles", "2000",
                        "--time", "50", "--seed", "1", "--binning", "phase")
    assert code == 0
    rows = read_csv(out / "histogram.csv")
    assert sum(int(r["count"]) for r in rows) == 2000
    tv = read_csv(out / "tv.csv")[0]
    assert 0 <= float(tv["tv"]) <= 1 and tv["binning"] == "phase"


def test_histogram_rejects_sinai(tmp_path):
    code, _ = run_cli(tmp_path, "histogram", "--table", "sinai", "--particles", "10")
    assert code == 2


def test_escape(tmp_path):
    code, out = run_cli(tmp_path, "escape", "--table", "circle", "--delta", "0.05",
                        "--particles", "2000", "--t-max", "3000", "--seed", "2")
    assert code == 0
    surv = read_csv(out / "survival.csv")
    assert float(surv[0]["t"]) == 0 and float(surv[0]["S"]) == 1.0
    assert len(read_csv(out / "escapes.csv")) == 2000
    res = json.loads((out / "run.json").read_text())["result"]
    assert res["tau_e"] == pytest.approx(197.392, abs=1e-3)


@pytest.mark.parametrize("delta", ["6.3", "7.0"])
def test_escape_rejects_wide_openings(tmp_path, delta):
    code, _ = run_cli(tmp_path, "escape", "--table", "circle", "--delta", delta, "--particles", "10")
    assert code == 2


def test_scan_m_summary_and_crossover(tmp_path):
    code, out = run_cli(tmp_path, "scan-m", "--table", "polygon", "--m-list", "8,16",
                        "--delta", "0.2", "--particles", "500", "--t-max", "2000", "--seed", "4")
    assert code == 0
    summary = read_csv(out / "summary.csv")
    assert [int(r["m"]) for r in summary] == [8, 16]
    assert (out / "m8_survival.csv").exists() and (out / "m16_fit.csv").exists()
    cross = read_csv(out / "crossover.csv")[0]
    assert int(cross["m_alpha_nearest"]) == 31


def test_scan_m_fixed_escape_time_has_no_single_crossover(tmp_path):
    code, out = run_cli(tmp_path, "scan-m", "--table", "polygon", "--m-list", "4,6",
                        "--tau-e", "100", "--particles", "200", "--t-max", "3000")
    assert code == 0
    taus = [float(r["tau_e"]) for r in read_csv(out / "summary.csv")]
    assert taus == pytest.approx([100.0, 100.0])
    assert not (out / "crossover.csv").exists()


def test_scan_m_rejects_unsorted_list(tmp_path):
    code, _ = run_cli(tmp_path, "scan-m", "--table", "polygon", "--m-list", "16,8", "--delta", "0.2")
    assert code == 2


@pytest.mark.parametrize("curve,extra,name", [
    ("cb-pdf", [], "cb_pdf.csv"),
    ("polygon-pdf", ["--m", "5"], "polygon_pdf_m5.csv"),
    ("t-reg", ["--m", "6"], "t_reg_m6.csv"),
])
def test_oracle_curves(tmp_path, curve, extra, name):
    code, out = run_cli(tmp_path, "oracle", "--curve", curve, "--points", "50", *extra)
    assert code == 0
    rows = (out / name).read_text().splitlines()
    assert len(rows) == 51


def test_oracle_requires_m(tmp_path):
    code, _ = run_cli(tmp_path, "oracle", "--curve", "t-reg")
    assert code == 2


def test_fit_refits_saved_moments(tmp_path):
    _, sim = run_cli(tmp_path, "simulate", "--table", "circle", "--particles", "300",
                     "--t-max", "300", "--seed", "5", name="sim")
    code, out = run_cli(tmp_path, "fit", "--input", str(sim / "moments.csv"),
                        "--window", "31.4:300", name="fit")
    assert code == 0
    z_sim = float(read_csv(sim / "fit.csv")[0]["z"])
    z_fit = float(read_csv(out / "fit.csv")[0]["z"])
    assert z_fit == pytest.approx(z_sim, rel=1e-3)


def test_fit_error_exit_code(tmp_path):
    bad = tmp_path / "m.csv"
    bad.write_text("t,mean_n,var_n,usable,flagged\n1,1,0,1,0\n2,2,0,1,0\n")
    code, _ = run_cli(tmp_path, "fit", "--input", str(bad))
    assert code == 3


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"table": "polygon", "m": 4, "particles": 100, "t_max": 50, "seed": 9}))
    code, out = run_cli(tmp_path, "simulate", "--config", str(cfg), "--seed", "11")
    assert code == 0
    rec = json.loads((out / "run.json").read_text())
    assert rec["seed"] == 11 and rec["config"]["m"] == 4 and rec["config"]["particles"] == 100


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tabel": "circle"}))
    code, _ = run_cli(tmp_path, "simulate", "--config", str(cfg))
    assert code == 2


def test_polygon_needs_m(tmp_path):
    code, _ = run_cli(tmp_path, "simulate", "--table", "polygon", "--particles", "5")
    assert code == 2


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "polybilliards", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
