import json
import subprocess
import sys

import numpy as np
import pytest

from irssec import model
from irssec.channel import generate_channels, load_scenario, scenario_to_dict, two_user_scenario
from irssec.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, main


def write_scenario(tmp_path, name="scenario.json", **kwargs):
    defaults = dict(d1=20.0, n_y=2, n_z=1, seed=3)
    defaults.update(kwargs)
    config = two_user_scenario(**defaults)
    path = tmp_path / name
    path.write_text(json.dumps(scenario_to_dict(config)))
    return str(path)


def infeasible_scenario(tmp_path):
    # confidential user pushed far out; eavesdropper's direct path dominates
    # any achievable aligned gain for user 1
    config = two_user_scenario(d1=20.0, n_y=2, n_z=1, seed=3, rician_kappa=1e12)
    data = scenario_to_dict(config)
    data["distance_overrides"]["ap_user_m"] = [5000.0, 2.0]
    data["distance_overrides"]["irs_user"][0]["distance_m"] = 5000.0
    path = tmp_path / "infeasible.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_region_no_irs_deterministic(tmp_path):
    scn = write_scenario(tmp_path)
    out_a, out_b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    base = ["region", "--scenario", scn, "--scheme", "no-irs", "--grid", "5", "--seed", "7"]
    assert main(base + ["--out", out_a]) == EXIT_OK
    assert main(base + ["--out", out_b]) == EXIT_OK
    assert open(out_a, "rb").read() == open(out_b, "rb").read()
    lines = open(out_a).read().strip().splitlines()
    assert lines[0] == "r_m_target,r_c_achieved,alpha_w,beta_w,upper_bound,feasible,scheme,seed"
    assert len(lines) == 6
    targets = [float(l.split(",")[0]) for l in lines[1:]]
    assert targets == sorted(targets)


def test_region_byte_identical_across_thread_counts(tmp_path, monkeypatch):
    scn = write_scenario(tmp_path)
    base = ["region", "--scenario", scn, "--scheme", "cct", "--grid", "4",
            "--t-alpha", "8", "--t-g", "60", "--seed", "5"]
    out_a, out_b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    monkeypatch.setenv("IRSSEC_THREADS", "1")
    assert main(base + ["--out", out_a]) == EXIT_OK
    monkeypatch.setenv("IRSSEC_THREADS", "3")
    assert main(base + ["--out", out_b]) == EXIT_OK
    assert open(out_a, "rb").read() == open(out_b, "rb").read()
    assert (open(out_a + ".phases.json", "rb").read()
            == open(out_b + ".phases.json", "rb").read())


def test_region_closed_loop_qoms_recheck(tmp_path):
    scn = write_scenario(tmp_path)
    out = str(tmp_path / "r.csv")
    assert main(["region", "--scenario", scn, "--scheme", "cct", "--grid", "5",
                 "--t-alpha", "10", "--t-g", "80", "--seed", "2", "--out", out]) == EXIT_OK
    config = load_scenario(scn)
    ch = generate_channels(config)
    p = config.total_power_w
    rows = [l.split(",") for l in open(out).read().strip().splitlines()[1:]]
    phases = json.load(open(out + ".phases.json"))["points"]
    for row, rec in zip(rows, phases):
        if row[5] != "true":
            continue
        r_m, alpha = float(row[0]), float(row[2])
        assert rec["phases_rad"] is not None
        v = np.exp(1j * np.array(rec["phases_rad"]))
        got = model.multicast_rate(ch, v, model.PowerSplit(alpha, p - alpha))
        assert got >= r_m - 1e-6


def test_region_exit_2_for_infeasible_scenario(tmp_path, capsys):
    scn = infeasible_scenario(tmp_path)
    code = main(["region", "--scenario", scn, "--out", str(tmp_path / "x.csv")])
    assert code == EXIT_INFEASIBLE
    err = capsys.readouterr().err
    assert "user 2" in err


def test_region_exit_1_for_bad_config(tmp_path):
    assert main(["region", "--scenario", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG
    scn = write_scenario(tmp_path)
    assert main(["region", "--scenario", scn, "--grid", "1",
                 "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG
    assert main(["region", "--scenario", scn, "--scheme", "bogus",
                 "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG


def test_oracle_scheme_dominates_cct_run(tmp_path):
    scn = write_scenario(tmp_path)
    out_o, out_c = str(tmp_path / "o.csv"), str(tmp_path / "c.csv")
    common = ["--scenario", scn, "--grid", "6", "--seed", "4"]
    assert main(["region"] + common + ["--scheme", "oracle", "--out", out_o]) == EXIT_OK
    assert main(["region"] + common + ["--scheme", "cct", "--t-alpha", "40",
                 "--t-g", "300", "--out", out_c]) == EXIT_OK
    oracle = [l.split(",") for l in open(out_o).read().strip().splitlines()[1:]]
    cct = [l.split(",") for l in open(out_c).read().strip().splitlines()[1:]]
    # the exhaustive reference upper-bounds the sweep within its own grid slack
    for (ro, rc) in zip(oracle, cct):
        assert float(ro[0]) == pytest.approx(float(rc[0]))
        if ro[5] == "true" and rc[5] == "true":
            assert float(ro[1]) >= float(rc[1]) - 0.05


def test_analyze_report_keys(tmp_path):
    scn = write_scenario(tmp_path)
    out = str(tmp_path / "report.json")
    assert main(["analyze", "--scenario", scn, "--v-source", "random-irs",
                 "--t-g", "40", "--out", out]) == EXIT_OK
    rep = json.load(open(out))
    assert set(rep) == {"feasibility", "classification", "e_factors", "eta",
                        "gap_bounds", "complexity"}
    assert rep["feasibility"]["verdict"] in ("Feasible", "Undetermined")
    assert rep["eta"] > 0
    assert rep["complexity"]["cct_flops"] > rep["complexity"]["wscm_flops"] > 0


def test_analyze_infeasible_scenario_reports_witness(tmp_path):
    scn = infeasible_scenario(tmp_path)
    out = str(tmp_path / "report.json")
    assert main(["analyze", "--scenario", scn, "--out", out]) == EXIT_OK
    rep = json.load(open(out))
    assert rep["feasibility"]["verdict"] == "Infeasible"
    assert rep["feasibility"]["witness_user"] == 2
    assert rep["classification"] is None


def test_analyze_accepts_phase_file(tmp_path):
    scn = write_scenario(tmp_path)
    vfile = tmp_path / "phases.json"
    vfile.write_text(json.dumps([0.1, 0.2]))
    out = str(tmp_path / "report.json")
    assert main(["analyze", "--scenario", scn, "--v-source", str(vfile),
                 "--out", out]) == EXIT_OK
    assert main(["analyze", "--scenario", scn, "--v-source",
                 str(tmp_path / "nope.json"), "--out", out]) == EXIT_CONFIG
    vfile.write_text(json.dumps([0.1, 0.2, 0.3]))
    assert main(["analyze", "--scenario", scn, "--v-source", str(vfile),
                 "--out", out]) == EXIT_CONFIG


def test_sweep_power_nested_regions(tmp_path):
    scn = write_scenario(tmp_path)
    out = str(tmp_path / "p.csv")
    assert main(["sweep-power", "--scenario", scn, "--powers", "0.1,1",
                 "--scheme", "no-irs", "--grid", "6", "--out", out]) == EXIT_OK
    lines = open(out).read().strip().splitlines()
    assert lines[0].endswith(",power_w")
    rows = [l.split(",") for l in lines[1:]]
    assert len(rows) == 12
    lo = [r for r in rows if float(r[-1]) == 0.1]
    hi = [r for r in rows if float(r[-1]) == 1.0]

    def staircase(rows_, rm):
        vals = [float(r[1]) for r in rows_ if float(r[0]) >= rm - 1e-12 and r[5] == "true"]
        return max(vals) if vals else 0.0

    for r in lo:
        if r[5] == "true":
            assert staircase(hi, float(r[0])) >= float(r[1]) - 0.02


def test_sweep_power_rejects_empty_and_negative(tmp_path):
    scn = write_scenario(tmp_path)
    out = str(tmp_path / "p.csv")
    assert main(["sweep-power", "--scenario", scn, "--powers", "",
                 "--out", out]) == EXIT_CONFIG
    assert main(["sweep-power", "--scenario", scn, "--powers", "-1",
                 "--out", out]) == EXIT_CONFIG


def test_console_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "irssec.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "region" in proc.stdout
