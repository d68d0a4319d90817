import csv
import json

import numpy as np
import pytest

from sphzeros.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_degree_50(tmp_path, capsys):
    code, out, _ = run(capsys, "sample", "--degree", 50, "--seed", 7, "--out", tmp_path)
    assert code == 0 and "zeros=50" in out
    rows = list(csv.DictReader(open(tmp_path / "zeros.csv")))
    assert len(rows) == 50
    pts = np.array([[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows])
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)
    svg = (tmp_path / "zeros.svg").read_text()
    assert svg.startswith("<svg") and svg.count('fill="black"') >= 50


def test_sample_svg_is_byte_stable(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "sample", "--degree", 50, "--seed", 7, "--out", a)
    run(capsys, "sample", "--degree", 50, "--seed", 7, "--out", b)
    assert (a / "zeros.svg").read_bytes() == (b / "zeros.svg").read_bytes()
    assert (a / "zeros.csv").read_bytes() == (b / "zeros.csv").read_bytes()


def test_sample_degree_one(tmp_path, capsys):
    code, _, _ = run(capsys, "sample", "--degree", 1, "--out", tmp_path, "--view", "plane")
    assert code == 0
    assert len(list(csv.DictReader(open(tmp_path / "zeros.csv")))) == 1
    assert (tmp_path / "zeros.svg").read_text().count('fill="black"') == 1


def test_hcurve(tmp_path, capsys):
    p = tmp_path / "h.csv"
    assert run(capsys, "hcurve", "--t-max", 10, "--samples", 101, "--out", p)[0] == 0
    rows = list(csv.DictReader(open(p)))
    assert len(rows) == 101
    assert float(rows[0]["H_minus_1"]) == -1.0
    assert abs(float(rows[-1]["H_minus_1"])) <= 1e-6
    h = np.array([float(r["H_minus_1"]) for r in rows])
    assert np.all(np.diff(h[:15]) > 0)


def test_hcurve_bad_arguments(capsys):
    code, _, err = run(capsys, "hcurve", "--t-max", 0)
    assert code == 1 and err.startswith("error: ParseError:")


def test_energy_from_csv(tmp_path, capsys):
    p = tmp_path / "pts.csv"
    p.write_text("x,y,z\n0,0,1\n0,0,-1\n")
    code, out, _ = run(capsys, "energy", "--input", p, "--s", 2)
    data = json.loads(out)
    assert code == 0 and data["s_energies"]["2"] == pytest.approx(0.5)


def test_predict(capsys):
    code, out, _ = run(capsys, "predict", "--N", 100, "--s", 1, "--s", 3)
    data = json.loads(out)
    assert data["s"]["1"]["terms"]["mean_field(s) N^2"] == pytest.approx(1e4)
    assert data["s"]["3"]["unresolved"]


def test_minimize_writes_points(tmp_path, capsys):
    p = tmp_path / "m" / "best.csv"
    code, out, _ = run(capsys, "minimize", "--N", 4, "--restarts", 3, "--out", p)
    assert code == 0 and "converged=True" in out
    assert len(list(csv.DictReader(open(p)))) == 4


def _sweep(tmp_path, capsys, name, *extra):
    d = tmp_path / name
    code, out, _ = run(capsys, "sweep", "--degrees", 12, 16, 20, "--trials", 3, "--seed", 1,
                       "--out", d, *extra)
    assert code == 0
    return d, out


def test_sweep_and_report(tmp_path, capsys):
    d, out = _sweep(tmp_path, capsys, "a", "--s", 3)
    assert (d / "trials.csv").exists() and (d / "fits.json").exists()
    assert "fit green" in out
    code, rep, _ = run(capsys, "report", d / "summary.json")
    assert code == 0
    rows = [l for l in rep.splitlines() if l.strip().startswith("s_3")]
    assert len(rows) == 3 and all("unresolved: C" in r for r in rows)


def test_report_omits_riesz_rows_without_s(tmp_path, capsys):
    d, _ = _sweep(tmp_path, capsys, "a")
    rep = run(capsys, "report", d / "summary.json")[1]
    labels = [l.split()[0] for l in rep.splitlines() if l.startswith("  ")]
    assert "green" in labels and not any(x.startswith("s_") for x in labels)


def test_report_text_is_reproducible(tmp_path, capsys):
    a, _ = _sweep(tmp_path, capsys, "a")
    b, _ = _sweep(tmp_path, capsys, "b")
    # the summaries embed their own output_dir; make the configs equal
    for d in (a, b):
        s = json.loads((d / "summary.json").read_text())
        s["config"]["output_dir"] = "run"
        (d / "summary.json").write_text(json.dumps(s))
    ra = run(capsys, "report", a / "summary.json")[1].splitlines()[1:]
    rb = run(capsys, "report", b / "summary.json")[1].splitlines()[1:]
    assert ra == rb and ra


def test_report_parse_error_names_file_and_field(tmp_path, capsys):
    d, _ = _sweep(tmp_path, capsys, "a")
    s = json.loads((d / "summary.json").read_text())
    del s["degrees"]["16"]["kinds"]["log"]["mean"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(s))
    code, _, err = run(capsys, "report", bad)
    assert code == 1
    assert err.startswith("error: ParseError:")
    assert str(bad) in err and "degrees.16.kinds.log.mean" in err
    assert len(err.strip().splitlines()) == 1


def test_report_invalid_json(tmp_path, capsys):
    bad = tmp_path / "x.json"
    bad.write_text("{")
    code, _, err = run(capsys, "report", bad)
    assert code == 1 and "ParseError" in err and str(bad) in err


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("degrees = [10, 12]\ntrials = 2\nroot_seed = 4\nbogus = 1\n")
    code, _, err = run(capsys, "sweep", "--config", cfg)
    assert code == 1 and err.startswith("error: ConfigError:")
    cfg.write_text("degrees = [10, 12]\ntrials = 2\nroot_seed = 4\n")
    code, out, _ = run(capsys, "sweep", "--config", cfg, "--trials", 3)
    assert code == 0 and "N=10 trials=3" in out


def test_paircorr_with_control(tmp_path, capsys):
    code, out, _ = run(capsys, "paircorr", "--degrees", 100, "--trials", 4, "--seed", 2,
                       "--control", "--out", tmp_path)
    assert code == 0 and "l2_to_H=" in out and "control_max_z=" in out
    assert (tmp_path / "paircorr_N100.csv").exists()
    assert (tmp_path / "paircorr_control_N100.csv").exists()


def test_unwritable_output_is_an_error(tmp_path, capsys):
    blocker = tmp_path / "f"
    blocker.write_text("")
    code, _, err = run(capsys, "sample", "--degree", 5, "--out", blocker / "sub")
    assert code == 1 and err.startswith("error: ")


def test_domain_errors_exit_nonzero(capsys):
    code, _, err = run(capsys, "predict", "--N", 1)
    assert code == 1 and err.startswith("error: DomainError:")
