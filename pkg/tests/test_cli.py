import csv
import io
import json


from qrstab.cli import run
from qrstab.network import build_dhv, build_push_started_lu_kumar

HALF = ["--example", "dhv", "--m", "0.5,0.5,0.5,0.5,0.5,0.5", "--alpha", "0.811"]
FIG7 = ["--example", "pslk", "--m", "0.41,0.18,0.24,0.35,0.82", "--alpha", "0.8"]


def test_corners_table(capsys):
    assert run(["corners"] + HALF) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split() == ["lowest", "high", "det_R", "completely_s", "chen_s"]
    rows = [ln.split() for ln in lines[1:]]
    assert len(rows) == 8
    assert all(r[3:] == ["yes", "yes"] for r in rows)
    by_high = {r[1]: float(r[2]) for r in rows}
    assert by_high["4,2,6"] == 0.5
    assert by_high["1,2,3"] == 1.0


def test_certify_fig7(tmp_path, capsys):
    out = tmp_path / "cert.json"
    assert run(["certify"] + FIG7 + ["--out", str(out)]) == 2
    doc = json.loads(out.read_text())
    assert doc["sp"]["culprit"] == {"lowest": [4, 2]}
    assert doc["sp"]["verdict"] == "NotCertified"
    assert "NotCertified" in capsys.readouterr().out


def test_certify_with_ssc(capsys):
    args = ["--example", "dhv", "--m", "0.5,0.5,0.5,0.5,0.5,0.5", "--alpha", "0.95"]
    assert run(["certify"] + args + ["--ssc", "dhv"]) == 0
    assert "verdict: Certified" in capsys.readouterr().out
    args = ["--example", "dhv", "--m", "0.1,0.9,0.1,0.9,0.1,0.9", "--alpha", "0.99"]
    assert run(["certify"] + args + ["--ssc", "dhv"]) == 2


def test_validate_closed_network(tmp_path, capsys):
    doc = {"stations": 1, "classes": 2, "station_of": [1, 1], "mean_service": [0.5, 0.5],
           "routing": [[0, 1], [1, 0]], "arrival_rates": [1, 0]}
    path = tmp_path / "closed.json"
    path.write_text(json.dumps(doc))
    assert run(["validate", str(path)]) == 1
    assert "violation: openness" in capsys.readouterr().out


def test_validate_prints_loads(capsys):
    assert run(["validate"] + HALF) == 0
    assert "rho = 0.811, 0.811, 0.811" in capsys.readouterr().out


def test_malformed_json_reports_path_and_key(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{oops")
    assert run(["corners", str(path)]) == 1
    assert "bad.json" in capsys.readouterr().err
    doc = build_dhv([0.5] * 6, 0.8).to_dict()
    del doc["routing"]
    path.write_text(json.dumps(doc))
    assert run(["corners", str(path)]) == 1
    err = capsys.readouterr().err
    assert "routing" in err and "schema" in err


def test_usage_errors_exit_one(capsys):
    assert run([]) == 1
    assert run(["corners"]) == 1
    assert run(["certify", "--example", "dhv", "--m", "0.5,0.5", "--alpha", "0.8"]) == 1
    assert run(["check"] + HALF + ["--lowest", "2,5,3"]) == 1


def test_certificate_round_trip(tmp_path):
    net = build_push_started_lu_kumar((0.3, 0.6, 1 / 7, 0.5 + 1 / 70, 0.4), 0.8)
    src = tmp_path / "net.json"
    src.write_text(json.dumps(net.to_dict()))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["certify", str(src), "--out", str(a)])
    run(["certify", str(a), "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    back = json.loads(a.read_text())["network"]
    assert back["mean_service"] == list(net.mean_service)


def test_check_report_round_trip(tmp_path):
    delta = tmp_path / "d.json"
    delta.write_text(json.dumps({"delta": [1.0] * 6}))
    rep1, rep2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert run(["check"] + HALF + ["--delta", str(delta), "--out", str(rep1)]) == 0
    assert run(["check", str(rep1), "--delta", str(rep1), "--out", str(rep2)]) == 0
    assert rep1.read_bytes() == rep2.read_bytes()
    doc = json.loads(rep1.read_text())
    assert doc["delta"] == [1.0] * 6 and doc["chen"]["holds"] is True


def test_check_corner_not_chen(capsys):
    fig3 = ["--example", "dhv", "--m", "0.1,0.8,0.1,0.65,0.1,0.4", "--alpha", "0.811"]
    assert run(["check"] + fig3 + ["--lowest", "1,5,3"]) == 2


def test_scan_csv(tmp_path):
    out = tmp_path / "grid.csv"
    assert run(["scan"] + HALF + ["--resolution", "3", "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert raw.count(b"\r\n") == 28 and b"\n" not in raw.replace(b"\r\n", b"")
    rows = list(csv.reader(io.StringIO(raw.decode(), newline="")))
    assert rows[0][:3] == ["delta_4", "delta_5", "delta_6"]
    assert all(r[-1] == "true" for r in rows[1:])


def test_ssc_command(tmp_path, capsys):
    out = tmp_path / "ssc.json"
    assert run(["ssc"] + HALF[:4] + ["--alpha", "0.95", "--family", "dhv", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["feasible"] is True
    args = ["--example", "lk", "--m", "0.4,0.7,0.3,0.6", "--alpha", "0.9"]
    assert run(["ssc"] + args + ["--family", "lk"]) == 2
    assert run(["ssc"] + args + ["--family", "dhv"]) == 1


def test_ssc_alpha_override(tmp_path, capsys):
    path = tmp_path / "net.json"
    path.write_text(json.dumps(build_dhv([0.1, 0.9] * 3, 0.5).to_dict()))
    assert run(["ssc", str(path), "--family", "dhv", "--alpha", "0.99"]) == 2
    assert "alpha_1 = 0.99" in capsys.readouterr().out


def test_simulate_outputs(tmp_path):
    delta = tmp_path / "d.json"
    delta.write_text(json.dumps({"delta": [1.0] * 6}))
    fl, sk, de = tmp_path / "f.csv", tmp_path / "s.csv", tmp_path / "e.csv"
    assert run(["simulate"] + HALF + ["--fluid", "--delta", str(delta), "--t", "1", "--dt", "0.01",
                                      "--out", str(fl)]) == 0
    assert run(["simulate"] + HALF + ["--skorohod", "--lowest", "1,5,3", "--t", "1", "--dt", "0.01",
                                      "--out", str(sk)]) == 0
    assert run(["simulate"] + HALF + ["--des", "--policy", "priority", "--lowest", "1,5,3", "--t", "50",
                                      "--dt", "1", "--seed", "4", "--out", str(de)]) == 0
    f = fl.read_bytes().decode().split("\r\n")
    assert f[0].startswith("time,Z_1") and len(f) == 1 + 101 + 1
    assert sk.read_bytes().decode().startswith("time,W_1,W_2,W_3,Y_1")
    d = de.read_bytes().decode().split("\r\n")
    assert d[0] == "# prng=numpy.random.PCG64" and d[1] == "# seed=4"
    again = tmp_path / "e2.csv"
    run(["simulate"] + HALF + ["--des", "--policy", "priority", "--lowest", "1,5,3", "--t", "50",
                               "--dt", "1", "--seed", "4", "--out", str(again)])
    assert again.read_bytes() == de.read_bytes()


def test_simulate_step_guard(tmp_path, capsys):
    assert run(["simulate"] + HALF + ["--fluid", "--lowest", "1,5,3", "--t", "1", "--dt", "0.5"]) == 1
    assert "dt" in capsys.readouterr().err


def test_module_entry_point():
    import subprocess
    import sys
    out = subprocess.run([sys.executable, "-m", "qrstab", "validate"] + HALF,
                         capture_output=True, text=True)
    assert out.returncode == 0 and "rho" in out.stdout
