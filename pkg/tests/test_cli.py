import json
import subprocess
import sys
from pathlib import Path

import pytest

from jetham.cli import main, thread_count
from jetham.scenario import Scenario

SCEN = Path(__file__).resolve().parents[1] / "scenarios"


def write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def base(**over):
    doc = {
        "dims": [1, 2],
        "temporal_metric": [["1"]],
        "spatial_metric": [["1", "0"], ["0", "1"]],
        "eval_points": [{"t": [0.1], "x": [0.2, 0.3], "p": [[0.5], [1.0]]}],
        "seed": 3,
    }
    doc.update(over)
    return doc


def compute(path, what, tmp_path):
    out = tmp_path / f"{what}.json"
    code = main(["compute", "--scenario", path, "--what", what, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_flat_torsion_all_zero(tmp_path):
    code, doc = compute(str(SCEN / "flat.json"), "torsion", tmp_path)
    assert code == 0 and doc["schema"] == "jetham/1"
    fams = doc["points"][0]["families"]
    assert len(fams) == 18 and sum(not f["structural_zero"] for f in fams) == 12
    assert all(e["value"] == 0 for f in fams for e in f["entries"])


def test_sphere_curvature_entry(tmp_path):
    code, doc = compute(str(SCEN / "sphere.json"), "curvature", tmp_path)
    assert code == 0
    fam = next(f for f in doc["points"][0]["families"] if f["family"] == "R^l_ijk")
    vals = {tuple(e["index"]): e["value"] for e in fam["entries"]}
    assert vals[(1, 2, 2, 1)] == pytest.approx(0.75, abs=1e-14)
    assert vals[(1, 2, 1, 2)] == pytest.approx(-0.75, abs=1e-14)


@pytest.mark.parametrize("what", ["frames", "brackets", "deflection", "fundamental-metric", "almost-product"])
def test_compute_whats(tmp_path, what):
    code, doc = compute(str(SCEN / "sphere.json"), what, tmp_path)
    assert code == 0 and doc["what"] == what and len(doc["points"]) == 1


def test_fundamental_metric_needs_hamiltonian(tmp_path, capsys):
    code, _ = compute(str(SCEN / "flat.json"), "fundamental-metric", tmp_path)
    assert code == 2
    assert "hamiltonian" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    code, _ = compute(str(tmp_path / "nope.json"), "torsion", tmp_path)
    assert code == 2 and "nope.json" in capsys.readouterr().err


def test_bad_json_reports_line(tmp_path, capsys):
    path = write(tmp_path, '{\n  "dims": [1, 1],\n  oops\n}')
    code, _ = compute(path, "torsion", tmp_path)
    assert code == 2 and ":3:" in capsys.readouterr().err


@pytest.mark.parametrize("bad", [
    {"dims": [0, 1]},
    {"spatial_metric": [["1", "x[1]"], ["0", "1"]]},
    {"spatial_metric": [["1", "0"], ["0", "x[3]"]]},
    {"temporal_metric": [["1 +"]]},
    {"eval_points": []},
    {"connection_mode": "other"},
    {"colour": "blue"},
])
def test_invalid_scenarios_exit_2(tmp_path, bad):
    code, _ = compute(write(tmp_path, base(**bad)), "torsion", tmp_path)
    assert code == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["compute", "--scenario", "x.json", "--what", "nonsense", "--out", "-"])
    assert info.value.code == 2


def test_domain_error_exit_3(tmp_path):
    doc = base(spatial_metric=[["log(x[1])", "0"], ["0", "1"]],
               eval_points=[{"t": [0.1], "x": [-0.5, 0.3], "p": [[0.5], [1.0]]}])
    code, _ = compute(write(tmp_path, doc), "torsion", tmp_path)
    assert code == 3


def test_singular_metric_exit_4(tmp_path):
    doc = base(spatial_metric=[["1", "1"], ["1", "1"]])
    code, _ = compute(write(tmp_path, doc), "curvature", tmp_path)
    assert code == 4


def test_verify_exit_codes(capsys):
    assert main(["verify", "--scenario", str(SCEN / "custom.json"), "--suite", "covariance"]) == 0
    assert main(["verify", "--scenario", str(SCEN / "custom_corrupted.json"), "--suite", "covariance"]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "verification failed" in out


def test_sphere_integrability_is_a_finding(capsys):
    assert main(["verify", "--scenario", str(SCEN / "sphere.json"), "--suite", "integrability"]) == 0
    assert "not integrable" in capsys.readouterr().out


def test_verify_report_file(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--scenario", str(SCEN / "sphere.json"), "--suite", "oracle", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == "jetham/1" and all(c["pass"] for c in doc["checks"])


def test_echo_round_trip(tmp_path):
    for name in ("sphere.json", "custom.json"):
        code, doc = compute(str(SCEN / name), "frames", tmp_path)
        assert code == 0
        original = Scenario.from_json((SCEN / name).read_text())
        assert Scenario.from_dict(doc["scenario"]).equivalent(original)


def test_threads_do_not_change_output(tmp_path, monkeypatch):
    doc = base(eval_points=[{"t": [0.1 * k], "x": [0.2, 0.3 + 0.1 * k], "p": [[0.5], [k]]} for k in range(6)],
               spatial_metric=[["1", "0"], ["0", "sin(x[1])^2"]])
    path = write(tmp_path, doc)
    monkeypatch.setenv("JETHAM_THREADS", "1")
    _, one = compute(path, "curvature", tmp_path)
    monkeypatch.setenv("JETHAM_THREADS", "4")
    _, four = compute(path, "curvature", tmp_path)
    assert one == four


def test_thread_count(monkeypatch):
    monkeypatch.setenv("JETHAM_THREADS", "bogus")
    assert thread_count() == 1
    monkeypatch.delenv("JETHAM_THREADS")
    assert thread_count() == 1


def test_byte_identical_subprocess(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}.json"
        subprocess.run([sys.executable, "-m", "jetham", "compute", "--scenario", str(SCEN / "sphere.json"),
                        "--what", "torsion", "--out", str(out)], check=True)
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
