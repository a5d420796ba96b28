import json
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from snnc import cli, sweep
from snnc.optimize import ObjectiveError
from snnc.plotting import PlotError, emit_plot
from snnc.relay import GaussianRelaySpec
from snnc.sweep import ConfigError, SweepConfig, relay_rows, render_csv, run_relay_sweep

NETS = Path(__file__).parents[1] / "src" / "snnc" / "networks"
SVG = "{http://www.w3.org/2000/svg}"


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_relay_row_count(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, _ = run(["relay-sweep", "--steps", 3, "--schemes", "nnc,cutset", "--out", out], capsys)
    assert code == 0
    lines = out.read_text().split("\n")
    assert lines[0] == "d,scheme,rate,binding"
    assert lines[-1] == ""
    assert len(lines) - 1 == 1 + 6
    assert b"\r" not in out.read_bytes()


def test_twrc_single_step(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code, _, _ = run(["twrc-sweep", "--steps", 1, "--d-min", 0.3, "--schemes", "nnc,cutset", "--out", out], capsys)
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "d,scheme,r1,r2,sum,binding"
    assert len(rows) == 1 + 2
    assert all(r.startswith("0.300000,") for r in rows[1:])


def test_byte_identical_reruns(tmp_path, capsys):
    texts = []
    for i in range(2):
        out = tmp_path / f"r{i}.csv"
        run(["relay-sweep", "--steps", 4, "--schemes", "snnc,nnc,cf,cutset", "--grid", 9, "--out", out], capsys)
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


def test_parallel_matches_serial():
    base = dict(steps=3, schemes="nnc,cf", grid=9)
    a = sweep.compute_rows(SweepConfig.from_mapping("relay", base))
    b = sweep.compute_rows(SweepConfig.from_mapping("relay", {**base, "jobs": 2}))
    assert a == b


def test_point_matches_library(capsys):
    code, out, _ = run(["point", "--d", 0.1, "--schemes", "snnc"], capsys)
    assert code == 0
    lib = render_csv(sweep.RELAY_HEADER, relay_rows(GaussianRelaySpec.at(0.1), 0.1, ["snnc"],
                                                    {"snnc": 21, "nnc": 21}, 50))
    assert out == lib


def test_twrc_point_symmetric(capsys):
    code, out, _ = run(["point", "--mode", "twrc", "--d", 0.5, "--schemes", "snnc"], capsys)
    assert code == 0
    _, _, r1, r2, _, _ = out.splitlines()[1].split(",")
    assert abs(float(r1) - float(r2)) < 1e-6


def test_metadata_sidecar(tmp_path, capsys):
    out = tmp_path / "t.csv"
    run(["twrc-sweep", "--steps", 2, "--schemes", "cutset", "--p3", 20, "--out", out, "--no-plot"], capsys)
    meta = json.loads((tmp_path / "t.meta").read_text())
    assert meta["mode"] == "twrc"
    assert meta["constants"]["p3"] == 20.0
    assert meta["unstated_defaults"] == {"gamma": 3.0, "n1": 1.0, "n2": 1.0, "n3": 1.0}
    assert meta["positions"] == ["0.100000", "0.900000"]
    assert {"snnc", "python", "numpy", "scipy"} <= set(meta["versions"])
    assert meta["optimizer"]["grid_points_per_dim"]["snnc"] == 9
    assert not (tmp_path / "t.svg").exists()


@pytest.mark.parametrize("argv", [
    ["relay-sweep", "--d-min", "0"],
    ["relay-sweep", "--d-min", "0.6", "--d-max", "0.4"],
    ["relay-sweep", "--steps", "0"],
    ["relay-sweep", "--schemes", "snnc,magic"],
    ["twrc-sweep", "--schemes", "cf"],
    ["relay-sweep", "--p1", "-1"],
    ["relay-sweep", "--grid", "1"],
    ["relay-sweep", "--steps", "two"],
    ["dmn-eval", "no-such-file.json"],
])
def test_config_errors_exit_2(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:  # argparse type errors
        code = exc.code
    assert code == 2
    assert capsys.readouterr().err


def test_error_names_field(capsys):
    code, _, err = run(["relay-sweep", "--d-max", 1.5], capsys)
    assert code == 2 and "d_max" in err


def test_compute_error_exit_3_leaves_no_file(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise ObjectiveError({"q": 1.0}, ZeroDivisionError())

    monkeypatch.setattr(sweep, "optimize_nnc", boom)
    out = tmp_path / "r.csv"
    code, _, err = run(["relay-sweep", "--steps", 2, "--schemes", "nnc", "--out", out], capsys)
    assert code == 3
    assert "q" in err
    assert list(tmp_path.iterdir()) == []


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"steps": 2, "schemes": ["cutset"], "p1": 7, "d-min": 0.2}))
    code, out, _ = run(["relay-sweep", "--config", cfg, "--p1", 9], capsys)
    assert code == 0
    rows = out.splitlines()
    assert len(rows) == 3 and rows[1].startswith("0.200000,cutset")
    direct = render_csv(sweep.RELAY_HEADER, sweep.compute_rows(
        SweepConfig.from_mapping("relay", {"steps": 2, "schemes": "cutset", "p1": 9.0, "d_min": 0.2})))
    assert out == direct
    bad = tmp_path / "bad.json"
    bad.write_text("{\"steps\": 2,\n \"p1\": }")
    code, _, err = run(["relay-sweep", "--config", bad], capsys)
    assert code == 2 and "line 2" in err


def test_svg_one_polyline_per_scheme(tmp_path, capsys):
    out = tmp_path / "r.csv"
    run(["relay-sweep", "--steps", 3, "--schemes", "nnc,cutset", "--out", out], capsys)
    root = ET.parse(tmp_path / "r.svg").getroot()
    lines = root.findall(f"{SVG}polyline")
    assert len(lines) == 2
    assert [p.get("data-scheme") for p in lines] == ["nnc", "cutset"]
    assert all(len(p.get("points").split()) == 3 for p in lines)
    text = " ".join(t.text or "" for t in root.iter(f"{SVG}text"))
    assert "bits/channel use" in text and "relay position d" in text
    assert (tmp_path / "r.png").stat().st_size > 1000


def test_plot_subcommand(tmp_path, capsys):
    csv = tmp_path / "t.csv"
    csv.write_text("d,scheme,r1,r2,sum,binding\n0.1,nnc,1,1,2,x\n0.5,nnc,1,1,2.5,x\n0.9,nnc,1,1,2,x\n"
                   "0.1,cutset,2,2,4,x\n0.5,cutset,2,2,4.5,x\n0.9,cutset,2,2,4,x\n")
    code, _, _ = run(["plot", csv, tmp_path / "t.svg", "--no-png"], capsys)
    assert code == 0
    assert len(ET.parse(tmp_path / "t.svg").getroot().findall(f"{SVG}polyline")) == 2


def test_plot_rejects_empty_and_unknown(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("d,scheme,rate,binding\n")
    with pytest.raises(PlotError):
        emit_plot(empty, tmp_path / "e.svg")
    assert not (tmp_path / "e.svg").exists()
    odd = tmp_path / "o.csv"
    odd.write_text("x,y\n1,2\n")
    with pytest.raises(PlotError, match="schema"):
        emit_plot(odd, tmp_path / "o.svg")


def test_dmn_eval_report(tmp_path, capsys):
    out = tmp_path / "rep.json"
    code, text, _ = run(["dmn-eval", NETS / "line4.json", "--out", out], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert [c["cut"] for c in doc["cuts"] if c["destination"] == 4] == [[1], [1, 2], [1, 3], [1, 2, 3]]
    assert "binding" in text and "{1,2,3}" in text
    assert abs(doc["total"] - doc["r_prime"] - doc["r_dprime"]) < 1e-15


def test_dmn_eval_rejects_bad_factor(tmp_path, capsys):
    doc = json.loads((NETS / "line3.json").read_text())
    doc["factors"][1]["table"] = [["3/4", "1/4"], ["1/4", "13/20"]]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run(["dmn-eval", bad], capsys)
    assert code == 2
    assert "factors[1]" in err and "0.9" in err


def test_dmn_eval_optimize(capsys):
    code, text, _ = run(["dmn-eval", NETS / "line3.json", "--optimize", "V1"], capsys)
    assert code == 0 and "best p(V1)" in text


def test_library_guards():
    with pytest.raises(ConfigError):
        run_relay_sweep(SweepConfig.from_mapping("twrc", {}))
    with pytest.raises(ConfigError, match="unknown"):
        SweepConfig.from_mapping("relay", {"colour": 1})


def test_console_script(tmp_path):
    res = subprocess.run([sys.executable, "-m", "snnc.cli", "relay-sweep", "--steps", "1",
                          "--schemes", "cf"], capture_output=True, text=True, cwd=tmp_path)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1].startswith("0.050000,cf,")
