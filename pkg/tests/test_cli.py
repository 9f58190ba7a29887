import json
import re
import subprocess
import sys

import pytest

from sparsetrack.cli import build_parser, main
from sparsetrack.mot_io import parse_ground_truth, validate_results_file


@pytest.fixture(scope="module")
def sim_set(tmp_path_factory):
    root = tmp_path_factory.mktemp("sim")
    cfg = root / "sim.json"
    cfg.write_text(json.dumps({"n_frames": 30, "n_agents": 12, "seed": 5}))
    assert main(["simulate", "--config", str(cfg), "--seeds", "2", "--out", str(root / "set")]) == 0
    return root / "set"


def test_simulate_layout(sim_set):
    seqs = sorted(p.name for p in sim_set.iterdir())
    assert seqs == ["sim-0005", "sim-0006"]
    seq = sim_set / "sim-0005"
    for rel in ("gt/gt.txt", "det/det.txt", "seqinfo.ini", "manifest.json"):
        assert (seq / rel).exists()
    assert json.loads((seq / "manifest.json").read_text())["config"]["seed"] == 5


def test_track_is_deterministic_and_replayable(sim_set, tmp_path):
    seq = sim_set / "sim-0005"
    a, b, c = tmp_path / "a.txt", tmp_path / "b.txt", tmp_path / "c.txt"
    assert main(["track", "--seq", str(seq), "--out", str(a)]) == 0
    assert main(["track", "--seq", str(seq), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes() and a.read_bytes()
    validate_results_file(a)
    manifest = tmp_path / "a.txt.manifest.json"
    m = json.loads(manifest.read_text())
    assert m["config"]["image_height"] == 1080.0 and m["outputs"]["results"] == str(a)
    assert {"tool_version", "duration_s", "inputs"} <= set(m)
    assert main(["track", "--seq", str(seq), "--config", str(manifest), "--out", str(c)]) == 0
    assert c.read_bytes() == a.read_bytes()


def test_track_with_baseline_and_warps(sim_set, tmp_path):
    seq = sim_set / "sim-0005"
    warps = tmp_path / "warps.txt"
    warps.write_text("".join(f"{f} 1 0 0 0 1 0\n" for f in range(1, 31)))
    plain, warped = tmp_path / "plain.txt", tmp_path / "warped.txt"
    assert main(["track", "--seq", str(seq), "--baseline", "byte", "--out", str(plain)]) == 0
    assert main(["track", "--seq", str(seq), "--baseline", "byte", "--warps", str(warps), "--out", str(warped)]) == 0
    assert plain.read_bytes() == warped.read_bytes()


def test_eval_ground_truth_against_itself(sim_set, tmp_path, capsys):
    gt = sim_set / "sim-0005" / "gt" / "gt.txt"
    res = tmp_path / "res.txt"
    rows = parse_ground_truth(gt)
    res.write_text(
        "".join(
            f"{f},{g.id},{g.bbox.x1:.2f},{g.bbox.y1:.2f},{g.bbox.width:.2f},{g.bbox.height:.2f},1.00,-1,-1,-1\n"
            for f in rows
            for g in rows[f]
        )
    )
    assert main(["eval", "--gt", str(gt), "--res", str(res), "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["mota"] == 1.0 and report["idf1"] == 1.0
    assert main(["eval", "--gt", str(gt), "--res", str(res)]) == 0
    table = capsys.readouterr().out.splitlines()
    assert table[0].split()[:2] == ["mota", "idf1"] and table[1].split()[:2] == ["1.0000", "1.0000"]


def test_sweep(sim_set, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ST_THREADS", "1")
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--set", str(sim_set), "--k", "1,3", "--baseline", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "seq,label,idf1,mota,idsw" and len(lines) == 1 + 3 * 2
    table = capsys.readouterr().out
    assert re.search(r"^\s*byte\s+2\s", table, re.M) and re.search(r"^\s*k=3\s+2\s", table, re.M)


def test_overlay(sim_set, tmp_path):
    seq = sim_set / "sim-0005"
    res = tmp_path / "res.txt"
    main(["track", "--seq", str(seq), "--out", str(res)])
    out = tmp_path / "svg"
    assert main(["overlay", "--seq", str(seq), "--res", str(res), "--k", "3", "--out", str(out)]) == 0
    files = sorted(out.glob("*.svg"))
    assert len(files) == 30
    text = files[-1].read_text()
    assert text.startswith("<svg") and 'data-level="' in text
    levels = {int(v) for f in files for v in re.findall(r'data-level="(\d+)"', f.read_text())}
    assert levels <= {0, 1, 2} and len(levels) > 1


def test_errors_are_one_line(tmp_path, capsys):
    assert main(["track", "--seq", str(tmp_path / "missing"), "--out", str(tmp_path / "r.txt")]) != 0
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "missing" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{"k_lo": 3}')
    assert main(["eval", "--gt", str(bad), "--res", str(bad)]) != 0
    assert main(["sweep", "--set", str(tmp_path), "--k", "x", "--out", str(tmp_path / "s.csv")]) != 0
    assert capsys.readouterr().err.count("\n") == 2


def test_unknown_flag_rejected():
    with pytest.raises(SystemExit) as e:
        main(["track", "--seq", "x", "--out", "y", "--bogus"])
    assert e.value.code != 0


def test_help_lists_every_flag():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, sp in sub.choices.items():
        text = sp.format_help()
        for action in sp._actions:
            for flag in action.option_strings:
                assert flag in text, (name, flag)


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "sparsetrack.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd in ("track", "simulate", "eval", "sweep", "overlay"):
        assert cmd in r.stdout
