import json
import re
import subprocess
import sys

import numpy as np
import pytest

from fslhd import LevelMatrix, SliceSpec, to_design
from fslhd.cli import main, render_svg
from fslhd.io import format_design, format_levels, parse_table, read_design, read_levels

M10 = np.array([[54, 12, 24, 42, 60, 30, 6, 18, 48, 36],
                [54, 42, 12, 24, 18, 6, 36, 48, 60, 30]]).T


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_slice_column(capsys):
    code, out, _ = run(capsys, "construct", "--slices", "3,4,5", "--factors", 1, "--seed", 7)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "slice,x1" and len(lines) == 13
    assert [int(r.split(",")[0]) for r in lines[1:]] == [1] * 3 + [2] * 4 + [3] * 5


def test_construct_passes_structure_check(capsys, tmp_path):
    f = tmp_path / "d.csv"
    assert run(capsys, "construct", "--slices", "4,8,12", "--factors", 2, "--out", f)[0] == 0
    code, out, _ = run(capsys, "eval", f, "--check-structure")
    assert code == 0 and "structure: ok" in out


def test_construct_outputs_are_byte_identical(capsys, tmp_path):
    paths = []
    for k in range(2):
        d, l = tmp_path / f"d{k}.csv", tmp_path / f"l{k}.csv"
        run(capsys, "construct", "--slices", "3,5", "--factors", 3, "--seed", 11, "--jitter", "uniform",
            "--out", d, "--levels", l)
        paths.append((d.read_bytes(), l.read_bytes()))
    assert paths[0] == paths[1]


def test_round_trip_is_byte_identical(tmp_path):
    D = to_design(LevelMatrix(SliceSpec((4, 6), 2), M10))
    text = format_design(D)
    f = tmp_path / "d.csv"
    f.write_text(text)
    assert format_design(read_design(f)) == text
    lt = format_levels(LevelMatrix(SliceSpec((4, 6), 2), M10))
    (tmp_path / "l.csv").write_text(lt)
    assert format_levels(read_levels(tmp_path / "l.csv")) == lt


def test_metadata_record(capsys, tmp_path):
    meta = tmp_path / "m.json"
    run(capsys, "construct", "--slices", "3,4", "--factors", 2, "--seed", 1, "--out", tmp_path / "d.csv",
        "--meta", meta)
    m = json.loads(meta.read_text())
    assert m["seed"] == 1 and m["spec"]["slices"] == [3, 4] and "csm" in m["value"]


def _optimize(capsys, tmp_path, *extra):
    out, lev, summ, tr = (tmp_path / n for n in ("o.csv", "o_l.csv", "s.json", "t.jsonl"))
    code, _, _ = run(capsys, "optimize", *extra, "--out", out, "--levels", lev, "--summary", summ, "--trace", tr)
    assert code == 0
    return out, lev, json.loads(summ.read_text()), tr


def test_optimize_sese_and_eval_agree(capsys, tmp_path):
    out, lev, summ, tr = _optimize(capsys, tmp_path, "--algorithm", "sese", "--slices", "4,8,12", "--factors", 2,
                                   "--inner-iters", 10, "--outer-iters", 3, "--seed", 1)
    assert summ["final"]["csm"] <= summ["initial"]["csm"]
    assert {"wall_time_s", "seed", "iterations", "config"} <= summ.keys()
    assert len(tr.read_text().splitlines()) == 3 * 3 * 10
    _, text, _ = run(capsys, "eval", out)
    reported = float(re.search(r"^csm: (\S+)", text, re.M).group(1))
    assert reported == pytest.approx(summ["final"]["csm"], rel=1e-9)
    assert read_levels(lev).is_valid()


def test_optimize_twopart_reports_repeat_free(capsys, tmp_path):
    _, _, summ, tr = _optimize(capsys, tmp_path, "--algorithm", "twopart", "--slices", "15,30", "--factors", 2,
                               "--seed", 3)
    assert summ["repeat_free"] is True
    assert summ["repeat_free_by_slice"] == {"1": True, "2": True}
    stages = [json.loads(x)["stage"] for x in tr.read_text().splitlines()]
    assert stages == ["initial", "part1", "part2"]


@pytest.mark.parametrize("alg,flags", [("sese", ["--inner-iters", 0]), ("sese", ["--outer-iters", 0]),
                                       ("twopart", ["--part-budget", 0]), ("none", [])])
def test_zero_budget_leaves_input(capsys, tmp_path, alg, flags):
    src = tmp_path / "in.csv"
    src.write_text(format_levels(LevelMatrix(SliceSpec((4, 6), 2), M10)))
    _, lev, summ, _ = _optimize(capsys, tmp_path, "--algorithm", alg, "--input", src, *flags, "--seed", 0)
    assert lev.read_text() == src.read_text()
    assert summ["final"] == summ["initial"]


def test_optimize_is_reproducible(capsys, tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"{k}"
        d.mkdir()
        out, lev, _, tr = _optimize(capsys, d, "--slices", "3,5", "--factors", 2, "--seed", 4,
                                    "--inner-iters", 5, "--outer-iters", 2)
        outs.append((out.read_bytes(), lev.read_bytes(), tr.read_bytes()))
    assert outs[0] == outs[1]


def test_eval_reports_swapped_labels(capsys, tmp_path):
    f = tmp_path / "d.csv"
    f.write_text(format_design(to_design(LevelMatrix(SliceSpec((4, 6), 2), M10))))
    lines = f.read_text().splitlines()
    # relabel one row of slice 1 as slice 2 and one row of slice 2 as slice 1
    lines[1] = "2" + lines[1][1:]
    lines[6] = "1" + lines[6][1:]
    f.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "eval", f)
    assert code == 0
    assert re.search(r"structure: violated .*\(slice 2, column 1\)", out)
    assert run(capsys, "eval", f, "--strict")[0] == 3


def test_eval_single_slice_csm_equals_phi(capsys, tmp_path):
    f = tmp_path / "d.csv"
    run(capsys, "construct", "--slices", "9", "--factors", 3, "--seed", 2, "--out", f)
    _, out, _ = run(capsys, "eval", f)
    vals = dict(line.split(": ", 1) for line in out.splitlines())
    assert float(vals["csm"]) == pytest.approx(float(vals["phi_t"]), rel=1e-12)


def test_eval_accepts_levels_file(capsys, tmp_path):
    f = tmp_path / "l.csv"
    f.write_text(format_levels(LevelMatrix(SliceSpec((4, 6), 2), M10)))
    code, out, _ = run(capsys, "eval", f)
    assert code == 0 and "structure: ok" in out


def test_compare_single_repeat(capsys):
    code, out, _ = run(capsys, "compare", "--slices", "3,4", "--factors", 2, "--repeats", 1, "--runs", 0,
                       "--seed", 1)
    assert code == 0
    row = next(line for line in out.splitlines() if line.startswith("random")).split()
    mn, mean, mx, sd = map(float, row[2:6])
    assert mn == mean == mx and sd == 0


def test_compare_table(capsys, tmp_path):
    js = tmp_path / "c.json"
    code, out, _ = run(capsys, "compare", "--slices", "4,8,12", "--factors", 2, "--repeats", 200, "--runs", 2,
                       "--algorithms", "sese,part1,twopart", "--inner-iters", 10, "--outer-iters", 3,
                       "--seed", 5, "--json", js)
    assert code == 0
    rows = {r["method"]: r for r in json.loads(js.read_text())["rows"]}
    assert set(rows) == {"random", "sese", "part1", "twopart"}
    assert rows["random"]["runs"] == 200 and rows["sese"]["runs"] == 2
    assert rows["sese"]["mean"] < rows["random"]["mean"]


def test_plot_counts(capsys, tmp_path):
    f = tmp_path / "d.csv"
    run(capsys, "construct", "--slices", "3,4,5", "--factors", 2, "--seed", 1, "--out", f)
    code, svg, _ = run(capsys, "plot", f, "--dims", "1,2", "--grid", 4)
    assert code == 0
    assert len(re.findall(r'class="pt ', svg)) == 12
    assert len(re.findall(r'<line class="grid" x1="([\d.]+)" y1="20" x2="\1"', svg)) == 3
    assert len(re.findall(r'class="grid"', svg)) == 6


def test_plot_grid_cells_show_repeats():
    D = to_design(LevelMatrix(SliceSpec((4, 6), 2), M10))
    svg = render_svg(D, (0, 1), grid=4)
    xy = [(float(a), float(b)) for a, b in re.findall(r'data-x="([\d.e-]+)" data-y="([\d.e-]+)"', svg)]
    cells = [(int(np.ceil(x * 4)), int(np.ceil(y * 4))) for x, y in xy]
    pairs = sum(cells[i] == cells[j] for i in range(10) for j in range(i + 1, 10))
    assert pairs == 4  # same as the repeat count of the 4 x 4 grid


@pytest.mark.parametrize("argv,code", [
    (["construct", "--slices", "0,3", "--factors", "1"], 1),
    (["construct", "--slices", "3,x", "--factors", "1"], 1),
    (["construct", "--slices", "3,4"], 1),
    (["optimize", "--algorithm", "sese"], 1),
    (["optimize", "--slices", "3,4", "--factors", "2", "--inner-iters", "200"], 1),
    (["optimize", "--slices", "3,4", "--factors", "2", "--w", "1.5"], 1),
    (["eval", "/nonexistent/file.csv"], 2),
    (["bogus"], 1),
])
def test_exit_codes(capsys, argv, code):
    got, _, err = run(capsys, *argv)
    assert got == code
    assert err.strip().count("\n") == 0 and err.startswith("fslhd: error:")


def test_plot_bad_dims(capsys, tmp_path):
    f = tmp_path / "d.csv"
    run(capsys, "construct", "--slices", "3,4", "--factors", 2, "--out", f)
    assert run(capsys, "plot", f, "--dims", "1,3")[0] == 1


def test_malformed_csv(capsys, tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("slice,x1\n1,abc\n")
    assert run(capsys, "eval", f)[0] == 2
    f.write_text("idx,x1\n1,0.5\n")
    assert run(capsys, "eval", f)[0] == 2


def test_parse_table_kinds():
    kind, labels, vals = parse_table("slice,m1,m2\n1,3,4\n2,1,2\n")
    assert kind == "levels" and labels.tolist() == [1, 2] and vals.dtype.kind == "i"


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "fslhd", "construct", "--slices", "2,2", "--factors", "1",
                          "--seed", "0"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("slice,x1")
