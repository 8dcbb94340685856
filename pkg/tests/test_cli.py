import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from l1bubble.cli import CSV_HEADER, centred_grid, main
from l1bubble.closed_forms import classify


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def fields(text):
    return dict(line.split(None, 1) for line in text.strip().splitlines())


@pytest.fixture
def grid(tmp_path):
    def write(text):
        p = tmp_path / "grid.txt"
        p.write_text(text)
        return str(p)

    return write


# -- energy -------------------------------------------------------------------------


def test_energy_two_cells(grid):
    code, out, _ = run("energy", grid("AB\n"), "--eta", "1")
    assert code == 0
    f = fields(out)
    assert f["total"] == "7.0"
    assert f["union_form"] == "7.0"
    assert (f["cells_a"], f["cells_b"], f["interface"]) == ("1", "1", "1")


def test_energy_cell_size_scales(grid):
    code, out, _ = run("energy", grid("AB\n"), "--eta", "1", "--cell-size", "1/2")
    assert code == 0
    assert fields(out)["total"] == "3.5"


def test_energy_empty_grid_is_parse_error(grid):
    code, _, err = run("energy", grid("...\n"))
    assert code == 2
    assert "EmptyGrid" in err


def test_energy_bad_character_is_parse_error(grid):
    assert run("energy", grid("AXB\n"))[0] == 2


def test_energy_eta_limit_needs_flag(grid):
    path = grid("AB\n")
    assert run("energy", path, "--eta", "2")[0] == 3
    code, out, _ = run("energy", path, "--eta", "2", "--allow-limit")
    assert code == 0
    assert fields(out)["total"] == "8.0"


def test_energy_missing_file_is_io_error(tmp_path):
    assert run("energy", str(tmp_path / "nope.txt"))[0] == 4


def test_unknown_option_is_parse_error():
    assert run("energy", "--bogus")[0] == 2


# -- classify -----------------------------------------------------------------------


@pytest.mark.parametrize("r,label", [("0.1", "III"), ("0.4", "II"), ("0.9", "I")])
def test_classify_regions(r, label):
    code, out, _ = run("classify", "--r", r, "--eta", "1")
    assert code == 0
    f = fields(out)
    assert f["optimal"] == label
    assert f["boundary"] == "no"


def test_classify_volumes_give_ratio():
    code, out, _ = run("classify", "--va", "12", "--vb", "4", "--eta", "1")
    assert code == 0
    assert float(fields(out)["r"]) == pytest.approx(1 / 3)
    assert fields(out)["optimal"] == "II"


def test_classify_on_curve_is_boundary():
    code, out, _ = run("classify", "--r", "0.5", "--eta", "1")
    assert code == 0
    assert fields(out)["boundary"] == "yes"


@pytest.mark.parametrize(
    "argv",
    [
        ("classify", "--r", "0.3", "--va", "2", "--vb", "1"),
        ("classify", "--r", "0.3", "--eta", "0"),
        ("classify", "--r", "1.5"),
        ("classify", "--va", "-1", "--vb", "1"),
    ],
)
def test_classify_domain_errors(argv):
    assert run(*argv)[0] == 3


# -- phase diagram ------------------------------------------------------------------


def test_phase_csv_layout():
    code, out, _ = run("phase-diagram", "--res", "7")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == CSV_HEADER
    body = rows[1:]
    assert len(body) == 49
    etas = [float(r[0]) for r in body]
    # eta-major: eta is constant over each block of res rows
    assert etas == sorted(etas)
    assert len(set(etas[:7])) == 1
    assert [float(r[1]) for r in body[:7]] == pytest.approx(list(centred_grid(0, 1, 7)))
    for row in body:
        for cell in row[:5]:
            assert cell == "%.12g" % float(cell)
        assert row[6] in ("0", "1")


def test_phase_csv_round_trip():
    _, out, _ = run("phase-diagram", "--res", "15")
    for row in list(csv.DictReader(io.StringIO(out))):
        c = classify(float(row["r"]), float(row["eta"]))
        assert c.optimal_label == row["optimal"]
        assert float(row["E_III"]) == pytest.approx(c.E_III, rel=1e-11)


@pytest.mark.parametrize("r,label", [(0.1, "III"), (0.4, "II"), (0.9, "I")])
def test_phase_csv_known_points(r, label):
    _, out, _ = run("phase-diagram", "--res", "40")
    rows = list(csv.DictReader(io.StringIO(out)))
    near = min(rows, key=lambda row: abs(float(row["eta"]) - 1) + abs(float(row["r"]) - r))
    assert near["optimal"] == label


def test_phase_svg_has_three_curves(tmp_path):
    path = tmp_path / "curves.svg"
    code, out, _ = run("phase-diagram", "--res", "20", "--format", "svg-polyline", "--out", str(path))
    assert code == 0
    assert out == ""
    text = path.read_text()
    assert text.count("<polyline") == 3
    for name in ("r12", "r13", "r23"):
        assert f'id="{name}"' in text


def test_phase_svg_restricted_range_drops_curves():
    # below the triple point only the I/III curve separates phases
    code, out, _ = run("phase-diagram", "--res", "5", "--format", "svg-polyline", "--eta-range", "0.1", "0.5")
    assert code == 0
    assert out.count("<polyline") == 1
    assert 'id="r13"' in out


def test_phase_bad_range_is_domain_error():
    assert run("phase-diagram", "--eta-range", "1.5", "0.5")[0] == 3


def test_phase_unwritable_path_is_io_error(tmp_path):
    assert run("phase-diagram", "--res", "3", "--out", str(tmp_path / "no" / "dir.csv"))[0] == 4


# -- optimize -----------------------------------------------------------------------


LIGHT = ("--steps-per-cell", "200", "--chains", "2")


def test_optimize_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("optimize", "--va", "5", "--vb", "3", "--eta", "0.7", *LIGHT, "--out", str(a))[0] == 0
    assert run("optimize", "--va", "5", "--vb", "3", "--eta", "0.7", *LIGHT, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert (data["n_a"], data["n_b"]) == (5, 3)


def test_optimize_summary_and_grid():
    code, out, _ = run("optimize", "--va", "2", "--vb", "2", "--eta", "1", *LIGHT)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("lower ")
    assert "best 10 " in lines[0]
    assert lines[0].endswith("sandwich ok")
    assert lines[1] == "predicted type I"
    assert sorted(lines[2:]) == ["AB", "AB"] or sorted(lines[2:]) == ["AA", "BB"]


def test_optimize_swaps_volumes():
    code, out, _ = run("optimize", "--va", "1", "--vb", "3", *LIGHT, "--format", "grid-text")
    assert code == 0
    assert "swapped" in out
    grid_text = out.split("larger phase\n", 1)[1]
    assert grid_text.count("A") == 3 and grid_text.count("B") == 1


def test_optimize_needs_integer_counts():
    assert run("optimize", "--va", "5/2", "--vb", "1")[0] == 3
    assert run("optimize", "--r", "0.5")[0] == 3


# -- verify -------------------------------------------------------------------------


def test_verify_hfun_passes(tmp_path):
    report = tmp_path / "rep.txt"
    code, out, _ = run("verify", "hfun", "--res", "20", "--out", str(report))
    assert code == 0
    assert out.startswith("hfun")
    assert report.exists()


def test_verify_coarse_all_passes(tmp_path):
    code, out, _ = run("verify", "--res", "10", "--out", str(tmp_path / "rep.txt"))
    assert code == 0
    assert [line.split()[1] for line in out.splitlines()[:4]] == ["ok"] * 4


def test_verify_negative_control_fails(tmp_path):
    report = tmp_path / "rep.txt"
    code, out, _ = run("verify", "hfun", "--res", "10", "--self-test-negative", "--out", str(report))
    assert code == 1
    assert "appendix  FAIL" in out
    assert "negative" in report.read_text()


def test_module_entry_point(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("A.B\n")
    proc = subprocess.run(
        [sys.executable, "-m", "l1bubble", "energy", str(p)], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "total       8.0" in proc.stdout


def test_centred_grid_avoids_endpoints():
    g = centred_grid(0.0, 1.0, 4)
    assert np.allclose(g, [0.125, 0.375, 0.625, 0.875])
