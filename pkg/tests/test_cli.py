import json
import math
from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from o2sim.cli import main, write_pgm
from o2sim.molecule import default_constants, fine_structure_energies
from o2sim.scan import (
    SCAN_COLUMNS,
    ScanError,
    ScanSpec,
    format_csv,
    format_value,
    parse_values,
    run_scan,
    to_picoseconds,
)


def _csv(text):
    lines = text.strip().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def _read_pgm(path):
    data = path.read_bytes()
    magic, dims, maxval, body = data.split(b"\n", 3)
    w, h = map(int, dims.split())
    return magic, int(maxval), np.frombuffer(body, dtype=np.uint8).reshape(h, w)


# -- value parsing ---------------------------------------------------------------------------

def test_parse_list_and_range():
    assert parse_values("1,2.5,3") == [Decimal("1"), Decimal("2.5"), Decimal("3")]
    b = parse_values("0:1:0.05")
    assert len(b) == 21 and b[-1] == Decimal("1.00") and b[7] == Decimal("0.35")
    assert parse_values("3:3:1") == [Decimal("3")]
    assert parse_values("0:1:0.3") == [Decimal("0"), Decimal("0.3"), Decimal("0.6"), Decimal("0.9")]


def test_parse_degrees():
    (v,) = parse_values("90deg", "angle")
    assert float(v) == pytest.approx(math.pi / 2, rel=1e-15)
    assert len(parse_values("0deg:180deg:5deg", "angle")) == 37


@pytest.mark.parametrize("text", ["", "a,b", "1:2", "0:1:0", "1:0:0.1", "nan", "1:2:-1"])
def test_parse_errors(text):
    with pytest.raises(ScanError):
        parse_values(text)


def test_picoseconds():
    assert to_picoseconds(parse_values("0:0.03:0.01")) == [0, 10, 20, 30]
    with pytest.raises(ScanError):
        to_picoseconds([Decimal("0.0005")])


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_roundtrip(x):
    assert float(format_value(x)) == x


def test_format_rejects_non_finite():
    with pytest.raises(ValueError):
        format_value(float("inf"))


# -- scan specs --------------------------------------------------------------------------------

def test_spec_validation():
    with pytest.raises(ScanError):
        ScanSpec((), (0.0,), (0,))
    with pytest.raises(ScanError):
        ScanSpec((0,), (0.0,), (0,))
    with pytest.raises(ScanError):
        ScanSpec((5,), (0.0,), (1.5,))
    with pytest.raises(ScanError):
        ScanSpec((5,), (0.0,), (0,), pressure=-1.0)
    with pytest.raises(ScanError):
        ScanSpec((5,), (0.0,), (0,), outputs=("n", "bogus"))
    with pytest.raises(ScanError):
        ScanSpec((60,), (0.0,), (0,), grid=(32, 64))


def test_row_order_and_columns():
    spec = ScanSpec((3, 5), (0.0, 1.0), (0, 100), (0.0, 1.0), grid=(8, 16))
    rows = run_scan(spec)
    keys = [(r.n, r.b_tesla, r.t_ns, r.theta_p) for r in rows]
    expect = [(n, b, t / 1000, th) for n in (3, 5) for b in (0.0, 1.0) for t in (0, 100) for th in (0.0, 1.0)]
    assert keys == expect
    header, body = _csv(format_csv(rows))
    assert tuple(header) == SCAN_COLUMNS
    assert len(body) == 16


def test_column_subset_keeps_canonical_order():
    spec = ScanSpec((3,), (0.0,), (0,), outputs=("w_minus", "n"), grid=(8, 16))
    assert spec.columns == ("n", "w_minus")


def test_workers_give_identical_output():
    spec = ScanSpec((7, 9), (0.0, 0.5, 1.0), (0, 400), grid=(12, 24))
    assert format_csv(run_scan(spec, 1)) == format_csv(run_scan(spec, 3))


# -- levels ----------------------------------------------------------------------------------------

def test_levels_n1(capsys):
    assert main(["levels", "--n", "1"]) == 0
    header, rows = _csv(capsys.readouterr().out)
    assert header == ["n", "J_label", "m_j", "energy_ghz"]
    assert len(rows) == 9
    by_j = {}
    for _, j, _, e in rows:
        by_j.setdefault(j, set()).add(e)
    assert all(len(v) == 1 for v in by_j.values())


def test_levels_count_and_zero_field(tmp_path):
    out = tmp_path / "l.csv"
    assert main(["levels", "--n", "59", "--b-field", "0.32", "--out", str(out)]) == 0
    assert len(_csv(out.read_text())[1]) == 357
    assert main(["levels", "--n", "59", "--out", str(out)]) == 0
    fs = fine_structure_energies(59)
    for _, j, _, e in _csv(out.read_text())[1]:
        assert float(e) == fs[int(j)]


def test_levels_custom_constants(tmp_path, capsys):
    data = default_constants().to_dict()
    data["gamma_ghz"] = 0.0
    data["lambda_ghz"] = 0.0
    path = tmp_path / "c.json"
    path.write_text(json.dumps(data))
    assert main(["levels", "--n", "2", "--constants", str(path)]) == 0
    _, rows = _csv(capsys.readouterr().out)
    assert all(float(r[3]) == 0.0 for r in rows)


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert main(["levels", "--n", "1", "--constants", str(bad)]) == 3
    assert main(["levels", "--n", "0"]) == 2
    assert main(["levels", "--n", "1", "--out", str(tmp_path / "no" / "such" / "dir.csv")]) == 4
    assert main(["scan", "--n", "5", "--b-field", "1:0:0.1"]) == 2
    assert main(["reproduce", "fig9"]) == 2
    err = capsys.readouterr().err
    assert "fig2, fig3b, fig3c, fig4a, fig4b" in err
    with pytest.raises(SystemExit) as exc:
        main(["levels"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["distribution", "--n", "3", "--grid", "big"])
    assert exc.value.code == 2


# -- distribution ------------------------------------------------------------------------------------

def test_distribution_csv_and_images(tmp_path):
    csv_path = tmp_path / "rho.csv"
    img_z = tmp_path / "z.pgm"
    img_x = tmp_path / "x.pgm"
    rc = main(["distribution", "--n", "9", "--b-field", "0.5", "--time", "0.3", "--grid", "12x24",
               "--out", str(csv_path), "--image", f"z:{img_z}", "--image", f"x:{img_x}"])
    assert rc == 0
    header, rows = _csv(csv_path.read_text())
    assert header == ["theta", "phi", "rho"]
    assert len(rows) == 12 * 24
    for path in (img_z, img_x):
        magic, maxval, img = _read_pgm(path)
        assert magic == b"P5" and maxval == 255
        assert img.shape == (201, 201) and img.max() == 255


def test_distribution_grid_too_coarse(capsys):
    assert main(["distribution", "--n", "30", "--grid", "8x16"]) == 2


def test_distribution_unwritable_image(tmp_path):
    rc = main(["distribution", "--n", "3", "--grid", "8x16", "--out", str(tmp_path / "r.csv"),
               "--image", f"z:{tmp_path / 'missing' / 'z.pgm'}"])
    assert rc == 4


def test_write_pgm_linear_scale(tmp_path):
    path = tmp_path / "a.pgm"
    write_pgm(path, np.array([[0.0, 1.0], [2.0, 4.0]]))
    _, _, img = _read_pgm(path)
    assert img.tolist() == [[0, 64], [128, 255]]


# -- scan and raman ------------------------------------------------------------------------------------

def test_scan_singleton(capsys):
    assert main(["scan", "--n", "5", "--b-field", "0.5", "--time", "0.2", "--grid", "8x16"]) == 0
    header, rows = _csv(capsys.readouterr().out)
    assert tuple(header) == SCAN_COLUMNS and len(rows) == 1


def test_scan_theta_degrees_and_columns(capsys):
    rc = main(["scan", "--n", "5", "--theta-p", "0deg,90deg", "--columns", "theta_p,probe_signal,n",
               "--grid", "8x16"])
    assert rc == 0
    header, rows = _csv(capsys.readouterr().out)
    assert header == ["n", "theta_p", "probe_signal"]
    assert float(rows[1][1]) == pytest.approx(math.pi / 2)


def test_scan_cli_deterministic_across_workers(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["scan", "--n", "4,6", "--b-field", "0:1:0.5", "--time", "0.1,0.5", "--grid", "10x20"]
    assert main(args + ["--workers", "1", "--out", str(a)]) == 0
    assert main(args + ["--workers", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_raman_subcommand(capsys):
    assert main(["raman", "--n", "11", "--b-field", "0:0.2:0.1", "--time", "0.5", "--grid", "14x28"]) == 0
    header, rows = _csv(capsys.readouterr().out)
    assert header == ["n", "b_tesla", "t_ns", "w_plus", "w_minus"]
    assert len(rows) == 3
    assert float(rows[0][4]) == pytest.approx(0.0, abs=1e-12)


# -- reproduce -------------------------------------------------------------------------------------------

def test_reproduce_fig3c(tmp_path, capsys):
    assert main(["reproduce", "fig3c", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "fig3c_summary.json").read_text())
    assert summary["figure"] == "fig3c"
    assert set(summary["checks"][0]) == {"name", "pass", "detail"}
    header, rows = _csv((tmp_path / "fig3c_probe.csv").read_text())
    assert len(rows) == 37 and "probe_signal" in header
    assert "fig3c" in capsys.readouterr().out
