import json

import numpy as np
import pytest

import qlevy
from qlevy.cli import main, parse_grid, parse_hgrid
from qlevy.fixtures import packaged_path, write_packaged


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("fixtures")
    write_packaged(d)
    return d


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_packaged_data_ships_with_wheel():
    assert packaged_path("fz2.json").exists()
    assert packaged_path("fz2_bad_counit.json").exists()


def test_parse_grid_and_hgrid():
    assert parse_grid("0:1:0.5") == [0.0, 0.5, 1.0]
    assert parse_grid("0.25,0.5") == [0.25, 0.5]
    assert parse_hgrid("2^-2..2^-4") == [0.25, 0.125, 0.0625]
    assert parse_hgrid("1/4,1/8") == [0.25, 0.125]


def test_validate_packaged_passes(capsys, data_dir):
    code, out = run(capsys, "validate", "--algebra", str(data_dir / "fs3.json"))
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] is True
    assert all(row["value"] <= 1e-12 for row in payload["rows"])


def test_validate_corrupted_fails_with_code_3(capsys, data_dir):
    code, out = run(capsys, "validate", "--algebra",
                    str(data_dir / "fz2_bad_counit.json"))
    assert code == 3
    payload = json.loads(out)
    assert payload["passed"] is False


def test_validate_missing_file_is_io_error(capsys, data_dir):
    code, out = run(capsys, "validate", "--algebra", str(data_dir / "nope.json"))
    assert code == 4
    assert json.loads(out)["error"]["code"] == "IO"


def test_conv_exp_closed_form(capsys, data_dir):
    code, out = run(capsys, "conv-exp",
                    "--algebra", str(data_dir / "fz2.json"),
                    "--gamma", str(data_dir / "fz2_gamma.json"),
                    "--t", "1.0")
    assert code == 0
    payload = json.loads(out)
    assert payload["coeffs"][1][0] == pytest.approx((1 - np.exp(-2)) / 2, abs=1e-12)


def test_conv_exp_csv_format(capsys, data_dir):
    code, out = run(capsys, "conv-exp",
                    "--algebra", str(data_dir / "fz2.json"),
                    "--gamma", str(data_dir / "fz2_gamma.json"),
                    "--t", "0.5", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "basis,re,im"
    assert len(lines) == 3


def test_schurmann_emits_triple(capsys, data_dir):
    code, out = run(capsys, "schurmann",
                    "--algebra", str(data_dir / "fz2.json"),
                    "--gamma", str(data_dir / "fz2_gamma.json"))
    assert code == 0
    payload = json.loads(out)
    assert payload["noise_dim"] == 1
    assert payload["xi"] == [[1.0, 0.0]]
    blocks = np.asarray(payload["structure_map"]["blocks"])
    assert blocks.shape == (2, 2, 2, 2)


def test_classify_structure_map(capsys, data_dir, tmp_path):
    B, gamma = qlevy.load_descriptor(data_dir / "fz2.json"), None
    from qlevy.cli import load_functional
    gamma = load_functional(data_dir / "fz2_gamma.json")
    triple = qlevy.gns_triple(B, gamma)
    phi = qlevy.assemble_structure_map(B, triple)
    phi_path = tmp_path / "phi.json"
    phi_path.write_text(json.dumps(phi.to_dict()))
    code, out = run(capsys, "classify",
                    "--algebra", str(data_dir / "fz2.json"),
                    "--phi", str(phi_path))
    assert code == 0
    assert json.loads(out)["class"] == "star_homomorphic"


def test_evolve_grid_csv(capsys, data_dir):
    code, out = run(capsys, "evolve",
                    "--spec", str(data_dir / "fz2_spec.json"),
                    "--grid", "0:1:0.5", "--b", "d1", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,re,im"
    rows = [line.split(",") for line in lines[1:]]
    assert float(rows[2][1]) == pytest.approx((1 - np.exp(-2)) / 2, abs=1e-12)


def test_evolve_negative_time_precondition(capsys, data_dir):
    code, out = run(capsys, "evolve",
                    "--spec", str(data_dir / "fz2_spec.json"),
                    "--t", "-1", "--b", "d1")
    assert code == 2
    assert json.loads(out)["error"]["code"] == "PRECONDITION"


def test_verify_cocycle_passes(capsys, data_dir):
    code, out = run(capsys, "verify-cocycle",
                    "--spec", str(data_dir / "cz2_spec.json"),
                    "--s", "0.4", "--t", "0.6")
    assert code == 0
    assert json.loads(out)["residual"] <= 1e-10


def test_cp_witness(capsys, data_dir):
    code, out = run(capsys, "cp-witness",
                    "--spec", str(data_dir / "fz2_spec.json"),
                    "--t", "1.0", "--random", "3", "--seed", "7")
    assert code == 0
    assert json.loads(out)["min_eig"] >= -1e-10


def test_walk_dump_and_value(capsys, data_dir):
    code, out = run(capsys, "walk",
                    "--spec", str(data_dir / "fz2_spec.json"),
                    "--h", "0.25", "--steps", "4", "--b", "d1")
    assert code == 0
    payload = json.loads(out)
    assert payload["unitarity_defect"] <= 1e-13
    expected = 0.5 * (1 - (1 - 0.5) ** 4)
    assert payload["value"][0] == pytest.approx(expected, abs=1e-12)


def test_walk_converge_csv_nonincreasing(capsys, data_dir):
    code, out = run(capsys, "walk-converge",
                    "--spec", str(data_dir / "fz2_spec.json"),
                    "--T", "1", "--hgrid", "2^-2..2^-7",
                    "--b", "d1", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "h,err,ratio"
    errs = [float(line.split(",")[1]) for line in lines[1:]]
    assert all(b <= a for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 0.15 * errs[0]


def test_levy_verify(capsys, data_dir):
    code, out = run(capsys, "levy-verify",
                    "--spec", str(data_dir / "fz2_spec.json"),
                    "--N", "4", "--h", "0.25")
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] is True


def test_states_csv(capsys, data_dir):
    code, out = run(capsys, "states",
                    "--algebra", str(data_dir / "fz3.json"),
                    "--gamma", str(data_dir / "fz3_gamma.json"),
                    "--grid", "0:1:0.1", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("t,")
    assert "gram_min_eig" in lines[0]
    assert len(lines) == 12


def test_determinism_byte_identical(capsys, data_dir):
    args = ("walk-converge", "--spec", str(data_dir / "fz2_spec.json"),
            "--hgrid", "2^-2..2^-5", "--b", "d1", "--format", "csv")
    _, out1 = run(capsys, *args)
    _, out2 = run(capsys, *args)
    assert out1 == out2
    args_json = ("schurmann", "--algebra", str(data_dir / "fz2.json"),
                 "--gamma", str(data_dir / "fz2_gamma.json"))
    _, j1 = run(capsys, *args_json)
    _, j2 = run(capsys, *args_json)
    assert j1 == j2


def test_empty_csv_has_header(capsys):
    from qlevy.cli import emit_report
    emit_report({"rows": [], "csv_header": ["h", "err", "ratio"]}, "csv", None)
    out = capsys.readouterr().out
    assert out == "h,err,ratio\n"


def test_output_file(tmp_path, capsys, data_dir):
    out_path = tmp_path / "report.csv"
    code, _ = run(capsys, "validate", "--algebra", str(data_dir / "fz2.json"),
                  "--format", "csv", "--out", str(out_path))
    assert code == 0
    text = out_path.read_text()
    assert text.splitlines()[0] == "residual,value,tol,pass"
