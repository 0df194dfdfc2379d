import csv
import io
import json

import numpy as np
import pytest

from hyperbound.cli import ConfigError, RunConfig, dump_json, main, parse_config_text

PT_CONFIG = """\
# Poschl-Teller well, lambda = 3
M = 2
f.2 = -6
kappa.max = 3
"""


@pytest.fixture
def pt_file(tmp_path):
    path = tmp_path / "pt.cfg"
    path.write_text(PT_CONFIG)
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_config_text():
    raw = parse_config_text("a = 0.5\n  # note\n\nf.2 = -2  # depth\neps = 0.05, 0.025\n")
    assert raw == {"a": "0.5", "f.2": "-2", "eps": "0.05, 0.025"}


def test_parse_rejects_garbage():
    with pytest.raises(ConfigError):
        parse_config_text("just words\n")


@pytest.mark.parametrize(
    "raw",
    [
        {"f.2": "-2", "tol.root": "0"},
        {"f.2": "-2", "eps": "0.01, 0.02"},
        {"f.2": "-2", "eps": "0.9"},
        {"f.2": "-2", "bogus": "1"},
        {"f.2": "x"},
        {"f.2": "-2", "output.format": "xml"},
    ],
)
def test_invalid_mappings(raw):
    with pytest.raises((ConfigError, ValueError)):
        RunConfig.from_mapping(raw)


def test_spectrum_table(capsys, pt_file):
    code, out, _ = run_cli(capsys, "spectrum", "--config", pt_file)
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 4
    energies = [float(line.split()[1]) for line in lines[2:]]
    assert energies == pytest.approx([-4.0, -1.0], abs=1e-8)


def test_spectrum_json_round_trip_and_determinism(capsys, pt_file):
    code, first, _ = run_cli(capsys, "spectrum", "--config", pt_file, "--format", "json")
    assert code == 0
    data = json.loads(first)
    assert set(data) == {"config", "results"}
    assert set(data["results"][0]) == {"kappa", "energy", "mixing_M", "mixing_N", "residual"}
    assert dump_json(json.loads(first)) == first
    _, second, _ = run_cli(capsys, "spectrum", "--config", pt_file, "--format", "json", "--set", "threads=1")
    assert json.loads(second)["results"] == data["results"]


def test_flags_override_file(capsys, pt_file):
    code, out, _ = run_cli(
        capsys, "spectrum", "--config", pt_file, "--kappa-min", "1.5", "--format", "json"
    )
    assert code == 0
    results = json.loads(out)["results"]
    assert [r["kappa"] for r in results] == pytest.approx([2.0], abs=1e-8)


def test_couplings_from_flags(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "-f", "2=-2", "--eps", "0.05,0.025", "--format", "json")
    assert code == 0
    assert [r["energy"] for r in json.loads(out)["results"]] == pytest.approx([-1.0], abs=1e-8)


def test_csv_precision(capsys, pt_file, tmp_path):
    out_path = tmp_path / "spec.csv"
    code, out, _ = run_cli(capsys, "spectrum", "--config", pt_file, "--format", "csv", "--out", str(out_path))
    assert code == 0 and out == ""
    rows = list(csv.reader(io.StringIO(out_path.read_text())))
    assert rows[0] == ["kappa", "energy", "mixing_M", "mixing_N", "residual"]
    kappa = rows[1][0]
    assert float(kappa) == pytest.approx(2.0, abs=1e-8)
    assert len(kappa.replace("-", "").replace(".", "").lstrip("0").split("e")[0]) == 17


def test_no_bound_states_is_success(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "-f", "2=2", "--grid", "32", "--eps", "0.05", "--format", "json")
    assert code == 0
    assert json.loads(out)["results"] == []


def test_validate_scarf(capsys):
    code, out, _ = run_cli(capsys, "validate", "-g", "2=1")
    assert code == 0
    assert "PASS" in out


def test_validate_mismatch_exit(capsys):
    # an impossible bound forces a mismatch
    code, out, _ = run_cli(capsys, "validate", "-g", "2=1", "--set", "validate.bound=1e-30")
    assert code == 1
    assert "FAIL" in out


def test_qmatrix_layout(capsys):
    code, out, _ = run_cli(capsys, "qmatrix", "-g", "2=1.5", "--set", "kappa=1", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert (data["D"], data["d0"]) == (2, 2)
    rows = data["rows"]
    assert [r["ket"] for r in rows[:5]] == ["-", "(0,0,1)", "(1,0,0)", "(1,0,1)", "(2,0,0)"]
    # rows of Xi_4, Xi_5, Xi_8 as (B | A) at kappa = 1: a_j = -j (2 + j), b_j = (1 + j)(2 + j)
    assert rows[2]["B"] == [0.0, 1.5] and rows[2]["A"] == [-3.0, 0.0]
    assert rows[3]["B"] == [0.0, 2.0] and rows[3]["A"] == [1.5, -8.0]
    assert rows[4]["B"] == [12.0, 1.5] and rows[4]["A"] == [-15.0, 0.0]


def test_qmatrix_table_header(capsys):
    code, out, _ = run_cli(capsys, "qmatrix", "-g", "2=1", "--set", "p=1")
    assert code == 0
    assert out.startswith("# Q(kappa=1")
    assert "D=2, d0=1" in out.splitlines()[0]


def test_wavefunction_csv(capsys):
    code, out, _ = run_cli(capsys, "wavefunction", "-f", "2=-2", "--eps", "0.05,0.025", "--set", "x=-2:2:9")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "psi", "dpsi"]
    xs = np.array([float(r[0]) for r in rows[1:]])
    psi = np.array([float(r[1]) for r in rows[1:]])
    np.testing.assert_allclose(xs, np.linspace(-2, 2, 9))
    # ground state of lambda = 2 is 1/cosh
    np.testing.assert_allclose(psi / psi[4], 1 / np.cosh(xs), rtol=1e-7)


def test_terminate_scan(capsys):
    code, out, _ = run_cli(
        capsys, "terminate-scan", "-f", "2=-2", "--set", "scan.kappa=0.1:3:30", "--set", "K=1", "--format", "json"
    )
    assert code == 0
    kappas = [p["kappa"] for p in json.loads(out)["points"]]
    assert any(abs(k - 1.0) < 1e-8 for k in kappas)


def test_config_error_exit(capsys):
    code, _, err = run_cli(capsys, "spectrum", "-f", "2=-2", "--set", "nonsense=1")
    assert code == 2
    assert "config error" in err


def test_missing_config_file(capsys, tmp_path):
    code, _, _ = run_cli(capsys, "spectrum", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2


def test_unknown_command(capsys):
    code, _, _ = run_cli(capsys, "frobnicate")
    assert code == 2


def test_solver_error_exit(capsys):
    # g_1 cannot be represented in the symmetric basis
    code, _, err = run_cli(capsys, "spectrum", "-g", "1=0.5", "-g", "2=1")
    assert code == 3
    assert "solver error" in err
