import csv
import io
import json
import math
import subprocess
import sys

import pytest

from jacobi_lt.cli import build_parser, main
from jacobi_lt.experiments import CSV_COLUMNS, load_report

SQRT5 = math.sqrt(5)


@pytest.fixture
def pert_file(tmp_path):
    path = tmp_path / "pert.json"
    path.write_text(json.dumps({"offset": 0, "da": [[0, 0]], "db": [[1, 0]], "dc": [[0, 0]]}))
    return path


@pytest.fixture
def config_file(tmp_path):
    cfg = {
        "seed": 3,
        "trials": 2,
        "support_width": 2,
        "magnitude": 1.0,
        "coefficient_model": "complex-general",
        "p_grid": [1.0, 2.0],
        "tau_grid": [0.5],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_spectrum_csv(pert_file, capsys):
    assert main(["spectrum", str(pert_file)]) == 0
    (row,) = rows(capsys.readouterr().out)
    assert list(row) == list(CSV_COLUMNS)
    assert float(row["re_lambda"]) == pytest.approx(SQRT5, abs=1e-10)
    assert row["multiplicity"] == "1" and row["provenance"] == "determinant-zero"


def test_spectrum_json_to_dir(pert_file, tmp_path):
    out = tmp_path / "out"
    assert main(["spectrum", str(pert_file), "--format", "json", "--out", str(out), "--band-gap", "0.2"]) == 0
    (row,) = json.loads((out / "spectrum.json").read_text())
    assert row["re_lambda"] == pytest.approx(SQRT5, abs=1e-10)


def test_spectrum_gap_filters(pert_file, capsys):
    # sqrt5 - 2 < 0.3
    main(["spectrum", str(pert_file), "--band-gap", "0.3"])
    assert rows(capsys.readouterr().out) == []


def test_detscan(pert_file, capsys):
    args = ["detscan", str(pert_file), "--re-min", "2.5", "--re-max", "3", "--n-re", "2", "--im-min", "0", "--im-max", "0", "--n-im", "1"]
    assert main(args) == 0
    out = rows(capsys.readouterr().out)
    assert len(out) == 2
    assert float(out[1]["abs_g"]) == pytest.approx(1 - 1 / SQRT5, rel=1e-12)


def test_detscan_skips_band(pert_file, capsys):
    main(["detscan", str(pert_file), "--re-min", "-1", "--re-max", "1", "--n-re", "3", "--im-min", "0", "--im-max", "1", "--n-im", "2"])
    out = rows(capsys.readouterr().out)
    assert len(out) == 3 and all(float(r["im_lambda"]) == 1.0 for r in out)


def test_norms(pert_file, capsys):
    assert main(["norms", "--lam", "3", "--p", "1", "2", "--perturbation", str(pert_file), "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    v = {r["p"]: r["value"] for r in out if r["quantity"] == "v_lambda"}
    assert v[1.0] == pytest.approx(2 * math.pi / SQRT5, rel=1e-9)
    s = [r for r in out if r["quantity"] == "schatten"]
    assert [r["value"] for r in s] == pytest.approx([1.0, 1.0], rel=1e-12)
    assert [r["d_norm"] for r in s] == pytest.approx([1.0, 1.0], rel=1e-12)


def test_verify_subset(capsys):
    assert main(["verify", "--criteria", "1", "9"]) == 0
    out = capsys.readouterr().out
    assert "2/2 suites passed" in out


def test_ensemble(config_file, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["ensemble", "--config", str(config_file), "--out", str(out), "--seed", "5"]) == 0
    report = load_report(out / "report.json")
    assert report.config.seed == 5 and len(report.records) == 2
    header = (out / "eigenvalues.csv").read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)
    assert "2 trials, 0 failures" in capsys.readouterr().out


def test_ensemble_bad_config(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"seed": 1, "trials": 0}))
    with pytest.raises(SystemExit):
        main(["ensemble", "--config", str(path), "--out", str(tmp_path / "x")])


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["verify", "--seed", "-1"],
        ["verify", "--criteria", "11"],
        ["ensemble", "--config", "c.json", "--out", "o", "--threads", "0"],
        ["spectrum", "p.json", "--format", "xml"],
        ["norms", "--lam", "abc"],
    ],
)
def test_parser_rejects(argv):
    with pytest.raises(SystemExit):
        build_parser().parse_args(argv)


def test_missing_file(tmp_path):
    with pytest.raises(SystemExit):
        main(["spectrum", str(tmp_path / "absent.json")])


def test_module_entry_point(pert_file):
    proc = subprocess.run([sys.executable, "-m", "jacobi_lt", "spectrum", str(pert_file)], capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("trial,re_lambda")
