"""Acceptance criteria 1-10, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible even under
pytest's output capture).  Run standalone with
``python tests/test_acceptance.py`` for just the summary lines.
"""
import json
import subprocess
import sys
import time

import pytest

from jacobi_lt import checks

VERIFY_LIMIT = 600.0

ENSEMBLE_CONFIG = {
    "seed": 424242,
    "trials": 16,
    "support_width": 5,
    "magnitude": 2.0,
    "coefficient_model": "complex-general",
    "p_grid": [1.0, 1.5, 2.0, 3.0],
    "tau_grid": [0.25, 0.5, 0.75],
}


def _say(capsys, line: str) -> None:
    if capsys is None:
        print(line)
        return
    with capsys.disabled():
        print("\n" + line)


def _jlt(*args, timeout=900):
    return subprocess.run([sys.executable, "-m", "jacobi_lt", *args], capture_output=True, text=True, timeout=timeout)


@pytest.mark.parametrize("criterion", range(1, 10))
def test_criterion(criterion, capsys):
    res = checks.run_suite(criterion)
    _say(capsys, res.line())
    assert res.passed, res.detail
    assert res.within_limit, f"{res.elapsed:.1f} s exceeds {res.limit} s"


def reproducibility(tmp_path, capsys=None) -> None:
    cfg = tmp_path / "ensemble.json"
    cfg.write_text(json.dumps(ENSEMBLE_CONFIG))
    outputs = {}
    for threads in (1, 8):
        out = tmp_path / f"threads{threads}"
        proc = _jlt("ensemble", "--config", str(cfg), "--out", str(out), "--threads", str(threads))
        assert proc.returncode == 0, proc.stderr
        outputs[threads] = ((out / "report.json").read_bytes(), (out / "eigenvalues.csv").read_bytes())
    identical = outputs[1] == outputs[8]
    n_eigs = outputs[1][1].count(b"\n") - 1

    t0 = time.perf_counter()
    proc = _jlt("verify", timeout=2 * VERIFY_LIMIT)
    elapsed = time.perf_counter() - t0
    verified = proc.returncode == 0
    ok = identical and verified and elapsed < VERIFY_LIMIT
    detail = (
        f"threads 1 vs 8 byte-identical JSON/CSV: {identical} ({ENSEMBLE_CONFIG['trials']} trials, {n_eigs} eigenvalues); "
        f"full verify exit {proc.returncode}"
    )
    _say(capsys, f"[{'PASS' if ok else 'FAIL'}] criterion 10 reproducibility: {detail} ({elapsed:.2f} s < {VERIFY_LIMIT:g} s)")
    assert identical, "report bytes depend on the thread count"
    assert verified, proc.stdout + proc.stderr
    assert elapsed < VERIFY_LIMIT


def test_criterion_10(tmp_path, capsys):
    reproducibility(tmp_path, capsys)


if __name__ == "__main__":
    import pathlib
    import tempfile

    failed = 0
    for k in range(1, 10):
        res = checks.run_suite(k)
        print(res.line())
        failed += not res.ok
    with tempfile.TemporaryDirectory() as tmp:
        try:
            reproducibility(pathlib.Path(tmp))
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
