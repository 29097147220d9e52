"""Empirical constants from a seeded random ensemble.

Runs the experiment described in ``ensemble.json`` and prints, for every
functional, the largest observed ratio of eigenvalue sum to ``||d||_p^p``
together with the per-trial invariant checks.  The same run is available
from the command line::

    jacobi-lt ensemble --config demos/ensemble.json --out run/ --threads 4
"""
import json
from pathlib import Path

from jacobi_lt import ExperimentConfig, run_experiment

config = ExperimentConfig.from_json(json.loads((Path(__file__).parent / "ensemble.json").read_text()))
report = run_experiment(config, threads=4)

n_eigs = sum(len(r.spectrum) for r in report.records)
print(f"{config.trials} trials, {n_eigs} eigenvalues, {report.failures} failed trials")
print(f"{'functional':<34} {'constant':>12} {'trial':>6}")
for agg in report.aggregates:
    label = f"{agg.kind} p={agg.p:g}" + (f" tau={agg.tau:g}" if agg.tau is not None else "") + (f" theta={agg.theta:.3f}" if agg.theta is not None else "")
    const = "-" if agg.constant is None else f"{agg.constant:.4e}"
    print(f"{label:<34} {const:>12} {str(agg.argmax_trial):>6}")
print("checks:", ", ".join(f"{k}={'ok' if v else 'FAILED'}" for k, v in report.suites.items()))
