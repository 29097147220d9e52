"""Command-line entry point ``jacobi-lt``.

Subcommands: ``spectrum``, ``detscan``, ``verify``, ``ensemble``, ``norms``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import checks
from .detfun import DetContext, perturbation_determinant
from .experiments import (
    ExperimentConfig,
    TrialRecord,
    dumps_report,
    eigenvalue_csv,
    eigenvalue_rows,
    run_experiment,
)
from .linalg import schatten_norm
from .operator import PerturbationSpec, d_sequence, delta_block, lp_norm
from .resolvent import BAND_CUTOFF, dist_to_band, v_lambda_norm
from .zeros import discrete_spectrum


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(f"error: cannot read {path}: {exc}")


def _load_pert(path: str) -> PerturbationSpec:
    try:
        return PerturbationSpec.from_json(_load_json(path))
    except ValueError as exc:
        raise SystemExit(f"error: {path}: {exc}")


def _table_text(rows: list[dict], columns, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def _emit(text: str, out: str | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    target.mkdir(parents=True, exist_ok=True)
    (target / name).write_text(text)


def cmd_spectrum(args) -> int:
    pert = _load_pert(args.perturbation)
    spectrum = discrete_spectrum(pert, p=args.p, band_gap=args.band_gap, tol=args.tol)
    rec = TrialRecord(0, "", pert, spectrum)
    if args.format == "csv":
        text = eigenvalue_csv([rec])
    else:
        text = _table_text(eigenvalue_rows([rec]), (), "json")
    _emit(text, args.out, f"spectrum.{args.format}")
    return 0


def cmd_detscan(args) -> int:
    pert = _load_pert(args.perturbation)
    ctx = DetContext.for_p(pert, args.p)
    re = np.linspace(args.re_min, args.re_max, args.n_re)
    im = np.linspace(args.im_min, args.im_max, args.n_im)
    rows = []
    for y in im:
        for x in re:
            lam = complex(x, y)
            if dist_to_band(lam) <= BAND_CUTOFF:
                continue  # g is undefined on the band
            g = perturbation_determinant(ctx, lam)
            rows.append({"re_lambda": float(x), "im_lambda": float(y), "abs_g": abs(g), "log_abs_g": math.log(abs(g)) if g else None})
    _emit(_table_text(rows, ("re_lambda", "im_lambda", "abs_g", "log_abs_g"), args.format), args.out, f"detscan.{args.format}")
    return 0


def cmd_norms(args) -> int:
    rows = []
    lams = args.lam or [3.0, 2.5j, 2.1 + 0.1j, -2.0 - 0.5j]
    for lam in lams:
        for p in args.p:
            if p < 1:
                continue
            rows.append({"quantity": "v_lambda", "lambda_re": lam.real, "lambda_im": lam.imag, "p": p, "value": v_lambda_norm(lam, p), "d_norm": ""})
    if args.perturbation:
        pert = _load_pert(args.perturbation)
        _, block = delta_block(pert)
        d = d_sequence(pert)
        for p in args.p:
            rows.append(
                {
                    "quantity": "schatten",
                    "lambda_re": "",
                    "lambda_im": "",
                    "p": p,
                    "value": schatten_norm(block, p) if np.any(block) else 0.0,
                    "d_norm": lp_norm(d, p) if p >= 1 else "",
                }
            )
    cols = ("quantity", "lambda_re", "lambda_im", "p", "value", "d_norm")
    _emit(_table_text(rows, cols, args.format), args.out, f"norms.{args.format}")
    return 0


def cmd_verify(args) -> int:
    criteria = args.criteria or None
    results = checks.run_checks(criteria, seed=args.seed, report=print)
    failed = [r for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed")
    return 1 if failed else 0


def cmd_ensemble(args) -> int:
    obj = _load_json(args.config)
    if args.seed is not None:
        obj["seed"] = args.seed
    if args.band_gap is not None:
        obj["band_gap"] = args.band_gap
    try:
        config = ExperimentConfig.from_json(obj)
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"error: invalid config: {exc}")
    report = run_experiment(config, threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps_report(report))
    (out / "eigenvalues.csv").write_text(eigenvalue_csv(report.records))
    print(f"{config.trials} trials, {report.failures} failures; wrote {out / 'report.json'} and {out / 'eigenvalues.csv'}")
    for name, ok in report.suites.items():
        print(f"  {name}: {'ok' if ok else 'FAILED'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jacobi-lt", description="Discrete spectra and eigenvalue sums of complex Jacobi operators.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, fmt=True, gap=False):
        p.add_argument("--out", help="directory for output files (default: stdout)")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        if gap:
            p.add_argument("--band-gap", type=float, default=0.05, help="minimal distance of reported eigenvalues to [-2, 2]")

    p = sub.add_parser("spectrum", help="discrete spectrum of one perturbation file")
    p.add_argument("perturbation", help="JSON perturbation file")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-7)
    common(p, gap=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("detscan", help="|g(lambda)| on a rectangular grid")
    p.add_argument("perturbation")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--re-min", type=float, default=-4.0)
    p.add_argument("--re-max", type=float, default=4.0)
    p.add_argument("--im-min", type=float, default=-3.0)
    p.add_argument("--im-max", type=float, default=3.0)
    p.add_argument("--n-re", type=_positive_int, default=81)
    p.add_argument("--n-im", type=_positive_int, default=61)
    common(p)
    p.set_defaults(func=cmd_detscan)

    p = sub.add_parser("verify", help="run the verification suites; exit code 1 on any failure")
    p.add_argument("--seed", type=_u64, default=checks.BASE_SEED)
    p.add_argument("--criteria", type=int, nargs="*", choices=sorted(checks.SUITES))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ensemble", help="run a seeded experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=_u64)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--band-gap", type=float)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("norms", help="resolvent symbol norms and Schatten norms")
    p.add_argument("--lam", type=_complex, nargs="*")
    p.add_argument("--p", type=float, nargs="+", default=[1.0, 1.5, 2.0])
    p.add_argument("--perturbation")
    common(p)
    p.set_defaults(func=cmd_norms)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
