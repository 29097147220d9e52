"""Seeded ensembles, experiment runs and their persistence.

A run draws one perturbation per trial from an independent random substream
keyed by ``(seed, trial)``, computes its discrete spectrum and every
applicable functional, and records the per-trial invariant checks.  Results
are assembled in trial order, so the serialized report does not depend on
how many worker threads were used.
"""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .functionals import FunctionalSpec, Kind, empirical_constant, lt_functional
from .linalg import eigenvalues, operator_norm, schatten_norm
from .operator import PerturbationSpec, d_sequence, delta_block, factorize, lp_norm, truncate
from .zeros import Provenance, SpectralPoint, discrete_spectrum, match_spectra

__all__ = [
    "CoefficientModel",
    "ExperimentConfig",
    "FunctionalValue",
    "TrialRecord",
    "Aggregate",
    "LTReport",
    "ReportFormatError",
    "ReportVersionError",
    "generate_ensemble",
    "evaluate_trial",
    "aggregate",
    "run_experiment",
    "save_report",
    "load_report",
    "report_to_json",
    "report_from_json",
    "dumps_report",
    "eigenvalue_csv",
    "eigenvalue_rows",
    "write_eigenvalue_csv",
    "CSV_COLUMNS",
]

SCHEMA = "jacobi-lt-report"
SCHEMA_VERSION = 1
SELFADJOINT_FLOOR = 0.1
MATCH_TOL = 1e-4
CSV_COLUMNS = ("trial", "re_lambda", "im_lambda", "multiplicity", "dist", "disc", "z_re", "z_im", "provenance")


class CoefficientModel(str, enum.Enum):
    SELFADJOINT_REAL = "selfadjoint-real"
    COMPLEX_GENERAL = "complex-general"
    DIAGONAL_ONLY = "diagonal-only"


class ReportFormatError(ValueError):
    """The report file is not a well-formed report."""


class ReportVersionError(ReportFormatError):
    """The report was written with a different schema version."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of a seeded experiment.

    ``magnitude`` bounds the modulus of every drawn deviation.  For the
    ``selfadjoint-real`` model ``a_k = c_k`` are real and at least
    ``0.1``; ``diagonal-only`` perturbs ``b`` alone.  ``theta`` is the
    opening used for the sector functionals, and ``exploratory_tau0`` adds
    ``tau = 0`` variants of the ``main``/``l1`` sums (report only).
    """

    seed: int
    trials: int
    support_width: int
    magnitude: float
    coefficient_model: CoefficientModel
    p_grid: tuple
    tau_grid: tuple
    band_gap: float = 0.05
    truncation_size: int = 500
    theta: float = math.pi / 4
    exploratory_tau0: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coefficient_model", CoefficientModel(self.coefficient_model))
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        object.__setattr__(self, "tau_grid", tuple(float(t) for t in self.tau_grid))
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))
        for name in ("trials", "support_width", "truncation_size"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v <= 0:
                raise ValueError(f"{name} must be a positive integer, got {v}")
            object.__setattr__(self, name, int(v))
        if not (math.isfinite(self.magnitude) and self.magnitude >= 0):
            raise ValueError(f"magnitude must be a finite nonnegative number, got {self.magnitude}")
        if not self.p_grid or not self.tau_grid:
            raise ValueError("p_grid and tau_grid must be nonempty")
        if any(not (math.isfinite(p) and p >= 1) for p in self.p_grid):
            raise ValueError("p_grid entries must be finite and >= 1")
        if any(not 0 < t < 1 for t in self.tau_grid):
            raise ValueError("tau_grid entries must lie in (0, 1)")
        if not 0 < self.band_gap < 1:
            raise ValueError("band_gap must lie in (0, 1)")
        if self.truncation_size < 10 * (self.support_width + 2):
            raise ValueError("truncation_size must be at least 10 * (support_width + 2)")
        if not 0 <= self.theta < math.pi / 2:
            raise ValueError("theta must lie in [0, pi/2)")

    def to_json(self) -> dict:
        out = asdict(self)
        out["coefficient_model"] = self.coefficient_model.value
        out["p_grid"] = list(self.p_grid)
        out["tau_grid"] = list(self.tau_grid)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ValueError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    def functional_specs(self) -> list[FunctionalSpec]:
        """Every functional applicable to this configuration, in a fixed order."""
        specs = []
        for p in self.p_grid:
            for tau in self.tau_grid:
                if p > 1:
                    specs.append(FunctionalSpec(Kind.MAIN, p, tau))
                    specs.append(FunctionalSpec(Kind.BGK, p, tau))
                if p == 1:
                    specs.append(FunctionalSpec(Kind.L1, p, tau))
                if p >= 1.5:
                    specs.append(FunctionalSpec(Kind.THM4, p, tau))
            if self.exploratory_tau0:
                kind = Kind.MAIN if p > 1 else Kind.L1
                specs.append(FunctionalSpec(kind, p, 0.0, exploratory=True))
            if p >= 1.5:
                specs.append(FunctionalSpec(Kind.SECTOR_PLUS, p, theta=self.theta))
                specs.append(FunctionalSpec(Kind.SECTOR_MINUS, p, theta=self.theta))
            if self.coefficient_model is CoefficientModel.SELFADJOINT_REAL:
                specs.append(FunctionalSpec(Kind.HS, p))
        return specs


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _disk(rng, n, radius):
    r = radius * np.sqrt(rng.random(n))
    return r * np.exp(2j * math.pi * rng.random(n))


def _draw(config: ExperimentConfig, index: int) -> PerturbationSpec:
    rng = _trial_rng(config.seed, index)
    w, mag = config.support_width, config.magnitude
    model = config.coefficient_model
    if model is CoefficientModel.COMPLEX_GENERAL:
        return PerturbationSpec(0, _disk(rng, w, mag), _disk(rng, w, mag), _disk(rng, w, mag))
    if model is CoefficientModel.DIAGONAL_ONLY:
        zero = np.zeros(w)
        return PerturbationSpec(0, zero, _disk(rng, w, mag), zero)
    # a_k = c_k real, a_k >= floor, so a_k - 1 ranges over [max(-mag, floor - 1), mag].
    lo = max(-mag, SELFADJOINT_FLOOR - 1.0)
    off = lo + (mag - lo) * rng.random(w)
    b = mag * (2.0 * rng.random(w) - 1.0)
    return PerturbationSpec(0, off, b, off)


def generate_ensemble(config: ExperimentConfig) -> list[PerturbationSpec]:
    """One perturbation per trial; trial ``i`` depends only on ``(seed, i)``."""
    return [_draw(config, i) for i in range(config.trials)]


@dataclass(frozen=True)
class FunctionalValue:
    """One functional evaluated on one trial; ``ratio`` is ``None`` when ``||d||_p = 0``."""

    kind: str
    p: float
    tau: float | None
    theta: float | None
    exploratory: bool
    value: float
    norm_pp: float
    ratio: float | None

    @property
    def key(self) -> tuple:
        return (self.kind, self.p, self.tau, self.theta, self.exploratory)


@dataclass
class TrialRecord:
    index: int
    digest: str
    perturbation: PerturbationSpec
    spectrum: list = field(default_factory=list)
    d_norms: dict = field(default_factory=dict)
    functionals: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class Aggregate:
    """Ratios of one functional across the successful trials."""

    kind: str
    p: float
    tau: float | None
    theta: float | None
    exploratory: bool
    constant: float | None
    argmax_trial: int | None
    min_ratio: float | None
    count: int


@dataclass
class LTReport:
    config: ExperimentConfig
    records: list
    aggregates: list
    suites: dict
    failures: int
    timings: dict = field(default_factory=dict, compare=False)


def _digest(pert: PerturbationSpec) -> str:
    payload = json.dumps(pert.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def _trial_checks(config, pert, spectrum, margin) -> dict:
    checks = {}
    # Determinant zeros against eigenvalues of a finite section.
    n = config.truncation_size
    lo = pert.offset + pert.width // 2 - n // 2
    trunc = eigenvalues(truncate(pert, lo, lo + n - 1))
    checks["duality"] = match_spectra(spectrum, trunc, MATCH_TOL, config.band_gap, margin).ok
    checks["domination"] = all(sp.dist**2 <= sp.disc * (1 + 1e-12) for sp in spectrum)
    # Two-sided norm equivalence between J - J0 and the d-sequence.
    _, block = delta_block(pert)
    d = d_sequence(pert)
    ok = True
    for p in config.p_grid:
        s = schatten_norm(block, p) if np.any(block) else 0.0
        dn = lp_norm(d, p)
        ok &= 6.0 ** (-1.0 / p) * dn <= s * (1 + 1e-12) and s <= 3.0 * dn * (1 + 1e-12)
    checks["norm_equivalence"] = bool(ok)
    checks["u_bound"] = operator_norm(factorize(pert).u_matrix()) <= 3.0 + 1e-9
    if config.coefficient_model is CoefficientModel.SELFADJOINT_REAL:
        real = all(abs(e.imag) <= 1e-8 for e in trunc)
        rewrite = True
        for sp in spectrum:
            anchor = 2.0 if sp.lam.real > 0 else -2.0
            for p in config.p_grid:
                lhs = sp.dist**p / math.sqrt(sp.disc)
                rhs = 0.5 * abs(sp.lam.real - anchor) ** (p - 0.5)
                rewrite &= lhs <= rhs * (1 + 1e-12)
        checks["real_spectrum"] = bool(real)
        checks["selfadjoint_rewrite"] = bool(rewrite)
    return checks


def evaluate_trial(config: ExperimentConfig, index: int, pert: PerturbationSpec) -> TrialRecord:
    """Spectrum, functionals and invariant checks for one perturbation."""
    rec = TrialRecord(index, _digest(pert), pert)
    spectrum = discrete_spectrum(pert, band_gap=config.band_gap)
    margin = discrete_spectrum(pert, band_gap=0.8 * config.band_gap)
    d = d_sequence(pert)
    rec.spectrum = spectrum
    rec.d_norms = {p: lp_norm(d, p) for p in config.p_grid}
    for spec in config.functional_specs():
        value = lt_functional(spectrum, spec)
        norm_pp = rec.d_norms[spec.p] ** spec.p
        ratio = value / norm_pp if norm_pp > 0 else None
        rec.functionals.append(
            FunctionalValue(spec.kind.value, spec.p, spec.tau, spec.theta, spec.exploratory, value, norm_pp, ratio)
        )
    rec.checks = _trial_checks(config, pert, spectrum, margin)
    return rec


def _safe_trial(config, index, pert) -> TrialRecord:
    try:
        return evaluate_trial(config, index, pert)
    except Exception as exc:  # trial isolation: record and move on
        return TrialRecord(index, _digest(pert), pert, error=f"{type(exc).__name__}: {exc}")


def aggregate(records) -> tuple[list[Aggregate], dict]:
    """Per-functional empirical constants and per-suite pass flags from the records."""
    groups: dict[tuple, list] = {}
    suites: dict[str, bool] = {}
    for rec in records:
        if not rec.ok:
            continue
        for fv in rec.functionals:
            groups.setdefault(fv.key, []).append((rec.index, fv))
        for name, passed in rec.checks.items():
            suites[name] = suites.get(name, True) and bool(passed)
    out = []
    for key, items in groups.items():
        usable = [(i, fv) for i, fv in items if fv.ratio is not None]
        if usable:
            est = empirical_constant([(fv.value, fv.norm_pp) for _, fv in usable], [i for i, _ in usable])
            lo = min(fv.ratio for _, fv in usable)
            out.append(Aggregate(*key, est.value, est.argmax, lo, len(usable)))
        else:
            out.append(Aggregate(*key, None, None, None, 0))
    return out, dict(sorted(suites.items()))


def run_experiment(config: ExperimentConfig, *, threads: int = 1, ensemble=None) -> LTReport:
    """Run every trial (in parallel when ``threads > 1``) and aggregate.

    A trial that raises is kept as a record carrying its error message.
    ``ensemble`` overrides the generated perturbations (same length as
    ``config.trials``).
    """
    if int(threads) < 1:
        raise ValueError("threads must be >= 1")
    perts = generate_ensemble(config) if ensemble is None else list(ensemble)
    if len(perts) != config.trials:
        raise ValueError("ensemble length differs from config.trials")
    t0 = time.perf_counter()
    eigenvalues(np.eye(2))  # compile the kernels before the workers start
    args = [(config, i, pert) for i, pert in enumerate(perts)]
    if threads == 1:
        records = [_safe_trial(*a) for a in args]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            records = list(pool.map(lambda a: _safe_trial(*a), args))
    aggs, suites = aggregate(records)
    failures = sum(not r.ok for r in records)
    return LTReport(config, records, aggs, suites, failures, {"total_seconds": time.perf_counter() - t0})


# --- serialization -------------------------------------------------------

def _pair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _point_json(sp: SpectralPoint) -> dict:
    return {"lam": _pair(sp.lam), "z": _pair(sp.z), "multiplicity": sp.multiplicity, "provenance": sp.provenance.value}


def _point_from(obj) -> SpectralPoint:
    return SpectralPoint(complex(*obj["lam"]), complex(*obj["z"]), int(obj["multiplicity"]), Provenance(obj["provenance"]))


def _record_json(rec: TrialRecord) -> dict:
    return {
        "index": rec.index,
        "digest": rec.digest,
        "perturbation": rec.perturbation.to_json(),
        "spectrum": [_point_json(sp) for sp in rec.spectrum],
        "d_norms": [{"p": p, "value": v} for p, v in rec.d_norms.items()],
        "functionals": [asdict(fv) for fv in rec.functionals],
        "checks": rec.checks,
        "error": rec.error,
    }


def _record_from(obj) -> TrialRecord:
    return TrialRecord(
        index=int(obj["index"]),
        digest=str(obj["digest"]),
        perturbation=PerturbationSpec.from_json(obj["perturbation"]),
        spectrum=[_point_from(s) for s in obj["spectrum"]],
        d_norms={float(e["p"]): float(e["value"]) for e in obj["d_norms"]},
        functionals=[FunctionalValue(**fv) for fv in obj["functionals"]],
        checks={str(k): bool(v) for k, v in obj["checks"].items()},
        error=obj["error"],
    )


def report_to_json(report: LTReport) -> dict:
    """Plain-JSON form of ``report``; timings are not included."""
    return {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "config": report.config.to_json(),
        "records": [_record_json(r) for r in report.records],
        "aggregates": [asdict(a) for a in report.aggregates],
        "suites": report.suites,
        "failures": report.failures,
    }


def report_from_json(obj) -> LTReport:
    if not isinstance(obj, dict) or obj.get("schema") != SCHEMA:
        raise ReportFormatError("not a report document")
    if obj.get("version") != SCHEMA_VERSION:
        raise ReportVersionError(f"report schema version {obj.get('version')!r}, expected {SCHEMA_VERSION}")
    try:
        config = ExperimentConfig.from_json(obj["config"])
        records = [_record_from(r) for r in obj["records"]]
        aggs = [Aggregate(**a) for a in obj["aggregates"]]
        report = LTReport(config, records, aggs, dict(obj["suites"]), int(obj["failures"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ReportFormatError(f"malformed report: {exc}") from exc
    if len(report.records) != config.trials:
        raise ReportFormatError("record count differs from the configured trials")
    return report


def dumps_report(report: LTReport) -> str:
    return json.dumps(report_to_json(report), indent=1, sort_keys=True, allow_nan=False) + "\n"


def save_report(report: LTReport, path) -> None:
    Path(path).write_text(dumps_report(report))


def load_report(path) -> LTReport:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ReportFormatError(f"{path}: invalid JSON ({exc})") from exc
    return report_from_json(obj)


def eigenvalue_rows(records) -> list[dict]:
    """One row per spectral point, keyed by :data:`CSV_COLUMNS`."""
    rows = []
    for rec in records:
        for sp in rec.spectrum:
            rows.append(
                {
                    "trial": rec.index,
                    "re_lambda": sp.lam.real,
                    "im_lambda": sp.lam.imag,
                    "multiplicity": sp.multiplicity,
                    "dist": sp.dist,
                    "disc": sp.disc,
                    "z_re": sp.z.real,
                    "z_im": sp.z.imag,
                    "provenance": sp.provenance.value,
                }
            )
    return rows


def eigenvalue_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in eigenvalue_rows(records):
        writer.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def write_eigenvalue_csv(records, path) -> None:
    Path(path).write_text(eigenvalue_csv(records))
