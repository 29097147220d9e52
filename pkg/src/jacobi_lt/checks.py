"""Numerical verification suites with fixed seeds, tolerances and time limits.

Each suite returns a :class:`CheckResult`; :func:`run_checks` runs a
selection and is what ``jacobi-lt verify`` calls.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np
from scipy.linalg import solve_banded

from .detfun import DetContext, det_via_G, h_of_z, log_g_bound, perturbation_determinant
from .experiments import CoefficientModel, ExperimentConfig, run_experiment
from .functionals import FunctionalSpec, Kind, lt_functional
from .linalg import eigenvalues, regularized_det, schatten_norm
from .operator import PerturbationSpec, d_sequence, delta_block, lp_norm, truncate
from .resolvent import (
    band_neighbourhood_grid,
    disc_from_z,
    dist_to_band,
    dist_to_band_z,
    free_green,
    inverse_joukowski,
    v_lambda_norm,
)
from .zeros import (
    Circle,
    SpectralPoint,
    newton_refine,
    count_zeros_in_disk,
    discrete_spectrum,
    find_zeros,
    jensen_check,
    match_spectra,
    winding_number,
)

__all__ = ["CheckResult", "SUITES", "run_checks", "random_perturbation", "POLYNOMIAL_TESTS"]

BASE_SEED = 20_240_917


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    elapsed: float
    limit: float | None
    detail: str
    data: dict = field(default_factory=dict)

    @property
    def within_limit(self) -> bool:
        return self.limit is None or self.elapsed < self.limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_limit

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        budget = f" < {self.limit:g} s" if self.limit is not None else ""
        slow = "" if self.within_limit else " (time limit exceeded)"
        return f"[{status}] criterion {self.criterion} {self.name}: {self.detail} ({self.elapsed:.2f} s{budget}){slow}"


def _rng(criterion: int, seed: int = BASE_SEED) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(criterion,)))


def _disk(rng, n, radius):
    r = radius * np.sqrt(rng.random(n))
    return r * np.exp(2j * math.pi * rng.random(n))


def random_perturbation(rng, max_width: int = 5, radius: float = 2.0) -> PerturbationSpec:
    """Width uniform in ``1..max_width``, deviations uniform in the disk of ``radius``."""
    w = int(rng.integers(1, max_width + 1))
    return PerturbationSpec(int(rng.integers(-3, 4)), _disk(rng, w, radius), _disk(rng, w, radius), _disk(rng, w, radius))


def _random_lambda(rng, min_dist: float) -> complex:
    while True:
        lam = complex(rng.uniform(-5, 5), rng.uniform(-3, 3))
        if dist_to_band(lam) >= min_dist:
            return lam


# --- 1 ---------------------------------------------------------------------

def identity_suite(seed: int = BASE_SEED) -> CheckResult:
    """Two-sided distance bound, the ``|lam^2-4|`` identity and the case formulas.

    ``lam = z + 1/z`` is formed in 40-digit arithmetic from the (exact) double
    ``z``, so the oracle side carries no cancellation near ``+-2``.
    """
    radii = np.linspace(1e-3, 1 - 1e-3, 100)
    angles = 2 * math.pi * (np.arange(100) + 0.25) / 100
    z = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()
    mpmath.mp.dps = 40
    c_hi = (1 + math.sqrt(2)) / 2
    dist_z = dist_to_band_z(z)
    disc_z = disc_from_z(z)
    q = np.abs(z * z - 1) * (1 - np.abs(z)) / np.abs(z)
    worst = {"disc": 0.0, "dist": 0.0, "direct": 0.0}
    ratio_lo, ratio_hi = math.inf, 0.0
    for k, zk in enumerate(z):
        zm = mpmath.mpc(zk.real, zk.imag)
        lam = zm + 1 / zm
        x, y = abs(lam.real), abs(lam.imag)
        exact = y if x <= 2 else mpmath.sqrt((x - 2) ** 2 + y**2)
        disc = abs((lam - 2) * (lam + 2))
        worst["dist"] = max(worst["dist"], float(abs(dist_z[k] - exact) / exact))
        worst["disc"] = max(worst["disc"], float(abs(disc_z[k] - disc) / disc))
        ratio = float(exact / q[k])
        ratio_lo, ratio_hi = min(ratio_lo, ratio), max(ratio_hi, ratio)
    # Float-only path: segment distance of the rounded lam against the case formula.
    lam_f = z + 1 / z
    direct = dist_to_band(lam_f)
    worst["direct"] = float(np.max(np.abs(direct - dist_z) / np.maximum(1.0, np.abs(lam_f))))
    worst["dist_over_q_min"] = ratio_lo
    worst["dist_over_q_max"] = ratio_hi
    passed = (
        ratio_lo >= 0.5 * (1 - 1e-12)
        and ratio_hi <= c_hi * (1 + 1e-12)
        and worst["disc"] <= 1e-12
        and worst["dist"] <= 1e-12
        and worst["direct"] <= 1e-12
    )
    detail = (
        f"dist/Q in [{ratio_lo:.6f}, {ratio_hi:.6f}] (bounds 0.5, {c_hi:.6f}); "
        f"rel. errors disc {worst['disc']:.1e}, case formula {worst['dist']:.1e}, float path {worst['direct']:.1e}"
    )
    return CheckResult(1, "exact identities", passed, 0.0, 2.0, detail, worst)


# --- 2 ---------------------------------------------------------------------

def green_suite(seed: int = BASE_SEED) -> CheckResult:
    """Green's function against columns of the inverse of the 2000-site free section."""
    rng = _rng(2, seed)
    n = 2000
    lo = -n // 2
    sites = np.arange(-10, 11)
    rhs = np.zeros((n, sites.size), dtype=complex)
    rhs[sites - lo, np.arange(sites.size)] = 1.0
    worst = 0.0
    for _ in range(50):
        lam = _random_lambda(rng, 0.1)
        # banded storage of lam - J0: super, diag, sub
        ab = np.zeros((3, n), dtype=complex)
        ab[0, 1:] = -1.0
        ab[1, :] = lam
        ab[2, :-1] = -1.0
        cols = solve_banded((1, 1), ab, rhs)
        oracle = cols[sites - lo, :]
        ours = np.array([[free_green(lam, m, k) for k in sites] for m in sites])
        worst = max(worst, float(np.max(np.abs(ours - oracle))))
    return CheckResult(2, "green function oracle", worst <= 1e-6, 0.0, 60.0, f"max abs error {worst:.2e}", {"max_error": worst})


# --- 3 ---------------------------------------------------------------------

def rank_one_lambda(b: complex) -> complex:
    """Eigenvalue of ``J0 + b <delta_0, .> delta_0``: the root of ``lam^2 = 4 + b^2`` with ``|z| < 1``.

    ``None`` when neither root lies off the band with its preimage inside the disk.
    """
    b = complex(b)
    if b == 0:
        return None
    # z solves z^{-1} - z = b, i.e. z^2 + b z - 1 = 0.
    s = np.sqrt(b * b + 4)
    inside = [r for r in ((-b + s) / 2, (-b - s) / 2) if abs(r) < 1]
    if not inside:
        return None
    z = complex(inside[0])
    return z + 1 / z


def duality_suite(seed: int = BASE_SEED, trials: int = 100, size: int = 500, band_gap: float = 0.05) -> CheckResult:
    """Determinant zeros against eigenvalues of finite sections, plus rank-one closed forms."""
    rng = _rng(3, seed)
    failures = []
    max_dev = 0.0
    count = 0
    for i in range(trials):
        pert = random_perturbation(rng)
        det = discrete_spectrum(pert, band_gap=band_gap)
        margin = discrete_spectrum(pert, band_gap=0.8 * band_gap)
        lo = pert.offset + pert.width // 2 - size // 2
        trunc = eigenvalues(truncate(pert, lo, lo + size - 1))
        res = match_spectra(det, trunc, 1e-4, band_gap, margin)
        count += sum(sp.multiplicity for sp in det)
        max_dev = max(max_dev, res.max_distance)
        if not res.ok:
            failures.append(i)
    closed = []
    for b in (0.5, 1.0, 2.0, -1.5, 3j, 1 + 1j, -0.7 + 2.2j):
        expected = rank_one_lambda(b)
        got = discrete_spectrum(PerturbationSpec.from_sites(b={0: b}), band_gap=band_gap)
        err = abs(got[0].lam - expected) if len(got) == 1 else math.inf
        closed.append(err)
    closed_ok = max(closed) <= 1e-8
    passed = not failures and closed_ok
    detail = (
        f"{trials - len(failures)}/{trials} trials matched ({count} eigenvalues, max deviation {max_dev:.1e}); "
        f"rank-one closed forms max error {max(closed):.1e}"
    )
    return CheckResult(3, "spectrum duality", passed, 0.0, 180.0, detail, {"failures": failures, "closed_form_errors": closed})


# --- 4 ---------------------------------------------------------------------

def norm_equivalence_suite(seed: int = BASE_SEED) -> CheckResult:
    """``6^(-1/p) ||d||_p <= ||J - J0||_{S_p} <= 3 ||d||_p`` on the exact block."""
    rng = _rng(4, seed)
    ps = (1.0, 1.5, 2.0, 3.0)
    fails = 0
    lo_ratio = {p: math.inf for p in ps}
    hi_ratio = {p: 0.0 for p in ps}
    for _ in range(200):
        pert = random_perturbation(rng)
        _, block = delta_block(pert)
        d = d_sequence(pert)
        for p in ps:
            s = schatten_norm(block, p)
            dn = lp_norm(d, p)
            lo_ratio[p] = min(lo_ratio[p], s / dn)
            hi_ratio[p] = max(hi_ratio[p], s / dn)
            if not (6.0 ** (-1.0 / p) * dn <= s and s <= 3.0 * dn):
                fails += 1
    detail = f"{fails} failures; S_p/l_p ratio ranges " + ", ".join(
        f"p={p:g}: [{lo_ratio[p]:.3f}, {hi_ratio[p]:.3f}]" for p in ps
    )
    return CheckResult(4, "norm equivalence", fails == 0, 0.0, None, detail, {"failures": fails})


# --- 5 ---------------------------------------------------------------------

def determinant_suite(seed: int = BASE_SEED) -> CheckResult:
    """Commutation, the sharp determinant bounds and the two representations of g."""
    rng = _rng(5, seed)

    def cnormal(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)

    comm = 0.0
    for i in range(100):
        k, m = rng.integers(2, 13, size=2)
        a = cnormal(k, m) * rng.uniform(0.05, 0.6) / math.sqrt(m)
        b = cnormal(m, k) * rng.uniform(0.05, 0.6) / math.sqrt(k)
        n = 1 + i % 3
        x, y = regularized_det(a @ b, n), regularized_det(b @ a, n)
        comm = max(comm, abs(x - y) / max(abs(x), abs(y)))
    bound_fail = 0
    for _ in range(100):
        c = cnormal(20, 20) * rng.uniform(0.01, 1.0) / math.sqrt(20)
        if abs(regularized_det(c, 2)) > math.exp(0.5 * schatten_norm(c, 2) ** 2):
            bound_fail += 1
        if abs(regularized_det(c, 1)) > math.exp(schatten_norm(c, 1)):
            bound_fail += 1
    rep = 0.0
    for i in range(100):
        pert = random_perturbation(rng)
        lam = _random_lambda(rng, 0.05)
        ctx = DetContext(pert, 1 + i % 3)
        g1 = perturbation_determinant(ctx, lam)
        g2 = det_via_G(ctx, lam)
        rep = max(rep, abs(g1 - g2) / (1 + abs(g1)))
    passed = comm <= 1e-9 and bound_fail == 0 and rep <= 1e-9
    detail = f"commutation {comm:.1e}, bound violations {bound_fail}, representation {rep:.1e}"
    return CheckResult(5, "determinant algebra", passed, 0.0, None, detail, {"commutation": comm, "bound_failures": bound_fail, "representation": rep})


# --- 6 ---------------------------------------------------------------------

def log_bound_suite(seed: int = BASE_SEED) -> CheckResult:
    """``log|g| <= Gamma_p 3^p ||G||_{S_p}^p`` for ``p`` in ``{1, 2}``."""
    rng = _rng(6, seed)
    fails = 0
    worst_margin = math.inf
    for i in range(100):
        pert = random_perturbation(rng)
        lam = _random_lambda(rng, 0.01)
        for p in (1.0, 2.0):
            lhs, rhs = log_g_bound(DetContext.for_p(pert, p), lam, p)
            worst_margin = min(worst_margin, rhs - lhs)
            if lhs > rhs:
                fails += 1
    detail = f"{fails} violations over 200 evaluations; smallest margin {worst_margin:.3f}"
    return CheckResult(6, "log|g| bound", fails == 0, 0.0, None, detail, {"failures": fails})


# --- 7 ---------------------------------------------------------------------

def symbol_suite(seed: int = BASE_SEED) -> CheckResult:
    """Closed forms and symmetries of the resolvent symbol norm, and the grid ratio sup."""
    rng = _rng(7, seed)
    l1 = v_lambda_norm(3.0, 1.0)
    l2sq = v_lambda_norm(3.0, 2.0) ** 2
    e1 = abs(l1 - 2 * math.pi / math.sqrt(5)) / (2 * math.pi / math.sqrt(5))
    e2 = abs(l2sq - 6 * math.pi / 5**1.5) / (6 * math.pi / 5**1.5)
    sym = 0.0
    for _ in range(20):
        lam = _random_lambda(rng, 0.05)
        p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
        base = v_lambda_norm(lam, p)
        for other in (-lam, lam.conjugate(), -lam.conjugate()):
            sym = max(sym, abs(v_lambda_norm(other, p) - base) / base)
    grid = band_neighbourhood_grid(30, 30)
    sups = {}
    for p in (1.0, 1.5, 2.0):
        ratios = []
        for lam in grid.ravel():
            dist = dist_to_band(lam)
            disc = abs((lam - 2) * (lam + 2))
            ratios.append(v_lambda_norm(lam, p) ** p * dist ** (p - 1) * math.sqrt(disc))
        sups[p] = float(max(ratios))
    passed = e1 <= 1e-9 and e2 <= 1e-9 and sym <= 1e-12 and all(math.isfinite(s) for s in sups.values())
    detail = f"L1 err {e1:.1e}, L2^2 err {e2:.1e}, reflection {sym:.1e}; grid sup " + ", ".join(
        f"p={p:g}: {s:.4f}" for p, s in sups.items()
    )
    return CheckResult(7, "resolvent symbol", passed, 0.0, None, detail, {"sup": sups})


# --- 8 ---------------------------------------------------------------------

def rank_one_point(t: float) -> SpectralPoint:
    """The eigenvalue of ``b_0 = t`` located on the determinant.

    The closed form is refined by Newton's method on ``h`` and certified as
    the only zero in a disk reaching halfway to the unit circle.
    """
    ctx = DetContext(PerturbationSpec.from_sites(b={0: t}))
    f = lambda z: h_of_z(ctx, z)
    z0 = inverse_joukowski(rank_one_lambda(t)).z
    gap = 1 - abs(z0)
    z = newton_refine(f, z0, 1e-3 * gap)
    if z is None or abs(z - z0) > 1e-3 * gap:
        raise ArithmeticError(f"Newton failed near the closed-form root for t={t}")
    if count_zeros_in_disk(f, 1 - 0.5 * gap) != 1:
        raise ArithmeticError(f"unexpected zero count for t={t}")
    return SpectralPoint(z + 1 / z, z, 1)


def lt_ratio_suite(seed: int = BASE_SEED) -> CheckResult:
    """Rank-one ratio behaviour and pointwise domination on a random ensemble."""
    spec = FunctionalSpec(Kind.MAIN, 2.0, 0.5)
    ratios = {}
    for k in range(-6, 4):
        t = 2.0**k
        ratios[t] = lt_functional([rank_one_point(t)], spec) / t**2
    small = lt_functional([rank_one_point(0.01)], spec) / 0.01**2
    config = ExperimentConfig(
        seed=seed, trials=12, support_width=4, magnitude=2.0,
        coefficient_model=CoefficientModel.COMPLEX_GENERAL, p_grid=(2.0,), tau_grid=(0.5,),
    )
    report = run_experiment(config)
    dominated = report.failures == 0 and all(
        sp.dist**2 <= sp.disc * (1 + 1e-12) for rec in report.records for sp in rec.spectrum
    )
    n_eigs = sum(len(rec.spectrum) for rec in report.records)
    finite = all(math.isfinite(r) for r in ratios.values())
    passed = finite and small <= 1e-5 and dominated
    detail = (
        f"ratios {min(ratios.values()):.2e}..{max(ratios.values()):.2e}, t=0.01 ratio {small:.3e}; "
        f"domination on {n_eigs} ensemble eigenvalues: {'ok' if dominated else 'violated'}"
    )
    return CheckResult(8, "LT ratio behaviour", passed, 0.0, None, detail, {"ratios": ratios, "t_001": small})


# --- 9 ---------------------------------------------------------------------

def _poly(roots):
    roots = [complex(r) for r in roots]

    def f(z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for r in roots:
            out = out * (1 - z / r)
        return out

    return f


POLYNOMIAL_TESTS: dict[str, Callable] = {
    "1-4z^2": _poly([0.5, -0.5]),
    "double 0.3": _poly([0.3, 0.3]),
    "triple 0.3 and -0.6": _poly([0.3, 0.3, 0.3, -0.6]),
    "scattered": _poly([0.5, 0.2 + 0.3j, -0.4 - 0.1j, 0.1j, -0.7 + 0.5j]),
    "near pair": _poly([0.45 + 0.2j, 0.4501 + 0.2j]),
}


def jensen_suite(seed: int = BASE_SEED) -> CheckResult:
    """Jensen's identity and zero counting on polynomial (and entire) test functions."""
    worst = 0.0
    mismatches = []
    funcs = dict(POLYNOMIAL_TESTS)
    for name, f in funcs.items():
        for r in (0.25, 0.55, 0.75, 0.95):
            zero_sum, mean_log = jensen_check(f, r)
            worst = max(worst, abs(zero_sum - mean_log))
            n = count_zeros_in_disk(f, r)
            if n != winding_number(f, Circle(0j, r)):
                mismatches.append((name, r, "winding"))
            found = sum(m for z, m in find_zeros(f, 0.0, r) if abs(z) < r)
            if n != found:
                mismatches.append((name, r, "find_zeros"))
    exp_sum, exp_mean = jensen_check(lambda z: np.exp(np.asarray(z)), 0.8)
    worst = max(worst, abs(exp_sum - exp_mean))
    passed = worst <= 1e-8 and not mismatches
    detail = f"max Jensen gap {worst:.1e}; counting mismatches {len(mismatches)}"
    return CheckResult(9, "Jensen and counting", passed, 0.0, None, detail, {"gap": worst, "mismatches": mismatches})


SUITES: dict[int, Callable[..., CheckResult]] = {
    1: identity_suite,
    2: green_suite,
    3: duality_suite,
    4: norm_equivalence_suite,
    5: determinant_suite,
    6: log_bound_suite,
    7: symbol_suite,
    8: lt_ratio_suite,
    9: jensen_suite,
}


def run_suite(criterion: int, seed: int = BASE_SEED) -> CheckResult:
    """Run one suite, timing it; an exception is reported as a failed result."""
    t0 = time.perf_counter()
    try:
        res = SUITES[criterion](seed)
    except Exception as exc:
        res = CheckResult(criterion, SUITES[criterion].__name__, False, 0.0, None, f"raised {type(exc).__name__}: {exc}")
    res.elapsed = time.perf_counter() - t0
    return res


def run_checks(criteria=None, seed: int = BASE_SEED, report: Callable[[str], None] | None = None) -> list[CheckResult]:
    out = []
    for k in sorted(SUITES) if criteria is None else criteria:
        res = run_suite(k, seed)
        if report is not None:
            report(res.line())
        out.append(res)
    return out
