"""Zeros of analytic functions by the argument principle, and the discrete
spectrum as the zero set of the perturbation determinant.

Analytic functions are passed as vectorised callables: ``f(z)`` takes a
complex ndarray and returns values of the same shape.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .detfun import DetContext, h_of_z
from .linalg import eigenvalues
from .operator import PerturbationSpec, d_sequence, truncate
from .resolvent import dist_to_band, inverse_joukowski, joukowski_preimage, trapezoid_periodic

__all__ = [
    "ContourZeroError",
    "WindingError",
    "SubdivisionError",
    "Circle",
    "Rectangle",
    "Provenance",
    "SpectralPoint",
    "BlaschkeParams",
    "winding_number",
    "find_zeros",
    "jensen_check",
    "count_zeros_in_disk",
    "blaschke_sum",
    "search_radius",
    "newton_refine",
    "discrete_spectrum",
    "truncated_spectrum",
    "match_spectra",
]

Analytic = Callable[[np.ndarray], np.ndarray]

ZERO_ON_CONTOUR = 1e-13
MAX_PHASE_STEP = math.pi / 3


class ContourZeroError(ArithmeticError):
    """``|f|`` at a node dipped below ``1e-13`` times its size at the neighbouring nodes."""


class WindingError(ArithmeticError):
    """The argument could not be resolved within the node cap."""


class SubdivisionError(RuntimeError):
    """Boxes left unresolved at the depth cap.

    ``zeros`` holds what was resolved, ``unresolved`` the leftover
    ``(Rectangle, winding)`` pairs.
    """

    def __init__(self, msg, zeros, unresolved):
        super().__init__(msg)
        self.zeros = zeros
        self.unresolved = unresolved


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float

    def nodes(self, n: int) -> np.ndarray:
        return self.center + self.radius * np.exp(2j * math.pi * np.arange(n) / n)

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius


@dataclass(frozen=True)
class Rectangle:
    x0: float
    x1: float
    y0: float
    y1: float

    @property
    def diameter(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def nodes(self, n: int) -> np.ndarray:
        """``n`` points equally spaced by arc length, counter-clockwise from ``(x0, y0)``."""
        w, h = self.x1 - self.x0, self.y1 - self.y0
        s = (2 * (w + h)) * np.arange(n) / n
        x = np.select(
            [s < w, s < w + h, s < 2 * w + h],
            [self.x0 + s, np.full_like(s, self.x1), self.x1 - (s - w - h)],
            np.full_like(s, self.x0),
        )
        y = np.select(
            [s < w, s < w + h, s < 2 * w + h],
            [np.full_like(s, self.y0), self.y0 + (s - w), np.full_like(s, self.y1)],
            self.y1 - (s - 2 * w - h),
        )
        return x + 1j * y

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z)
        return (self.x0 <= z.real) & (z.real <= self.x1) & (self.y0 <= z.imag) & (z.imag <= self.y1)

    def modulus_range(self) -> tuple[float, float]:
        """Smallest and largest ``|z|`` over the closed rectangle."""
        cx = min(max(0.0, self.x0), self.x1)
        cy = min(max(0.0, self.y0), self.y1)
        far = max(math.hypot(x, y) for x in (self.x0, self.x1) for y in (self.y0, self.y1))
        return math.hypot(cx, cy), far

    def split(self, fx: float, fy: float) -> list["Rectangle"]:
        xm = self.x0 + fx * (self.x1 - self.x0)
        ym = self.y0 + fy * (self.y1 - self.y0)
        return [
            Rectangle(self.x0, xm, self.y0, ym),
            Rectangle(xm, self.x1, self.y0, ym),
            Rectangle(self.x0, xm, ym, self.y1),
            Rectangle(xm, self.x1, ym, self.y1),
        ]


def _contour_values(f: Analytic, contour, n: int) -> np.ndarray:
    vals = np.asarray(f(contour.nodes(n)), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise WindingError("non-finite function values on the contour")
    return vals


def winding_number(f: Analytic, contour, nodes: int = 64, *, max_nodes: int = 2**16) -> int:
    """Number of zeros (minus poles) of ``f`` enclosed by ``contour``.

    The argument increments between consecutive nodes are summed; the node
    count is doubled until every increment of ``log f`` (modulus and phase
    together) is below ``pi/3`` and two successive counts agree.
    """
    n = int(nodes)
    previous = None
    while n <= max_nodes:
        vals = _contour_values(f, contour, n)
        mags = np.abs(vals)
        # Local scale: |f| may legitimately span many decades along a long
        # contour, so a node is compared with its neighbours only.
        local = np.maximum(mags, np.maximum(np.roll(mags, 1), np.roll(mags, -1)))
        if np.any(mags <= ZERO_ON_CONTOUR * local):
            raise ContourZeroError(f"f vanishes on the contour {contour}")
        ratio = np.roll(vals, -1) / vals
        steps = np.angle(ratio)
        w = steps.sum() / (2 * math.pi)
        count = round(w)
        # Bounding the modulus change as well as the phase change rules out
        # aliasing: a zero close to the contour makes |f| dip sharply even
        # when its phase jump wraps to a small value.
        log_steps = np.hypot(steps, np.log(np.abs(ratio)))
        resolved = log_steps.max() < MAX_PHASE_STEP and abs(w - count) < 0.25
        if resolved and previous == count:
            return int(count)
        previous = count if resolved else None
        n *= 2
    raise WindingError(f"winding number on {contour} not resolved with {max_nodes} nodes")


def newton_refine(f: Analytic, z0: complex, scale: float, max_iter: int = 60):
    """Newton's method from ``z0`` with a central-difference derivative of step ``1e-7 scale``.

    Returns ``None`` when the iteration does not settle.
    """
    z = complex(z0)
    h = 1e-7 * scale
    for _ in range(max_iter):
        vals = f(np.array([z, z + h, z - h]))
        fz = vals[0]
        if fz == 0:
            return z
        df = (vals[1] - vals[2]) / (2 * h)
        if df == 0 or not np.isfinite(df):
            return None
        step = fz / df
        z -= step
        if not np.isfinite(z):
            return None
        if abs(step) <= 4e-16 * max(1.0, abs(z)):
            return z
    return z if abs(step) <= 1e-12 * max(1.0, abs(z)) else None


def _cluster_roots(f: Analytic, circle: Circle, w: int):
    """Roots of the ``w`` zeros inside ``circle`` from contour power sums.

    ``f`` is analytic on the closed disk, so its samples on the circle are a
    Taylor series in ``e^{it}`` and ``df/dt`` follows from the FFT.
    """

    def moments(n):
        z = circle.nodes(n)
        vals = f(z)
        coeffs = np.fft.fft(vals) / n
        dfdt = np.fft.ifft(1j * np.arange(n) * coeffs) * n
        ratio = dfdt / vals
        return np.array([np.mean(z**k * ratio) / 1j for k in range(1, w + 1)])

    n = 128
    prev = moments(n)
    while True:
        n *= 2
        cur = moments(n)
        if np.all(np.abs(cur - prev) <= 1e-11 * (1 + np.abs(cur))) or n >= 2**15:
            break
        prev = cur
    # Newton identities: power sums -> elementary symmetric polynomials.
    e = [1.0 + 0j]
    for k in range(1, w + 1):
        acc = sum((-1) ** (i - 1) * e[k - i] * cur[i - 1] for i in range(1, k + 1))
        e.append(acc / k)
    coeffs = np.array([(-1) ** k * e[k] for k in range(w + 1)])
    companion = np.zeros((w, w), dtype=complex)
    companion[0, :] = -coeffs[1:]
    if w > 1:
        companion[np.arange(1, w), np.arange(w - 1)] = 1.0
    return eigenvalues(companion)


def _terminal_point(f, box, w, singularities):
    # A box at the size floor: Newton for a simple zero, otherwise the mean of
    # the cluster (well conditioned even when the individual roots are not).
    if w == 1:
        z = newton_refine(f, box.center, box.diameter)
    else:
        circle = Circle(box.center, 0.5 * box.diameter * 1.05)
        z = None
        if not np.any(np.abs(singularities - circle.center) <= 1.01 * circle.radius):
            try:
                z = complex(np.mean(_cluster_roots(f, circle, w)))
            except (ArithmeticError, np.linalg.LinAlgError):
                z = None
    return z if z is not None and box.contains(z) else box.center


_SPLITS = [(0.5314159, 0.4728172), (0.4685841, 0.5271828), (0.5141421, 0.4826795), (0.4776393, 0.5173205)]


def _children(f, box, nodes):
    last = None
    for fx, fy in _SPLITS:
        kids = box.split(fx, fy)
        try:
            ws = [winding_number(f, k, nodes) for k in kids]
        except (ContourZeroError, WindingError) as exc:
            last = exc
            continue
        return kids, ws
    raise last


def find_zeros(
    f: Analytic,
    r_min: float,
    r_max: float,
    tol: float = 1e-7,
    *,
    max_depth: int = 60,
    singularities=(),
) -> list[tuple[complex, int]]:
    """Zeros of ``f`` in the annulus ``r_min <= |z| <= r_max`` with multiplicity.

    Bounding boxes are quadrisected while their winding number is nonzero.
    A box is terminal once its diameter is at most ``tol``, once Newton's
    method converges inside it (winding one), or once the contour power sums
    show its ``w`` zeros form a cluster of diameter at most ``tol`` (reported
    at the cluster mean with multiplicity ``w``).

    ``f`` must be analytic except at the isolated points ``singularities``,
    which must lie outside the search square.  Output is ordered by
    ``(|z|, arg z)``.

    Raises
    ------
    SubdivisionError
        If boxes remain unresolved at ``max_depth``.
    """
    if not 0 <= r_min < r_max:
        raise ValueError("need 0 <= r_min < r_max")
    singularities = np.asarray(singularities, dtype=complex)
    if np.any(np.abs(singularities) <= r_max):
        raise ValueError("a singularity of f lies inside the search region")
    # Slightly enlarged, slightly asymmetric square; the margin shrinks if it
    # would swallow a singularity.
    margin = 1e-3 * r_max
    nodes = 64
    retries = 0
    while True:
        half = r_max + margin
        root = Rectangle(-half - 3e-4 * margin, half, -half, half + 7e-4 * margin)
        if np.any(root.contains(singularities)):
            margin *= 0.5
            if margin < 1e-15:
                raise ValueError("a singularity of f lies on the boundary of the search region")
            continue
        try:
            w_root = winding_number(f, root, nodes)
            break
        except (ContourZeroError, WindingError):
            # a zero sits on the square; nudge it
            retries += 1
            if retries > 4:
                raise
            margin *= 0.61
    stack = [(root, w_root, 0)]
    found: list[tuple[complex, int]] = []
    unresolved = []

    def outside(box):
        lo, hi = box.modulus_range()
        return lo > r_max or hi < r_min

    while stack:
        box, w, depth = stack.pop()
        if w == 0 or outside(box):
            continue
        if w < 0:
            raise ArithmeticError(f"negative winding number in {box}: f has poles in the search region")
        if box.diameter <= tol:
            found.append((_terminal_point(f, box, w, singularities), w))
            continue
        if w == 1:
            z = newton_refine(f, box.center, box.diameter)
            if z is not None and box.contains(z):
                found.append((z, 1))
                continue
        else:
            circle = Circle(box.center, 0.5 * box.diameter * 1.05)
            if not np.any(np.abs(singularities - circle.center) <= 1.01 * circle.radius):
                try:
                    wc = winding_number(f, circle, nodes)
                except (ContourZeroError, WindingError):
                    wc = None
                if wc == w:
                    roots = _cluster_roots(f, circle, w)
                    mean = complex(np.mean(roots))
                    if np.max(np.abs(roots - mean)) <= tol and box.contains(mean):
                        found.append((mean, w))
                        continue
        if depth >= max_depth:
            unresolved.append((box, w))
            continue
        kids, ws = _children(f, box, nodes)
        if sum(ws) != w:
            kids, ws = _children(f, box, 8 * nodes)
            if sum(ws) != w:
                unresolved.append((box, w))
                continue
        for k, wk in zip(kids, ws):
            if wk:
                stack.append((k, wk, depth + 1))
    found = [(z, m) for z, m in found if r_min <= abs(z) <= r_max]
    found.sort(key=lambda zm: (abs(zm[0]), np.angle(zm[0])))
    if unresolved:
        raise SubdivisionError(f"{len(unresolved)} boxes unresolved at depth {max_depth}", found, unresolved)
    return found


def count_zeros_in_disk(f: Analytic, r: float, nodes: int = 64) -> int:
    """Zeros of ``f`` in ``|z| < r`` with multiplicity, by the winding number on ``|z| = r``."""
    return winding_number(f, Circle(0j, r), nodes)


def jensen_check(f: Analytic, r: float, *, tol: float = 1e-9) -> tuple[float, float]:
    """Both sides of Jensen's identity for ``f(0) = 1`` on the circle ``|z| = r``.

    Returns ``(sum over zeros |z_k| < r of log(r/|z_k|), mean of log|f(r e^{it})|)``.
    """
    f0 = complex(np.asarray(f(np.array([0j])))[0])
    if abs(f0 - 1) > 1e-12:
        raise ValueError(f"jensen_check needs f(0) = 1, got {f0}")
    zeros = find_zeros(f, 0.0, r, tol)
    zero_sum = sum(m * math.log(r / abs(z)) for z, m in zeros if abs(z) < r)
    vals = lambda t: np.log(np.abs(f(r * np.exp(1j * t))))
    probe = np.abs(f(Circle(0j, r).nodes(256)))
    if probe.min() <= ZERO_ON_CONTOUR * probe.max():
        raise ContourZeroError(f"f vanishes on |z| = {r}")
    mean_log, _ = trapezoid_periodic(vals, rtol=1e-13, atol=1e-14)
    return float(zero_sum), float(mean_log)


@dataclass(frozen=True)
class BlaschkeParams:
    """Exponents of a Blaschke-type sum; ``xis`` are points on the unit circle."""

    alpha: float
    tau: float
    gamma: float = 0.0
    betas: tuple = ()
    xis: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "xis", tuple(complex(x) for x in self.xis))
        if len(self.betas) != len(self.xis):
            raise ValueError("betas and xis must have the same length")
        if self.alpha < 0 or self.gamma < 0 or any(b < 0 for b in self.betas):
            raise ValueError("exponents must be nonnegative")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")
        if any(abs(abs(x) - 1) > 1e-12 for x in self.xis):
            raise ValueError("xis must be unimodular")


def blaschke_sum(zeros, params: BlaschkeParams) -> float:
    """``sum m (1-|z|)^(a+1+t) |z|^-(g-1+t)_+ prod_j |z - xi_j|^(b_j-1+t)_+``.

    ``zeros`` is a sequence of ``(z, multiplicity)`` with ``|z| < 1``; a zero
    at the origin with a positive ``|z|`` exponent gives ``inf``.
    """
    a, t = params.alpha, params.tau
    gexp = max(params.gamma - 1 + t, 0.0)
    total = 0.0
    for z, m in zeros:
        z = complex(z)
        r = abs(z)
        if r >= 1:
            raise ValueError(f"zero {z} outside the unit disk")
        if r == 0 and gexp > 0:
            return math.inf
        term = (1 - r) ** (a + 1 + t) / (r**gexp if gexp else 1.0)
        for b, xi in zip(params.betas, params.xis):
            term *= abs(z - xi) ** max(b - 1 + t, 0.0)
        total += m * term
    return total


class Provenance(str, enum.Enum):
    DETERMINANT = "determinant-zero"
    TRUNCATION = "truncated-eigensolver"


@dataclass(frozen=True)
class SpectralPoint:
    """A discrete eigenvalue with its disk preimage and algebraic multiplicity."""

    lam: complex
    z: complex
    multiplicity: int
    provenance: Provenance = Provenance.DETERMINANT

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")
        if not 0 < abs(self.z) < 1:
            raise ValueError("preimage must lie in the punctured unit disk")
        if abs(self.z + 1 / self.z - self.lam) > 1e-8 * (1 + abs(self.lam)):
            raise ValueError(f"z = {self.z} is not a preimage of lam = {self.lam}")
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @classmethod
    def from_lambda(cls, lam, multiplicity=1, provenance=Provenance.TRUNCATION):
        return cls(complex(lam), inverse_joukowski(lam).z, int(multiplicity), provenance)

    @property
    def dist(self) -> float:
        return dist_to_band(self.lam)

    @property
    def disc(self) -> float:
        return abs((self.lam - 2) * (self.lam + 2))


def _phi(r):
    return (1 + r * r) * (1 - r) / r


def search_radius(band_gap: float) -> float:
    """Radius containing every preimage ``z`` with ``dist(z + 1/z) >= band_gap``.

    Uses ``dist <= (1+sqrt 2)/2 * |z^2-1|(1-|z|)/|z| <= (1+sqrt 2)/2 * (1+r^2)(1-r)/r``
    with the right side decreasing in ``r = |z|``.
    """
    if not band_gap > 0:
        raise ValueError("band_gap must be positive")
    target = band_gap / ((1 + math.sqrt(2)) / 2)
    if _phi(1e-6) <= target:
        return 1e-6
    return brentq(lambda r: _phi(r) - target, 1e-6, 1 - 1e-15, xtol=1e-15)


def discrete_spectrum(
    pert: PerturbationSpec,
    p: float = 1.0,
    band_gap: float = 0.05,
    tol: float = 1e-7,
    *,
    r_min: float = 1e-2,
) -> list[SpectralPoint]:
    """Eigenvalues of ``J`` at distance at least ``band_gap`` from the band.

    Zeros of ``h(z) = g(z + 1/z)`` are located in the disk preimage and
    mapped back.  The zeros do not depend on the regularization order
    ``ceil(p)`` (orders differ by a nonvanishing exponential factor), so the
    search runs on ``det_1``, which is rational in ``z``.
    """
    if not band_gap > 0:
        raise ValueError("band_gap must be positive")
    if p < 1:
        raise ValueError("p must be >= 1")
    d = d_sequence(pert)
    if not np.any(d.values):
        return []
    # |lam| <= ||J|| <= 2 + 3 max d, and |lam| >= 1/|z| - |z|.
    lam_max = 2 + 3 * float(d.values.max())
    r_min = min(r_min, 0.5 / (lam_max + 1))
    r_max = search_radius(band_gap)
    ctx = DetContext(pert, 1)
    f = lambda z: h_of_z(ctx, z)
    zeros = find_zeros(f, r_min, r_max, tol, singularities=(1.0, -1.0))
    out = []
    for z, m in zeros:
        if abs(z) >= 1 or z == 0:
            continue
        lam = z + 1 / z
        if dist_to_band(lam) >= band_gap:
            out.append(SpectralPoint(complex(lam), complex(z), int(m), Provenance.DETERMINANT))
    return out


def _clusters(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group points whose mutual chains are closer than ``tol`` (single linkage)."""
    values = np.asarray(values, dtype=complex)
    n = values.size
    parent = list(range(n))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        close = np.flatnonzero(np.abs(values[i + 1 :] - values[i]) <= tol) + i + 1
        for j in close:
            parent[root(j)] = root(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(root(i), []).append(i)
    return [values[idx] for idx in groups.values()]


def truncated_spectrum(
    pert: PerturbationSpec, size: int = 500, band_gap: float = 0.05, cluster_tol: float = 1e-6
) -> list[SpectralPoint]:
    """Eigenvalues of the ``size``-site Dirichlet section centred on the support.

    Eigenvalues closer than ``band_gap`` to the band (where the section
    pollutes) are discarded; the rest are clustered within ``cluster_tol``.
    """
    if size < pert.width:
        raise ValueError("truncation smaller than the perturbation window")
    centre = pert.offset + pert.width // 2
    lo = centre - size // 2
    lam = eigenvalues(truncate(pert, lo, lo + size - 1))
    lam = lam[dist_to_band(lam) >= band_gap]
    out = []
    for group in _clusters(lam, cluster_tol):
        mean = complex(np.mean(group))
        out.append(SpectralPoint(mean, complex(joukowski_preimage(mean)), group.size, Provenance.TRUNCATION))
    out.sort(key=lambda s: (abs(s.z), np.angle(s.z)))
    return out


@dataclass
class SpectrumMatch:
    """Outcome of :func:`match_spectra`; ``ok`` when nothing is unmatched."""

    unmatched_determinant: list = field(default_factory=list)
    unmatched_truncation: list = field(default_factory=list)
    max_distance: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.unmatched_determinant and not self.unmatched_truncation


def match_spectra(det_points, trunc_eigs, tol: float, band_gap: float, margin_points=None) -> SpectrumMatch:
    """Cross-check determinant zeros against truncated-section eigenvalues.

    Every determinant zero must have exactly ``multiplicity`` section
    eigenvalues within ``tol``.  Every section eigenvalue with
    ``dist >= band_gap`` must lie within ``tol`` of a zero from
    ``margin_points`` (zeros searched with a slightly smaller gap, so that
    points straddling the cutoff are not miscounted); defaults to
    ``det_points``.
    """
    trunc_eigs = np.asarray(trunc_eigs, dtype=complex)
    margin_points = det_points if margin_points is None else margin_points
    res = SpectrumMatch()
    for sp in det_points:
        dists = np.abs(trunc_eigs - sp.lam)
        near = int(np.sum(dists <= tol))
        if dists.size:
            res.max_distance = max(res.max_distance, float(np.sort(dists)[min(sp.multiplicity, dists.size) - 1]))
        if near != sp.multiplicity:
            res.unmatched_determinant.append((sp, near))
    refs = np.array([sp.lam for sp in margin_points], dtype=complex)
    for lam in trunc_eigs[dist_to_band(trunc_eigs) >= band_gap]:
        if refs.size == 0 or np.min(np.abs(refs - lam)) > tol:
            res.unmatched_truncation.append(complex(lam))
    return res
