"""Geometry of the band ``[-2, 2]`` and the resolvent of the free operator.

The Joukowski map ``z -> z + 1/z`` sends the punctured unit disk onto the
complement of the band; most quantities here are computed from the preimage
``z`` with ``|z| < 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BandError",
    "QuadratureError",
    "BandPoint",
    "inverse_joukowski",
    "joukowski_preimage",
    "dist_to_band",
    "dist_to_band_z",
    "disc_from_z",
    "free_green",
    "green_kernel",
    "v_lambda_norm",
    "trapezoid_periodic",
    "fourier_lp_norm",
    "multiplier_matrix",
    "band_neighbourhood_grid",
]

BAND_CUTOFF = 1e-14
TWO_PI = 2.0 * math.pi


class BandError(ValueError):
    """The point lies on (or numerically on) the band ``[-2, 2]``."""


class QuadratureError(RuntimeError):
    """Node doubling hit its cap; ``estimate`` is the last value computed."""

    def __init__(self, msg, estimate):
        super().__init__(msg)
        self.estimate = estimate


@dataclass(frozen=True)
class BandPoint:
    """A point ``lam`` off the band with its disk preimage ``z``.

    ``dist`` is the distance to ``[-2, 2]`` and ``disc`` is ``|lam^2 - 4|``.
    """

    lam: complex
    z: complex
    dist: float
    disc: float


def dist_to_band(lam) -> float | np.ndarray:
    """Euclidean distance from ``lam`` to the segment ``[-2, 2]`` (vectorised)."""
    lam = np.asarray(lam, dtype=complex)
    x, y = np.abs(lam.real), np.abs(lam.imag)
    out = np.where(x <= 2.0, y, np.hypot(x - 2.0, y))
    return float(out) if out.ndim == 0 else out


def joukowski_preimage(lam) -> np.ndarray:
    """Root of ``z^2 - lam z + 1 = 0`` with ``|z| <= 1`` (vectorised, no domain check).

    The larger root ``(lam + s) / 2`` is formed with the sign of ``s``
    aligned to ``lam`` to avoid cancellation, and inverted.
    """
    lam = np.asarray(lam, dtype=complex)
    s = np.sqrt((lam - 2.0) * (lam + 2.0))
    s = np.where((lam.conj() * s).real >= 0, s, -s)
    big = 0.5 * (lam + s)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 / big


def disc_from_z(z) -> float | np.ndarray:
    """``|(z^2 - 1) / z|^2``, which equals ``|lam^2 - 4|`` for ``lam = z + 1/z``."""
    z = np.asarray(z, dtype=complex)
    out = np.abs((z * z - 1.0) / z) ** 2
    return float(out) if out.ndim == 0 else out


def dist_to_band_z(z) -> float | np.ndarray:
    """Distance of ``z + 1/z`` to the band, by the case formulas in ``z``.

    ``|1+z|^2/|z|`` when ``Re lam <= -2``, ``|1-z|^2/|z|`` when
    ``Re lam >= 2`` and ``|Im z| (1-|z|^2)/|z|^2`` otherwise.
    """
    z = np.asarray(z, dtype=complex)
    lam = z + 1.0 / z
    az = np.abs(z)
    left = np.abs(1.0 + z) ** 2 / az
    right = np.abs(1.0 - z) ** 2 / az
    middle = np.abs(z.imag) * (1.0 - az * az) / (az * az)
    out = np.where(lam.real <= -2.0, left, np.where(lam.real >= 2.0, right, middle))
    return float(out) if out.ndim == 0 else out


def inverse_joukowski(lam: complex) -> BandPoint:
    """Preimage of ``lam`` under ``z -> z + 1/z`` inside the unit disk."""
    lam = complex(lam)
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise BandError(f"non-finite point {lam}")
    dist = dist_to_band(lam)
    if dist <= BAND_CUTOFF:
        raise BandError(f"{lam} lies within {BAND_CUTOFF:g} of the band [-2, 2]")
    z = complex(joukowski_preimage(lam))
    disc = abs((lam - 2.0) * (lam + 2.0))
    return BandPoint(lam, z, dist, disc)


def green_kernel(z, m, n):
    """``z^{|m-n|} / (1/z - z)``: kernel of ``(lam - J0)^{-1}`` in terms of the preimage ``z``.

    Broadcasts over ``z``, ``m`` and ``n``.
    """
    z = np.asarray(z, dtype=complex)
    k = np.abs(np.asarray(m) - np.asarray(n))
    return z ** (k + 1) / (1.0 - z * z)


def free_green(lam: complex, m: int, n: int) -> complex:
    """Matrix entry ``(m, n)`` of the free resolvent ``(lam - J0)^{-1}``."""
    z = inverse_joukowski(lam).z
    return complex(green_kernel(z, m, n))


def trapezoid_periodic(f, *, rtol=1e-10, n0=64, n_max=2**20, atol=0.0):
    """Mean of a ``2 pi``-periodic function over one period by the trapezoid rule.

    ``f`` is evaluated on arrays of angles.  Nodes are doubled (reusing the
    previous ones) until two successive estimates agree to ``rtol``.

    Returns ``(mean, n_nodes)``.
    """
    n = n0
    total = np.sum(f(TWO_PI * np.arange(n) / n))
    est = total / n
    while n < n_max:
        total = total + np.sum(f(TWO_PI * (np.arange(n) + 0.5) / n))
        n *= 2
        new = total / n
        if abs(new - est) <= rtol * abs(new) + atol:
            return new, n
        est = new
    raise QuadratureError(f"trapezoid rule not converged with {n} nodes", est)


def v_lambda_norm(lam: complex, p: float) -> float:
    """``L^p(0, 2 pi)`` norm of ``theta -> 1 / (lam - 2 cos theta)``.

    Periodic trapezoid rule with node doubling to ``1e-10`` relative
    agreement.  Raises :class:`QuadratureError` (with the last estimate) if
    ``2**20`` nodes do not suffice.
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    lam = complex(lam)
    if dist_to_band(lam) <= BAND_CUTOFF:
        raise BandError(f"{lam} lies on the band")
    integrand = lambda t: np.abs(lam - 2.0 * np.cos(t)) ** (-p)
    try:
        mean, _ = trapezoid_periodic(integrand, rtol=1e-10)
    except QuadratureError as exc:
        raise QuadratureError(str(exc), (TWO_PI * exc.estimate) ** (1.0 / p)) from None
    return float((TWO_PI * mean) ** (1.0 / p))


def _trig_poly(coeffs, offset):
    coeffs = np.asarray(coeffs, dtype=complex)
    freqs = offset + np.arange(coeffs.size)

    def v(theta):
        theta = np.asarray(theta, dtype=float)
        return np.exp(1j * np.multiply.outer(theta, freqs)) @ coeffs / math.sqrt(TWO_PI)

    return v


def fourier_lp_norm(coeffs, q: float, offset: int = 0) -> float:
    """``L^q(0, 2 pi)`` norm of ``v = F^{-1}``-coefficients ``coeffs``.

    ``v(theta) = (2 pi)^{-1/2} sum_j coeffs[j] e^{i (offset + j) theta}``.
    """
    v = _trig_poly(coeffs, offset)
    deg = offset + len(coeffs)
    n0 = 64
    while n0 < 4 * max(abs(offset), abs(deg)) + 8:
        n0 *= 2
    mean, _ = trapezoid_periodic(lambda t: np.abs(v(t)) ** q, rtol=1e-13, n0=n0, atol=1e-300)
    return float((TWO_PI * mean) ** (1.0 / q))


def multiplier_matrix(k, coeffs, window, *, coeff_offset: int = 0, k_offset: int | None = None) -> np.ndarray:
    """Matrix of ``K F^{-1} M_v F`` on a finite index window.

    Entries are ``(2 pi)^{-1/2} k_m c_{m-n}`` for ``m, n`` in ``window``,
    where ``c_j = coeffs[j - coeff_offset]`` are the inverse Fourier
    coefficients of ``v`` and ``K`` multiplies by ``k``.

    Parameters
    ----------
    k : array_like
        Weights ``k_m`` for ``m = k_offset, k_offset + 1, ...``.
    coeffs : array_like
        Coefficients ``c_j`` for ``j = coeff_offset, coeff_offset + 1, ...``.
    window : (int, int)
        Inclusive index range ``(lo, hi)`` used for rows and columns.
    k_offset : int, optional
        Site of ``k[0]``; defaults to ``window[0]``.

    The window must contain the support of ``k`` and every column
    ``m - j`` reached from it, otherwise the matrix would be cut off and a
    ``ValueError`` is raised.
    """
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise ValueError("empty window")
    k = np.asarray(k, dtype=complex)
    coeffs = np.asarray(coeffs, dtype=complex)
    k_offset = lo if k_offset is None else int(k_offset)
    nz = np.flatnonzero(k)
    cz = np.flatnonzero(coeffs)
    if nz.size:
        kmin, kmax = k_offset + nz[0], k_offset + nz[-1]
        if kmin < lo or kmax > hi:
            raise ValueError(f"window [{lo}, {hi}] does not contain the support of k [{kmin}, {kmax}]")
        if cz.size:
            jmin, jmax = coeff_offset + cz[0], coeff_offset + cz[-1]
            if kmin - jmax < lo or kmax - jmin > hi:
                raise ValueError(
                    f"window [{lo}, {hi}] too small for columns [{kmin - jmax}, {kmax - jmin}]"
                )
    size = hi - lo + 1
    sites = np.arange(lo, hi + 1)
    kk = np.zeros(size, dtype=complex)
    inside = (sites >= k_offset) & (sites < k_offset + k.size)
    kk[inside] = k[sites[inside] - k_offset]
    j = sites[:, None] - sites[None, :] - coeff_offset
    valid = (j >= 0) & (j < coeffs.size)
    cmat = np.zeros((size, size), dtype=complex)
    cmat[valid] = coeffs[j[valid]]
    return kk[:, None] * cmat / math.sqrt(TWO_PI)


def band_neighbourhood_grid(n_dist: int = 30, n_pos: int = 30, dmin: float = 1e-3, dmax: float = 10.0) -> np.ndarray:
    """Points in the closed first quadrant at prescribed distances from the band.

    Row ``i`` lies on the level set ``dist = geomspace(dmin, dmax)[i]``,
    spread by arc length along the segment ``x + i d`` (``0 <= x <= 2``)
    followed by the quarter circle around ``2``.
    """
    dists = np.geomspace(dmin, dmax, n_dist)
    out = np.empty((n_dist, n_pos), dtype=complex)
    for i, d in enumerate(dists):
        arc = 0.5 * math.pi * d
        s = np.linspace(0.0, 2.0 + arc, n_pos)
        flat = s <= 2.0
        phi = 0.5 * math.pi - (s[~flat] - 2.0) / d
        out[i, flat] = s[flat] + 1j * d
        out[i, ~flat] = 2.0 + d * np.exp(1j * phi)
    return out
