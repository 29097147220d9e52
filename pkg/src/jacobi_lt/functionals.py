"""Eigenvalue-sum functionals of Lieb-Thirring type and their bookkeeping.

Every functional is a multiplicity-weighted sum over discrete eigenvalues
``lam`` of a term built from ``dist(lam, [-2, 2])`` and ``|lam^2 - 4|``.
Both quantities are always recomputed from ``lam``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .resolvent import BAND_CUTOFF, BandError, dist_to_band

__all__ = [
    "Kind",
    "Sector",
    "Region",
    "FunctionalSpec",
    "CorollaryExponents",
    "EmpiricalConstant",
    "lt_term",
    "lt_functional",
    "sector_membership",
    "region",
    "corollary_exponents",
    "empirical_constant",
    "sector_constant_shape",
]

REAL_TOL = 1e-8


class Kind(str, enum.Enum):
    MAIN = "main"
    L1 = "l1"
    BGK = "bgk"
    THM4 = "thm4"
    HS = "hs"
    SECTOR_PLUS = "sector_plus"
    SECTOR_MINUS = "sector_minus"


class Sector(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    BOTH = "both"
    NEITHER = "neither"


class Region(str, enum.Enum):
    PSI1 = "psi1"
    PSI2 = "psi2"
    LEFT = "left"  # Re lam <= 0, outside both regions


_TAU_KINDS = {Kind.MAIN, Kind.L1, Kind.BGK, Kind.THM4}
_SECTOR_KINDS = {Kind.SECTOR_PLUS, Kind.SECTOR_MINUS}


@dataclass(frozen=True)
class FunctionalSpec:
    """Which eigenvalue sum to evaluate, with its parameters.

    Parameters
    ----------
    kind : Kind or str
        One of ``main, l1, bgk, thm4, hs, sector_plus, sector_minus``.
    p : float
        Exponent. ``main`` and ``bgk`` need ``p > 1``, ``l1`` needs ``p = 1``,
        ``thm4`` and the sector kinds need ``p >= 3/2``, ``hs`` needs ``p >= 1``.
    tau : float, optional
        In ``(0, 1)``; required by ``main, l1, bgk, thm4`` and unused otherwise.
    theta : float, optional
        Sector opening in ``[0, pi/2)``; required by the sector kinds.
    exploratory : bool
        Allows ``tau = 0`` for ``main`` and ``l1``.  Such values carry no
        pass/fail meaning and are only reported.
    """

    kind: Kind
    p: float
    tau: float | None = None
    theta: float | None = None
    exploratory: bool = False

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        p = float(self.p)
        object.__setattr__(self, "p", p)
        if not math.isfinite(p):
            raise ValueError("p must be finite")
        if kind in (Kind.MAIN, Kind.BGK) and not p > 1:
            raise ValueError(f"{kind.value} needs p > 1, got {p}")
        if kind is Kind.L1 and p != 1:
            raise ValueError(f"l1 needs p = 1, got {p}")
        if kind in (Kind.THM4, *_SECTOR_KINDS) and not p >= 1.5:
            raise ValueError(f"{kind.value} needs p >= 3/2, got {p}")
        if kind is Kind.HS and not p >= 1:
            raise ValueError(f"hs needs p >= 1, got {p}")

        if kind in _TAU_KINDS:
            if self.tau is None:
                raise ValueError(f"{kind.value} needs tau")
            tau = float(self.tau)
            lo_ok = tau > 0 or (tau == 0 and self.exploratory and kind in (Kind.MAIN, Kind.L1))
            if not (lo_ok and tau < 1):
                raise ValueError(f"tau must lie in (0, 1), got {tau}")
            object.__setattr__(self, "tau", tau)
        elif self.tau is not None:
            raise ValueError(f"{kind.value} takes no tau")

        if kind in _SECTOR_KINDS:
            if self.theta is None:
                raise ValueError(f"{kind.value} needs theta")
            theta = float(self.theta)
            if not 0 <= theta < math.pi / 2:
                raise ValueError(f"theta must lie in [0, pi/2), got {theta}")
            object.__setattr__(self, "theta", theta)
        elif self.theta is not None:
            raise ValueError(f"{kind.value} takes no theta")

    @property
    def label(self) -> str:
        parts = [self.kind.value, f"p={self.p:g}"]
        if self.tau is not None:
            parts.append(f"tau={self.tau:g}")
        if self.theta is not None:
            parts.append(f"theta={self.theta:g}")
        return ",".join(parts)


def sector_membership(lam: complex, theta: float) -> Sector:
    """Membership of ``lam`` in the open sectors ``2 -+ Re lam < tan(theta) |Im lam|``."""
    if not 0 <= theta < math.pi / 2:
        raise ValueError(f"theta must lie in [0, pi/2), got {theta}")
    lam = complex(lam)
    slope = math.tan(theta) * abs(lam.imag)
    plus = 2.0 - lam.real < slope
    minus = 2.0 + lam.real < slope
    if plus and minus:
        return Sector.BOTH
    if plus:
        return Sector.PLUS
    if minus:
        return Sector.MINUS
    return Sector.NEITHER


def region(lam: complex) -> Region:
    """Diagnostic split of the right half plane.

    ``psi1`` is ``Re lam > 0`` with ``2 - Re lam < |Im lam|``; ``psi2`` is the
    rest of ``Re lam > 0``.
    """
    lam = complex(lam)
    if lam.real <= 0:
        return Region.LEFT
    return Region.PSI1 if 2.0 - lam.real < abs(lam.imag) else Region.PSI2


def _check_off_band(lam: complex) -> tuple[float, float]:
    dist = float(dist_to_band(lam))
    if not dist > BAND_CUTOFF:
        raise BandError(f"eigenvalue {lam} lies on the band")
    disc = abs((lam - 2.0) * (lam + 2.0))
    return dist, disc


def lt_term(lam: complex, spec: FunctionalSpec) -> float:
    """Single-eigenvalue summand of the functional ``spec`` (multiplicity one)."""
    lam = complex(lam)
    dist, disc = _check_off_band(lam)
    p, tau, kind = spec.p, spec.tau, spec.kind
    if kind is Kind.MAIN:
        return dist ** (p + tau) / math.sqrt(disc)
    if kind is Kind.L1:
        return dist ** (1.0 + tau) / disc ** (0.5 + tau / 4.0)
    if kind is Kind.BGK:
        return dist ** (p + 1.0 + tau) / disc
    if kind is Kind.THM4:
        return dist ** (p + tau) / disc ** (0.5 + tau)
    if kind is Kind.HS:
        if abs(lam.imag) > REAL_TOL * (1.0 + abs(lam)):
            raise ValueError(f"hs needs a real spectrum, got {lam}")
        anchor = 2.0 if lam.real > 0 else -2.0
        return abs(lam.real - anchor) ** (p - 0.5)
    side = sector_membership(lam, spec.theta)
    if kind is Kind.SECTOR_PLUS:
        return abs(lam - 2.0) ** (p - 0.5) if side in (Sector.PLUS, Sector.BOTH) else 0.0
    return abs(lam + 2.0) ** (p - 0.5) if side in (Sector.MINUS, Sector.BOTH) else 0.0


def _points(eigs) -> Iterable[tuple[complex, int]]:
    for e in eigs:
        if hasattr(e, "lam"):
            lam, mult = e.lam, e.multiplicity
        elif isinstance(e, tuple):
            lam, mult = e
        else:
            lam, mult = e, 1
        if int(mult) != mult or mult < 1:
            raise ValueError(f"multiplicity must be a positive integer, got {mult}")
        yield complex(lam), int(mult)


def lt_functional(eigs, spec: FunctionalSpec) -> float:
    """Multiplicity-weighted sum of :func:`lt_term` over ``eigs``.

    ``eigs`` may hold :class:`~jacobi_lt.zeros.SpectralPoint` objects,
    ``(lam, multiplicity)`` pairs or bare complex numbers.
    """
    return float(sum(m * lt_term(lam, spec) for lam, m in _points(eigs)))


def sector_constant_shape(p: float, theta: float) -> float:
    """``(1 + 2 tan theta)^p``, the known theta-dependence of the sector constant."""
    return (1.0 + 2.0 * math.tan(theta)) ** p


@dataclass(frozen=True)
class CorollaryExponents:
    eta1: float
    eta2: float

    def __post_init__(self):
        if not self.eta1 > 0 or self.eta2 < 0:
            raise ValueError("need eta1 > 0 and eta2 >= 0")

    @property
    def band_exponent(self) -> float:
        """``(eta1 - eta2) / 2``, the power of ``|lam^2 - 4|`` in the resulting sum."""
        return 0.5 * (self.eta1 - self.eta2)


def corollary_exponents(alpha: float, beta: float, tau: float) -> CorollaryExponents:
    """``eta1 = alpha + 1 + tau`` and ``eta2 = (2 beta + alpha - 1 + tau)_+``."""
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be nonnegative")
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    return CorollaryExponents(alpha + 1.0 + tau, max(2.0 * beta + alpha - 1.0 + tau, 0.0))


@dataclass(frozen=True)
class EmpiricalConstant:
    value: float
    argmax: object


def empirical_constant(reports: Sequence, ids: Sequence | None = None) -> EmpiricalConstant:
    """Largest ratio ``value / norm`` over ``(functional value, ||d||_p^p)`` pairs.

    ``argmax`` is the matching entry of ``ids`` (default: the position).
    Ties resolve to the first occurrence.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("empirical_constant needs at least one report")
    ids = list(range(len(reports))) if ids is None else list(ids)
    if len(ids) != len(reports):
        raise ValueError("ids and reports differ in length")
    values = np.array([float(v) for v, _ in reports])
    norms = np.array([float(n) for _, n in reports])
    if np.any(~(norms > 0)):
        raise ValueError("all norms must be positive")
    if np.any(values < 0):
        raise ValueError("functional values must be nonnegative")
    ratios = values / norms
    i = int(np.argmax(ratios))
    return EmpiricalConstant(float(ratios[i]), ids[i])
