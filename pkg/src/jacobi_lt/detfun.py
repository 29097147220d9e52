"""The regularized perturbation determinant

    g(lam) = det_n(I - (lam - J0)^{-1} (J - J0)),   n = ceil(p),

evaluated exactly through the finite block on which ``J - J0`` lives.  Its
zeros off the band are the discrete eigenvalues of ``J`` with algebraic
multiplicity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import regularized_det, schatten_norm
from .operator import PerturbationSpec, delta_block, factorize
from .resolvent import BAND_CUTOFF, BandError, dist_to_band, green_kernel, joukowski_preimage

__all__ = [
    "DetContext",
    "gamma_p",
    "reg_order",
    "perturbation_determinant",
    "det_block",
    "h_of_z",
    "G_matrix",
    "det_via_G",
    "log_g_bound",
]


def reg_order(p: float) -> int:
    """``ceil(p)`` as an exact integer, at least one."""
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    return max(1, math.ceil(p))


def gamma_p(p: float) -> float:
    """Constant in ``|det_ceil(p)(I - C)| <= exp(Gamma_p ||C||_p^p)``.

    Sharp values ``1/p`` for ``p <= 1`` and ``1/2`` for ``p = 2``; otherwise
    the general upper bound ``e (2 + log p)``.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    if p <= 1:
        return 1.0 / p
    if p == 2:
        return 0.5
    return math.e * (2.0 + math.log(p))


@dataclass(frozen=True)
class DetContext:
    """Perturbation plus regularization order, with the cached finite blocks.

    ``window`` is the perturbation window widened by one site on each side;
    it contains every nonzero entry of ``J - J0``.
    """

    pert: PerturbationSpec
    reg_order: int = 1

    def __post_init__(self):
        if int(self.reg_order) != self.reg_order or self.reg_order < 1:
            raise ValueError(f"reg_order must be a positive integer, got {self.reg_order}")
        lo, block = delta_block(self.pert)
        fac = factorize(self.pert)
        object.__setattr__(self, "_lo", lo)
        object.__setattr__(self, "_delta", block)
        object.__setattr__(self, "_fac", fac)

    @classmethod
    def for_p(cls, pert: PerturbationSpec, p: float) -> "DetContext":
        return cls(pert, reg_order(p))

    @property
    def window(self) -> tuple[int, int]:
        return self._lo, self._lo + self._delta.shape[0] - 1

    @property
    def delta(self) -> np.ndarray:
        """``J - J0`` on the window."""
        return self._delta

    @property
    def factorization(self):
        return self._fac

    def sites(self) -> np.ndarray:
        lo, hi = self.window
        return np.arange(lo, hi + 1)


def _check_off_band(lam):
    lam = np.asarray(lam, dtype=complex)
    if np.any(dist_to_band(lam) <= BAND_CUTOFF):
        raise BandError("determinant evaluated on the band [-2, 2]")
    return lam


def _resolvent_block(z, sites):
    # (lam - J0)^{-1} restricted to the window, for each z: shape z.shape + (n, n).
    z = np.asarray(z, dtype=complex)[..., None, None]
    return green_kernel(z, sites[:, None], sites[None, :])


def det_block(ctx: DetContext, z) -> np.ndarray:
    """``C_W = P (lam - J0)^{-1} (J - J0) P`` on the window, with ``lam = z + 1/z``.

    Vectorised over ``z`` (``|z| < 1``); returns shape ``z.shape + (n, n)``.
    """
    return _resolvent_block(z, ctx.sites()) @ ctx.delta


def _det_from_z(ctx: DetContext, z, order: int) -> np.ndarray:
    c = det_block(ctx, z)
    n = c.shape[-1]
    out = np.linalg.det(np.eye(n) - c)
    if order > 1:
        corr = np.zeros(out.shape, dtype=complex)
        power = c
        for j in range(1, order):
            if j > 1:
                power = power @ c
            corr += np.trace(power, axis1=-2, axis2=-1) / j
        out = out * np.exp(corr)
    return out


def perturbation_determinant(ctx: DetContext, lam, *, order: int | None = None):
    """``g(lam) = det_n(I - (lam - J0)^{-1}(J - J0))`` with ``n = ctx.reg_order``.

    ``det_1`` is the determinant of ``I - C_W`` on the window; higher orders
    multiply by ``exp(sum_{j<n} tr(C_W^j) / j)``.  Vectorised over ``lam``.
    """
    lam = _check_off_band(lam)
    order = ctx.reg_order if order is None else int(order)
    out = _det_from_z(ctx, joukowski_preimage(lam), order)
    return complex(out) if out.ndim == 0 else out


def h_of_z(ctx: DetContext, z, *, order: int = 1):
    """``h(z) = g(z + 1/z)`` for ``|z| < 1``, extended by ``h(0) = 1``.

    With the default ``order=1`` this is a rational function of ``z`` whose
    only poles are at ``z = +-1``.
    """
    z = np.asarray(z, dtype=complex)
    out = _det_from_z(ctx, z, order)
    return complex(out) if out.ndim == 0 else out


def G_matrix(ctx: DetContext, lam: complex) -> np.ndarray:
    """``D^{1/2} (lam - J0)^{-1} D^{1/2}`` on the window of ``d``.

    Empty (0 x 0) for the zero perturbation.
    """
    lam = complex(_check_off_band(lam))
    fac = ctx.factorization
    s = fac.d_half.values
    if not np.any(s):
        return np.zeros((0, 0), dtype=complex)
    z = joukowski_preimage(lam)
    sites = np.arange(fac.offset, fac.offset + s.size)
    return s[:, None] * _resolvent_block(z, sites) * s[None, :]


def det_via_G(ctx: DetContext, lam: complex, *, order: int | None = None) -> complex:
    """``det_n(I - G(lam) U)``: the factorised representation of ``g``, through eigenvalues."""
    order = ctx.reg_order if order is None else int(order)
    g = G_matrix(ctx, lam)
    if g.size == 0:
        return 1.0 + 0j
    return regularized_det(g @ ctx.factorization.u_matrix(), order)


def log_g_bound(ctx: DetContext, lam: complex, p: float) -> tuple[float, float]:
    """``(log|g(lam)|, Gamma_p 3^p ||G(lam)||_{S_p}^p)`` with ``n = ceil(p)``.

    The first never exceeds the second; this is asserted for ``p`` in
    ``{1, 2}`` where ``Gamma_p`` is sharp and only reported otherwise.
    """
    n = reg_order(p)
    g = perturbation_determinant(ctx, lam, order=n)
    lhs = math.log(abs(g)) if g != 0 else -math.inf
    block = G_matrix(ctx, lam)
    norm = schatten_norm(block, p) if block.size else 0.0
    rhs = gamma_p(p) * 3.0**p * norm**p
    return lhs, rhs

