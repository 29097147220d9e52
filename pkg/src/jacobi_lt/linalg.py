"""Dense complex linear algebra: eigenvalues, singular values, Schatten norms
and regularized determinants.

Matrices are plain 2-D numpy arrays; inputs are never modified.
"""
from __future__ import annotations

import math

import numba
import numpy as np

__all__ = [
    "ConvergenceError",
    "balance",
    "hessenberg",
    "eigenvalues",
    "singular_values",
    "schatten_norm",
    "operator_norm",
    "regularized_det",
    "log_regularized_det",
]

EPS = np.finfo(float).eps


class ConvergenceError(np.linalg.LinAlgError):
    """Raised when an iteration hits its cap.

    ``found`` holds the eigenvalues deflated before the failure and
    ``active`` the size of the block that did not converge.
    """

    def __init__(self, msg, found=None, active=None):
        super().__init__(msg)
        self.found = found
        self.active = active


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    m = m.astype(np.complex128, copy=True)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def balance(m: np.ndarray) -> np.ndarray:
    """Diagonal similarity scaling by powers of two (no permutations).

    Rows and columns are rescaled until their off-diagonal 1-norms are within
    a factor of two of each other.  Returns the scaled copy.
    """
    h = _as_matrix(m)
    n = h.shape[0]
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            col = np.sum(np.abs(h[:, i])) - abs(h[i, i])
            row = np.sum(np.abs(h[i, :])) - abs(h[i, i])
            if col == 0 or row == 0:
                continue
            g = row / radix
            f = 1.0
            s = col + row
            while col < g:
                f *= radix
                col *= radix * radix
            g = row * radix
            while col >= g:
                f /= radix
                col /= radix * radix
            if (col + row) / f < 0.95 * s:
                converged = False
                h[i, :] /= f
                h[:, i] *= f
    return h


def hessenberg(m: np.ndarray) -> np.ndarray:
    """Unitary similarity reduction to upper Hessenberg form (Householder)."""
    h = _as_matrix(m)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1 :, k]
        alpha = np.linalg.norm(x[1:])
        if alpha == 0.0:
            continue
        x0 = x[0]
        norm = math.hypot(abs(x0), alpha)
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v = x.copy()
        v[0] = x0 + phase * norm
        v /= np.linalg.norm(v)
        # H <- P H P with P = I - 2 v v^*
        h[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1 :, k:])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ v, v.conj())
        h[k + 2 :, k] = 0.0
    return h


@numba.njit(cache=True, nogil=True)
def _wilkinson(a, b, c, d):
    # Eigenvalue of [[a, b], [c, d]] closer to d.
    t = 0.5 * (a - d)
    disc = np.sqrt(t * t + b * c)
    s1 = t + disc
    s2 = t - disc
    den = s1 if abs(s1) >= abs(s2) else s2
    if den == 0:
        return d
    return d - b * c / den


@numba.njit(cache=True, nogil=True)
def _hqr(h, w, max_iter):
    """Shifted complex QR on Hessenberg ``h`` (overwritten), eigenvalues only.

    Returns ``(status, ihi, total_iterations)``; ``status`` is 0 on success.
    On failure ``w[ihi+1:]`` holds the eigenvalues deflated so far.
    """
    n = h.shape[0]
    eps = 2.220446049250313e-16
    ihi = n - 1
    its = 0
    total = 0
    while ihi >= 0:
        l = 0
        for k in range(ihi, 0, -1):
            tst = abs(h[k - 1, k - 1]) + abs(h[k, k])
            if tst == 0.0:
                tst = abs(h[k - 1, k]) + abs(h[k, k - 1])
            if abs(h[k, k - 1]) <= eps * tst:
                h[k, k - 1] = 0.0
                l = k
                break
        if l == ihi:
            w[ihi] = h[ihi, ihi]
            ihi -= 1
            its = 0
            continue
        if total >= max_iter:
            return 1, ihi, total
        its += 1
        total += 1
        if its % 10 == 0:
            # exceptional shift after repeated stalls
            mu = h[ihi, ihi] + 0.75 * abs(h[ihi, ihi - 1].real)
        else:
            mu = _wilkinson(h[ihi - 1, ihi - 1], h[ihi - 1, ihi], h[ihi, ihi - 1], h[ihi, ihi])
        x = h[l, l] - mu
        y = h[l + 1, l]
        for k in range(l, ihi):
            if k > l:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            ax = abs(x)
            rho = np.hypot(ax, abs(y))
            if rho == 0.0:
                continue
            if ax == 0.0:
                c = 0.0
                s = np.conj(y) / rho
            else:
                c = ax / rho
                s = (x / ax) * np.conj(y) / rho
            sc = np.conj(s)
            j0 = k - 1 if k > l else l
            for j in range(j0, ihi + 1):
                t1 = h[k, j]
                t2 = h[k + 1, j]
                h[k, j] = c * t1 + s * t2
                h[k + 1, j] = c * t2 - sc * t1
            if k > l:
                h[k + 1, k - 1] = 0.0
            iend = min(k + 2, ihi)
            for i in range(l, iend + 1):
                t1 = h[i, k]
                t2 = h[i, k + 1]
                h[i, k] = c * t1 + sc * t2
                h[i, k + 1] = c * t2 - s * t1
    return 0, -1, total


def _is_hessenberg(m: np.ndarray) -> bool:
    return not np.any(np.tril(m, -2))


def eigenvalues(m, *, max_iter: int | None = None) -> np.ndarray:
    """All eigenvalues of a square complex matrix, with algebraic multiplicity.

    Balancing, Householder reduction to Hessenberg form (skipped for input
    that is already Hessenberg, e.g. tridiagonal) and single-shift implicit
    QR with Wilkinson shifts.  The iteration cap defaults to ``40 n``.

    Raises
    ------
    ConvergenceError
        If the cap is reached; carries the eigenvalues deflated so far.
    """
    h = _as_matrix(m)
    n, k = h.shape
    if n != k:
        raise ValueError(f"eigenvalues need a square matrix, got {h.shape}")
    if n == 0:
        return np.zeros(0, dtype=complex)
    h = balance(h)
    if not _is_hessenberg(h):
        h = hessenberg(h)
    w = np.zeros(n, dtype=np.complex128)
    cap = 40 * n if max_iter is None else int(max_iter)
    status, ihi, _ = _hqr(np.ascontiguousarray(h), w, cap)
    if status:
        raise ConvergenceError(
            f"QR iteration cap {cap} reached with an active block of size {ihi + 1}",
            found=w[ihi + 1 :].copy(),
            active=ihi + 1,
        )
    return w


@numba.njit(cache=True, nogil=True)
def _jacobi_sweeps(a, tol, max_sweeps):
    # One-sided (Hestenes) Jacobi: orthogonalise the columns of ``a`` in place.
    m, n = a.shape
    # Columns below this squared norm carry only rounding noise; rotating
    # against them never settles, so they are left alone.
    fro2 = 0.0
    for r in range(m):
        for j in range(n):
            fro2 += a[r, j].real * a[r, j].real + a[r, j].imag * a[r, j].imag
    negligible = tol * tol * fro2
    for sweep in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0 + 0.0j
                for r in range(m):
                    ai = a[r, i]
                    aj = a[r, j]
                    alpha += ai.real * ai.real + ai.imag * ai.imag
                    beta += aj.real * aj.real + aj.imag * aj.imag
                    gamma += np.conj(ai) * aj
                g = abs(gamma)
                if g == 0.0 or g <= tol * np.sqrt(alpha * beta) or min(alpha, beta) <= negligible:
                    continue
                rotated = True
                phase = gamma / g
                zeta = (beta - alpha) / (2.0 * g)
                sign = 1.0 if zeta >= 0 else -1.0
                t = sign / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for r in range(m):
                    ai = a[r, i]
                    aj = a[r, j] * np.conj(phase)
                    a[r, i] = c * ai - s * aj
                    a[r, j] = s * ai + c * aj
        if not rotated:
            return sweep
    return -1


def singular_values(m, *, max_sweeps: int = 60) -> np.ndarray:
    """Singular values, nonincreasing, by one-sided Jacobi iteration.

    Works on the orientation with fewer columns, so the result has
    ``min(rows, cols)`` entries.
    """
    a = _as_matrix(m)
    if a.shape[1] > a.shape[0]:
        a = a.conj().T.copy()
    if a.size == 0:
        return np.zeros(0)
    scale = np.max(np.abs(a))
    if scale == 0:
        return np.zeros(a.shape[1])
    a /= scale
    a = np.ascontiguousarray(a)
    if _jacobi_sweeps(a, a.shape[0] * EPS, max_sweeps) < 0:
        raise ConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")
    sv = np.sqrt(np.sum(np.abs(a) ** 2, axis=0)) * scale
    return np.sort(sv)[::-1]


def schatten_norm(m, p: float) -> float:
    """``(sum mu_n^p)^(1/p)`` over the singular values ``mu_n``; ``p = inf`` is the operator norm."""
    if not p > 0:
        raise ValueError(f"Schatten index must be positive, got {p}")
    sv = singular_values(m)
    if sv.size == 0 or sv[0] == 0:
        return 0.0
    if math.isinf(p):
        return float(sv[0])
    top = sv[0]
    return float(top * np.sum((sv / top) ** p) ** (1.0 / p))


def operator_norm(m) -> float:
    """Largest singular value."""
    sv = singular_values(m)
    return float(sv[0]) if sv.size else 0.0


def log_regularized_det(m, n: int) -> complex:
    """Complex logarithm of ``det_n(I - m)``; ``-inf`` when ``1`` is an eigenvalue of ``m``.

    The imaginary part is only defined modulo ``2 pi``.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"regularization order must be a positive integer, got {n}")
    n = int(n)
    c = _as_matrix(m)
    if c.shape[0] != c.shape[1]:
        raise ValueError("regularized determinant needs a square matrix")
    lam = eigenvalues(c)
    if np.any(lam == 1.0):
        return complex(-math.inf, 0.0)
    total = np.sum(np.log(1.0 - lam))
    for j in range(1, n):
        total += np.sum(lam**j) / j
    return complex(total)


def regularized_det(m, n: int) -> complex:
    """``det_n(I - m) = prod (1 - mu) exp(sum_{j<n} mu^j / j)`` over the eigenvalues ``mu`` of ``m``.

    Accumulated as a sum of logarithms with one final exponential.  An
    eigenvalue exactly equal to one gives exactly zero.
    """
    log = log_regularized_det(m, n)
    if math.isinf(log.real) and log.real < 0:
        return 0j
    with np.errstate(over="ignore"):
        return complex(np.exp(log))
