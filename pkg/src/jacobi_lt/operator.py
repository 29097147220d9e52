"""Complex Jacobi operators as finite-support perturbations of the free operator.

The operator acts on sequences over the integers by

    (J u)(k) = a_{k-1} u(k-1) + b_k u(k) + c_k u(k+1),

and the free operator ``J0`` has ``a = c = 1``, ``b = 0``.  A
:class:`PerturbationSpec` stores the deviations ``a - 1``, ``b``, ``c - 1`` on
a finite window; outside the window the operator is exactly ``J0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PerturbationSpec",
    "RealSequence",
    "FactorizationResult",
    "d_sequence",
    "lp_norm",
    "factorize",
    "truncate",
    "delta_block",
]


def _frozen_complex(values) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    """Finitely supported deviations of ``(a, b, c)`` from the free operator.

    Parameters
    ----------
    offset : int
        Lowest site index ``k_min`` of the window.
    da, db, dc : array_like of complex
        ``a_k - 1``, ``b_k`` and ``c_k - 1`` for ``k = offset, ..., offset + W - 1``.
        All three must have the same length ``W >= 0``.
    """

    offset: int
    da: np.ndarray
    db: np.ndarray
    dc: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "offset", int(self.offset))
        da, db, dc = (_frozen_complex(v) for v in (self.da, self.db, self.dc))
        if not (da.size == db.size == dc.size):
            raise ValueError(
                f"da, db, dc must share one length, got {da.size}, {db.size}, {dc.size}"
            )
        for name, arr in (("da", da), ("db", db), ("dc", dc)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "da", da)
        object.__setattr__(self, "db", db)
        object.__setattr__(self, "dc", dc)

    @property
    def width(self) -> int:
        return int(self.db.size)

    @property
    def last(self) -> int:
        """Highest site index of the window (``offset - 1`` when empty)."""
        return self.offset + self.width - 1

    @classmethod
    def zero(cls, offset: int = 0, width: int = 0) -> "PerturbationSpec":
        z = np.zeros(width, dtype=complex)
        return cls(offset, z, z, z)

    @classmethod
    def from_sites(cls, a=None, b=None, c=None) -> "PerturbationSpec":
        """Build from ``{site: deviation}`` mappings, e.g. ``from_sites(b={0: 1})``.

        ``a`` and ``c`` give the deviations ``a_k - 1`` and ``c_k - 1``.
        """
        a, b, c = a or {}, b or {}, c or {}
        sites = set(a) | set(b) | set(c)
        if not sites:
            return cls.zero()
        lo, hi = min(sites), max(sites)
        arrs = []
        for mapping in (a, b, c):
            arr = np.zeros(hi - lo + 1, dtype=complex)
            for k, v in mapping.items():
                arr[k - lo] = v
            arrs.append(arr)
        return cls(lo, *arrs)

    def scaled(self, t: float) -> "PerturbationSpec":
        return PerturbationSpec(self.offset, t * self.da, t * self.db, t * self.dc)

    def coefficient(self, name: str, k: int) -> complex:
        """Deviation ``name`` in {'a', 'b', 'c'} at site ``k`` (zero outside the window)."""
        arr = {"a": self.da, "b": self.db, "c": self.dc}[name]
        i = k - self.offset
        if 0 <= i < arr.size:
            return complex(arr[i])
        return 0j

    def __eq__(self, other):
        if not isinstance(other, PerturbationSpec):
            return NotImplemented
        return (
            self.offset == other.offset
            and np.array_equal(self.da, other.da)
            and np.array_equal(self.db, other.db)
            and np.array_equal(self.dc, other.dc)
        )

    def __hash__(self):
        return hash((self.offset, self.da.tobytes(), self.db.tobytes(), self.dc.tobytes()))

    def to_json(self) -> dict:
        def pairs(arr):
            return [[float(v.real), float(v.imag)] for v in arr]

        return {"offset": self.offset, "da": pairs(self.da), "db": pairs(self.db), "dc": pairs(self.dc)}

    @classmethod
    def from_json(cls, obj: dict) -> "PerturbationSpec":
        try:
            offset = obj["offset"]
            arrs = [[complex(re, im) for re, im in obj[key]] for key in ("da", "db", "dc")]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed perturbation spec: {exc}") from exc
        if not isinstance(offset, int) or isinstance(offset, bool):
            raise ValueError("offset must be an integer")
        return cls(offset, *arrs)


@dataclass(frozen=True, eq=False)
class RealSequence:
    """Nonnegative real sequence ``values[i]`` living at site ``offset + i``."""

    offset: int
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(vals)):
            raise ValueError("sequence contains non-finite values")
        if np.any(vals < 0):
            raise ValueError("sequence values must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    def __getitem__(self, k: int) -> float:
        i = k - self.offset
        if 0 <= i < self.values.size:
            return float(self.values[i])
        return 0.0

    @property
    def sites(self) -> range:
        return range(self.offset, self.offset + self.values.size)

    def __eq__(self, other):
        if not isinstance(other, RealSequence):
            return NotImplemented
        return self.offset == other.offset and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class FactorizationResult:
    """``J - J0 = D^{1/2} U D^{1/2}`` restricted to the window of ``d``.

    ``u_minus[i]``, ``u_zero[i]``, ``u_plus[i]`` are the entries ``u_k^-``,
    ``u_k^0``, ``u_k^+`` for ``k = d_half.offset + i``; ``U`` maps ``delta_k``
    to ``u_k^- delta_{k-1} + u_k^0 delta_k + u_k^+ delta_{k+1}``.
    """

    d_half: RealSequence
    u_minus: np.ndarray
    u_zero: np.ndarray
    u_plus: np.ndarray

    @property
    def offset(self) -> int:
        return self.d_half.offset

    def u_matrix(self) -> np.ndarray:
        """Tridiagonal block of ``U`` on the window (column ``k`` holds ``U delta_k``)."""
        n = len(self.d_half)
        u = np.zeros((n, n), dtype=complex)
        idx = np.arange(n)
        u[idx, idx] = self.u_zero
        u[idx[1:] - 1, idx[1:]] = self.u_minus[1:]
        u[idx[:-1] + 1, idx[:-1]] = self.u_plus[:-1]
        return u

    def reconstruct(self) -> np.ndarray:
        """``D^{1/2} U D^{1/2}`` on the window, as a dense block."""
        s = self.d_half.values
        return s[:, None] * self.u_matrix() * s[None, :]


def d_sequence(pert: PerturbationSpec) -> RealSequence:
    """Site-wise maximum of the neighbouring coefficient deviations.

    ``d_k = max(|a_{k-1}-1|, |a_k-1|, |b_k|, |c_{k-1}-1|, |c_k-1|)``, returned
    on the perturbation window widened by one site on each side.
    """
    w = pert.width
    # Padded arrays: index j corresponds to site offset - 2 + j.
    pad = lambda arr: np.concatenate([np.zeros(2), np.abs(arr), np.zeros(2)])
    da, db, dc = pad(pert.da), pad(pert.db), pad(pert.dc)
    # Output site k = offset - 1 + i  ->  padded index i + 1 for "k", i for "k-1".
    cur = slice(1, w + 3)
    prev = slice(0, w + 2)
    d = np.max(np.stack([da[prev], da[cur], db[cur], dc[prev], dc[cur]]), axis=0)
    return RealSequence(pert.offset - 1, d)


def lp_norm(seq, p: float) -> float:
    """``(sum |d_k|^p)^(1/p)`` for ``p >= 1`` (``p = inf`` gives the max)."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    vals = np.abs(seq.values if isinstance(seq, RealSequence) else np.asarray(seq))
    if vals.size == 0:
        return 0.0
    if math.isinf(p):
        return float(vals.max())
    scale = vals.max()
    if scale == 0:
        return 0.0
    return float(scale * np.sum((vals / scale) ** p) ** (1.0 / p))


def _ratio(num: complex, den: float) -> complex:
    # 0/0 := 1; a nonzero numerator over a zero denominator cannot occur by
    # construction of d.
    if num == 0 and den == 0:
        return 1.0 + 0j
    return num / den


def factorize(pert: PerturbationSpec) -> FactorizationResult:
    """Factor ``J - J0 = D^{1/2} U D^{1/2}`` on the widened window."""
    d = d_sequence(pert)
    n = len(d)
    lo = d.offset
    dv = d.values
    dnb = lambda k: d[k]
    u_minus = np.empty(n, dtype=complex)
    u_zero = np.empty(n, dtype=complex)
    u_plus = np.empty(n, dtype=complex)
    for i in range(n):
        k = lo + i
        u_minus[i] = _ratio(pert.coefficient("c", k - 1), math.sqrt(dnb(k - 1) * dv[i]))
        u_zero[i] = _ratio(pert.coefficient("b", k), dv[i])
        u_plus[i] = _ratio(pert.coefficient("a", k), math.sqrt(dnb(k + 1) * dv[i]))
    for arr in (u_minus, u_zero, u_plus):
        arr.setflags(write=False)
    return FactorizationResult(RealSequence(lo, np.sqrt(dv)), u_minus, u_zero, u_plus)


def truncate(pert: PerturbationSpec, n_min: int, n_max: int, *, free: bool = False) -> np.ndarray:
    """Finite section of ``J`` on sites ``n_min..n_max`` with a hard cutoff.

    Row ``i`` corresponds to site ``n_min + i``: subdiagonal ``a_k``, diagonal
    ``b_k``, superdiagonal ``c_k``.  With ``free=True`` the section of ``J0``
    is returned instead (the window check still applies).
    """
    if n_max < n_min:
        raise ValueError("empty truncation window")
    if pert.width and (pert.offset < n_min or pert.last > n_max):
        raise ValueError(
            f"window [{n_min}, {n_max}] excludes part of the support "
            f"[{pert.offset}, {pert.last}]"
        )
    n = n_max - n_min + 1
    a = np.ones(n - 1, dtype=complex)
    b = np.zeros(n, dtype=complex)
    c = np.ones(n - 1, dtype=complex)
    if not free and pert.width:
        s = pert.offset - n_min
        b[s : s + pert.width] += pert.db
        # a_k sits at row k+1, column k; only k <= n_max - 1 fits in the section.
        m = min(pert.width, n - 1 - s)
        a[s : s + m] += pert.da[:m]
        c[s : s + m] += pert.dc[:m]
    out = np.diag(b)
    idx = np.arange(n - 1)
    out[idx + 1, idx] = a
    out[idx, idx + 1] = c
    return out


def delta_block(pert: PerturbationSpec) -> tuple[int, np.ndarray]:
    """``J - J0`` on the widened window ``[offset - 1, offset + W]``.

    Returns ``(first_site, block)``; the block contains every nonzero entry of
    ``J - J0``.
    """
    lo = pert.offset - 1
    n = pert.width + 2
    out = np.zeros((n, n), dtype=complex)
    for i in range(pert.width):
        j = i + 1  # block index of site offset + i
        out[j, j] = pert.db[i]
        out[j + 1, j] = pert.da[i]
        out[j, j + 1] = pert.dc[i]
    return lo, out
