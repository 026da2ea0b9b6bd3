"""Dense complex matrix helpers: Hermitian eigensolver, PSD test, padding.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Everything in
here is a pure function; nothing mutates its inputs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DimensionTooSmall, NoConvergence, NotHermitian

MAX_SWEEPS = 100


@dataclass(frozen=True)
class Tolerances:
    """Absolute tolerances used across the package.

    eps_structural
        Validation of invariants (Hermitian symmetry, Kraus completeness,
        stochastic row sums).
    eps_zero
        Deciding whether a probability or trace is zero.
    eps_eig
        Off-diagonal Frobenius norm at which the Jacobi sweeps stop.
    """

    eps_structural: float = 1e-9
    eps_zero: float = 1e-8
    eps_eig: float = 1e-12

    def __post_init__(self):
        for name in ("eps_structural", "eps_zero", "eps_eig"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.eps_eig <= self.eps_structural <= self.eps_zero:
            warnings.warn(
                "tolerances are expected to satisfy eps_eig <= eps_structural <= eps_zero",
                stacklevel=2,
            )


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Violation:
    """One failed invariant: what was violated, by how much, and where."""

    invariant: str
    deviation: float
    where: str = ""

    def __str__(self):
        loc = f" at {self.where}" if self.where else ""
        return f"{self.invariant}{loc} (deviation {self.deviation:.3g})"

    def to_dict(self) -> dict:
        return {"invariant": self.invariant, "deviation": self.deviation, "where": self.where}


def as_matrix(m, *, square: bool = False) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex128 array."""
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def max_abs(m) -> float:
    a = np.asarray(m)
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermitian_deviation(m: np.ndarray) -> float:
    return max_abs(m - dagger(m))


def is_hermitian(m, tol: Tolerances = DEFAULT_TOL) -> bool:
    a = np.asarray(m)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and hermitian_deviation(a) <= tol.eps_structural


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def eig_hermitian(m, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Parameters
    ----------
    m : array_like
        Square matrix, Hermitian within ``tol.eps_structural``.
    tol : Tolerances

    Returns
    -------
    eigenvalues : ndarray of float, ascending
    eigenvectors : ndarray of complex, orthonormal columns with
        ``V @ diag(eigenvalues) @ V^H == m``.

    Raises
    ------
    NotHermitian
        If ``m`` is not Hermitian within tolerance.
    NoConvergence
        If the off-diagonal norm is still above the stopping threshold after
        ``MAX_SWEEPS`` sweeps.
    """
    a = as_matrix(m, square=True)
    dev = hermitian_deviation(a)
    if dev > tol.eps_structural:
        raise NotHermitian(f"matrix is not Hermitian (max deviation {dev:.3e})")
    a = 0.5 * (a + dagger(a))
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    # eps_eig is absolute; the floor keeps large-norm inputs reachable in double precision.
    threshold = max(tol.eps_eig, 64 * np.finfo(float).eps * n * np.linalg.norm(a))

    for _ in range(MAX_SWEEPS):
        if _offdiag_norm(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                mag = abs(b)
                if mag == 0.0:
                    continue
                phase = b / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # Phase-align the pivot to make it real, then apply a real rotation.
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = dagger(g) @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ g
    else:
        if _offdiag_norm(a) > threshold:
            raise NoConvergence(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")

    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order].copy(), v[:, order]


def is_psd_hermitian(m, tol: Tolerances = DEFAULT_TOL) -> bool:
    a = np.asarray(m)
    if not is_hermitian(a, tol):
        return False
    w, _ = eig_hermitian(a, tol)
    return bool(w[0] >= -tol.eps_structural)


def pad_embed(m) -> np.ndarray:
    """Direct sum ``m (+) 0``: append a zero row and zero column."""
    a = as_matrix(m, square=True)
    d = a.shape[0]
    out = np.zeros((d + 1, d + 1), dtype=np.complex128)
    out[:d, :d] = a
    return out


def truncate_top_left(m) -> np.ndarray:
    """Drop the last row and column of a square matrix."""
    a = as_matrix(m, square=True)
    if a.shape[0] < 2:
        raise DimensionTooSmall("cannot truncate a 1x1 matrix")
    return a[:-1, :-1].copy()


def basis_projector(dim: int, k: int) -> np.ndarray:
    """``|k><k|`` in ``dim`` dimensions (0-based ``k``)."""
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[k, k] = 1.0
    return out


def matrix_to_json(m) -> list:
    """Row-major nested lists of ``[re, im]`` pairs."""
    a = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch(f"malformed matrix encoding: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DimensionMismatch(f"matrix must be rows x cols x [re, im], got shape {arr.shape}")
    return as_matrix(arr[..., 0] + 1j * arr[..., 1])
