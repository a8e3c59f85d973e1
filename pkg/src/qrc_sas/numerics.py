"""Dense complex-matrix kernel: norms, spectra, decompositions, expm.

Everything here is a thin, validated layer over numpy/scipy. Matrices are
small (at most 64x64 superoperators in practice) so robustness wins over
speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

# Tolerance ladder shared across the package.
STRUCT_TOL = 1e-10
CONVERGENCE_TOL = 1e-12
CLOSED_FORM_TOL = 1e-8


class DimensionError(ValueError):
    """Raised when operand shapes are inconsistent."""


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised by :func:`solve` when the system matrix is numerically singular."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if self.eigenvalues.size else 0.0


@dataclass(frozen=True)
class SVDResult:
    singular_values: np.ndarray
    u: Optional[np.ndarray] = None
    vh: Optional[np.ndarray] = None


def _as_square(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    return A


def dagger(A) -> np.ndarray:
    return np.conjugate(np.asarray(A)).T


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A), np.asarray(B))


def svd(A, compute_uv: bool = False) -> SVDResult:
    """Singular values in descending order, optionally with the factors."""
    A = np.asarray(A)
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {A.shape}")
    if compute_uv:
        u, s, vh = np.linalg.svd(A)
        return SVDResult(s, u, vh)
    return SVDResult(np.linalg.svd(A, compute_uv=False))


def schatten_norm(A, p: float = 1.0) -> float:
    """Schatten p-norm ``(sum_i s_i**p)**(1/p)``; ``p=1`` is the trace norm."""
    A = _as_square(A)
    if not p >= 1:
        raise ValueError(f"Schatten norm needs p >= 1, got {p}")
    s = svd(A).singular_values
    if np.isinf(p):
        return float(s[0]) if s.size else 0.0
    return float(np.sum(s**p) ** (1.0 / p))


def trace_norm(A) -> float:
    return schatten_norm(A, 1.0)


INDUCED_NORMS = ("spectral", "col_sum", "row_sum")


def induced_norm(A, kind: str = "spectral") -> float:
    """Matrix norm induced by the 2-, 1- or inf-vector norm."""
    A = _as_square(A)
    if kind == "spectral":
        return float(np.linalg.norm(A, 2)) if A.size else 0.0
    if kind == "col_sum":
        return float(np.max(np.sum(np.abs(A), axis=0))) if A.size else 0.0
    if kind == "row_sum":
        return float(np.max(np.sum(np.abs(A), axis=1))) if A.size else 0.0
    raise ValueError(f"unknown induced norm {kind!r}; expected one of {INDUCED_NORMS}")


def matrix_exponential(A) -> np.ndarray:
    """exp(A) via scaling-and-squaring Pade (scipy)."""
    A = _as_square(A)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix_exponential: non-finite entries")
    out = scipy.linalg.expm(A)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("matrix_exponential produced non-finite entries")
    return out


def _spectral_order(values: np.ndarray) -> np.ndarray:
    # descending modulus, then real part, then imaginary part; moduli are
    # rounded so conjugate pairs tie deterministically
    mod = np.round(np.abs(values), 12)
    return np.lexsort((-values.imag, -np.round(values.real, 12), -mod))


def eig(A, vectors: bool = True) -> Spectrum:
    A = _as_square(A)
    if vectors:
        w, v = np.linalg.eig(A)
        order = _spectral_order(w)
        return Spectrum(w[order], v[:, order])
    w = np.linalg.eigvals(A)
    return Spectrum(w[_spectral_order(w)])


def spectral_radius(A) -> float:
    A = _as_square(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def solve(A, b, max_condition: float = 1e12) -> np.ndarray:
    A = _as_square(A)
    b = np.asarray(b)
    if b.shape[0] != A.shape[0]:
        raise DimensionError(f"solve: A is {A.shape}, b is {b.shape}")
    cond = float(np.linalg.cond(A)) if A.size else 1.0
    if not np.isfinite(cond) or cond > max_condition:
        raise SingularMatrixError(f"matrix is numerically singular (cond ~ {cond:.3g})", cond)
    return np.linalg.solve(A, b)


def is_hermitian(A, tol: float = STRUCT_TOL) -> bool:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    return bool(np.max(np.abs(A - dagger(A)), initial=0.0) <= tol)


def min_eigenvalue_hermitian(A) -> float:
    A = _as_square(A)
    return float(np.linalg.eigvalsh((A + dagger(A)) / 2)[0])


def is_psd(A, tol: float = STRUCT_TOL) -> bool:
    """Hermitian (within ``tol``) with minimum eigenvalue >= -tol."""
    if not is_hermitian(A, tol):
        return False
    return min_eigenvalue_hermitian(A) >= -tol
