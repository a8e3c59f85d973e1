"""Generalized Gell-Mann bases and coordinate maps.

Internal convention: coordinates are taken against the Hilbert-Schmidt
orthonormal basis ``B_1 = I/sqrt(d), B_2, ..., B_{d^2}`` so a density matrix
has coordinates ``(1/sqrt(d), x)`` with ``x`` its Bloch vector.

Reporting convention: expectation values of the conventionally normalized
Gell-Mann matrices (``tr(l_a l_b) = 2 delta_ab``), i.e. ``<sigma_a>`` for a
qubit. The two differ by the fixed factor ``sqrt(2)``, which equals
``sqrt(d)`` for qubits. Use :func:`to_expectations` / :func:`from_expectations`
to convert; nothing else in the package mixes them.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .numerics import STRUCT_TOL, DimensionError, is_hermitian, min_eigenvalue_hermitian

EXPECTATION_SCALE = np.sqrt(2.0)
MAX_TENSOR_DIM = 64

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|, decay towards <sigma_z> = -1


class NotAStateError(ValueError):
    """A matrix failed the density-matrix checks."""

    def __init__(self, message: str, min_eigenvalue: float = float("nan")):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


@dataclass(frozen=True, eq=False)
class GellMannBasis:
    """Ordered orthonormal Hermitian operator basis with ``I/sqrt(dim)`` first.

    ``elements`` has shape ``(dim**2, dim, dim)``.
    """

    dim: int
    elements: np.ndarray

    def __len__(self) -> int:
        return self.elements.shape[0]

    def __getitem__(self, i):
        return self.elements[i]

    def gram(self) -> np.ndarray:
        flat = self.elements.reshape(len(self), -1)
        return flat.conj() @ flat.T


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@functools.lru_cache(maxsize=None)
def gellmann_basis(d: int) -> GellMannBasis:
    """Normalized generalized Gell-Mann basis of ``d x d`` operators.

    Order: identity, the ``d(d-1)/2`` symmetric generators, the antisymmetric
    ones (both over pairs ``j < k`` in lexicographic order), then the ``d-1``
    diagonal generators. For ``d = 2`` this is ``(I, X, Y, Z)/sqrt(2)``.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"Gell-Mann basis needs integer d >= 2, got {d}")
    d = int(d)
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    elems = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1 / np.sqrt(2)
        elems.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j / np.sqrt(2)
        m[k, j] = 1j / np.sqrt(2)
        elems.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        elems.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return GellMannBasis(d, _freeze(np.array(elems)))


def tensor_basis(basis: GellMannBasis, n: int) -> GellMannBasis:
    """All ``n``-fold tensor products of ``basis`` elements.

    Lexicographic order over index tuples, so the all-identity product
    ``I/sqrt(d**n)`` comes first; the rest are traceless but not in Gell-Mann
    order.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"tensor power must be a positive integer, got {n}")
    dim = basis.dim ** int(n)
    if dim > MAX_TENSOR_DIM:
        raise ValueError(f"tensor basis dimension {dim} exceeds the limit {MAX_TENSOR_DIM}")
    if n == 1:
        return basis
    elems = []
    for idx in itertools.product(range(len(basis)), repeat=int(n)):
        m = basis[idx[0]]
        for i in idx[1:]:
            m = np.kron(m, basis[i])
        elems.append(m)
    return GellMannBasis(dim, _freeze(np.array(elems)))


def _check_dim(A: np.ndarray, basis: GellMannBasis) -> None:
    if A.shape[-2:] != (basis.dim, basis.dim):
        raise DimensionError(f"operator shape {A.shape} does not match basis dimension {basis.dim}")


def to_coords(A, basis: GellMannBasis) -> np.ndarray:
    """Coordinates ``a_i = tr(B_i^dagger A)``; works on stacks ``(..., d, d)``."""
    A = np.asarray(A)
    _check_dim(A, basis)
    return np.einsum("kij,...ij->...k", basis.elements.conj(), A)


def from_coords(a, basis: GellMannBasis) -> np.ndarray:
    a = np.asarray(a)
    if a.shape[-1] != len(basis):
        raise DimensionError(f"coordinate length {a.shape[-1]} does not match basis size {len(basis)}")
    return np.einsum("...k,kij->...ij", a, basis.elements)


def validate_density(rho, tol: float = STRUCT_TOL) -> np.ndarray:
    """Return ``rho`` as an array or raise :class:`NotAStateError`."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotAStateError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho, tol):
        raise NotAStateError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise NotAStateError(f"density matrix has trace {tr.real:.6g}")
    lam = min_eigenvalue_hermitian(rho)
    if lam < -tol:
        raise NotAStateError(f"density matrix is not positive (min eigenvalue {lam:.3g})", lam)
    return rho


def is_density(rho, tol: float = STRUCT_TOL) -> bool:
    try:
        validate_density(rho, tol)
    except NotAStateError:
        return False
    return True


def density_to_bloch(rho, basis: GellMannBasis, tol: float = STRUCT_TOL) -> np.ndarray:
    rho = validate_density(rho, tol)
    a = to_coords(rho, basis)
    if np.max(np.abs(a.imag)) > tol:
        raise NotAStateError("complex Bloch coordinates; the basis is not Hermitian")
    return a[1:].real


def bloch_to_density(x, basis: GellMannBasis, tol: float = STRUCT_TOL) -> np.ndarray:
    """Inverse of :func:`density_to_bloch`; rejects vectors that are not states."""
    x = np.asarray(x, dtype=float)
    if x.shape != (len(basis) - 1,):
        raise DimensionError(f"Bloch vector must have length {len(basis) - 1}, got {x.shape}")
    a = np.concatenate([[1 / np.sqrt(basis.dim)], x])
    rho = from_coords(a, basis)
    rho = (rho + rho.conj().T) / 2
    lam = min_eigenvalue_hermitian(rho)
    if lam < -tol:
        raise NotAStateError(f"Bloch vector lies outside the state set (min eigenvalue {lam:.3g})", lam)
    return rho


def to_expectations(x) -> np.ndarray:
    """Orthonormal Bloch coordinates -> Gell-Mann expectations (Pauli for qubits)."""
    return EXPECTATION_SCALE * np.asarray(x)


def from_expectations(e) -> np.ndarray:
    return np.asarray(e) / EXPECTATION_SCALE


def pauli_expectations(rho) -> np.ndarray:
    """``(<X>, <Y>, <Z>)`` of a qubit density matrix, computed directly."""
    rho = np.asarray(rho)
    return np.array([np.trace(P @ rho).real for P in (PAULI_X, PAULI_Y, PAULI_Z)])


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    rank = d if rank is None else rank
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    return random_density(d, rng, rank=1)
