"""Quantum channels: Kraus sets, superoperator matrices and input-driven families.

A channel at a fixed input is either a :class:`KrausSet` or a
:class:`SuperOp` (its matrix in a Gell-Mann basis). Input-driven channels are
:class:`ParamChannel` objects: a compact input box plus an evaluator
``z -> channel``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .basis import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    GellMannBasis,
    from_coords,
    gellmann_basis,
    to_coords,
    validate_density,
)
from .numerics import STRUCT_TOL, DimensionError, dagger, matrix_exponential

__all__ = [
    "KrausSet",
    "SuperOp",
    "ParamChannel",
    "CPTPReport",
    "DomainError",
    "apply",
    "apply_operator",
    "to_superop",
    "choi",
    "kraus_from_choi",
    "is_cptp",
    "identity_channel",
    "depolarizing",
    "dephasing",
    "unitary_channel",
    "transpose_map",
    "replacement_superop",
    "compose",
    "blend",
    "constant_channel",
    "random_kraus",
    "rotation",
    "isometry_kraus",
    "kraus_sum",
]


class DomainError(ValueError):
    """An input lies outside the declared input box."""


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Operators ``K_i`` stacked as an array of shape ``(k, d, d)``."""

    operators: np.ndarray

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise DimensionError(f"Kraus operators must be square, got shape {ops.shape}")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    def __len__(self) -> int:
        return self.operators.shape[0]

    def apply_operator(self, A) -> np.ndarray:
        K = self.operators
        return np.einsum("kij,jl,kml->im", K, np.asarray(A), K.conj())

    def completeness_defect(self) -> float:
        K = self.operators
        S = np.einsum("kji,kjl->il", K.conj(), K)
        return float(np.linalg.norm(S - np.eye(self.dim), 2))


@dataclass(frozen=True, eq=False)
class SuperOp:
    """Matrix ``T_ij = tr(B_i^dagger T(B_j))`` of a linear map in a Gell-Mann basis."""

    matrix: np.ndarray
    basis: GellMannBasis
    provenance: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix)
        n = len(self.basis)
        if m.shape != (n, n):
            raise DimensionError(f"superoperator must be {n}x{n}, got {m.shape}")

    @property
    def dim(self) -> int:
        return self.basis.dim

    def apply_operator(self, A) -> np.ndarray:
        return from_coords(self.matrix @ to_coords(A, self.basis), self.basis)


Channel = Union[KrausSet, SuperOp]


@dataclass(frozen=True, eq=False)
class ParamChannel:
    """Input-driven channel ``z -> T(., z)`` on the box ``[lo, hi]``."""

    dim: int
    evaluator: Callable[[np.ndarray], Channel]
    lo: np.ndarray
    hi: np.ndarray
    name: str = ""

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi < lo):
            raise ValueError(f"empty or malformed input box lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def input_dim(self) -> int:
        return self.lo.size

    def check_input(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if z.shape != self.lo.shape:
            raise DomainError(f"input has shape {z.shape}, expected {self.lo.shape}")
        if np.any(z < self.lo) or np.any(z > self.hi):
            raise DomainError(f"input {z} outside the box [{self.lo}, {self.hi}]")
        return z

    def __call__(self, z) -> Channel:
        return self.evaluator(self.check_input(z))


@dataclass(frozen=True)
class CPTPReport:
    completeness_defect: float
    trace_defect: float
    choi_min_eigenvalue: float
    choi_hermiticity_defect: float
    tol: float = STRUCT_TOL

    @property
    def cptp(self) -> bool:
        return (
            self.completeness_defect < self.tol
            and self.trace_defect < self.tol
            and self.choi_hermiticity_defect < self.tol
            and self.choi_min_eigenvalue > -self.tol
        )

    def __bool__(self) -> bool:
        return self.cptp


def apply_operator(channel: Channel, A) -> np.ndarray:
    """Linear action on an arbitrary operator (no state checks)."""
    return channel.apply_operator(A)


def apply(channel: Channel, rho, check: bool = True) -> np.ndarray:
    """Apply a channel to a density matrix."""
    if check:
        rho = validate_density(rho)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (channel.dim, channel.dim):
        raise DimensionError(f"state is {rho.shape}, channel acts on dimension {channel.dim}")
    out = channel.apply_operator(rho)
    if check:
        validate_density(out)
    return out


def to_superop(channel: Channel, basis: GellMannBasis | None = None) -> np.ndarray:
    """Complex matrix ``tr(B_i^dagger T(B_j))``; real for Hermiticity-preserving maps."""
    basis = gellmann_basis(channel.dim) if basis is None else basis
    if basis.dim != channel.dim:
        raise DimensionError(f"basis dimension {basis.dim} != channel dimension {channel.dim}")
    if isinstance(channel, SuperOp):
        if channel.basis is basis:
            return np.asarray(channel.matrix)
        # change of orthonormal basis: C maps old coordinates to new ones
        C = basis.elements.reshape(len(basis), -1).conj() @ channel.basis.elements.reshape(len(basis), -1).T
        return C @ channel.matrix @ C.conj().T
    images = np.array([channel.apply_operator(B) for B in basis.elements])
    return to_coords(images, basis).T


def _as_superop(channel: Channel, basis: GellMannBasis | None = None) -> SuperOp:
    if isinstance(channel, SuperOp) and (basis is None or channel.basis is basis):
        return channel
    basis = gellmann_basis(channel.dim) if basis is None else basis
    return SuperOp(to_superop(channel, basis), basis)


def choi(channel: Channel) -> np.ndarray:
    """Unnormalized Choi matrix ``sum_ij |i><j| (x) T(|i><j|)``."""
    d = channel.dim
    J = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = 1.0
            J[i * d:(i + 1) * d, j * d:(j + 1) * d] = channel.apply_operator(E)
    return J


def kraus_from_choi(J, tol: float = 1e-12) -> KrausSet:
    """Canonical Kraus operators from the eigendecomposition of a PSD Choi matrix."""
    J = np.asarray(J, dtype=complex)
    n = J.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n or J.shape != (n, n):
        raise DimensionError(f"Choi matrix must be d^2 x d^2, got {J.shape}")
    w, v = np.linalg.eigh((J + dagger(J)) / 2)
    if w[0] < -1e-10 * max(1.0, w[-1]):
        raise ValueError(f"Choi matrix is not positive (min eigenvalue {w[0]:.3g}); map is not CP")
    keep = w > tol * max(1.0, w[-1])
    ops = [np.sqrt(lam) * vec.reshape(d, d).T for lam, vec in zip(w[keep][::-1], v[:, keep].T[::-1])]
    return KrausSet(np.array(ops))


def is_cptp(channel: Channel, tol: float = STRUCT_TOL) -> CPTPReport:
    d = channel.dim
    J = choi(channel)
    herm = float(np.max(np.abs(J - dagger(J))))
    lam_min = float(np.linalg.eigvalsh((J + dagger(J)) / 2)[0])
    # partial trace over the output factor must be the identity
    ptr = np.einsum("iaja->ij", J.reshape(d, d, d, d))
    completeness = float(np.linalg.norm(ptr - np.eye(d), 2))
    if isinstance(channel, KrausSet):
        completeness = max(completeness, channel.completeness_defect())
    T = to_superop(channel)
    e1 = np.zeros(d * d)
    e1[0] = 1.0
    trace_defect = float(np.max(np.abs(T[0] - e1)))
    return CPTPReport(completeness, trace_defect, lam_min, herm, tol)


def identity_channel(d: int) -> KrausSet:
    return KrausSet(np.eye(d, dtype=complex)[None])


def depolarizing(lam: float, d: int = 2) -> KrausSet:
    """``A -> (1 - lam) A + lam tr(A) I/d`` with ``d**2`` Kraus operators.

    Built from the identity ``sum_i B_i A B_i = tr(A) I`` over an orthonormal
    Hermitian basis; the two identity-proportional terms are merged.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"depolarizing probability must lie in [0, 1], got {lam}")
    B = gellmann_basis(d).elements
    ops = [np.sqrt(1 - lam + lam / d**2) * np.eye(d, dtype=complex)]
    ops += [np.sqrt(lam / d) * b for b in B[1:]]
    return KrausSet(np.array(ops))


def dephasing(g: float) -> KrausSet:
    """Qubit dephasing from a z-measurement of strength ``g``.

    Diagonal entries are kept and coherences are multiplied by
    ``exp(-g**2/2)``: ``K0 = sqrt(c) I``, ``K1 = sqrt(1-c)|0><0|``,
    ``K2 = sqrt(1-c)|1><1|`` with ``c = exp(-g**2/2)``.

    Note: writing the same channel as ``c rho + (1-c) Z rho Z`` would give the
    coherence factor ``2c - 1`` instead; the Kraus form above is the one
    consistent with the Hadamard-mask model ``M * rho``.
    """
    if g < 0:
        raise ValueError(f"measurement strength must be >= 0, got {g}")
    c = np.exp(-g * g / 2)
    P0 = np.diag([1.0, 0.0]).astype(complex)
    P1 = np.diag([0.0, 1.0]).astype(complex)
    return KrausSet(np.array([np.sqrt(c) * np.eye(2), np.sqrt(1 - c) * P0, np.sqrt(1 - c) * P1]))


def unitary_channel(U, tol: float = STRUCT_TOL) -> KrausSet:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionError(f"unitary must be square, got {U.shape}")
    if np.max(np.abs(dagger(U) @ U - np.eye(U.shape[0]))) > tol:
        raise ValueError("matrix is not unitary")
    return KrausSet(U[None])


def rotation(axis, angle: float) -> np.ndarray:
    """``exp(-i angle (n . sigma) / 2)`` for a qubit."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    G = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    return matrix_exponential(-0.5j * angle * G)


def transpose_map(d: int) -> SuperOp:
    """``A -> A^T``: positive and trace preserving but not completely positive."""
    basis = gellmann_basis(d)
    T = to_coords(np.transpose(basis.elements, (0, 2, 1)), basis).T
    return SuperOp(T, basis, "transpose")


def replacement_superop(sigma, basis: GellMannBasis | None = None) -> np.ndarray:
    """Matrix of ``A -> tr(A) sigma``; only the first column is non-zero."""
    sigma = np.asarray(sigma, dtype=complex)
    basis = gellmann_basis(sigma.shape[0]) if basis is None else basis
    n = len(basis)
    R = np.zeros((n, n), dtype=complex)
    R[:, 0] = np.sqrt(basis.dim) * to_coords(sigma, basis)
    return R


def constant_channel(channel: Channel, lo=0.0, hi=1.0, name: str = "") -> ParamChannel:
    """A :class:`ParamChannel` that ignores its input."""
    return ParamChannel(channel.dim, lambda z: channel, lo, hi, name)


def _compose_fixed(T2: Channel, T1: Channel) -> Channel:
    if T1.dim != T2.dim:
        raise DimensionError(f"cannot compose dimensions {T2.dim} and {T1.dim}")
    if isinstance(T1, KrausSet) and isinstance(T2, KrausSet):
        ops = np.einsum("aij,bjk->abik", T2.operators, T1.operators).reshape(-1, T1.dim, T1.dim)
        K = KrausSet(ops)
        if len(K) > T1.dim**2:
            K = kraus_from_choi(choi(K))
        return K
    basis = T1.basis if isinstance(T1, SuperOp) else (T2.basis if isinstance(T2, SuperOp) else None)
    S1 = _as_superop(T1, basis)
    S2 = _as_superop(T2, S1.basis)
    return SuperOp(S2.matrix @ S1.matrix, S1.basis, "composed")


def compose(T2, T1):
    """``T2 o T1`` (apply ``T1`` first). Accepts fixed or input-driven channels."""
    if isinstance(T1, ParamChannel) or isinstance(T2, ParamChannel):
        P1 = T1 if isinstance(T1, ParamChannel) else None
        P2 = T2 if isinstance(T2, ParamChannel) else None
        ref = P1 if P1 is not None else P2
        if P1 is not None and P2 is not None and (
            P1.lo.shape != P2.lo.shape or np.any(P1.lo != P2.lo) or np.any(P1.hi != P2.hi)
        ):
            raise ValueError("composed input-driven channels must share the input box")

        def evaluator(z):
            c1 = P1.evaluator(z) if P1 is not None else T1
            c2 = P2.evaluator(z) if P2 is not None else T2
            return _compose_fixed(c2, c1)

        name = f"{getattr(T2, 'name', '') or 'T2'}*{getattr(T1, 'name', '') or 'T1'}"
        return ParamChannel(ref.dim, evaluator, ref.lo, ref.hi, name)
    return _compose_fixed(T2, T1)


def blend(channel: ParamChannel, sigma, eps: float) -> ParamChannel:
    """``rho -> (1 - eps) T(rho, z) + eps sigma`` as an input-driven superoperator."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"blend weight must lie in (0, 1), got {eps}")
    sigma = validate_density(sigma)
    basis = gellmann_basis(channel.dim)
    R = replacement_superop(sigma, basis)

    def evaluator(z):
        T = to_superop(channel.evaluator(z), basis)
        return SuperOp((1 - eps) * T + eps * R, basis, "blend")

    return ParamChannel(channel.dim, evaluator, channel.lo, channel.hi, f"blend({channel.name})")


def random_kraus(d: int, rng: np.random.Generator, n_ops: int | None = None) -> KrausSet:
    """Random channel from a Haar-like isometry ``C^d -> C^{n_ops d}``."""
    n_ops = d * d if n_ops is None else n_ops
    G = rng.normal(size=(n_ops * d, d)) + 1j * rng.normal(size=(n_ops * d, d))
    Q, R = np.linalg.qr(G)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    return KrausSet(Q.reshape(n_ops, d, d))


def isometry_kraus(M) -> KrausSet:
    """Kraus set from the polar factor of a stacked ``(k d) x d`` matrix.

    Smooth in ``M``, which makes it convenient for building input-driven
    random channels ``z -> isometry_kraus(A + z B)``.
    """
    M = np.asarray(M, dtype=complex)
    k, d = M.shape[0] // M.shape[1], M.shape[1]
    H = dagger(M) @ M
    w, v = np.linalg.eigh(H)
    V = M @ (v / np.sqrt(w)) @ dagger(v)
    return KrausSet(V.reshape(k, d, d))


def kraus_sum(channels: Sequence[KrausSet], weights: Sequence[float]) -> KrausSet:
    """Convex mixture of Kraus channels."""
    ops = [np.sqrt(w) * K.operators for K, w in zip(channels, weights) if w > 0]
    return KrausSet(np.concatenate(ops))
