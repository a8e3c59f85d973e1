"""Markovian master equations, their propagators and three single-qubit models.

The generator is

    drho/dt = -i[H(z), rho] + sum_k g_k (L_k rho L_k^+ - {L_k^+ L_k, rho}/2)

with ``H(z)`` held constant between input injections. One step of the
reservoir is the propagator ``exp(dt * Lhat(z))`` in Gell-Mann coordinates.

Single-qubit example models (field strength ``h_t = h(z_t)``):

* ``unital_dephasing`` -- field along x, jump ``Z``: unital, filter ``I/2``.
* ``bad_zfield``       -- field along z, jump ``sigma^-``: input-independent
  pure fixed point ``|1><1|``.
* ``good_xfield``      -- field along x, jump ``sigma^-``: input-dependent
  full-rank fixed point.

The closed-form matrices below use the rotation sense in which the field
enters the Hamiltonian as ``H = -h_t sigma/2``; the model builders use the
same sign so analytic and numeric propagators agree entrywise. Flipping it
only mirrors ``<sigma_y>`` (x-field) or the xy rotation (z-field).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .basis import PAULI_X, PAULI_Z, SIGMA_MINUS, GellMannBasis, gellmann_basis, to_coords
from .channels import ParamChannel, SuperOp, dephasing, to_superop
from .numerics import STRUCT_TOL, is_hermitian, matrix_exponential

# |x2| below this switches the sqrt-dependent terms to their Taylor limits
SINGULAR_BAND = 1e-8

FAMILIES = ("unital_dephasing", "bad_zfield", "good_xfield")


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Input-driven Lindblad generator.

    ``hamiltonian`` maps an input vector to a Hermitian matrix (angular
    frequency units); ``jumps`` holds ``(L_k, rate_k)`` pairs.
    """

    dim: int
    hamiltonian: Callable[[np.ndarray], np.ndarray]
    jumps: Sequence[tuple]
    dt: float = 1.0

    def __post_init__(self):
        for L, rate in self.jumps:
            if rate < 0:
                raise ValueError(f"jump rates must be non-negative, got {rate}")
            if np.shape(L) != (self.dim, self.dim):
                raise ValueError(f"jump operator has shape {np.shape(L)}, expected {(self.dim, self.dim)}")


def lindblad_rhs(H, jumps, rho) -> np.ndarray:
    out = -1j * (H @ rho - rho @ H)
    for L, rate in jumps:
        LdL = L.conj().T @ L
        out = out + rate * (L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL))
    return out


def liouvillian_superop(model: LindbladModel, z, basis: GellMannBasis | None = None) -> np.ndarray:
    """Real matrix ``tr(B_i^+ L(B_j))`` of the generator at input ``z``."""
    basis = gellmann_basis(model.dim) if basis is None else basis
    z = np.atleast_1d(np.asarray(z, dtype=float))
    H = np.asarray(model.hamiltonian(z), dtype=complex)
    if not is_hermitian(H, STRUCT_TOL):
        raise ValueError(f"Hamiltonian at z={z} is not Hermitian")
    jumps = [(np.asarray(L, dtype=complex), float(r)) for L, r in model.jumps]
    images = np.array([lindblad_rhs(H, jumps, B) for B in basis.elements])
    Lhat = to_coords(images, basis).T
    if np.max(np.abs(Lhat.imag)) > STRUCT_TOL:
        raise ValueError("generator matrix has an imaginary part; basis is not Hermitian")
    return Lhat.real


def propagator(model: LindbladModel, z, dt: float | None = None, basis: GellMannBasis | None = None) -> SuperOp:
    dt = model.dt if dt is None else dt
    if not dt > 0:
        raise ValueError(f"step duration must be positive, got {dt}")
    basis = gellmann_basis(model.dim) if basis is None else basis
    T = matrix_exponential(liouvillian_superop(model, z, basis) * dt)
    return SuperOp(T, basis, "numeric_expm")


def model_channel(model: LindbladModel, lo=0.0, hi=1.0, name: str = "") -> ParamChannel:
    return ParamChannel(model.dim, lambda z: propagator(model, z), lo, hi, name)


# --- single-qubit example models -------------------------------------------

def _linear_field(h: float) -> Callable[[np.ndarray], float]:
    return lambda z: h * float(np.sum(z))


def qubit_model(family: str, gamma: float, dt: float = 1.0, field: Callable | float = 1.0) -> LindbladModel:
    """Lindblad model of one of the example families.

    ``field`` is either the constant ``h`` in ``h(z) = h z`` or a callable
    ``z -> h(z)``.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    hfun = field if callable(field) else _linear_field(float(field))
    axis = PAULI_Z if family == "bad_zfield" else PAULI_X
    jump = PAULI_Z if family == "unital_dephasing" else SIGMA_MINUS
    return LindbladModel(2, lambda z: -0.5 * hfun(z) * axis, [(jump, gamma)], dt)


def _cosh_sinhc(x2: float, t: float) -> tuple[float, float]:
    """``cosh(t sqrt(x2))`` and ``sinh(t sqrt(x2))/sqrt(x2)`` for real ``x2`` of either sign."""
    if abs(x2) < SINGULAR_BAND:
        u = x2 * t * t
        return 1 + u / 2 + u * u / 24, t * (1 + u / 6 + u * u / 120)
    if x2 > 0:
        s = np.sqrt(x2)
        return float(np.cosh(t * s)), float(np.sinh(t * s) / s)
    s = np.sqrt(-x2)
    return float(np.cos(t * s)), float(np.sin(t * s) / s)


def _analytic(T: np.ndarray, label: str) -> SuperOp:
    return SuperOp(T, gellmann_basis(2), f"analytic:{label}")


def example_unital_dephasing(gamma: float, h_t: float, dt: float = 1.0) -> SuperOp:
    """Closed-form propagator: x-field ``h_t``, dephasing jump ``Z`` at rate ``gamma``."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    C, S = _cosh_sinhc(gamma**2 - h_t**2, dt)
    e = np.exp(-gamma * dt)
    T = np.zeros((4, 4))
    T[0, 0] = 1.0
    T[1, 1] = np.exp(-2 * gamma * dt)
    T[2, 2] = e * (C - gamma * S)
    T[3, 3] = e * (C + gamma * S)
    T[2, 3] = h_t * e * S
    T[3, 2] = -T[2, 3]
    return _analytic(T, "unital_dephasing")


def example_bad_zfield(gamma: float, h_t: float, dt: float = 1.0) -> SuperOp:
    """Closed-form propagator: z-field ``h_t``, amplitude damping at rate ``gamma``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    r = np.exp(-gamma * dt / 2)
    T = np.zeros((4, 4))
    T[0, 0] = 1.0
    T[1, 1] = T[2, 2] = r * np.cos(h_t * dt)
    T[1, 2] = r * np.sin(h_t * dt)
    T[2, 1] = -T[1, 2]
    T[3, 3] = np.exp(-gamma * dt)
    T[3, 0] = np.exp(-gamma * dt) - 1
    return _analytic(T, "bad_zfield")


def example_good_xfield(gamma: float, h_t: float, dt: float = 1.0) -> SuperOp:
    """Closed-form propagator: x-field ``h_t``, amplitude damping at rate ``gamma``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0 (gamma = 0 is not mixing), got {gamma}")
    C, S = _cosh_sinhc(gamma**2 - 16 * h_t**2, dt / 4)
    E = np.exp(-3 * gamma * dt / 4)
    norm = gamma**2 + 2 * h_t**2
    T = np.zeros((4, 4))
    T[0, 0] = 1.0
    T[1, 1] = np.exp(-gamma * dt / 2)
    T[2, 2] = E * (C + gamma * S)
    T[3, 3] = E * (C - gamma * S)
    T[2, 3] = 4 * h_t * E * S
    T[3, 2] = -T[2, 3]
    T[2, 0] = 2 * gamma * h_t / norm * (-1 + E * (C + 3 * gamma * S))
    T[3, 0] = gamma / norm * (-gamma + E * (gamma * C - (gamma**2 + 8 * h_t**2) * S))
    return _analytic(T, "good_xfield")


def dephasing_superop(g: float) -> SuperOp:
    return SuperOp(to_superop(dephasing(g)).real, gellmann_basis(2), "dephasing")


def measurement_composed(gamma: float, h_t: float, dt: float = 1.0, g: float = 0.0) -> SuperOp:
    """Good x-field step followed by a z-measurement of strength ``g`` (averaged)."""
    T = dephasing_superop(g).matrix @ example_good_xfield(gamma, h_t, dt).matrix
    return _analytic(T, "measurement_composed")


ANALYTIC = {
    "unital_dephasing": example_unital_dephasing,
    "bad_zfield": example_bad_zfield,
    "good_xfield": example_good_xfield,
}


def analytic_channel(family: str, gamma: float, dt: float = 1.0, field: Callable | float = 1.0,
                     lo=0.0, hi=1.0, g: float | None = None) -> ParamChannel:
    """Input-driven channel built from the closed-form propagators."""
    hfun = field if callable(field) else _linear_field(float(field))
    if g is not None:
        fn = lambda z: measurement_composed(gamma, hfun(z), dt, g)  # noqa: E731
        name = "measurement_composed"
    else:
        base = ANALYTIC[family]
        fn = lambda z: base(gamma, hfun(z), dt)  # noqa: E731
        name = family
    return ParamChannel(2, fn, lo, hi, name)


# --- closed-form spectra, singular values and fixed points -----------------

def unital_dephasing_eigenvalues(gamma, h_t, dt=1.0) -> np.ndarray:
    s = np.sqrt(complex(gamma**2 - h_t**2))
    return np.array([1.0, np.exp(-2 * gamma * dt), np.exp(-(gamma + s) * dt), np.exp(-(gamma - s) * dt)])


def bad_zfield_eigenvalues(gamma, h_t, dt=1.0) -> np.ndarray:
    return np.array([1.0, np.exp(-gamma * dt),
                     np.exp(-gamma * dt / 2 - 1j * h_t * dt), np.exp(-gamma * dt / 2 + 1j * h_t * dt)])


def good_xfield_eigenvalues(gamma, h_t, dt=1.0) -> np.ndarray:
    s = np.sqrt(complex(gamma**2 - 16 * h_t**2))
    return np.array([1.0, np.exp(-gamma * dt / 2),
                     np.exp(-(3 * gamma + s) * dt / 4), np.exp(-(3 * gamma - s) * dt / 4)])


def _paired_singular_values(first: float, fp: complex, fm: complex, scale: float) -> np.ndarray:
    a, b = scale * np.sqrt(fp.real), scale * np.sqrt(max(fm.real, 0.0))
    return np.array([first, max(a, b), min(a, b)])


def unital_dephasing_singular_values(gamma, h_t, dt=1.0) -> np.ndarray:
    """``(s1, s2, s3)`` of the traceless block; ``s1`` belongs to the decoupled x axis."""
    x2 = gamma**2 - h_t**2
    if abs(x2) < SINGULAR_BAND:
        p = example_unital_dephasing(gamma, h_t, dt).matrix[2:, 2:]
        s = np.linalg.svd(p, compute_uv=False)
        return np.array([np.exp(-2 * gamma * dt), s[0], s[1]])
    s = np.sqrt(complex(x2))
    ch2 = np.cosh(2 * dt * s)
    root = gamma * np.sqrt(np.sinh(dt * s) ** 2) * np.sqrt(-4 * h_t**2 + 2 * gamma**2 + 2 * gamma**2 * ch2)
    fp = (-h_t**2 + gamma**2 * ch2 + root) / x2
    fm = (-h_t**2 + gamma**2 * ch2 - root) / x2
    return _paired_singular_values(np.exp(-2 * gamma * dt), fp, fm, np.exp(-gamma * dt))


def good_xfield_singular_values(gamma, h_t, dt=1.0) -> np.ndarray:
    x2 = gamma**2 - 16 * h_t**2
    if abs(x2) < SINGULAR_BAND:
        p = example_good_xfield(gamma, h_t, dt).matrix[2:, 2:]
        s = np.linalg.svd(p, compute_uv=False)
        return np.array([np.exp(-gamma * dt / 2), s[0], s[1]])
    s = np.sqrt(complex(x2))
    ch2 = np.cosh(dt * s / 2)
    root = gamma * np.sqrt(np.sinh(dt * s / 4) ** 2) * np.sqrt(-64 * h_t**2 + 2 * gamma**2 + 2 * gamma**2 * ch2)
    fp = (-16 * h_t**2 + gamma**2 * ch2 + root) / x2
    fm = (-16 * h_t**2 + gamma**2 * ch2 - root) / x2
    return _paired_singular_values(np.exp(-gamma * dt / 2), fp, fm, np.exp(-3 * gamma * dt / 4))


def bad_zfield_singular_values(gamma, h_t, dt=1.0) -> np.ndarray:
    """``(s1, s2, s3)`` with ``s1`` for the decoupled z axis."""
    r = np.exp(-gamma * dt / 2)
    return np.array([np.exp(-gamma * dt), r, r])


def good_xfield_fixed_point(gamma, h_t) -> np.ndarray:
    return np.array([[h_t**2, 1j * gamma * h_t],
                     [-1j * gamma * h_t, gamma**2 + h_t**2]]) / (gamma**2 + 2 * h_t**2)


def measurement_correction_terms(gamma, h_t, dt=1.0, g=0.0) -> tuple[float, float]:
    """The two corrections ``(f1, f2)`` that shift the fixed point under measurement.

    ``f1`` moves population, ``f2`` shrinks the coherence. Both vanish at
    ``g = 0``.
    """
    C, S = _cosh_sinhc(gamma**2 - 16 * h_t**2, dt / 4)
    G = g * g / 4
    den = np.cosh((g * g + 3 * gamma * dt) / 4) - np.cosh(G) * C + gamma * np.sinh(G) * S
    f1 = 4 * gamma * h_t**2 * np.sinh(G) * S / den
    f2 = np.sinh(G) * (np.exp(3 * gamma * dt / 4) - C + gamma * S) / den
    return float(f1), float(f2)


def measurement_fixed_point(gamma, h_t, dt=1.0, g=0.0) -> np.ndarray:
    f1, f2 = measurement_correction_terms(gamma, h_t, dt, g)
    off = 1j * gamma * h_t * (1 - f2)
    return np.array([[h_t**2 - f1, off], [np.conj(off), gamma**2 + h_t**2 + f1]]) / (gamma**2 + 2 * h_t**2)
