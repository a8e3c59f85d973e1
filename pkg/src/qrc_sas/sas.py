"""State-affine form of input-driven channels, filters and ESP/FMP certificates.

With a Gell-Mann basis whose first element is ``I/sqrt(d)``, a trace
preserving, Hermiticity preserving map has the block matrix

    T = [[1,          0   ],
         [sqrt(d) q,  p(z)]]

and a state with Bloch vector ``x`` evolves as ``x -> p(z) x + q(z)``. Here
``q = T[1:, 0] / sqrt(d)`` so that the recursion is exact in the
orthonormal coordinates used throughout the package.

Quantifiers over the compact input box are discharged on a finite lattice
(uniform grid plus seeded random interior points). Verdicts are therefore
certificates relative to the recorded lattice, not proofs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .basis import (
    GellMannBasis,
    NotAStateError,
    bloch_to_density,
    gellmann_basis,
    random_density,
    to_coords,
)
from .channels import DomainError, ParamChannel, to_superop
from .numerics import (
    CONVERGENCE_TOL,
    STRUCT_TOL,
    SingularMatrixError,
    eig,
    min_eigenvalue_hermitian,
    solve,
    trace_norm,
)

DEFAULT_PER_AXIS = 101
DEFAULT_RANDOM_POINTS = 1000
MIXING_TOL = 1e-10
FIXED_POINT_TOL = 1e-9
THEOREM_TOL = 1e-8

VERDICTS = ("certified_contractive", "necessary_condition_failed", "inconclusive")


def jsonable(obj):
    """Recursively convert arrays and complex numbers into JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


# --- superoperator blocks ---------------------------------------------------

def superop_matrix(channel, z=None, basis: GellMannBasis | None = None, tol: float = STRUCT_TOL) -> np.ndarray:
    """Real matrix ``tr(B_i^+ T(B_j, z))`` of a channel at input ``z``.

    ``channel`` may be input-driven (then ``z`` is required) or fixed.
    Raises ``ValueError`` if an imaginary residue above ``tol`` survives,
    which means either the basis is not Hermitian or the map does not
    preserve Hermiticity.
    """
    if isinstance(channel, ParamChannel):
        if z is None:
            raise ValueError("an input z is required for an input-driven channel")
        channel = channel(z)
    T = to_superop(channel, basis)
    resid = float(np.max(np.abs(np.imag(T)), initial=0.0))
    if resid > tol:
        raise ValueError(f"superoperator has imaginary residue {resid:.3g} > {tol:g}")
    return np.real(T).astype(float)


def _dim_from_size(n: int) -> int:
    d = int(round(math.sqrt(n)))
    if d * d != n or d < 2:
        raise ValueError(f"superoperator size {n} is not d^2 for an integer d >= 2")
    return d


def sas_decompose(T, tol: float = STRUCT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Split a trace-preserving superoperator matrix into ``(p, q)``."""
    T = np.asarray(T, dtype=float)
    d = _dim_from_size(T.shape[0])
    row = T[0].copy()
    row[0] -= 1.0
    defect = float(np.max(np.abs(row)))
    if defect > tol:
        raise ValueError(f"first row deviates from (1, 0, ..., 0) by {defect:.3g}; map is not trace preserving")
    return T[1:, 1:].copy(), T[1:, 0] / math.sqrt(d)


def sas_assemble(p, q) -> np.ndarray:
    """Inverse of :func:`sas_decompose`."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    m = p.shape[0]
    d = _dim_from_size(m + 1)
    T = np.zeros((m + 1, m + 1))
    T[0, 0] = 1.0
    T[1:, 0] = math.sqrt(d) * q
    T[1:, 1:] = p
    return T


def _as_input_array(inputs, n: int) -> np.ndarray:
    Z = np.asarray(inputs, dtype=float)
    if Z.ndim == 1 and n == 1:
        Z = Z[:, None]
    elif Z.ndim == 1 and Z.size == n:
        Z = Z[None, :]
    if Z.ndim != 2 or Z.shape[1] != n:
        raise DomainError(f"inputs have shape {np.shape(inputs)}, expected (T, {n})")
    return Z


@dataclass(frozen=True, eq=False)
class SASModel:
    """``x -> p(z) x + q(z)`` on the box ``[lo, hi]``.

    ``blocks`` maps an input vector to the pair ``(p(z), q(z))``.
    """

    blocks: Callable[[np.ndarray], tuple]
    dim: int
    lo: np.ndarray
    hi: np.ndarray
    name: str = ""
    basis: Optional[GellMannBasis] = None

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi < lo):
            raise ValueError(f"empty or malformed input box lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if self.basis is None:
            object.__setattr__(self, "basis", gellmann_basis(self.dim))

    @classmethod
    def from_channel(cls, channel: ParamChannel, basis: GellMannBasis | None = None) -> "SASModel":
        basis = gellmann_basis(channel.dim) if basis is None else basis

        def blocks(z):
            return sas_decompose(superop_matrix(channel.evaluator(z), basis=basis))

        return cls(blocks, channel.dim, channel.lo, channel.hi, channel.name, basis)

    @property
    def input_dim(self) -> int:
        return self.lo.size

    @property
    def state_dim(self) -> int:
        return self.dim**2 - 1

    def check_input(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if z.shape != self.lo.shape:
            raise DomainError(f"input has shape {z.shape}, expected {self.lo.shape}")
        if np.any(z < self.lo) or np.any(z > self.hi):
            raise DomainError(f"input {z} outside the box [{self.lo}, {self.hi}]")
        return z

    def p(self, z) -> np.ndarray:
        return self.blocks(self.check_input(z))[0]

    def q(self, z) -> np.ndarray:
        return self.blocks(self.check_input(z))[1]

    def superop(self, z) -> np.ndarray:
        return sas_assemble(*self.blocks(self.check_input(z)))

    def evaluate(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Stacked ``p`` and ``q`` over an array of inputs of shape ``(N, n)``."""
        Z = _as_input_array(points, self.input_dim)
        pairs = [self.blocks(self.check_input(z)) for z in Z]
        P = np.array([pq[0] for pq in pairs]).reshape(len(Z), self.state_dim, self.state_dim)
        Q = np.array([pq[1] for pq in pairs]).reshape(len(Z), self.state_dim)
        return P, Q


def sas_step(model: SASModel, x, z) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("state vector has non-finite entries")
    p, q = model.blocks(model.check_input(z))
    return p @ x + q


def iterate_sas(model: SASModel, x0, inputs) -> np.ndarray:
    """States ``x_1, ..., x_T`` (one per input) starting from ``x0``."""
    Z = _as_input_array(inputs, model.input_dim)
    x = np.asarray(x0, dtype=float)
    out = np.empty((len(Z), model.state_dim))
    for t, z in enumerate(Z):
        x = sas_step(model, x, z)
        out[t] = x
    return out


def iterate_density(channel, rho0, inputs, tol: float = STRUCT_TOL) -> np.ndarray:
    """Density-matrix trajectory ``rho_t = T(rho_{t-1}, z_t)``, one state per input.

    Each state is re-Hermitized; the trace is renormalized only when it has
    drifted by more than ``1e-12``. Positivity is never forced: a minimum
    eigenvalue below ``-tol`` raises :class:`NotAStateError`.
    """
    if not isinstance(channel, ParamChannel):
        raise TypeError("iterate_density expects an input-driven channel")
    Z = _as_input_array(inputs, channel.input_dim)
    rho = np.asarray(rho0, dtype=complex)
    out = np.empty((len(Z),) + rho.shape, dtype=complex)
    for t, z in enumerate(Z):
        rho = channel(z).apply_operator(rho)
        rho = (rho + rho.conj().T) / 2
        tr = np.trace(rho).real
        if abs(tr - 1) > CONVERGENCE_TOL:
            rho = rho / tr
        lam = min_eigenvalue_hermitian(rho)
        if lam < -tol:
            raise NotAStateError(f"state left the state set at step {t + 1} (min eigenvalue {lam:.3g})", lam)
        out[t] = rho
    return out


def trace_distance(rho, sigma) -> float:
    return 0.5 * trace_norm(np.asarray(rho) - np.asarray(sigma))


# --- spectra ----------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    is_ergodic: bool
    is_mixing: bool
    traceless_block_spectral_radius: float
    eigenvector_condition: float

    def to_dict(self) -> dict:
        return jsonable(asdict(self))


def spectrum_analysis(T, gap_tol: float = 1e-8) -> SpectrumReport:
    """Spectrum of a superoperator matrix with ergodicity and mixing flags.

    Mixing uses the traceless block: its spectral radius must be below
    ``1 - 1e-10``. Ergodicity asks that exactly one eigenvalue lies within
    ``gap_tol`` of 1.
    """
    T = np.asarray(T)
    spec = eig(T, vectors=True)
    cond = float(np.linalg.cond(spec.eigenvectors))
    p = T[1:, 1:]
    rad = float(np.max(np.abs(np.linalg.eigvals(p)))) if p.size else 0.0
    n_unit = int(np.sum(np.abs(spec.eigenvalues - 1) < gap_tol))
    return SpectrumReport(spec.eigenvalues, n_unit == 1, rad < 1 - MIXING_TOL, rad, cond)


# --- lattices and contraction certificates ---------------------------------

@dataclass(frozen=True, eq=False)
class Lattice:
    points: np.ndarray
    per_axis: int
    n_random: int
    seed: int

    def descriptor(self) -> dict:
        return {
            "per_axis": self.per_axis,
            "n_random": self.n_random,
            "seed": self.seed,
            "n_points": int(len(self.points)),
            "lo": self.points.min(axis=0).tolist(),
            "hi": self.points.max(axis=0).tolist(),
        }


def input_lattice(lo, hi, per_axis: int = DEFAULT_PER_AXIS, n_random: int = DEFAULT_RANDOM_POINTS,
                  seed: int = 0) -> Lattice:
    """Uniform grid on ``[lo, hi]`` plus ``n_random`` seeded interior points."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if per_axis < 1 or n_random < 0:
        raise ValueError("lattice needs per_axis >= 1 and n_random >= 0")
    axes = [np.linspace(a, b, per_axis) if b > a else np.array([a]) for a, b in zip(lo, hi)]
    grid = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, lo.size)
    rng = np.random.Generator(np.random.Philox(seed))
    rand = lo + (hi - lo) * rng.uniform(size=(n_random, lo.size))
    return Lattice(np.vstack([grid, rand]), per_axis, n_random, seed)


def model_lattice(model: SASModel, per_axis: int = DEFAULT_PER_AXIS, n_random: int = DEFAULT_RANDOM_POINTS,
                  seed: int = 0) -> Lattice:
    return input_lattice(model.lo, model.hi, per_axis, n_random, seed)


def _stack_norms(P: np.ndarray, kind: str) -> np.ndarray:
    if kind == "spectral":
        return np.linalg.norm(P, 2, axis=(1, 2))
    if kind == "col_sum":
        return np.abs(P).sum(axis=1).max(axis=1)
    if kind == "row_sum":
        return np.abs(P).sum(axis=2).max(axis=1)
    raise ValueError(f"unknown norm {kind!r}")


def _vector_norms(Q: np.ndarray, kind: str) -> np.ndarray:
    return {"spectral": lambda: np.linalg.norm(Q, axis=1),
            "col_sum": lambda: np.abs(Q).sum(axis=1),
            "row_sum": lambda: np.abs(Q).max(axis=1)}[kind]()


def _scale_candidates(m: int, seed: int, grid_size: int = 9, max_grid: int = 729, n_random: int = 256) -> np.ndarray:
    """Diagonal scales (first entry pinned to 1) from a coarse log grid."""
    logs = np.linspace(-2.0, 2.0, grid_size)
    if grid_size ** (m - 1) <= max_grid:
        rest = np.array(list(itertools.product(logs, repeat=m - 1))).reshape(-1, m - 1)
    else:
        rng = np.random.Generator(np.random.Philox(seed))
        rest = rng.choice(logs, size=(n_random, m - 1))
    return 10.0 ** np.hstack([np.zeros((len(rest), 1)), rest])


MAX_PAIR_POINTS = 1500


def _pair_product_sup(P: np.ndarray, chunk: int = 200) -> float:
    """``max ||P[i] @ P[j]||_2`` over all ordered pairs of lattice points."""
    best = 0.0
    for start in range(0, len(P), chunk):
        prod = np.einsum("aij,bjk->abik", P[start:start + chunk], P)
        best = max(best, float(np.max(np.linalg.norm(prod.reshape(-1, *P.shape[1:]), 2, axis=(1, 2)))))
    return best


@dataclass(frozen=True)
class ESPReport:
    """Outcome of the norm search and product estimates over a lattice.

    ``norm``/``rate`` name the best certifying norm and its lattice supremum.
    ``q_sup`` is ``sup ||q(z)||`` in that norm and ``to_euclidean`` bounds the
    Euclidean vector norm by that norm, so filter tails can be stated in the
    usual coordinates.
    """

    verdict: str
    norm: Optional[str]
    rate: float
    margin: float
    norm_table: dict
    product_estimates: dict
    mixing_per_input: np.ndarray
    max_traceless_radius: float
    q_sup: float
    to_euclidean: float
    scale: Optional[np.ndarray]
    lattice: dict

    @property
    def certified(self) -> bool:
        return self.verdict == "certified_contractive"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mixing_per_input"] = {"all": bool(np.all(self.mixing_per_input)),
                                 "n_not_mixing": int(np.sum(~self.mixing_per_input))}
        d["certified"] = self.certified
        return jsonable(d)


def contraction_certificate(model: SASModel, lattice: Lattice | None = None,
                            norms: Sequence[str] = ("spectral", "col_sum", "row_sum", "scaled_spectral",
                                                    "spectral_pairs"),
                            k_max: int = 6, n_products: int = 200, seed: int = 0) -> ESPReport:
    """Search a small family of norms for ``sup_z |||p(z)||| < 1``.

    Verdicts: ``certified_contractive`` if some norm has supremum below
    ``1 - 1e-10``; ``necessary_condition_failed`` if some lattice point has
    traceless spectral radius at least ``1 - 1e-10`` (no norm can then be
    below 1); ``inconclusive`` otherwise. Random products of length up to
    ``k_max`` are sampled as joint-spectral-radius evidence only.

    ``spectral_pairs`` is tried only when the single-step norms fail and
    every lattice point is mixing. It bounds all two-step products
    ``p(z) p(z')`` over the lattice exhaustively; ``r2 = sup ||p p'|| < 1``
    means the joint spectral radius is below 1, and the per-step rate
    ``sqrt(r2)`` plus the constant ``max(1, M / sqrt(r2))`` (``M`` the
    single-step spectral supremum) bounds every product of length ``j``.
    """
    lattice = model_lattice(model) if lattice is None else lattice
    if len(lattice.points) == 0:
        raise ValueError("empty lattice")
    P, Q = model.evaluate(lattice.points)
    m = model.state_dim

    radii = np.array([np.max(np.abs(np.linalg.eigvals(p))) for p in P])
    mixing = radii < 1 - MIXING_TOL

    table: dict = {}
    best = (np.inf, None, None)  # (sup, norm name, scale)
    for kind in norms:
        if kind == "spectral_pairs":
            continue
        if kind == "scaled_spectral":
            scales = _scale_candidates(m, seed)
            sups = np.array([np.max(np.linalg.norm(s[:, None] * P / s[None, :], 2, axis=(1, 2))) for s in scales])
            i = int(np.argmin(sups))
            table[kind] = float(sups[i])
            if sups[i] < best[0]:
                best = (float(sups[i]), kind, scales[i])
        else:
            sup = float(np.max(_stack_norms(P, kind)))
            table[kind] = sup
            if sup < best[0]:
                best = (sup, kind, None)

    rng = np.random.Generator(np.random.Philox(seed))
    products = {}
    for k in range(1, k_max + 1):
        idx = rng.integers(0, len(P), size=(n_products, k))
        prod = P[idx[:, 0]]
        for j in range(1, k):
            prod = np.einsum("nij,njk->nik", prod, P[idx[:, j]])
        products[k] = float(np.max(np.linalg.norm(prod, 2, axis=(1, 2))) ** (1.0 / k))

    pair_const = None
    if "spectral_pairs" in norms and best[0] >= 1 - MIXING_TOL and np.all(mixing) and len(P) <= MAX_PAIR_POINTS:
        r2 = _pair_product_sup(P)
        rho = math.sqrt(r2)
        table["spectral_pairs"] = rho
        if rho < best[0]:
            M = float(np.max(np.linalg.norm(P, 2, axis=(1, 2))))
            pair_const = max(1.0, M / rho) if rho > 0 else max(1.0, M)
            best = (rho, "spectral_pairs", None)

    sup, kind, scale = best
    margin = 1.0 - sup
    if margin > MIXING_TOL:
        verdict = "certified_contractive"
    elif not np.all(mixing):
        verdict = "necessary_condition_failed"
    else:
        verdict = "inconclusive"

    if kind == "scaled_spectral":
        q_sup = float(np.max(np.linalg.norm(scale[None, :] * Q, axis=1)))
        to_euc = float(1.0 / np.min(scale))
    elif kind == "spectral_pairs":
        q_sup, to_euc = float(np.max(np.linalg.norm(Q, axis=1))), pair_const
    elif kind is not None:
        q_sup = float(np.max(_vector_norms(Q, kind)))
        to_euc = math.sqrt(m) if kind == "row_sum" else 1.0
    else:
        q_sup, to_euc = float(np.max(np.linalg.norm(Q, axis=1))), 1.0

    return ESPReport(verdict, kind, sup, margin, table, products, mixing, float(np.max(radii)),
                     q_sup, to_euc, scale, lattice.descriptor())


# --- filters ----------------------------------------------------------------

@dataclass(frozen=True)
class FilterResult:
    x: np.ndarray
    depth: int
    tail_bound: float
    rate: float


def filter_depth(rate: float, q_sup: float, tol: float, to_euclidean: float = 1.0) -> int:
    """Smallest ``J`` with ``to_euclidean * rate**J * q_sup / (1 - rate) < tol``."""
    if not 0 <= rate < 1:
        raise ValueError(f"decay rate must lie in [0, 1), got {rate}")
    c = to_euclidean * q_sup / (1 - rate)
    if c < tol:
        return 0
    if rate == 0:
        return 1
    J = max(1, math.ceil(math.log(tol / c) / math.log(rate)))
    while rate**J * c >= tol:
        J += 1
    return J


def filter_eval(model: SASModel, inputs, tol: float = CONVERGENCE_TOL, certificate: ESPReport | None = None,
                rate: float | None = None, q_sup: float | None = None) -> FilterResult:
    """Filter output at the last input of ``inputs`` (a finite left sequence).

    Evaluates ``sum_j p(z_t) ... p(z_{t-j+1}) q(z_{t-j})`` truncated at the
    depth ``J`` where the geometric tail bound drops below ``tol``. A decay
    rate comes from ``certificate`` or is supplied as ``rate`` (then
    ``q_sup`` defaults to the supremum over the given inputs). Without either
    the filter may not exist and the call is refused.
    """
    Z = _as_input_array(inputs, model.input_dim)
    if certificate is not None:
        if not certificate.certified:
            raise ValueError(f"no contraction certificate (verdict: {certificate.verdict}); filter may not exist")
        r, qs, kappa = certificate.rate, certificate.q_sup, certificate.to_euclidean
    elif rate is not None:
        r, kappa = float(rate), 1.0
        qs = q_sup if q_sup is not None else float(max(np.linalg.norm(model.q(z)) for z in Z))
    else:
        raise ValueError("filter_eval needs a contraction certificate or a decay rate r < 1")
    if not r < 1:
        raise ValueError(f"decay bound {r} is not below 1; filter may not exist")
    J = filter_depth(r, qs, tol, kappa)
    if J > len(Z):
        raise ValueError(f"input sequence has {len(Z)} entries but truncation depth {J} is needed for tol={tol:g}")
    x = np.zeros(model.state_dim)
    M = np.eye(model.state_dim)
    for j in range(J):
        p, q = model.blocks(model.check_input(Z[-1 - j]))
        x = x + M @ q
        M = M @ p
    tail = kappa * r**J * qs / (1 - r) if r > 0 else 0.0
    return FilterResult(x, J, float(tail), r)


def geometric_column_sum(decay: float, terms: int) -> float:
    """Partial sum ``sum_{j<terms} decay**j`` (the constant-input filter weight)."""
    j = np.arange(terms)
    return float(np.sum(decay**j))


def blend_filter(channel: ParamChannel, sigma, eps: float, inputs, tol: float = CONVERGENCE_TOL) -> tuple[np.ndarray, int]:
    """Filter of ``rho -> (1 - eps) T(rho, z) + eps sigma`` from its series.

    Unrolling the recursion gives
    ``eps * sum_j (1 - eps)**j (T_t o ... o T_{t-j+1})(sigma)``, each term a
    state, so truncating after ``J`` terms leaves a trace-norm tail of
    ``(1 - eps)**J``. Returns the state and ``J``.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"blend weight must lie in (0, 1), got {eps}")
    Z = _as_input_array(inputs, channel.input_dim)
    basis = gellmann_basis(channel.dim)
    J = max(1, math.ceil(math.log(tol) / math.log(1 - eps)))
    if J > len(Z):
        raise ValueError(f"input sequence has {len(Z)} entries but {J} terms are needed for tol={tol:g}")
    s = to_coords(np.asarray(sigma, dtype=complex), basis)
    acc = np.zeros_like(s)
    M = np.eye(len(basis), dtype=complex)
    for j in range(J):
        acc = acc + (1 - eps) ** j * (M @ s)
        M = M @ to_superop(channel(Z[-1 - j]), basis)
    out = eps * np.einsum("k,kij->ij", acc, basis.elements)
    return (out + out.conj().T) / 2, J


# --- fixed points -----------------------------------------------------------

@dataclass(frozen=True)
class FixedPoint:
    z: np.ndarray
    x: np.ndarray
    rho: np.ndarray
    residual: float


FIXED_POINT_GAP = 1e-10


def fixed_point(model: SASModel, z) -> FixedPoint:
    """``x* = (I - p(z))^{-1} q(z)`` and the corresponding state."""
    p, q = model.blocks(model.check_input(z))
    # cond() alone misses I - p ~ eps * I, which is perfectly conditioned
    gap = float(np.abs(np.linalg.eigvals(p) - 1).min()) if len(q) else 1.0
    try:
        if gap < FIXED_POINT_GAP:
            raise SingularMatrixError("unit eigenvalue", np.inf)
        x = solve(np.eye(len(q)) - p, q)
    except SingularMatrixError as exc:
        raise SingularMatrixError(
            f"I - p(z) is singular at z={z}: p has an eigenvalue within {gap:.2g} of 1", exc.condition
        ) from exc
    rho = bloch_to_density(x, model.basis)
    resid = float(np.linalg.norm(p @ x + q - x))
    return FixedPoint(np.atleast_1d(np.asarray(z, dtype=float)), x, rho, resid)


@dataclass(frozen=True)
class FixedPointReport:
    points: list
    input_independent: bool
    spread: float
    witness_deviation: float
    unital: bool
    unital_defect: float

    def to_dict(self, max_points: int = 5) -> dict:
        pts = [{"z": f.z, "x": f.x, "rho": f.rho, "residual": f.residual} for f in self.points[:max_points]]
        return jsonable({
            "points": pts,
            "n_points": len(self.points),
            "input_independent": self.input_independent,
            "spread": self.spread,
            "witness_deviation": self.witness_deviation,
            "unital": self.unital,
            "unital_defect": self.unital_defect,
        })


def fixed_point_report(model: SASModel, lattice: Lattice | None = None) -> FixedPointReport:
    """Fixed points over a lattice plus the input-independence and unitality predicates.

    ``spread`` is ``max_z ||rho*(z) - rho*(z_0)||_1``; ``witness_deviation``
    is ``max_z ||T(rho*(z_0), z) - rho*(z_0)||_1``, i.e. how far the first
    fixed point is from being fixed by every input.
    """
    lattice = model_lattice(model) if lattice is None else lattice
    fps = [fixed_point(model, z) for z in lattice.points]
    ref = fps[0]
    spread = max(trace_norm(f.rho - ref.rho) for f in fps)
    witness = 0.0
    qmax = 0.0
    for z in lattice.points:
        p, q = model.blocks(model.check_input(z))
        witness = max(witness, trace_norm(bloch_to_density(p @ ref.x + q, model.basis, tol=np.inf) - ref.rho))
        qmax = max(qmax, float(np.linalg.norm(q)))
    return FixedPointReport(fps, spread < FIXED_POINT_TOL, float(spread), float(witness), qmax < STRUCT_TOL, qmax)


# --- theorem checks ---------------------------------------------------------

@dataclass(frozen=True)
class TheoremReport:
    unital_trivial: bool
    constant_filter: Optional[np.ndarray]
    verified: Optional[bool]
    max_deviation: float
    variability: float
    depth: int
    n_sequences: int

    def to_dict(self) -> dict:
        return jsonable(asdict(self))


def random_inputs(model, length: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform inputs on the model's box, shape ``(length, n)``."""
    return model.lo + (model.hi - model.lo) * rng.uniform(size=(length, model.lo.size))


def theorem_checks(model: SASModel, lattice: Lattice | None = None, certificate: ESPReport | None = None,
                   n_sequences: int = 10, seed: int = 0, tol: float = THEOREM_TOL,
                   fixed_points: FixedPointReport | None = None) -> TheoremReport:
    """Predict a trivial or constant filter and test the prediction on random inputs.

    Under a contraction certificate a unital model has the filter ``x = 0``
    (``I/d``), and a model whose fixed point does not depend on the input has
    that fixed point as its filter. Both predictions are checked against
    :func:`filter_eval` on ``n_sequences`` seeded input sequences;
    ``variability`` is the largest pairwise distance between those outputs.
    Without a certificate the predicates are still reported but ``verified``
    is ``None``. A precomputed ``fixed_points`` report on the same lattice is
    reused.
    """
    lattice = model_lattice(model) if lattice is None else lattice
    certificate = contraction_certificate(model, lattice) if certificate is None else certificate
    fpr = fixed_points
    if fpr is None and certificate.certified:
        fpr = fixed_point_report(model, lattice)
    unital = fpr.unital if fpr is not None else bool(
        max(np.linalg.norm(model.q(z)) for z in lattice.points) < STRUCT_TOL)
    constant = fpr.points[0].rho if (fpr is not None and fpr.input_independent) else None
    if not certificate.certified:
        return TheoremReport(unital, constant, None, float("nan"), float("nan"), 0, 0)

    depth = filter_depth(certificate.rate, certificate.q_sup, CONVERGENCE_TOL, certificate.to_euclidean)
    rng = np.random.Generator(np.random.Philox(seed))
    outputs = []
    for _ in range(n_sequences):
        Z = random_inputs(model, max(depth, 1), rng)
        outputs.append(filter_eval(model, Z, CONVERGENCE_TOL, certificate).x)
    outputs = np.array(outputs)
    diffs = outputs[:, None, :] - outputs[None, :, :]
    variability = float(np.max(np.linalg.norm(diffs, axis=-1)))

    if unital:
        target = np.zeros(model.state_dim)
    elif constant is not None:
        target = fpr.points[0].x
    else:
        target = None
    if target is None:
        return TheoremReport(False, None, True, float("nan"), variability, depth, n_sequences)
    dev = float(np.max(np.linalg.norm(outputs - target, axis=1)))
    return TheoremReport(unital, constant, dev < tol, dev, variability, depth, n_sequences)


# --- ESP and FMP probes -----------------------------------------------------

@dataclass(frozen=True)
class ESPProbe:
    distances: np.ndarray  # (trials, T + 1) trace distances, column 0 at t = 0
    factors: np.ndarray  # per-step ratios d_t / d_{t-1}
    terminal: float
    max_factor: float

    def to_dict(self) -> dict:
        return jsonable({"terminal": self.terminal, "max_factor": self.max_factor,
                          "trials": int(self.distances.shape[0]), "steps": int(self.distances.shape[1] - 1)})


def esp_probe(channel: ParamChannel, inputs, trials: int = 5, seed: int = 0,
              initial_pairs: Sequence[tuple] | None = None) -> ESPProbe:
    """Trace distance between paired trajectories driven by the same inputs.

    Per-step contraction factors are only computed while the distance is
    above ``1e-13``; below that the ratio is rounding noise.
    """
    if initial_pairs is None:
        if trials < 1:
            raise ValueError("esp_probe needs at least one pair of initial states")
        rng = np.random.Generator(np.random.Philox(seed))
        initial_pairs = [(random_density(channel.dim, rng), random_density(channel.dim, rng)) for _ in range(trials)]
    dist = []
    for a, b in initial_pairs:
        ta = iterate_density(channel, a, inputs)
        tb = iterate_density(channel, b, inputs)
        dist.append([trace_distance(a, b)] + [trace_distance(x, y) for x, y in zip(ta, tb)])
    dist = np.array(dist)
    prev, cur = dist[:, :-1], dist[:, 1:]
    ok = prev > 1e-13
    factors = np.where(ok, cur / np.where(ok, prev, 1.0), np.nan)
    max_factor = float(np.nanmax(factors)) if np.any(ok) else 0.0
    return ESPProbe(dist, factors, float(np.max(dist[:, -1])), max_factor)


@dataclass(frozen=True)
class FMPProbe:
    ks: np.ndarray
    deviations: np.ndarray
    weighted_input_distance: np.ndarray
    decay_rate: float

    def to_dict(self) -> dict:
        return jsonable(asdict(self))


def fmp_probe(channel: ParamChannel, inputs, weights: Callable[[int], float] = lambda j: 0.9**j,
              ks: Sequence[int] = tuple(range(0, 41, 4)), trials: int = 3, seed: int = 0,
              rho0=None) -> FMPProbe:
    """Output sensitivity to perturbations of the distant past.

    For each ``k`` the inputs at times ``<= t - k`` are redrawn uniformly on
    the box, the channel is run from the same ``rho0`` and the terminal trace
    distance is recorded (max over ``trials``). Alongside it the weighted
    input distance ``sup_j w(j) ||z_{t-j} - z'_{t-j}||`` is reported.
    ``decay_rate`` is the fitted per-step factor of the deviations.

    This measures input forgetting, which stands in for continuity of the
    filter in the weighted norm.
    """
    if abs(weights(0) - 1) > 1e-12:
        raise ValueError("weighting sequence must start at w(0) = 1")
    wv = np.array([weights(j) for j in range(64)])
    if np.any(np.diff(wv) > 0):
        raise ValueError("weighting sequence must be non-increasing")
    Z = _as_input_array(inputs, channel.input_dim)
    T = len(Z)
    rho0 = np.eye(channel.dim, dtype=complex) / channel.dim if rho0 is None else np.asarray(rho0)
    base = iterate_density(channel, rho0, Z)[-1]
    rng = np.random.Generator(np.random.Philox(seed))
    ks = np.array([k for k in ks if k < T], dtype=int)
    devs, wdist = [], []
    for k in ks:
        worst, wd = 0.0, 0.0
        cut = T - k  # indices < cut (times <= t - k) are redrawn
        for _ in range(trials):
            Zp = Z.copy()
            Zp[:cut] = channel.lo + (channel.hi - channel.lo) * rng.uniform(size=(cut, channel.input_dim))
            worst = max(worst, trace_distance(iterate_density(channel, rho0, Zp)[-1], base))
            lags = T - 1 - np.arange(cut)
            wd = max(wd, float(np.max([weights(int(l)) * np.linalg.norm(Z[i] - Zp[i]) for i, l in zip(range(cut), lags)])))
        devs.append(worst)
        wdist.append(wd)
    devs = np.array(devs)
    ok = devs > 1e-12  # below this the deviations are rounding noise
    rate = float(np.exp(np.polyfit(ks[ok], np.log(devs[ok]), 1)[0])) if np.sum(ok) >= 2 else 0.0
    return FMPProbe(ks, devs, np.array(wdist), rate)


__all__ = [
    "SASModel", "ESPReport", "FixedPoint", "FixedPointReport", "FilterResult", "Lattice", "SpectrumReport",
    "TheoremReport", "ESPProbe", "FMPProbe", "superop_matrix", "sas_decompose", "sas_assemble", "sas_step",
    "iterate_sas", "iterate_density", "trace_distance", "spectrum_analysis", "input_lattice", "model_lattice",
    "contraction_certificate", "filter_depth", "filter_eval", "geometric_column_sum", "blend_filter",
    "fixed_point", "fixed_point_report", "theorem_checks", "random_inputs", "esp_probe", "fmp_probe",
    "VERDICTS",
]
