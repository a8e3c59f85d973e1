"""Acceptance checks, shared by the test suite and ``qrc-sas verify``.

Each check returns a :class:`CheckResult`. Passing ``tol`` overrides the
check's tolerance thresholds (not its structural thresholds such as
``sigma < 1``), which is how a deliberately broken run is produced.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import lindblad as lb
from .basis import (
    gellmann_basis,
    pauli_expectations,
    random_density,
    tensor_basis,
    to_coords,
)
from .channels import (
    KrausSet,
    ParamChannel,
    apply,
    blend,
    choi,
    compose,
    dephasing,
    depolarizing,
    isometry_kraus,
    kraus_from_choi,
    random_kraus,
    rotation,
    unitary_channel,
)
from .numerics import eig, spectral_radius, trace_norm
from .sas import (
    SASModel,
    blend_filter,
    contraction_certificate,
    filter_eval,
    fixed_point,
    geometric_column_sum,
    input_lattice,
    iterate_density,
    iterate_sas,
    random_inputs,
    sas_decompose,
    superop_matrix,
    trace_distance,
)

SEED = 20240917
SINGULAR_BAND = 1e-3


@dataclass
class CheckResult:
    name: str
    passed: bool
    observed: str
    expected: str
    tol: float
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: observed {self.observed}; expected {self.expected} ({self.seconds:.2f}s)"


def _rng(offset: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(SEED + offset))


def _open_unit(rng, size=None):
    # uniform on (0, 2]
    return 2.0 * (1.0 - rng.uniform(size=size))


def _off_band(gamma, h, c):
    return c is None or abs(gamma - math.sqrt(c) * abs(h)) > SINGULAR_BAND


def _match_sets(a, b) -> float:
    """Largest distance in a greedy nearest-neighbour matching of two point sets."""
    b = list(b)
    worst = 0.0
    for x in a:
        j = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b.pop(j)))
    return worst


# --- basis -----------------------------------------------------------------

def check_basis(tol: float | None = None) -> CheckResult:
    tol = 1e-12 if tol is None else tol
    bases = [gellmann_basis(d) for d in (2, 3, 4, 5)] + [tensor_basis(gellmann_basis(2), 2)]
    errs = [float(np.max(np.abs(B.gram() - np.eye(len(B))))) for B in bases]
    ok = max(errs) < tol and len(bases[-1]) == 16
    return CheckResult("basis orthonormality", ok, f"max |G - I| = {max(errs):.2e}", f"< {tol:g}", tol)


# --- propagators -----------------------------------------------------------

_SINGULAR_C = {"unital_dephasing": 1.0, "bad_zfield": None, "good_xfield": 16.0}


def check_analytic_vs_numeric(tol: float | None = None, n_points: int = 200) -> CheckResult:
    tol = 1e-8 if tol is None else tol
    rng = _rng(2)
    worst = {}
    for fam, analytic in lb.ANALYTIC.items():
        err, done = 0.0, 0
        while done < n_points:
            gamma, h, dt = _open_unit(rng, 3)
            if not _off_band(gamma, h, _SINGULAR_C[fam]):
                continue
            model = lb.qubit_model(fam, gamma, dt, h)
            Tn = lb.propagator(model, 1.0).matrix
            err = max(err, float(np.max(np.abs(Tn - analytic(gamma, h, dt).matrix))))
            done += 1
        worst[fam] = err
    m = max(worst.values())
    return CheckResult("analytic vs expm propagators", m < tol, f"max entry error {m:.2e}", f"< {tol:g}",
                       tol, details=worst)


# --- eigenvalues -----------------------------------------------------------

def check_eigenvalues(tol: float | None = None, n_points: int = 50) -> CheckResult:
    tol = 1e-10 if tol is None else tol
    rng = _rng(3)
    worst = {"unital_dephasing": 0.0, "bad_zfield": 0.0}
    closed = {"unital_dephasing": lb.unital_dephasing_eigenvalues, "bad_zfield": lb.bad_zfield_eigenvalues}
    for fam in worst:
        done = 0
        while done < n_points:
            gamma, h, dt = _open_unit(rng, 3)
            if not _off_band(gamma, h, _SINGULAR_C[fam]):
                continue
            T = lb.propagator(lb.qubit_model(fam, gamma, dt, h), 1.0).matrix
            numeric = eig(T, vectors=False).eigenvalues
            worst[fam] = max(worst[fam], _match_sets(closed[fam](gamma, h, dt), numeric))
            done += 1
    m = max(worst.values())
    return CheckResult("eigenvalue closed forms", m < tol, f"max eigenvalue error {m:.2e}", f"< {tol:g}",
                       tol, details=worst)


# --- singular-value scans --------------------------------------------------

def scan_axis(n: int = 101, top: float = 2.0) -> np.ndarray:
    """``n`` evenly spaced points in ``(0, top]``."""
    return np.linspace(0.0, top, n + 1)[1:]


def check_singular_value_grids(tol: float | None = None, n: int = 101, dt: float = 1.0) -> CheckResult:
    tol = 1e-12 if tol is None else tol
    axis = scan_axis(n)
    sv_max = {"unital_dephasing": 0.0, "good_xfield": 0.0}
    closed_err = 0.0
    closed = {"unital_dephasing": lb.unital_dephasing_singular_values,
              "good_xfield": lb.good_xfield_singular_values}
    bad_err = 0.0
    for h in axis:
        for gamma in axis:
            for fam in sv_max:
                if not _off_band(gamma, h, _SINGULAR_C[fam]):
                    continue
                T = lb.ANALYTIC[fam](gamma, h, dt).matrix
                s = np.linalg.svd(T[1:, 1:], compute_uv=False)
                cf = closed[fam](gamma, h, dt)
                closed_err = max(closed_err, float(np.max(np.abs(np.sort(s) - np.sort(cf)))))
                sv_max[fam] = max(sv_max[fam], float(np.max(cf[1:])), float(s[0]))
            T = lb.example_bad_zfield(gamma, h, dt).matrix
            s = np.linalg.svd(T[1:, 1:], compute_uv=False)
            bad_err = max(bad_err, abs(float(s[0]) - math.exp(-gamma * dt / 2)))
    ok = sv_max["unital_dephasing"] < 1 and sv_max["good_xfield"] < 1 and bad_err < tol
    obs = (f"max sigma2,3 ing={sv_max['unital_dephasing']:.6f} good={sv_max['good_xfield']:.6f}; "
           f"bad |sigma_max - e^(-g dt/2)| = {bad_err:.1e}; closed vs SVD {closed_err:.1e}")
    return CheckResult("singular-value grids", ok, obs, f"< 1, < 1, < {tol:g}", tol,
                       details={**sv_max, "bad_error": bad_err, "closed_form_error": closed_err})


# --- unital filter ---------------------------------------------------------

def input_depolarizing(lam_min: float = 0.1, lam_max: float = 0.9, d: int = 2) -> ParamChannel:
    """Depolarizing channel with ``lam = lam_min + (lam_max - lam_min) z`` for ``z`` in [0, 1]."""
    return ParamChannel(d, lambda z: depolarizing(lam_min + (lam_max - lam_min) * float(z[0]), d), 0.0, 1.0,
                        "depolarizing")


def rotating_unital(lam: float = 0.3, g: float = 1.0, axis=(1.0, 0.0, 0.0), angle: float = np.pi) -> ParamChannel:
    """Input-dependent rotation followed by dephasing and depolarizing noise (all unital)."""
    noise = compose(depolarizing(lam), dephasing(g))
    return ParamChannel(2, lambda z: compose(noise, unitary_channel(rotation(axis, angle * float(z[0])))),
                        0.0, 1.0, "rotation+unital_noise")


def check_unital_theorem(tol: float | None = None, steps: int = 60) -> CheckResult:
    tol = 1e-10 if tol is None else tol
    rng = _rng(5)
    worst_state, worst_filter = 0.0, 0.0
    for ch in (input_depolarizing(), rotating_unital()):
        model = SASModel.from_channel(ch)
        cert = contraction_certificate(model, input_lattice(ch.lo, ch.hi, 101, 200, SEED))
        mixed = np.eye(ch.dim) / ch.dim
        for _ in range(10):
            Z = random_inputs(model, steps, rng)
            for _ in range(5):
                rho = iterate_density(ch, random_density(ch.dim, rng), Z)[-1]
                worst_state = max(worst_state, trace_distance(rho, mixed))
            fz = filter_eval(model, Z, 1e-12, cert) if cert.certified else None
            worst_filter = max(worst_filter, float(np.linalg.norm(fz.x)) if fz else np.inf)
    ok = worst_state < tol and worst_filter < tol
    return CheckResult("unital theorem", ok,
                       f"trace distance to I/d {worst_state:.1e} at step {steps}; |filter| {worst_filter:.1e}",
                       f"< {tol:g}", tol)


# --- constant filter -------------------------------------------------------

def check_constant_theorem(tol: float | None = None, length: int = 200) -> CheckResult:
    tol_state = 1e-10 if tol is None else tol
    tol_series = 1e-12 if tol is None else tol
    gamma, dt = 1.0, 1.0
    ch = lb.analytic_channel("bad_zfield", gamma, dt, 1.0)
    model = SASModel.from_channel(ch)
    cert = contraction_certificate(model, input_lattice(0.0, 1.0, 101, 200, SEED))
    target = np.diag([0.0, 1.0]).astype(complex)
    rng = _rng(6)
    dens_err, filt_err, tail = 0.0, 0.0, 0.0
    for _ in range(10):
        Z = random_inputs(model, length, rng)
        rho = iterate_density(ch, random_density(2, rng), Z)[-1]
        dens_err = max(dens_err, trace_norm(rho - target))
        f = filter_eval(model, Z, 1e-12, cert)
        filt_err = max(filt_err, float(np.max(np.abs(np.sqrt(2) * f.x - [0, 0, -1]))))
        tail = max(tail, f.tail_bound)
    decay = math.exp(-gamma * dt)
    series = geometric_column_sum(decay, 80)
    series_err = abs(series - 1 / (1 - decay))
    # <sz> of the filter: the Pauli-convention q_z times the geometric weight
    column = (decay - 1) * series
    ok = dens_err < tol_state and filt_err < tol_state and tail < 1e-12 and series_err < tol_series \
        and abs(column + 1) < tol_series
    obs = (f"density {dens_err:.1e}, filter {filt_err:.1e} (tail {tail:.1e}), "
           f"series {series_err:.1e}, <sz> column {column:.15f}")
    return CheckResult("constant-filter theorem", ok, obs, f"< {tol_state:g}, tail < 1e-12, series < {tol_series:g}",
                       tol_state)


# --- working reservoir -----------------------------------------------------

PLUS_STATE = np.full((2, 2), 0.5, dtype=complex)


def drive_expectations(channel: ParamChannel, steps: int, seed: int, rho0=PLUS_STATE) -> tuple[np.ndarray, np.ndarray]:
    """Seeded uniform inputs on the channel box and the resulting ``(<X>, <Y>, <Z>)`` series."""
    rng = np.random.Generator(np.random.Philox(seed))
    Z = channel.lo + (channel.hi - channel.lo) * rng.uniform(size=(steps, channel.input_dim))
    traj = iterate_density(channel, rho0, Z) if steps else np.empty((0, 2, 2))
    return Z, np.array([pauli_expectations(r) for r in traj]).reshape(steps, 3)


def check_working_reservoir(tol: float | None = None, steps: int = 500) -> CheckResult:
    tol_fp = 1e-10 if tol is None else tol
    tol_sx = 1e-8 if tol is None else tol
    ch = lb.analytic_channel("good_xfield", 1.0, 1.0, 1.0)
    model = SASModel.from_channel(ch)
    cert = contraction_certificate(model)
    fp = fixed_point(model, 1.0).rho
    fp_err = float(np.max(np.abs(fp - np.array([[1, 1j], [-1j, 2]]) / 3)))
    _, e = drive_expectations(ch, steps, SEED)
    sx = float(np.max(np.abs(e[99:, 0])))
    var_y, var_z = float(np.var(e[99:, 1])), float(np.var(e[99:, 2]))
    ok = cert.certified and fp_err < tol_fp and sx < tol_sx and var_y > 1e-3 and var_z > 1e-3
    obs = (f"{cert.verdict} ({cert.norm} {cert.rate:.4f}), fixed point {fp_err:.1e}, "
           f"max|<sx>| t>=100 {sx:.1e}, var <sy> {var_y:.2e}, var <sz> {var_z:.2e}")
    return CheckResult("working reservoir", ok, obs,
                       f"certified, < {tol_fp:g}, < {tol_sx:g}, > 1e-3, > 1e-3", tol_fp)


# --- measurement -----------------------------------------------------------

def affine_fixed_point(T) -> np.ndarray:
    p, q = sas_decompose(T)
    x = np.linalg.solve(np.eye(len(q)) - p, q)
    B = gellmann_basis(2)
    return np.einsum("k,kij->ij", np.concatenate([[1 / np.sqrt(2)], x]), B.elements)


def check_measurement(tol: float | None = None) -> CheckResult:
    tol_cf = 1e-8 if tol is None else tol
    tol_g0 = 1e-10 if tol is None else tol
    tol_off = 1e-6 if tol is None else tol
    gamma, h, dt = 1.0, 1.0, 1.0
    cf_err = 0.0
    for g in (0.5, 1.0, 2.0):
        rho = affine_fixed_point(lb.measurement_composed(gamma, h, dt, g).matrix)
        cf_err = max(cf_err, float(np.max(np.abs(rho - lb.measurement_fixed_point(gamma, h, dt, g)))))
    g0 = affine_fixed_point(lb.measurement_composed(gamma, h, dt, 0.0).matrix)
    g0_err = float(np.max(np.abs(g0 - np.array([[1, 1j], [-1j, 2]]) / 3)))
    off = abs(affine_fixed_point(lb.measurement_composed(gamma, h, dt, 20.0).matrix)[0, 1])
    ok = cf_err < tol_cf and g0_err < tol_g0 and off < tol_off
    obs = f"closed form {cf_err:.1e}, g=0 {g0_err:.1e}, g=20 |rho01| {off:.1e}"
    return CheckResult("measurement composition", ok, obs, f"< {tol_cf:g}, < {tol_g0:g}, < {tol_off:g}", tol_cf)


# --- CPTP structure --------------------------------------------------------

def cptp_property_errors(K: KrausSet, rng: np.random.Generator) -> dict:
    """Deviations from the structural properties every channel must satisfy."""
    d = K.dim
    a, b = random_density(d, rng), random_density(d, rng)
    expansion = trace_norm(apply(K, a) - apply(K, b)) - trace_norm(a - b)
    T = superop_matrix(K)
    spec = eig(T)
    lam, vecs = spec.eigenvalues, spec.eigenvectors
    conj = _match_sets(lam, np.conj(lam))
    nonunit = np.abs(lam - 1) > 1e-6
    trace = float(np.max(np.abs(vecs[0, nonunit]), initial=0.0))  # first coordinate ~ trace/sqrt(d)
    K2 = kraus_from_choi(choi(K))
    rho = random_density(d, rng)
    roundtrip = float(np.max(np.abs(apply(K2, rho) - apply(K, rho))))
    return {"expansion": expansion, "radius": abs(spectral_radius(T) - 1), "conjugation": conj,
            "trace": trace, "roundtrip": roundtrip}


def check_cptp_properties(tol: float | None = None, n_channels: int = 500) -> CheckResult:
    tol = 1e-10 if tol is None else tol
    tol_trace = 1e-8 if tol is None else tol
    rng = _rng(9)
    worst = {"expansion": -np.inf, "radius": 0.0, "conjugation": 0.0, "trace": 0.0, "roundtrip": 0.0}
    for i in range(n_channels):
        d = 2 + i % 2
        K = random_kraus(d, rng, n_ops=int(rng.integers(1, d * d + 1)))
        for k, v in cptp_property_errors(K, rng).items():
            worst[k] = max(worst[k], v)
    ok = (worst["expansion"] <= tol and worst["radius"] < tol and worst["conjugation"] < tol
          and worst["trace"] < tol_trace and worst["roundtrip"] < tol)
    obs = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return CheckResult("CPTP structure", ok, obs, f"<= {tol:g} (trace of eigenvectors < {tol_trace:g})", tol,
                       details=worst)


# --- isomorphism and blend -------------------------------------------------

def random_driven_channel(d: int, rng: np.random.Generator, n_ops: int = 2) -> ParamChannel:
    """``z -> isometry_kraus(A + z B)`` with Gaussian ``A``, ``B``; smooth in ``z``."""
    shape = (n_ops * d, d)
    A = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    B = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return ParamChannel(d, lambda z: isometry_kraus(A + float(z[0]) * B), 0.0, 1.0, "random")


def check_isomorphism(tol: float | None = None, n_triples: int = 50, steps: int = 100) -> CheckResult:
    tol = 1e-10 if tol is None else tol
    rng = _rng(10)
    iso = 0.0
    for i in range(n_triples):
        d = 2 + i % 2
        ch = random_driven_channel(d, rng)
        model = SASModel.from_channel(ch)
        rho0 = random_density(d, rng)
        Z = rng.uniform(size=steps)
        dens = iterate_density(ch, rho0, Z)
        xs = iterate_sas(model, to_coords(rho0, model.basis)[1:].real, Z)
        iso = max(iso, float(np.max(np.abs(to_coords(dens, model.basis)[:, 1:].real - xs))))

    blend_err = 0.0
    for base in (ParamChannel(2, lambda z: unitary_channel(rotation((0.3, 1.0, 0.5), 2 * np.pi * float(z[0]))),
                              0.0, 1.0, "unitary"),
                 random_driven_channel(2, rng), random_driven_channel(3, rng)):
        sigma = random_density(base.dim, rng)
        blended = blend(base, sigma, 0.5)
        Z = rng.uniform(size=120)
        it = iterate_density(blended, random_density(base.dim, rng), Z)[-1]
        series, _ = blend_filter(base, sigma, 0.5, Z, 1e-14)
        blend_err = max(blend_err, float(np.max(np.abs(it - series))))
    ok = iso < tol and blend_err < tol
    return CheckResult("isomorphism and blend filter", ok, f"trajectories {iso:.1e}, blend {blend_err:.1e}",
                       f"< {tol:g}", tol)


# --- registry --------------------------------------------------------------

CHECKS: list[tuple[Callable[..., CheckResult], tuple[str, ...]]] = [
    (check_basis, ("basis",)),
    (check_analytic_vs_numeric, ("lindblad", "example_ing", "example_bad", "example_good")),
    (check_eigenvalues, ("lindblad", "example_ing", "example_bad")),
    (check_singular_value_grids, ("scan", "example_ing", "example_bad", "example_good")),
    (check_unital_theorem, ("theorem", "unital", "depolarizing")),
    (check_constant_theorem, ("theorem", "example_bad")),
    (check_working_reservoir, ("example_good", "drive")),
    (check_measurement, ("measurement", "example_good")),
    (check_cptp_properties, ("cptp", "channels")),
    (check_isomorphism, ("isomorphism", "blend")),
]


def select_checks(name: str | None = None) -> list[Callable[..., CheckResult]]:
    """All checks, or those whose function name or tags contain ``name``."""
    if not name:
        return [fn for fn, _ in CHECKS]
    picked = [fn for fn, tags in CHECKS if name in tags or name in fn.__name__]
    if not picked:
        raise ValueError(f"no acceptance check matches {name!r}")
    return picked


def run_checks(name: str | None = None, tol: float | None = None) -> list[CheckResult]:
    results = []
    for fn in select_checks(name):
        t0 = time.perf_counter()
        res = fn(tol=tol)
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results
