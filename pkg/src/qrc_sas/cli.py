"""Command-line front end: ``qrc-sas analyze|scan|drive|verify``.

Channel-spec files are INI files with sections ``[channel]``, ``[input]``,
``[run]`` and optionally ``[scan]``::

    [channel]
    family = lindblad_good
    gamma = 1.0
    h = 1.0
    dt = 1.0

    [input]
    lo = 0.0
    hi = 1.0
    encoding = linear

    [run]
    seed = 7

Random inputs use ``numpy.random.Generator(numpy.random.Philox(seed))``
(a 64-bit-keyed counter-based generator), drawn uniformly on the input box.

Outputs are written atomically. CSV floats carry 17 significant digits and
JSON reports have sorted keys, so identical inputs give byte-identical files.
When ``--out`` is omitted the file goes to ``$QRC_SAS_OUTDIR`` (default: the
working directory). Exit codes: 0 success, 1 failed check, 2 invalid input.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import lindblad as lb
from .basis import NotAStateError
from .channels import (
    DomainError,
    ParamChannel,
    blend,
    compose,
    dephasing,
    depolarizing,
    rotation,
    unitary_channel,
)
from .checks import SINGULAR_BAND, drive_expectations, run_checks, scan_axis
from .numerics import SingularMatrixError
from .sas import (
    SASModel,
    contraction_certificate,
    fixed_point,
    fixed_point_report,
    input_lattice,
    jsonable,
    sas_decompose,
    spectrum_analysis,
    superop_matrix,
    theorem_checks,
)

OUTDIR_ENV = "QRC_SAS_OUTDIR"

FAMILIES = ("depolarizing", "dephasing", "lindblad_ing", "lindblad_bad", "lindblad_good",
            "measurement_composed", "composed", "blend")
LINDBLAD_FAMILIES = {"lindblad_ing": "unital_dephasing", "lindblad_bad": "bad_zfield",
                     "lindblad_good": "good_xfield"}
SCANNABLE = ("lindblad_ing", "lindblad_bad", "lindblad_good", "measurement_composed")

ENCODINGS = {
    "linear": lambda z: z,
    "centered": lambda z: 2.0 * z - 1.0,
    "quadratic": lambda z: z * z,
}

AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


class SpecError(ValueError):
    """The channel-spec file is malformed or out of range."""


@dataclass
class ChannelSpec:
    family: str
    params: dict
    lo: float = 0.0
    hi: float = 1.0
    encoding: str = "linear"
    seed: int = 0
    run: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    command: str
    out: Path | None = None
    lattice: int = 101
    steps: int = 500
    seed: int | None = None
    filter: str | None = None
    tol: float | None = None

    def __post_init__(self):
        if self.lattice < 1 or self.steps < 0:
            raise SpecError("--lattice must be >= 1 and --steps >= 0")


# --- spec loading -----------------------------------------------------------

_NUMERIC = {"gamma", "h", "dt", "g", "eps", "lam", "lam_min", "lam_max", "angle", "d"}


def load_spec(path) -> ChannelSpec:
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    if "channel" not in cp:
        raise SpecError("spec file needs a [channel] section")
    ch = dict(cp["channel"])
    family = ch.pop("family", None)
    if family not in FAMILIES:
        raise SpecError(f"unknown family {family!r}; expected one of {FAMILIES}")
    params = {}
    for k, v in ch.items():
        try:
            params[k] = float(v) if k in _NUMERIC else v
        except ValueError as exc:
            raise SpecError(f"parameter {k} = {v!r} is not a number") from exc
    inp = cp["input"] if "input" in cp else {}
    try:
        lo, hi = float(inp.get("lo", 0.0)), float(inp.get("hi", 1.0))
        seed = int(cp["run"].get("seed", 0)) if "run" in cp else 0
    except ValueError as exc:
        raise SpecError(f"bad number in spec: {exc}") from exc
    if not lo < hi:
        raise SpecError(f"input box [{lo}, {hi}] is empty")
    encoding = inp.get("encoding", "linear")
    if encoding not in ENCODINGS:
        raise SpecError(f"unknown encoding {encoding!r}; expected one of {tuple(ENCODINGS)}")
    run = dict(cp["run"]) if "run" in cp else {}
    scan = dict(cp["scan"]) if "scan" in cp else {}
    return ChannelSpec(family, params, lo, hi, encoding, seed, run, scan)


def _param(spec: ChannelSpec, name: str, default=None, lo=None, hi=None, strict_lo=False) -> float:
    v = spec.params.get(name, default)
    if v is None:
        raise SpecError(f"family {spec.family} needs parameter {name!r}")
    v = float(v)
    if lo is not None and (v < lo or (strict_lo and v == lo)):
        raise SpecError(f"parameter {name} = {v} must be {'>' if strict_lo else '>='} {lo}")
    if hi is not None and v > hi:
        raise SpecError(f"parameter {name} = {v} must be <= {hi}")
    return v


def _sigma(name: str, d: int) -> np.ndarray:
    if name == "mixed":
        return np.eye(d, dtype=complex) / d
    if name in ("zero", "one"):
        rho = np.zeros((d, d), dtype=complex)
        rho[0 if name == "zero" else d - 1, 0 if name == "zero" else d - 1] = 1.0
        return rho
    if name == "plus":
        return np.full((d, d), 1.0 / d, dtype=complex)
    raise SpecError(f"unknown reference state {name!r}; expected mixed, zero, one or plus")


def build_channel(spec: ChannelSpec, family: str | None = None) -> ParamChannel:
    """Input-driven channel described by ``spec``."""
    family = spec.family if family is None else family
    enc = ENCODINGS[spec.encoding]
    lo, hi = spec.lo, spec.hi

    def unit(z):  # input rescaled to [0, 1]
        return (float(z[0]) - lo) / (hi - lo)

    if family == "depolarizing":
        d = int(_param(spec, "d", 2, lo=2))
        a, b = _param(spec, "lam_min", 0.1, 0, 1), _param(spec, "lam_max", 0.9, 0, 1)
        return ParamChannel(d, lambda z: depolarizing(a + (b - a) * unit(z), d), lo, hi, family)
    if family == "dephasing":
        g = _param(spec, "g", 1.0, lo=0)
        return ParamChannel(2, lambda z: dephasing(abs(g * enc(float(z[0])))), lo, hi, family)
    if family in LINDBLAD_FAMILIES or family == "measurement_composed":
        gamma = _param(spec, "gamma", 1.0, lo=0, strict_lo=family != "lindblad_ing")
        h = _param(spec, "h", 1.0)
        dt = _param(spec, "dt", 1.0, lo=0, strict_lo=True)
        field_fn = lambda z: h * enc(float(np.sum(z)))  # noqa: E731
        if family == "measurement_composed":
            return lb.analytic_channel("good_xfield", gamma, dt, field_fn, lo, hi, g=_param(spec, "g", 1.0, lo=0))
        base = LINDBLAD_FAMILIES[family]
        if spec.params.get("backend", "analytic") == "expm":
            return lb.model_channel(lb.qubit_model(base, gamma, dt, field_fn), lo, hi, family)
        return lb.analytic_channel(base, gamma, dt, field_fn, lo, hi)
    if family == "composed":
        axis = AXES.get(str(spec.params.get("axis", "x")))
        if axis is None:
            raise SpecError(f"axis must be one of {tuple(AXES)}")
        angle = _param(spec, "angle", np.pi)
        kind = spec.params.get("noise", "depolarizing")
        if kind == "depolarizing":
            noise = depolarizing(_param(spec, "lam", 0.3, 0, 1))
        elif kind == "dephasing":
            noise = dephasing(_param(spec, "g", 1.0, lo=0))
        else:
            raise SpecError(f"noise must be depolarizing or dephasing, got {kind!r}")
        return ParamChannel(2, lambda z: compose(noise, unitary_channel(rotation(axis, angle * enc(float(z[0]))))),
                            lo, hi, family)
    if family == "blend":
        base_name = str(spec.params.get("base", "lindblad_good"))
        if base_name == "blend" or base_name not in FAMILIES:
            raise SpecError(f"blend base must be another family, got {base_name!r}")
        base = build_channel(spec, base_name)
        eps = _param(spec, "eps", 0.5, lo=0, hi=1)
        if not 0 < eps < 1:
            raise SpecError(f"eps must lie in (0, 1), got {eps}")
        return blend(base, _sigma(str(spec.params.get("sigma", "mixed")), base.dim), eps)
    raise SpecError(f"unknown family {family!r}")


# --- output helpers ---------------------------------------------------------

def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return ""
    return format(float(x), ".17g")


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def json_text(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _output_path(config: RunConfig, default_name: str) -> Path:
    if config.out is not None:
        return Path(config.out)
    return Path(os.environ.get(OUTDIR_ENV, ".")) / default_name


# --- analysis helpers -------------------------------------------------------

def labelled_singular_values(p: np.ndarray, family: str) -> np.ndarray:
    """``(sigma1, sigma2, sigma3)`` of a qubit ``p`` block.

    ``sigma1`` belongs to the axis that decouples (z for the z-field family,
    x otherwise); ``sigma2 >= sigma3`` come from the remaining 2x2 block.
    """
    if family == "lindblad_bad":
        keep, lone = [0, 1], 2
    else:
        keep, lone = [1, 2], 0
    pair = np.linalg.svd(p[np.ix_(keep, keep)], compute_uv=False)
    return np.array([abs(p[lone, lone]), pair[0], pair[1]])


def cmd_analyze(spec: ChannelSpec, config: RunConfig) -> int:
    seed = spec.seed if config.seed is None else config.seed
    ch = build_channel(spec)
    model = SASModel.from_channel(ch)
    n_random = int(spec.run.get("n_random", 1000))
    lattice = input_lattice(ch.lo, ch.hi, config.lattice, n_random, seed)
    z_ref = np.array([ch.hi[0]])
    T = superop_matrix(ch, z_ref)
    p, q = sas_decompose(T)
    spectrum = spectrum_analysis(T)
    cert = contraction_certificate(model, lattice, seed=seed)

    report = {
        "family": spec.family,
        "params": spec.params,
        "input": {"lo": spec.lo, "hi": spec.hi, "encoding": spec.encoding},
        "seed": seed,
        "reference_input": z_ref,
        "superoperator": T,
        "p": p,
        "q": q,
        "singular_values": np.linalg.svd(p, compute_uv=False),
        "spectrum": spectrum.to_dict(),
        "esp": cert.to_dict(),
    }
    if ch.dim == 2 and spec.family in SCANNABLE:
        report["labelled_singular_values"] = labelled_singular_values(p, spec.family)

    assertions = {"esp_certified": cert.certified}
    if cert.certified:
        fpr = fixed_point_report(model, lattice)
        th = theorem_checks(model, lattice, cert, seed=seed, fixed_points=fpr)
        report["fixed_points"] = fpr.to_dict()
        report["theorems"] = th.to_dict()
        assertions.update({
            "unital": fpr.unital,
            "input_independent_fixed_point": fpr.input_independent,
            "filter": ("I/d" if th.unital_trivial else
                       "constant" if th.constant_filter is not None else "input_dependent"),
            "filter_prediction_verified": th.verified,
        })
        if th.constant_filter is not None:
            assertions["constant_filter"] = th.constant_filter
    else:
        try:
            fp = fixed_point(model, z_ref)
            report["fixed_points"] = {"reference": {"x": fp.x, "rho": fp.rho, "residual": fp.residual}}
        except (SingularMatrixError, NotAStateError) as exc:
            report["fixed_points"] = {"error": str(exc)}
        assertions["filter"] = "not_certified"
    report["assertions"] = assertions
    out = _output_path(config, "analyze.json")
    write_atomic(out, json_text(jsonable(report)))
    print(f"analyze: {spec.family}: {cert.verdict}, filter {assertions['filter']} -> {out}", file=sys.stderr)
    return 0


def _scan_range(spec: ChannelSpec, key: str, n: int) -> np.ndarray:
    top = float(spec.scan.get(f"{key}_max", 2.0))
    if not top > 0:
        raise SpecError(f"scan axis {key} must have a positive upper end, got {top}")
    return scan_axis(n, top)


def cmd_scan(spec: ChannelSpec, config: RunConfig) -> int:
    if spec.family not in SCANNABLE:
        raise SpecError(f"scan supports {SCANNABLE}, not {spec.family!r}")
    n = int(spec.scan.get("n", config.lattice))
    if n < 1:
        raise SpecError("scan needs at least one point per axis")
    dt = _param(spec, "dt", 1.0, lo=0, strict_lo=True)
    g = _param(spec, "g", 1.0, lo=0) if spec.family == "measurement_composed" else None
    c = {"lindblad_ing": 1.0, "lindblad_good": 16.0, "measurement_composed": 16.0}.get(spec.family)
    rows = []
    for h in _scan_range(spec, "h", n):
        for gamma in _scan_range(spec, "gamma", n):
            if c is not None and abs(gamma - np.sqrt(c) * h) <= SINGULAR_BAND:
                rows.append([h, gamma, None, None, None, None])
                continue
            if g is not None:
                T = lb.measurement_composed(gamma, h, dt, g).matrix
            else:
                T = lb.ANALYTIC[LINDBLAD_FAMILIES[spec.family]](gamma, h, dt).matrix
            p = T[1:, 1:]
            s = labelled_singular_values(p, spec.family)
            rows.append([h, gamma, *s, float(np.max(np.abs(np.linalg.eigvals(p))))])
    out = _output_path(config, "scan.csv")
    write_atomic(out, csv_text(["h_t", "gamma", "sigma1", "sigma2", "sigma3", "max_eig_mod_traceless"], rows))
    print(f"scan: {len(rows)} points -> {out}", file=sys.stderr)
    return 0


def cmd_drive(spec: ChannelSpec, config: RunConfig) -> int:
    ch = build_channel(spec)
    if ch.dim != 2:
        raise SpecError("drive needs a qubit family")
    seed = spec.seed if config.seed is None else config.seed
    Z, e = drive_expectations(ch, config.steps, seed)
    rows = [[t + 1, Z[t, 0], *e[t]] for t in range(config.steps)]
    out = _output_path(config, "drive.csv")
    write_atomic(out, csv_text(["t", "z_t", "sx", "sy", "sz"], rows))
    print(f"drive: {config.steps} steps, seed {seed} -> {out}", file=sys.stderr)
    return 0


def cmd_verify(config: RunConfig) -> int:
    results = run_checks(config.filter, config.tol)
    for r in results:
        print(r.line())
    passed = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    if config.out is not None or os.environ.get(OUTDIR_ENV):
        doc = [{"name": r.name, "passed": r.passed, "observed": r.observed, "expected": r.expected,
                "tol": r.tol, "seconds": r.seconds} for r in results]
        write_atomic(_output_path(config, "verify.json"), json_text(doc))
    return 0 if passed else 1


# --- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qrc-sas", description="State-affine analysis of input-driven quantum channels.")
    ap.add_argument("command", choices=("analyze", "scan", "drive", "verify"))
    ap.add_argument("--spec", type=Path, help="channel-spec INI file (not needed for verify)")
    ap.add_argument("--out", type=Path, help=f"output file (default: ${OUTDIR_ENV} or the working directory)")
    ap.add_argument("--lattice", type=int, default=101, help="points per input axis / scan axis (default 101)")
    ap.add_argument("--steps", type=int, default=None, help="trajectory length for drive (default 500)")
    ap.add_argument("--seed", type=int, default=None, help="override the spec file's seed")
    ap.add_argument("--filter", default=None, help="verify: run only checks whose name or tag matches")
    ap.add_argument("--tol", type=float, default=None, help="verify: override every check tolerance")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        spec = None
        if args.command != "verify":
            if args.spec is None:
                raise SpecError(f"{args.command} needs --spec")
            spec = load_spec(args.spec)
        steps = args.steps if args.steps is not None else int(spec.run.get("steps", 500)) if spec else 500
        config = RunConfig(args.command, args.out, args.lattice, steps, args.seed, args.filter, args.tol)
        if args.command == "verify":
            return cmd_verify(config)
        return {"analyze": cmd_analyze, "scan": cmd_scan, "drive": cmd_drive}[args.command](spec, config)
    except (SpecError, DomainError, NotAStateError, ValueError) as exc:
        print(f"qrc-sas: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
