import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrc_sas.basis import gellmann_basis, random_density
from qrc_sas.channels import (
    DomainError,
    KrausSet,
    ParamChannel,
    SuperOp,
    apply,
    blend,
    choi,
    compose,
    constant_channel,
    dephasing,
    depolarizing,
    identity_channel,
    is_cptp,
    kraus_from_choi,
    random_kraus,
    rotation,
    to_superop,
    transpose_map,
    unitary_channel,
)
from qrc_sas.numerics import DimensionError, trace_norm
from qrc_sas.sas import blend_filter, iterate_density, sas_decompose, superop_matrix

seeds = st.integers(0, 2**32 - 1)


def test_identity_channel_keeps_state(rng):
    rho = random_density(3, rng)
    assert np.allclose(apply(identity_channel(3), rho), rho)


@pytest.mark.parametrize("d", [2, 3])
def test_full_depolarizing_gives_maximally_mixed(d, rng):
    assert np.allclose(apply(depolarizing(1.0, d), random_density(d, rng)), np.eye(d) / d, atol=1e-14)


def test_depolarizing_sas_blocks():
    lam = 0.35
    p, q = sas_decompose(superop_matrix(depolarizing(lam, 3)))
    assert np.allclose(p, (1 - lam) * np.eye(8), atol=1e-14)
    assert np.allclose(q, 0, atol=1e-14)
    assert np.allclose(to_superop(depolarizing(0.0)), np.eye(4), atol=1e-14)


def test_depolarizing_range():
    with pytest.raises(ValueError):
        depolarizing(1.2)


def test_dephasing_scales_coherences(rng):
    g = 0.8
    rho = random_density(2, rng)
    out = apply(dephasing(g), rho)
    assert np.allclose(np.diag(out), np.diag(rho), atol=1e-15)
    assert out[0, 1] == pytest.approx(np.exp(-g * g / 2) * rho[0, 1], abs=1e-15)


def test_dephasing_superoperator_and_limits(rng):
    c = np.exp(-0.5)
    assert np.allclose(superop_matrix(dephasing(1.0)), np.diag([1, c, c, 1]), atol=1e-15)
    assert np.allclose(superop_matrix(dephasing(0.0)), np.eye(4), atol=1e-15)
    rho = random_density(2, rng)
    assert np.allclose(apply(dephasing(20.0), rho), np.diag(np.diag(rho)), atol=1e-8)


def test_cptp_report_examples():
    assert is_cptp(depolarizing(0.4)).cptp
    rep = is_cptp(transpose_map(2))
    assert not rep.cptp
    # transpose is trace preserving, so only the Choi spectrum flags it
    assert rep.trace_defect < 1e-12 and rep.choi_min_eigenvalue == pytest.approx(-1.0)
    dropped = KrausSet(depolarizing(0.4).operators[:-1])
    assert is_cptp(dropped).completeness_defect == pytest.approx(0.1)


def test_choi_of_identity_is_entangled_projector():
    omega = np.eye(2).reshape(4)
    assert np.allclose(choi(identity_channel(2)), np.outer(omega, omega))


def test_choi_of_depolarizing_spectrum():
    # (1 - lam) |Omega><Omega| + lam I/d, with <Omega|Omega> = d
    lam, d = 0.3, 2
    w = np.linalg.eigvalsh(choi(depolarizing(lam, d)))
    assert np.allclose(w, [lam / d] * 3 + [(1 - lam) * d + lam / d])


def test_depolarizing_telescoping(rng):
    lam = rng.uniform(0.1, 0.9, size=200)
    keep = np.concatenate([[1.0], np.cumprod(1 - lam)[:-1]])
    assert abs(np.sum(lam * keep) - (1 - np.prod(1 - lam))) < 1e-12


def test_unitary_validation():
    with pytest.raises(ValueError):
        unitary_channel(np.array([[1, 1], [0, 1]]))
    with pytest.raises(DimensionError):
        unitary_channel(np.ones((2, 3)))


def test_compose_with_identity(rng):
    K = random_kraus(2, rng)
    assert np.allclose(to_superop(compose(identity_channel(2), K)), to_superop(K))


def test_compose_dephasing_after_unitary_is_unital():
    T = compose(dephasing(1.0), unitary_channel(rotation((1, 0, 0), 0.7)))
    assert np.allclose(apply(T, np.eye(2) / 2), np.eye(2) / 2)


def test_compose_dimension_mismatch():
    with pytest.raises(DimensionError):
        compose(identity_channel(2), identity_channel(3))


def test_param_channel_domain():
    ch = constant_channel(depolarizing(0.5), 0.0, 1.0)
    with pytest.raises(DomainError):
        ch(1.5)
    with pytest.raises(ValueError):
        ParamChannel(2, lambda z: None, 1.0, 0.0)


def test_blend_weight_range():
    ch = constant_channel(depolarizing(0.5))
    for eps in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            blend(ch, np.eye(2) / 2, eps)


def test_blend_near_one_filter_is_sigma(rng):
    base = ParamChannel(2, lambda z: unitary_channel(rotation((0, 1, 0), 3 * float(z[0]))), 0.0, 1.0)
    sigma = random_density(2, rng)
    out, _ = blend_filter(base, sigma, 0.999, rng.uniform(size=20))
    assert trace_norm(out - sigma) < 1e-2


def test_blend_with_unitary_matches_iteration(rng):
    base = ParamChannel(2, lambda z: unitary_channel(rotation((1, 1, 0), 2 * np.pi * float(z[0]))), 0.0, 1.0)
    sigma = random_density(2, rng)
    Z = rng.uniform(size=80)
    it = iterate_density(blend(base, sigma, 0.5), random_density(2, rng), Z)[-1]
    series, depth = blend_filter(base, sigma, 0.5, Z)
    assert depth <= 60
    assert np.max(np.abs(it - series)) < 1e-10


def test_blend_single_application_form_is_not_the_filter(rng):
    # the one-step sum eps*sigma + eps*sum (1-eps)^j T_{t+1-j}(sigma) misses the compositions
    base = ParamChannel(2, lambda z: unitary_channel(rotation((1, 0, 0), np.pi * float(z[0]))), 0.0, 1.0)
    sigma = np.diag([1.0, 0.0]).astype(complex)
    Z = rng.uniform(size=80)
    eps = 0.5
    naive = eps * sigma + sum(eps * (1 - eps) ** j * apply(base(Z[-j]), sigma) for j in range(1, 60))
    series, _ = blend_filter(base, sigma, eps, Z)
    assert np.max(np.abs(naive - series)) > 1e-3


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3]), seeds)
def test_blend_is_cptp(d, seed):
    rng = np.random.default_rng(seed)
    K = random_kraus(d, rng)
    ch = blend(constant_channel(K), random_density(d, rng), float(rng.uniform(0.01, 0.99)))
    assert is_cptp(ch(0.5)).cptp


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([2, 3]), seeds)
def test_non_expansive_and_trace_preserving(d, seed):
    rng = np.random.default_rng(seed)
    K = random_kraus(d, rng, n_ops=int(rng.integers(1, d * d + 1)))
    a, b = random_density(d, rng), random_density(d, rng)
    Ta, Tb = apply(K, a), apply(K, b)
    assert trace_norm(Ta - Tb) <= trace_norm(a - b) + 1e-10
    assert abs(np.trace(Ta) - 1) < 1e-12


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([2, 3]), seeds)
def test_kraus_choi_roundtrip(d, seed):
    rng = np.random.default_rng(seed)
    K = random_kraus(d, rng)
    K2 = kraus_from_choi(choi(K))
    assert len(K2) <= d * d
    rho = random_density(d, rng)
    assert np.max(np.abs(apply(K2, rho) - apply(K, rho))) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3]), seeds)
def test_superop_of_composition_is_product(d, seed):
    rng = np.random.default_rng(seed)
    A, B = random_kraus(d, rng), random_kraus(d, rng)
    assert np.allclose(to_superop(compose(A, B)), to_superop(A) @ to_superop(B), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_superop_reproduces_action(seed):
    rng = np.random.default_rng(seed)
    K = random_kraus(3, rng)
    basis = gellmann_basis(3)
    S = SuperOp(to_superop(K, basis), basis)
    H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    H = H + H.conj().T
    assert np.allclose(S.apply_operator(H), K.apply_operator(H), atol=1e-12)
