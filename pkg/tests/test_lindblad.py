import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrc_sas import lindblad as lb
from qrc_sas.basis import PAULI_Z, SIGMA_MINUS, gellmann_basis, to_coords
from qrc_sas.channels import is_cptp
from qrc_sas.sas import sas_decompose

# Golden propagators at gamma = 1, dt = 1, from a 30-digit mpmath expm of a
# hand-built Liouvillian (independent of this package).
GOOD_H1 = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.60653065971263342, 0.0, 0.0],
    [-0.28722082588179112, 0.0, 0.36819737814703532, 0.40194276606055601],
    [-0.54555317900145156, 0.0, -0.40194276606055601, 0.16722599511675732],
])
# h = gamma lies on the removable singularity of the unital family
ING_H1 = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.13533528323661269, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.36787944117144232],
    [0.0, 0.0, -0.36787944117144232, 0.73575888234288464],
])
BAD_H07 = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.46390023642971431, 0.39073777883882368, 0.0],
    [0.0, -0.39073777883882368, 0.46390023642971431, 0.0],
    [-0.63212055882855768, 0.0, 0.0, 0.36787944117144232],
])

params = st.tuples(st.floats(0.01, 2.0), st.floats(0.01, 2.0), st.floats(0.05, 2.0))


def test_zero_generator():
    model = lb.LindbladModel(2, lambda z: np.zeros((2, 2)), [(PAULI_Z, 0.0)])
    assert np.allclose(lb.liouvillian_superop(model, 0.0), 0)


def test_pure_dephasing_generator():
    # L(X) = gamma (Z X Z - X) = -2 gamma X, same for Y; Z is untouched
    gamma = 0.4
    model = lb.LindbladModel(2, lambda z: np.zeros((2, 2)), [(PAULI_Z, gamma)])
    L = lb.liouvillian_superop(model, 0.0)
    assert np.allclose(L, np.diag([0, -2 * gamma, -2 * gamma, 0]), atol=1e-15)


def test_bad_generator_eigenvalues():
    gamma, h = 0.8, 1.3
    L = lb.liouvillian_superop(lb.qubit_model("bad_zfield", gamma, 1.0, h), 1.0)
    expected = [0, -gamma, -gamma / 2 + 1j * h, -gamma / 2 - 1j * h]
    w = np.linalg.eigvals(L)
    assert all(np.min(np.abs(w - e)) < 1e-12 for e in expected)
    assert np.allclose(L[0], 0)


def test_non_hermitian_hamiltonian_rejected():
    model = lb.LindbladModel(2, lambda z: SIGMA_MINUS, [])
    with pytest.raises(ValueError):
        lb.liouvillian_superop(model, 0.0)


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        lb.LindbladModel(2, lambda z: np.zeros((2, 2)), [(PAULI_Z, -1.0)])


def test_propagator_small_step_and_bad_step():
    model = lb.qubit_model("good_xfield", 1.0, 1.0, 1.0)
    assert np.allclose(lb.propagator(model, 1.0, 1e-12).matrix, np.eye(4), atol=1e-10)
    with pytest.raises(ValueError):
        lb.propagator(model, 1.0, 0.0)


@pytest.mark.parametrize("family", lb.FAMILIES)
def test_semigroup_and_cptp(family):
    model = lb.qubit_model(family, 0.7, 0.5, 1.1)
    T1 = lb.propagator(model, 0.6).matrix
    T2 = lb.propagator(model, 0.6, dt=1.0).matrix
    assert np.allclose(T2, T1 @ T1, atol=1e-10)
    assert is_cptp(lb.propagator(model, 0.6)).cptp
    assert np.allclose(T1[0], [1, 0, 0, 0], atol=1e-10)


@pytest.mark.parametrize("fn, golden, h", [
    (lb.example_good_xfield, GOOD_H1, 1.0),
    (lb.example_unital_dephasing, ING_H1, 1.0),
    (lb.example_bad_zfield, BAD_H07, 0.7),
])
def test_golden_propagators(fn, golden, h):
    assert np.allclose(fn(1.0, h, 1.0).matrix, golden, atol=1e-14)


def test_bad_q_in_both_conventions():
    _, q = sas_decompose(lb.example_bad_zfield(1.0, 0.7, 1.0).matrix)
    assert np.allclose(q, [0, 0, (np.exp(-1) - 1) / np.sqrt(2)], atol=1e-15)
    assert np.allclose(np.sqrt(2) * q, [0, 0, np.exp(-1) - 1], atol=1e-15)


@pytest.mark.parametrize("family", lb.FAMILIES)
def test_analytic_uses_numeric_sign_convention(family):
    # a flipped field sign would mirror the rotation block
    model = lb.qubit_model(family, 1.0, 1.0, 0.9)
    assert np.allclose(lb.propagator(model, 1.0).matrix, lb.ANALYTIC[family](1.0, 0.9, 1.0).matrix, atol=1e-12)


@pytest.mark.parametrize("family, c", [("unital_dephasing", 1.0), ("good_xfield", 16.0)])
@pytest.mark.parametrize("offset", [0.0, 1e-9, -1e-9, 1e-7, -1e-7])
def test_removable_singularity(family, c, offset):
    h = 0.3
    gamma = np.sqrt(c * h * h + offset)
    numeric = lb.propagator(lb.qubit_model(family, gamma, 1.3, h), 1.0).matrix
    assert np.allclose(lb.ANALYTIC[family](gamma, h, 1.3).matrix, numeric, atol=1e-10)


def test_unital_family_not_mixing_without_field():
    lam = lb.unital_dephasing_eigenvalues(0.6, 0.0, 1.0)
    assert np.max(np.abs(lam[1:])) == pytest.approx(1.0)
    p = lb.example_unital_dephasing(0.6, 0.0, 1.0).matrix[1:, 1:]
    assert np.max(np.abs(np.linalg.eigvals(p))) == pytest.approx(1.0, abs=1e-12)


def test_unital_family_strong_field_matches_expm():
    numeric = lb.propagator(lb.qubit_model("unital_dephasing", 1.0, 1.0, 2.0), 1.0).matrix
    assert np.allclose(lb.example_unital_dephasing(1.0, 2.0, 1.0).matrix, numeric, atol=1e-8)


def test_unital_family_singular_values_below_one():
    axis = np.linspace(0, 2, 51)[1:]
    for h in axis:
        for gamma in axis:
            if abs(gamma - h) < 1e-3:
                continue
            s = lb.unital_dephasing_singular_values(gamma, h, 1.0)
            assert s[1] < 1 and s[2] < 1


def test_bad_family_singular_values_and_fixed_point():
    s = lb.bad_zfield_singular_values(1.0, 0.4, 1.0)
    assert np.allclose(s, [np.exp(-1), np.exp(-0.5), np.exp(-0.5)])
    T = lb.example_bad_zfield(1.0, 0.4, 1.0).matrix
    p, q = sas_decompose(T)
    x = np.linalg.solve(np.eye(3) - p, q)
    assert np.allclose(np.sqrt(2) * x, [0, 0, -1], atol=1e-14)


def test_good_fixed_point():
    rho = lb.good_xfield_fixed_point(1.0, 1.0)
    assert np.allclose(rho, np.array([[1, 1j], [-1j, 2]]) / 3, atol=1e-15)
    with pytest.raises(ValueError):
        lb.example_good_xfield(0.0, 1.0, 1.0)


def test_measurement_reduces_to_good_at_zero_strength():
    assert np.allclose(lb.measurement_composed(1.0, 0.5, 1.0, 0.0).matrix,
                       lb.example_good_xfield(1.0, 0.5, 1.0).matrix)
    assert lb.measurement_correction_terms(1.0, 0.5, 1.0, 0.0) == (0.0, 0.0)


def _affine_fixed_point(T):
    p, q = sas_decompose(T)
    return np.linalg.solve(np.eye(3) - p, q)


@settings(max_examples=60, deadline=None)
@given(params)
def test_good_fixed_point_closed_form(ps):
    gamma, h, dt = ps
    x = _affine_fixed_point(lb.example_good_xfield(gamma, h, dt).matrix)
    ref = to_coords(lb.good_xfield_fixed_point(gamma, h), gellmann_basis(2))[1:].real
    assert np.allclose(x, ref, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(params, st.floats(0.0, 3.0))
def test_measurement_fixed_point_closed_form(ps, g):
    gamma, h, dt = ps
    x = _affine_fixed_point(lb.measurement_composed(gamma, h, dt, g).matrix)
    ref = to_coords(lb.measurement_fixed_point(gamma, h, dt, g), gellmann_basis(2))[1:].real
    assert np.allclose(x, ref, atol=1e-8)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(lb.FAMILIES), params)
def test_analytic_matches_expm(family, ps):
    gamma, h, dt = ps
    numeric = lb.propagator(lb.qubit_model(family, gamma, dt, h), 1.0).matrix
    assert np.allclose(lb.ANALYTIC[family](gamma, h, dt).matrix, numeric, atol=1e-8)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(["unital_dephasing", "good_xfield"]), params)
def test_singular_value_closed_forms(family, ps):
    gamma, h, dt = ps
    closed = {"unital_dephasing": lb.unital_dephasing_singular_values,
              "good_xfield": lb.good_xfield_singular_values}[family](gamma, h, dt)
    s = np.linalg.svd(lb.ANALYTIC[family](gamma, h, dt).matrix[1:, 1:], compute_uv=False)
    assert np.allclose(np.sort(closed), np.sort(s), atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(params)
def test_good_eigenvalue_closed_form(ps):
    gamma, h, dt = ps
    w = np.linalg.eigvals(lb.example_good_xfield(gamma, h, dt).matrix)
    for e in lb.good_xfield_eigenvalues(gamma, h, dt):
        assert np.min(np.abs(w - e)) < 1e-7
