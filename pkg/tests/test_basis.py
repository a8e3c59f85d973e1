import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrc_sas.basis import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    NotAStateError,
    bloch_to_density,
    density_to_bloch,
    from_coords,
    from_expectations,
    gellmann_basis,
    is_density,
    maximally_mixed,
    pauli_expectations,
    random_density,
    tensor_basis,
    to_coords,
    to_expectations,
    validate_density,
)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_gellmann_orthonormal_hermitian(d):
    B = gellmann_basis(d)
    assert len(B) == d * d
    assert np.allclose(B.gram(), np.eye(d * d), atol=1e-12)
    for b in B.elements:
        assert np.allclose(b, b.conj().T)
    assert np.allclose(B[0], np.eye(d) / np.sqrt(d))
    assert np.allclose([np.trace(b) for b in B.elements[1:]], 0)


def test_qubit_basis_is_scaled_paulis():
    B = gellmann_basis(2)
    for b, P in zip(B.elements[1:], (PAULI_X, PAULI_Y, PAULI_Z)):
        assert np.allclose(b, P / np.sqrt(2))


def test_basis_elements_read_only():
    with pytest.raises(ValueError):
        gellmann_basis(2).elements[0, 0, 0] = 2.0


def test_tensor_basis():
    B = tensor_basis(gellmann_basis(2), 2)
    assert len(B) == 16 and B.dim == 4
    assert np.allclose(B.gram(), np.eye(16), atol=1e-12)
    assert np.allclose(B[0], np.eye(4) / 2)
    with pytest.raises(ValueError):
        tensor_basis(gellmann_basis(2), 7)


def test_bad_dimension():
    with pytest.raises(ValueError):
        gellmann_basis(1)


def test_plus_state_coordinates():
    rho = np.full((2, 2), 0.5)
    x = density_to_bloch(rho, gellmann_basis(2))
    assert np.allclose(to_expectations(x), [1.0, 0.0, 0.0])
    assert np.allclose(pauli_expectations(rho), [1.0, 0.0, 0.0])


def test_strict_bloch_to_density():
    B = gellmann_basis(2)
    with pytest.raises(NotAStateError) as info:
        bloch_to_density(from_expectations([0.0, 0.0, 1.5]), B)
    assert info.value.min_eigenvalue < 0


def test_validate_density_rejects():
    assert not is_density(np.diag([0.5, 0.6]))
    assert not is_density(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(NotAStateError):
        validate_density(np.diag([1.5, -0.5]))
    assert is_density(maximally_mixed(3))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_coordinate_roundtrip(d, seed):
    rng = np.random.default_rng(seed)
    B = gellmann_basis(d)
    rho = random_density(d, rng)
    a = to_coords(rho, B)
    assert abs(a[0] - 1 / np.sqrt(d)) < 1e-12
    assert np.max(np.abs(a.imag)) < 1e-12
    assert np.allclose(from_coords(a, B), rho, atol=1e-12)
    x = density_to_bloch(rho, B)
    assert np.allclose(bloch_to_density(x, B), rho, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_expectation_convention(seed):
    rho = random_density(2, np.random.default_rng(seed))
    x = density_to_bloch(rho, gellmann_basis(2))
    assert np.allclose(to_expectations(x), pauli_expectations(rho), atol=1e-12)
