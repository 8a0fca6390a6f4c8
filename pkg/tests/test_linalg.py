import numpy as np
import pytest

from qcap.capacity.channels import DensityOperator, build_pedagogic, channel_outputs
from qcap.core.errors import DimensionMismatchError, InvalidStateError
from qcap.utils.linalg import Keep, direct_sum, hermitian_spectrum, kron, numerical_rank, partial_trace
from qcap.utils.sampling import ginibre, random_density_matrix

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_kron_identity_and_projectors():
    np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    np.testing.assert_array_equal(kron(np.diag([1, 0]), np.diag([1, 0])), np.diag([1, 0, 0, 0]))


def test_kron_index_convention():
    a = np.arange(4).reshape(2, 2)
    b = np.arange(9).reshape(3, 3)
    product = kron(a, b)
    assert product[1 * 3 + 2, 0 * 3 + 1] == a[1, 0] * b[2, 1]


def test_kron_trace_and_mixed_product(rng):
    a, b, c, d = (ginibre(2, 2, rng) for _ in range(4))
    assert np.trace(kron(a, b)) == pytest.approx(np.trace(a) * np.trace(b))
    np.testing.assert_allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)


def test_direct_sum():
    np.testing.assert_array_equal(direct_sum([[1]], [[0]]), np.diag([1, 0]))
    np.testing.assert_array_equal(direct_sum(np.eye(2), np.eye(2)), np.eye(4))


def test_direct_sum_trace(rng):
    a, b = ginibre(2, 2, rng), ginibre(3, 3, rng)
    assert np.trace(direct_sum(a, b)) == pytest.approx(np.trace(a) + np.trace(b))


def test_direct_sum_rejects_non_square():
    with pytest.raises(DimensionMismatchError):
        direct_sum(np.ones((2, 3)), np.eye(2))


def test_partial_trace_bell_state():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    np.testing.assert_allclose(partial_trace(np.outer(bell, bell), 2, 2, Keep.FIRST), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_identity():
    np.testing.assert_array_equal(partial_trace(np.eye(4), 2, 2, "first"), 2 * np.eye(2))


@pytest.mark.parametrize("keep", [Keep.FIRST, Keep.SECOND], ids=["keep_first", "keep_second"])
def test_partial_trace_of_product(rng, keep):
    a, b = ginibre(2, 2, rng), ginibre(3, 3, rng)
    expected = a * np.trace(b) if keep is Keep.FIRST else b * np.trace(a)
    np.testing.assert_allclose(partial_trace(kron(a, b), 2, 3, keep), expected, atol=1e-12)


@pytest.mark.parametrize("keep", [Keep.FIRST, Keep.SECOND], ids=["keep_first", "keep_second"])
def test_partial_trace_preserves_positivity_and_trace(rng, keep):
    rho = random_density_matrix(6, rng)
    reduced = partial_trace(rho, 2, 3, keep)
    assert np.trace(reduced).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(reduced).min() >= -1e-12


def test_partial_trace_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        partial_trace(np.eye(5), 2, 2, Keep.FIRST)


def test_hermitian_spectrum_examples():
    np.testing.assert_allclose(hermitian_spectrum(np.diag([0.3, 0.7])).eigenvalues, [0.7, 0.3])
    np.testing.assert_allclose(hermitian_spectrum(PAULI_X).eigenvalues, [1.0, -1.0], atol=1e-15)


def test_hermitian_spectrum_reconstruction_and_projectors(rng):
    m = ginibre(4, 4, rng)
    hermitian = (m + m.conj().T) / 2
    spectrum = hermitian_spectrum(hermitian)
    assert np.all(np.diff(spectrum.eigenvalues) <= 0)
    assert np.linalg.norm(spectrum.reconstruct() - hermitian) <= 1e-10
    np.testing.assert_allclose(sum(spectrum.projectors), np.eye(4), atol=1e-10)
    for k, first in enumerate(spectrum.projectors):
        np.testing.assert_allclose(first @ first, first, atol=1e-10)
        np.testing.assert_allclose(first, first.conj().T, atol=1e-10)
        for second in spectrum.projectors[k + 1 :]:
            np.testing.assert_allclose(first @ second, 0, atol=1e-10)


def test_hermitian_spectrum_clusters_degenerate_eigenvalues():
    spectrum = hermitian_spectrum(np.diag([0.5, 0.5, 0.0]))
    assert spectrum.cluster_values == pytest.approx((0.5, 0.0))
    assert [round(np.trace(p).real) for p in spectrum.projectors] == [2, 1]


def test_hermitian_spectrum_does_not_chain_small_gaps():
    values = np.array([4e-10, 3e-10, 2e-10, 1e-10, 0.0])
    spectrum = hermitian_spectrum(np.diag(values), tol=1.5e-10)
    assert len(spectrum.cluster_values) == 3
    assert [round(np.trace(p).real) for p in spectrum.projectors] == [2, 2, 1]
    assert np.linalg.norm(spectrum.reconstruct() - np.diag(values)) < 2e-10


def test_hermitian_spectrum_symmetrizes():
    skewed = np.array([[1.0, 1e-16], [0.0, 0.0]], dtype=complex)
    assert hermitian_spectrum(skewed).eigenvalues == pytest.approx([1.0, 0.0])


@pytest.mark.parametrize(
    "matrix, expected",
    [(np.diag([0.5, 0.5, 0.0]), 2), (np.eye(3), 3)],
    ids=["rank_deficient", "identity"],
)
def test_numerical_rank(matrix, expected):
    assert numerical_rank(matrix, tol=1e-10) == expected


def test_numerical_rank_rejects_negative_eigenvalues():
    with pytest.raises(InvalidStateError):
        numerical_rank(np.diag([1.0, -0.1]))


def test_numerical_rank_of_pedagogic_output():
    rho_b, _ = channel_outputs(build_pedagogic(0.3), DensityOperator.basis(0, 3))
    assert numerical_rank(rho_b.matrix) == 2
