import numpy as np
import pytest

from qcap.capacity.channels import (
    DensityOperator,
    build_erasure,
    build_generalized_erasure,
    build_pedagogic,
    build_qubit_family,
    build_qutrit,
    minimal_output_dims,
    output_matrices,
)
from qcap.capacity.entropy import bias_of_matrix
from qcap.capacity.singularity import (
    Conclusion,
    DimensionVerdict,
    FamilyKind,
    Side,
    StateFamily,
    confirm_certificate,
    convex_emergence_rate,
    convex_family,
    dimension_criterion,
    fitted_emergence_rate,
    null_projector,
    positivity_certificate,
    search_certificates,
    theorem_scan,
)
from qcap.core.errors import DimensionMismatchError, ParameterRangeError
from qcap.utils.linalg import eigenvalues_descending, numerical_rank
from qcap.utils.sampling import basis_ket, random_density_matrix, random_ket

INCOMPLETE_ERASURE_WITNESS = np.array([1, 1j]) / np.sqrt(2)


def test_null_projector_of_diagonal_state():
    np.testing.assert_allclose(null_projector(np.diag([0.6, 0.4, 0.0])), np.diag([0.0, 0.0, 1.0]), atol=1e-14)


def test_null_projector_of_full_rank_state_vanishes(rng):
    np.testing.assert_allclose(null_projector(random_density_matrix(3, rng)), np.zeros((3, 3)), atol=1e-14)


def test_convex_emergence_rate_on_diagonal_example():
    rate = convex_emergence_rate(np.diag([1.0, 0.0, 0.0]), np.diag([0.2, 0.5, 0.3]))
    assert rate.rate == pytest.approx(0.8)
    np.testing.assert_allclose(rate.coefficients, [0.5, 0.3])


def test_convex_emergence_rate_ignores_directions_inside_support():
    rate = convex_emergence_rate(np.diag([0.5, 0.5, 0.0]), np.diag([0.5, 0.5, 0.0]))
    assert rate.rate == 0.0
    assert rate.coefficients == ()


def test_convex_emergence_rate_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        convex_emergence_rate(np.eye(2) / 2, np.eye(3) / 3)


def test_convex_rate_is_trace_of_projected_direction_and_matches_fit(random_minimal_isometry, rng):
    checked = 0
    while checked < 50:
        J = random_minimal_isometry()
        ket = random_ket(J.d_a, rng)
        sigma = random_density_matrix(J.d_a, rng)
        hat = np.outer(ket, ket.conj())
        for hat_out, sigma_out in zip(output_matrices(J.matrix, J.d_b, J.d_c, hat), output_matrices(J.matrix, J.d_b, J.d_c, sigma)):
            nonzero = eigenvalues_descending(hat_out)[: numerical_rank(hat_out)]
            if nonzero[-1] < 1e-2:
                continue
            rate = convex_emergence_rate(hat_out, sigma_out)
            assert rate.rate == pytest.approx(np.trace(null_projector(hat_out) @ sigma_out).real, abs=1e-12)
            fitted = fitted_emergence_rate(lambda eps: (1 - eps) * hat_out + eps * sigma_out, hat_out.shape[0] - nonzero.size)
            assert fitted.usable
            assert fitted.rate == pytest.approx(rate.rate, rel=1e-2, abs=1e-9)
            checked += 1


def test_full_rank_base_has_no_emerging_eigenvalues(random_minimal_isometry, rng):
    for _ in range(50):
        J = random_minimal_isometry()
        base = random_density_matrix(J.d_a, rng)
        sigma = random_density_matrix(J.d_a, rng)
        for base_out, sigma_out in zip(output_matrices(J.matrix, J.d_b, J.d_c, base), output_matrices(J.matrix, J.d_b, J.d_c, sigma)):
            assert convex_emergence_rate(base_out, sigma_out).rate == 0.0


def test_fitted_rate_of_square_root_family():
    # eigenvalues of [[1 - eps, sqrt(eps) a], [sqrt(eps) a, eps]] leave zero at rate 1 - a**2
    a = 0.6

    def outputs(eps: float) -> np.ndarray:
        return np.array([[1 - eps, np.sqrt(eps) * a], [np.sqrt(eps) * a, eps]])

    rate = fitted_emergence_rate(outputs, base_null_rank=1)
    assert rate.usable
    assert rate.rate == pytest.approx(1 - a**2, rel=1e-3)


@pytest.mark.parametrize("scale", [1.0, 100.0])
def test_fitted_rate_reports_zero_for_quadratic_emergence(scale, caplog):
    rate = fitted_emergence_rate(lambda eps: np.diag([1 - scale * eps**2, scale * eps**2]), base_null_rank=1)
    assert rate.usable
    assert rate.coefficients == ()
    assert rate.rate == 0.0
    assert "unusable" not in caplog.text


def test_fitted_rate_keeps_linear_column_beside_quadratic_one():
    rate = fitted_emergence_rate(lambda eps: np.diag([1 - 0.5 * eps - eps**2, 0.5 * eps, eps**2]), base_null_rank=2)
    assert rate.usable
    assert rate.coefficients == pytest.approx((0.5,))
    assert rate.spread <= 0.05


def test_fitted_rate_without_null_space():
    assert fitted_emergence_rate(lambda eps: np.eye(2) / 2, base_null_rank=0).rate == 0.0


@pytest.mark.parametrize(
    "grid",
    [(1e-4,), (1e-4, 1e-4, 1e-6), (1e-6, 1e-5), (1e-4, 1e-10)],
    ids=["single", "repeated", "increasing", "below_floor"],
)
def test_fitted_rate_rejects_bad_grid(grid):
    with pytest.raises(ParameterRangeError):
        fitted_emergence_rate(lambda eps: np.diag([1 - eps, eps]), base_null_rank=1, eps_grid=grid)


def test_state_family_must_start_at_base():
    with pytest.raises(ValueError):
        StateFamily(
            base=DensityOperator.basis(0, 2),
            evaluate=lambda eps: DensityOperator.basis(1, 2),
            kind=FamilyKind.GENERAL,
        )


def test_convex_family_endpoints():
    family = convex_family(basis_ket(0, 2), DensityOperator.maximally_mixed(2))
    assert family.kind is FamilyKind.CONVEX
    np.testing.assert_allclose(family.evaluate(1.0).matrix, np.eye(2) / 2)


@pytest.mark.parametrize("p", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
def test_pedagogic_certificates_for_both_channels(p):
    J = build_pedagogic(p)
    direct = positivity_certificate(J, basis_ket(0, 3), DensityOperator.basis(1, 3))
    complement = positivity_certificate(J, basis_ket(0, 3), DensityOperator.basis(2, 3))
    assert direct.target is Side.DIRECT and direct.positive
    assert (direct.rate_b, direct.rate_c) == pytest.approx((1.0, 0.0), abs=1e-12)
    assert complement.target is Side.COMPLEMENT and complement.positive
    assert (complement.rate_b, complement.rate_c) == pytest.approx((0.0, 1.0), abs=1e-12)


def test_pedagogic_at_zero_is_inconclusive():
    J = build_pedagogic(0.0)
    for sigma in [DensityOperator.basis(1, 3), DensityOperator.basis(2, 3), DensityOperator.maximally_mixed(3)]:
        certificate = positivity_certificate(J, basis_ket(0, 3), sigma)
        assert certificate.conclusion is Conclusion.INCONCLUSIVE
        assert certificate.rate_b == pytest.approx(certificate.rate_c)
    assert all(found is None for found in search_certificates(J).values())


def test_pure_witness_has_zero_base_bias():
    J = build_pedagogic(0.3)
    witness = np.array([1, 1, 0]) / np.sqrt(2)
    certificate = positivity_certificate(J, witness, DensityOperator.basis(1, 3))
    assert certificate.delta_base == pytest.approx(0.0, abs=1e-9)


def test_certificate_dimension_mismatch(pedagogic):
    with pytest.raises(DimensionMismatchError):
        positivity_certificate(pedagogic, basis_ket(0, 2), DensityOperator.maximally_mixed(3))


def test_search_certificates_on_pedagogic(pedagogic):
    found = search_certificates(pedagogic)
    direct, complement = found[Side.DIRECT], found[Side.COMPLEMENT]
    assert direct is not None and complement is not None
    np.testing.assert_allclose(direct.witness_sigma.matrix, DensityOperator.basis(1, 3).matrix)
    np.testing.assert_allclose(complement.witness_sigma.matrix, DensityOperator.basis(2, 3).matrix)


def test_confirm_certificate_in_double_precision(pedagogic):
    certificate = confirm_certificate(pedagogic, positivity_certificate(pedagogic, basis_ket(0, 3), DensityOperator.basis(1, 3)))
    assert certificate.confirmation is not None
    assert certificate.confirmation.precision == "double"
    assert certificate.confirmation.gain > 0


def test_confirm_certificate_for_complement(pedagogic):
    certificate = confirm_certificate(pedagogic, positivity_certificate(pedagogic, basis_ket(0, 3), DensityOperator.basis(2, 3)))
    family = convex_family(basis_ket(0, 3), DensityOperator.basis(2, 3))
    assert certificate.confirmation is not None
    assert bias_of_matrix(pedagogic.matrix, 3, 3, family.evaluate(certificate.confirmation.eps).matrix) < 0


def test_confirm_certificate_falls_back_to_extended_precision(pedagogic):
    certificate = positivity_certificate(pedagogic, basis_ket(0, 3), DensityOperator.basis(1, 3))
    confirmed = confirm_certificate(pedagogic, certificate, eps_grid=())
    assert confirmed.confirmation is not None
    assert confirmed.confirmation.precision == "mp100"
    assert confirmed.confirmation.gain > 0


def test_confirm_leaves_inconclusive_certificates_alone():
    J = build_pedagogic(0.0)
    certificate = positivity_certificate(J, basis_ket(0, 3), DensityOperator.basis(1, 3))
    assert confirm_certificate(J, certificate) is certificate


def test_theorem_scan_on_qutrit():
    certificate = theorem_scan(build_qutrit(0.3))
    assert certificate is not None
    assert certificate.target is Side.DIRECT and certificate.positive
    np.testing.assert_allclose(certificate.witness_pure, basis_ket(0, 3))
    assert (certificate.rate_b, certificate.rate_c) == pytest.approx((2 / 3, 0.0), abs=1e-12)


@pytest.mark.parametrize("J", [build_pedagogic(0.3), build_erasure(0.6)], ids=["pedagogic", "erasure"])
def test_theorem_scan_is_silent_for_equal_minimal_dims(J):
    assert theorem_scan(J) is None


def test_theorem_scan_on_random_pairs_with_larger_direct_output(random_minimal_isometry):
    for index in range(50):
        J = random_minimal_isometry([(2, 3, 2), (2, 4, 2), (3, 4, 2), (3, 3, 2), (4, 3, 2)][index % 5])
        certificate = theorem_scan(J, samples=16)
        assert certificate is not None
        assert certificate.target is Side.DIRECT
        assert certificate.positive
        assert certificate.rate_c == 0.0


@pytest.mark.parametrize("m", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("p", [0.05, 0.25, 0.5])
@pytest.mark.parametrize("lam", [0.1, 0.5, 0.9])
def test_incomplete_erasure_is_complement_positive(m, p, lam):
    J = build_generalized_erasure(build_qubit_family(m, p), lam)
    assert minimal_output_dims(J) == (3, 4)
    image = J.matrix @ INCOMPLETE_ERASURE_WITNESS
    assert numerical_rank(np.outer(image, image.conj()).reshape(3, 4, 3, 4).trace(axis1=1, axis2=3)) == 3

    certificate = theorem_scan(J, candidates=[INCOMPLETE_ERASURE_WITNESS])
    assert certificate is not None
    assert certificate.target is Side.COMPLEMENT and certificate.positive
    confirmed = confirm_certificate(J, certificate)
    assert confirmed.confirmation is not None
    assert confirmed.confirmation.gain > 0


@pytest.mark.parametrize(
    "dims, expected",
    [
        ((2, 3, 2), DimensionVerdict.DIRECT_POSITIVE),
        ((2, 2, 3), DimensionVerdict.COMPLEMENT_POSITIVE),
        ((2, 2, 2), DimensionVerdict.SILENT),
        ((3, 3, 2), DimensionVerdict.SILENT),
        ((2, 5, 3), DimensionVerdict.DIRECT_POSITIVE),
        ((3, 1, 2), DimensionVerdict.COMPLEMENT_POSITIVE),
        ((3, 2, 1), DimensionVerdict.DIRECT_POSITIVE),
    ],
    ids=["corollary", "qubit_complement", "square", "qutrit_silent", "wide", "scalar_direct_output", "scalar_environment"],
)
def test_dimension_criterion_examples(dims, expected):
    assert dimension_criterion(*dims) is expected


def test_dimension_criterion_on_grid():
    for d_a in range(2, 6):
        for d_b in range(1, 6):
            for d_c in range(1, 6):
                verdict = dimension_criterion(d_a, d_b, d_c)
                if d_b > d_a * (d_c - 1):
                    assert verdict is DimensionVerdict.DIRECT_POSITIVE
                elif d_c > d_a * (d_b - 1):
                    assert verdict is DimensionVerdict.COMPLEMENT_POSITIVE
                else:
                    assert verdict is DimensionVerdict.SILENT


def test_dimension_criterion_rejects_trivial_input():
    with pytest.raises(ParameterRangeError):
        dimension_criterion(1, 3, 2)


@pytest.mark.parametrize("d_c", [3, 4])
def test_qubit_input_with_large_environment_has_positive_complement(d_c, random_minimal_isometry):
    assert dimension_criterion(2, 2, d_c) is DimensionVerdict.COMPLEMENT_POSITIVE
    for _ in range(20):
        J = random_minimal_isometry((2, 2, d_c))
        certificate = theorem_scan(J, samples=16)
        assert certificate is not None
        assert certificate.target is Side.COMPLEMENT and certificate.positive


def test_direct_dimension_verdicts_confirmed_on_random_pairs(random_minimal_isometry):
    for _ in range(20):
        J = random_minimal_isometry((2, 3, 2))
        assert dimension_criterion(*J.dims) is DimensionVerdict.DIRECT_POSITIVE
        certificate = theorem_scan(J, samples=16)
        assert certificate is not None
        assert certificate.target is Side.DIRECT and certificate.positive
