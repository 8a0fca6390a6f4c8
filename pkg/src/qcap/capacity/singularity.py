"""Emergence rates of eps log-singularities and positivity certificates for Q1.

If an input family rho(eps) starts at a point where Delta vanishes and the direct output
gains eigenvalues from zero at a larger linear rate than the complementary output, then
Delta(rho(eps)) > 0 for small eps, so Q1 of the direct channel is positive.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Callable, Sequence

import numpy as np
import numpy.typing as npt
import scipy.linalg
from mpmath.ctx_mp import MPContext

from qcap.capacity.channels import DensityOperator, Isometry, minimal_output_dims, normalized_ket, output_matrices
from qcap.capacity.entropy import bias_of_matrix, output_spectra_pure
from qcap.capacity.highprec import Ensemble, EnsembleBuilder, deep_gain_profile, ensemble_from_matrix, first_positive, to_mp_ket
from qcap.core.config import settings
from qcap.core.errors import DimensionMismatchError, ParameterRangeError
from qcap.utils.linalg import ComplexMatrix, hermitian_part
from qcap.utils.sampling import ComplexVector, random_ket, structured_kets

logger = logging.getLogger(__name__)


class Side(str, Enum):
    DIRECT = "direct"
    COMPLEMENT = "complement"


class Conclusion(str, Enum):
    POSITIVE = "positive"
    INCONCLUSIVE = "inconclusive"


class FamilyKind(str, Enum):
    CONVEX = "convex"
    GENERAL = "general"


class DimensionVerdict(str, Enum):
    DIRECT_POSITIVE = "direct_positive"
    COMPLEMENT_POSITIVE = "complement_positive"
    SILENT = "silent"


@dataclass(frozen=True, eq=False)
class StateFamily:
    """A path eps -> rho(eps) of input states with base point rho(0).

    ``ensemble`` rebuilds the same path as a pure-state ensemble in a given mpmath context.
    """

    base: DensityOperator
    evaluate: Callable[[float], DensityOperator]
    kind: FamilyKind
    ensemble: EnsembleBuilder | None = None

    def __post_init__(self) -> None:
        if np.max(np.abs(self.evaluate(0.0).matrix - self.base.matrix)) > 1e-12:
            raise ValueError("Family does not start at its base state")


def convex_family(psi: npt.ArrayLike, sigma: DensityOperator) -> StateFamily:
    """(1 - eps)[psi] + eps * sigma."""
    ket = normalized_ket(psi)
    base = DensityOperator.pure(ket)

    def evaluate(eps: float) -> DensityOperator:
        return DensityOperator((1 - eps) * base.matrix + eps * sigma.matrix)

    def ensemble(ctx: MPContext, eps: Any) -> Ensemble:
        return [(1 - eps, to_mp_ket(ket, ctx))] + [(eps * weight, vector) for weight, vector in ensemble_from_matrix(sigma.matrix, ctx)]

    return StateFamily(base=base, evaluate=evaluate, kind=FamilyKind.CONVEX, ensemble=ensemble)


@dataclass(frozen=True)
class SingularityRate:
    coefficients: tuple[float, ...]
    rate: float
    usable: bool = True
    spread: float = 0.0


@dataclass(frozen=True)
class Confirmation:
    eps: float
    gain: float  # Delta(eps) - Delta(0) in bits, sign-adjusted for the certified side
    precision: str


@dataclass(frozen=True, eq=False)
class PositivityCertificate:
    target: Side
    witness_pure: ComplexVector
    witness_sigma: DensityOperator
    rate_b: float
    rate_c: float
    conclusion: Conclusion
    coefficients_b: tuple[float, ...] = ()
    coefficients_c: tuple[float, ...] = ()
    delta_base: float = 0.0
    confirmation: Confirmation | None = None

    @property
    def positive(self) -> bool:
        return self.conclusion is Conclusion.POSITIVE


def _matrix(rho: DensityOperator | ComplexMatrix) -> ComplexMatrix:
    return rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)


def null_projector(rho: DensityOperator | ComplexMatrix, tol: float = settings.rank_tol) -> ComplexMatrix:
    values, vectors = scipy.linalg.eigh(hermitian_part(_matrix(rho)))
    null = vectors[:, values <= tol]
    return null @ null.conj().T


def convex_emergence_rate(
    rho_hat_out: DensityOperator | ComplexMatrix,
    sigma_out: DensityOperator | ComplexMatrix,
    tol: float = settings.rank_tol,
) -> SingularityRate:
    """Leading-order growth of the eigenvalues of (1 - eps) rho_hat + eps sigma that leave zero.

    The emerging eigenvalues are eps * e_i with e_i the nonzero eigenvalues of P0 sigma P0,
    P0 the null projector of rho_hat, so the total rate is Tr(P0 sigma).
    """
    rho_hat, sigma = _matrix(rho_hat_out), _matrix(sigma_out)
    if rho_hat.shape != sigma.shape:
        raise DimensionMismatchError(f"Operators of shapes {rho_hat.shape} and {sigma.shape} differ")
    p0 = null_projector(rho_hat, tol)
    values = scipy.linalg.eigvalsh(hermitian_part(p0 @ sigma @ p0))[::-1]
    coefficients = tuple(float(value) for value in values if value > tol)
    if not coefficients:
        return SingularityRate(coefficients=(), rate=0.0)
    return SingularityRate(coefficients=coefficients, rate=float(np.trace(p0 @ sigma).real))


def fitted_emergence_rate(
    outputs: Callable[[float], DensityOperator | ComplexMatrix],
    base_null_rank: int,
    eps_grid: Sequence[float] = settings.fit_eps_grid,
    spread_tol: float = settings.fit_spread,
    zero_tol: float = settings.fit_zero_tol,
) -> SingularityRate:
    """Rates of emerging eigenvalues fitted from finite eps, for families that are not convex in eps.

    Ratios lambda(eps)/eps of the ``base_null_rank`` smallest eigenvalues are extrapolated
    to eps -> 0 with two-point Richardson steps. The spread is the relative disagreement of
    successive extrapolants; a spread above ``spread_tol`` marks the rate unusable. Columns whose
    ratios or extrapolants all stay within ``zero_tol`` of 0 have slope 0 and do not count.
    """
    grid = [float(eps) for eps in eps_grid]
    if len(grid) < 2 or any(later >= earlier for earlier, later in zip(grid, grid[1:])) or grid[-1] <= 1e-9:
        raise ParameterRangeError(f"eps grid {grid} must hold at least two values decreasing strictly and staying above 1e-9")
    if base_null_rank == 0:
        return SingularityRate(coefficients=(), rate=0.0)

    ratios = np.array([np.sort(scipy.linalg.eigvalsh(hermitian_part(_matrix(outputs(eps)))))[:base_null_rank] / eps for eps in grid])
    extrapolants = np.array([(ratios[i + 1] * grid[i] - ratios[i] * grid[i + 1]) / (grid[i] - grid[i + 1]) for i in range(len(grid) - 1)])
    samples = extrapolants if len(extrapolants) > 1 else ratios

    coefficients: list[float] = []
    spread = 0.0
    usable = True
    for column in range(base_null_rank):
        if np.max(np.abs(ratios[:, column])) <= zero_tol or np.max(np.abs(extrapolants[:, column])) <= zero_tol:
            # lambda/eps -> 0: the eigenvalue emerges faster than linearly
            continue
        slope = float(extrapolants[-1, column])
        column_spread = float(np.ptp(samples[:, column]) / abs(slope)) if slope else np.inf
        spread = max(spread, column_spread)
        if slope < 0 or column_spread > spread_tol:
            usable = False
        coefficients.append(slope)

    coefficients.sort(reverse=True)
    if not usable:
        logger.warning("Fitted emergence rate is unusable (spread %.3g, coefficients %s)", spread, coefficients)
    positive = tuple(value for value in coefficients if value > 0)
    return SingularityRate(coefficients=positive, rate=float(sum(positive)), usable=usable, spread=spread)


def positivity_certificate(
    J: Isometry,
    psi: npt.ArrayLike,
    sigma: DensityOperator,
    tol: float = settings.rank_tol,
    margin: float = settings.rate_margin,
    target: Side | None = None,
) -> PositivityCertificate:
    """Compares eps log-singularity rates of both outputs along (1 - eps)[psi] + eps * sigma.

    Args:
        J: The channel pair.
        psi: Unit vector of dimension d_a; its outputs have equal spectra, so Delta vanishes there.
        sigma: Direction of the perturbation.
        tol: Zero-eigenvalue tolerance.
        margin: Amount by which the stronger rate must exceed the weaker one.
        target: Side to certify; by default the side with the larger rate.

    Raises:
        DimensionMismatchError: If psi or sigma do not live on H_a.

    Returns:
        A certificate; ``positive`` only ever means Q1 of the target channel is positive.
    """
    ket = normalized_ket(psi)
    if ket.shape[0] != J.d_a or sigma.dim != J.d_a:
        raise DimensionMismatchError(f"Witness dimensions ({ket.shape[0]}, {sigma.dim}) do not match d_a={J.d_a}")
    rho_hat = np.outer(ket, ket.conj())
    hat_b, hat_c = output_matrices(J.matrix, J.d_b, J.d_c, rho_hat)
    sigma_b, sigma_c = output_matrices(J.matrix, J.d_b, J.d_c, sigma.matrix)
    rate_b = convex_emergence_rate(hat_b, sigma_b, tol)
    rate_c = convex_emergence_rate(hat_c, sigma_c, tol)
    delta_base = bias_of_matrix(J.matrix, J.d_b, J.d_c, rho_hat)

    if target is None:
        target = Side.DIRECT if rate_b.rate >= rate_c.rate else Side.COMPLEMENT
    stronger, weaker = (rate_b.rate, rate_c.rate) if target is Side.DIRECT else (rate_c.rate, rate_b.rate)
    positive = stronger > weaker + margin and abs(delta_base) <= settings.bias_margin

    return PositivityCertificate(
        target=target,
        witness_pure=ket,
        witness_sigma=sigma,
        rate_b=rate_b.rate,
        rate_c=rate_c.rate,
        conclusion=Conclusion.POSITIVE if positive else Conclusion.INCONCLUSIVE,
        coefficients_b=rate_b.coefficients,
        coefficients_c=rate_c.coefficients,
        delta_base=delta_base,
    )


def confirm_certificate(
    J: Isometry,
    certificate: PositivityCertificate,
    eps_grid: Sequence[float] = settings.probe_eps_grid,
    deep: bool = True,
    margin: float = settings.bias_margin,
    dps: int = settings.mp_digits,
) -> PositivityCertificate:
    """Attaches a direct evaluation of Delta > 0 along the certificate's family, if one is found.

    Double precision is tried first on ``eps_grid``; with ``deep`` the family is then probed
    at eps = 10^-k in ``dps``-digit arithmetic.
    """
    if not certificate.positive:
        return certificate
    sign = 1 if certificate.target is Side.DIRECT else -1
    family = convex_family(certificate.witness_pure, certificate.witness_sigma)
    base = bias_of_matrix(J.matrix, J.d_b, J.d_c, family.base.matrix)
    for eps in eps_grid:
        gain = sign * (bias_of_matrix(J.matrix, J.d_b, J.d_c, family.evaluate(eps).matrix) - base)
        if gain > margin:
            return replace(certificate, confirmation=Confirmation(eps=float(eps), gain=float(gain), precision="double"))

    if deep and family.ensemble is not None:
        probe = first_positive(deep_gain_profile(J, family.ensemble, dps=dps, sign=sign))
        if probe is not None:
            return replace(certificate, confirmation=Confirmation(eps=probe.eps, gain=probe.gain, precision=f"mp{dps}"))
    logger.warning("No direct confirmation found for a positive %s certificate", certificate.target.value)
    return certificate


def _witness_pool(d_a: int, samples: int, seed: int, candidates: Sequence[npt.ArrayLike] = ()) -> list[ComplexVector]:
    rng = np.random.default_rng(seed)
    randoms = [random_ket(d_a, rng) for _ in range(samples)]
    return [normalized_ket(ket) for ket in candidates] + structured_kets(d_a) + randoms


def theorem_scan(
    J: Isometry,
    samples: int = settings.scan_samples,
    seed: int = settings.seed,
    sigma: DensityOperator | None = None,
    candidates: Sequence[npt.ArrayLike] = (),
    tol: float = settings.rank_tol,
) -> PositivityCertificate | None:
    """Looks for a pure input whose output has rank min(d_b, d_c) over minimal output dims.

    When d_b != d_c such a witness, perturbed towards I_a/d_a, certifies the larger output side.
    Returns None when the dims are equal or no witness is found.
    """
    d_b, d_c = minimal_output_dims(J, tol)
    if d_b == d_c:
        logger.info("Minimal output dims are equal (%d); no rank witness applies", d_b)
        return None
    rank = min(d_b, d_c)
    target = Side.DIRECT if d_b > d_c else Side.COMPLEMENT
    direction = sigma or DensityOperator.maximally_mixed(J.d_a)

    for ket in _witness_pool(J.d_a, samples, seed, candidates):
        if len(output_spectra_pure(J, ket, tol)) == rank:
            certificate = positivity_certificate(J, ket, direction, tol, target=target)
            logger.info("Rank-%d witness found; %s certificate is %s", rank, target.value, certificate.conclusion.value)
            return certificate
    logger.info("No rank-%d witness among the candidates", rank)
    return None


def search_certificates(
    J: Isometry,
    sigmas: Sequence[DensityOperator] | None = None,
    samples: int = 0,
    seed: int = settings.seed,
    tol: float = settings.rank_tol,
) -> dict[Side, PositivityCertificate | None]:
    """First positive certificate per side over witness kets and perturbation directions.

    Directions default to I_a/d_a followed by each basis dyad.
    """
    directions = list(sigmas) if sigmas else [DensityOperator.maximally_mixed(J.d_a)] + [DensityOperator.basis(k, J.d_a) for k in range(J.d_a)]
    pool = _witness_pool(J.d_a, samples, seed)
    found: dict[Side, PositivityCertificate | None] = {}
    for side in Side:
        found[side] = next(
            (
                certificate
                for ket in pool
                for sigma in directions
                if (certificate := positivity_certificate(J, ket, sigma, tol, target=side)).positive
            ),
            None,
        )
    return found


def dimension_criterion(d_a: int, d_b: int, d_c: int) -> DimensionVerdict:
    """Positivity decided by dimensions alone: the direct side when d_b > d_a(d_c - 1), the complement when d_c > d_a(d_b - 1)."""
    if d_a <= 1:
        raise ParameterRangeError(f"d_a={d_a}: channels on a one-dimensional input carry no quantum information")
    if d_b < 1 or d_c < 1:
        raise ParameterRangeError(f"Output dims ({d_b}, {d_c}) must be positive")
    if d_b > d_a * (d_c - 1):
        return DimensionVerdict.DIRECT_POSITIVE
    if d_c > d_a * (d_b - 1):
        return DimensionVerdict.COMPLEMENT_POSITIVE
    return DimensionVerdict.SILENT
