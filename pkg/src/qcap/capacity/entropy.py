"""Von Neumann entropy (bits) and the entropy bias S(B(rho)) - S(C(rho))."""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg

from qcap.capacity.channels import DensityOperator, Isometry, normalized_ket, output_matrices
from qcap.core.config import settings
from qcap.core.errors import DimensionMismatchError, InvalidStateError
from qcap.utils.linalg import ComplexMatrix, eigenvalues_descending


@dataclass(frozen=True)
class BiasValue:
    s_b: float
    s_c: float
    delta: float


def entropy_of_spectrum(values: npt.ArrayLike, tol: float = settings.entropy_tol, neg_tol: float = settings.rank_tol) -> float:
    spectrum = np.asarray(values, dtype=float)
    if spectrum.size and spectrum.min() < -neg_tol:
        raise InvalidStateError(f"Spectrum has negative eigenvalue {spectrum.min():.3e}")
    kept = spectrum[spectrum > tol]
    return float(-np.sum(kept * np.log2(kept)))


def von_neumann_entropy(rho: DensityOperator | ComplexMatrix, tol: float = settings.entropy_tol) -> float:
    matrix = rho.matrix if isinstance(rho, DensityOperator) else rho
    return entropy_of_spectrum(eigenvalues_descending(matrix), tol)


def bias_of_matrix(matrix: ComplexMatrix, d_b: int, d_c: int, rho: ComplexMatrix, tol: float = settings.entropy_tol) -> float:
    rho_b, rho_c = output_matrices(matrix, d_b, d_c, rho)
    s_b = entropy_of_spectrum(scipy.linalg.eigvalsh(rho_b), tol, neg_tol=np.inf)
    s_c = entropy_of_spectrum(scipy.linalg.eigvalsh(rho_c), tol, neg_tol=np.inf)
    return s_b - s_c


def entropy_bias(J: Isometry, rho: DensityOperator, tol: float = settings.entropy_tol) -> BiasValue:
    if rho.dim != J.d_a:
        raise DimensionMismatchError(f"Input state has dimension {rho.dim}, channel expects {J.d_a}")
    rho_b, rho_c = output_matrices(J.matrix, J.d_b, J.d_c, rho.matrix)
    s_b = von_neumann_entropy(rho_b, tol)
    s_c = von_neumann_entropy(rho_c, tol)
    return BiasValue(s_b=s_b, s_c=s_c, delta=s_b - s_c)


def output_spectra_pure(J: Isometry, psi: npt.ArrayLike, tol: float = settings.entropy_tol) -> list[float]:
    """Common nonzero spectrum of B([psi]) and C([psi]): the squared Schmidt coefficients of J|psi>."""
    ket = normalized_ket(psi)
    if ket.shape[0] != J.d_a:
        raise DimensionMismatchError(f"Ket has dimension {ket.shape[0]}, channel expects {J.d_a}")
    schmidt = scipy.linalg.svdvals((J.matrix @ ket).reshape(J.d_b, J.d_c)) ** 2
    return [float(value) for value in schmidt if value > tol]
