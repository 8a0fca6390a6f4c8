"""Dense complex linear algebra for small Hilbert spaces.

Composite indices are row-major: the basis ket |i_1 i_2> of H_1 (x) H_2 sits at i_1 * d_2 + i_2.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt
import scipy.linalg

from qcap.core.config import settings
from qcap.core.errors import DimensionMismatchError, InvalidStateError

ComplexMatrix = npt.NDArray[np.complex128]


class Keep(str, Enum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class HermitianSpectrum:
    eigenvalues: npt.NDArray[np.float64]  # all eigenvalues, descending
    cluster_values: tuple[float, ...]  # one per eigenprojector
    projectors: tuple[ComplexMatrix, ...]

    def reconstruct(self) -> ComplexMatrix:
        dim = self.eigenvalues.shape[0]
        result = np.zeros((dim, dim), dtype=complex)
        for value, projector in zip(self.cluster_values, self.projectors):
            result += value * projector
        return result


def as_matrix(m: npt.ArrayLike) -> ComplexMatrix:
    matrix = np.asarray(m, dtype=complex)
    if matrix.ndim != 2:
        raise DimensionMismatchError(f"Expected a 2-d matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidStateError("Matrix has non-finite entries")
    return matrix


def _require_square(matrix: ComplexMatrix) -> int:
    rows, cols = matrix.shape
    if rows != cols:
        raise DimensionMismatchError(f"Expected a square matrix, got {rows}x{cols}")
    return rows


def hermitian_part(matrix: ComplexMatrix) -> ComplexMatrix:
    return (matrix + matrix.conj().T) / 2


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    return np.kron(as_matrix(a), as_matrix(b))


def direct_sum(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    first, second = as_matrix(a), as_matrix(b)
    _require_square(first)
    _require_square(second)
    return np.asarray(scipy.linalg.block_diag(first, second), dtype=complex)


def partial_trace(m: npt.ArrayLike, d1: int, d2: int, keep: Keep | str) -> ComplexMatrix:
    """Traces out one factor of a bipartite operator on C^d1 (x) C^d2.

    Args:
        m: Square matrix of dimension d1 * d2.
        d1: Dimension of the first factor.
        d2: Dimension of the second factor.
        keep: Which factor survives.

    Raises:
        DimensionMismatchError: If ``m`` is not square of dimension d1 * d2.

    Returns:
        The reduced operator of dimension d1 (keep first) or d2 (keep second).
    """
    matrix = as_matrix(m)
    if matrix.shape != (d1 * d2, d1 * d2):
        raise DimensionMismatchError(f"Matrix of shape {matrix.shape} is not on a {d1}x{d2} bipartite space")
    blocks = matrix.reshape(d1, d2, d1, d2)
    if Keep(keep) is Keep.FIRST:
        return np.einsum("ijkj->ik", blocks)
    return np.einsum("ijil->jl", blocks)


def hermitian_spectrum(m: npt.ArrayLike, tol: float = settings.rank_tol) -> HermitianSpectrum:
    matrix = as_matrix(m)
    _require_square(matrix)
    values, vectors = scipy.linalg.eigh(hermitian_part(matrix))
    values, vectors = values[::-1], vectors[:, ::-1]

    # each cluster stays within tol of its largest member
    clusters: list[list[int]] = []
    for index, value in enumerate(values):
        if clusters and values[clusters[-1][0]] - value <= tol:
            clusters[-1].append(index)
        else:
            clusters.append([index])

    cluster_values = tuple(float(np.mean(values[cluster])) for cluster in clusters)
    projectors = tuple(vectors[:, cluster] @ vectors[:, cluster].conj().T for cluster in clusters)
    return HermitianSpectrum(eigenvalues=np.asarray(values, dtype=float), cluster_values=cluster_values, projectors=projectors)


def eigenvalues_descending(m: npt.ArrayLike) -> npt.NDArray[np.float64]:
    matrix = as_matrix(m)
    _require_square(matrix)
    return np.asarray(scipy.linalg.eigvalsh(hermitian_part(matrix))[::-1], dtype=float)


def numerical_rank(m: npt.ArrayLike, tol: float = settings.rank_tol) -> int:
    values = eigenvalues_descending(m)
    if values.size and values[-1] < -tol:
        raise InvalidStateError(f"Matrix is not positive semidefinite: eigenvalue {values[-1]:.3e} < -{tol:.1e}")
    return int(np.count_nonzero(values > tol))
