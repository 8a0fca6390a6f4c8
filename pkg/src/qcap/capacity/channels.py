"""Isometries J: H_a -> H_b (x) H_c and the channel pairs (B, C) they define.

B(A) = Tr_c(J A J^dagger) is the direct channel and C(A) = Tr_b(J A J^dagger) its complement.
Output indices are b-major: (i_b, i_c) -> i_b * d_c + i_c.
"""

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from qcap.core.config import settings
from qcap.core.errors import DimensionMismatchError, InvalidIsometryError, InvalidStateError, ParameterRangeError
from qcap.utils.linalg import ComplexMatrix, Keep, as_matrix, eigenvalues_descending, hermitian_part, numerical_rank, partial_trace
from qcap.utils.sampling import ComplexVector, basis_ket, random_isometry_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: ComplexMatrix

    def __post_init__(self) -> None:
        matrix = as_matrix(self.matrix)
        rows, cols = matrix.shape
        if rows != cols:
            raise DimensionMismatchError(f"Density operator must be square, got {rows}x{cols}")
        tol = settings.state_tol
        if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > tol:
            raise InvalidStateError("Density operator is not Hermitian")
        if abs(np.trace(matrix).real - 1.0) > tol:
            raise InvalidStateError(f"Density operator has trace {np.trace(matrix).real!r}, expected 1")
        lowest = eigenvalues_descending(matrix)[-1]
        if lowest < -tol:
            raise InvalidStateError(f"Density operator has negative eigenvalue {lowest:.3e}")
        object.__setattr__(self, "matrix", hermitian_part(matrix))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def pure(cls, psi: npt.ArrayLike) -> "DensityOperator":
        ket = normalized_ket(psi)
        return cls(np.outer(ket, ket.conj()))

    @classmethod
    def basis(cls, index: int, dim: int) -> "DensityOperator":
        return cls.pure(basis_ket(index, dim))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def mixture(cls, weights: npt.ArrayLike, states: list["DensityOperator"]) -> "DensityOperator":
        return cls(sum((w * state.matrix for w, state in zip(np.asarray(weights, dtype=float), states)), np.zeros_like(states[0].matrix)))


def normalized_ket(psi: npt.ArrayLike, tol: float = settings.state_tol) -> ComplexVector:
    ket = np.asarray(psi, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(ket)):
        raise InvalidStateError("Ket has non-finite entries")
    norm = np.linalg.norm(ket)
    if abs(norm - 1.0) > tol:
        raise InvalidStateError(f"Ket is not normalized (norm {norm!r})")
    return ket


@dataclass(frozen=True, eq=False)
class Isometry:
    matrix: ComplexMatrix
    d_b: int
    d_c: int

    def __post_init__(self) -> None:
        matrix = as_matrix(self.matrix)
        if self.d_b < 1 or self.d_c < 1 or matrix.shape[0] != self.d_b * self.d_c:
            raise DimensionMismatchError(f"Matrix with {matrix.shape[0]} rows does not factor as d_b={self.d_b} x d_c={self.d_c}")
        deviation = np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[1])))
        if deviation > settings.state_tol:
            raise InvalidIsometryError(f"J^dagger J deviates from the identity by {deviation:.3e}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def d_a(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.d_a, self.d_b, self.d_c

    def complement(self) -> "Isometry":
        """The same isometry with the output factors exchanged, so B and C swap roles."""
        swapped = self.matrix.reshape(self.d_b, self.d_c, self.d_a).transpose(1, 0, 2).reshape(-1, self.d_a)
        return Isometry(swapped, d_b=self.d_c, d_c=self.d_b)


def output_matrices(matrix: ComplexMatrix, d_b: int, d_c: int, rho: ComplexMatrix) -> tuple[ComplexMatrix, ComplexMatrix]:
    """(Tr_c(J rho J^dagger), Tr_b(J rho J^dagger)) without validation, for inner loops."""
    joint = (matrix @ rho @ matrix.conj().T).reshape(d_b, d_c, d_b, d_c)
    return np.einsum("ijkj->ik", joint), np.einsum("ijil->jl", joint)


def channel_outputs(J: Isometry, rho: DensityOperator) -> tuple[DensityOperator, DensityOperator]:
    if rho.dim != J.d_a:
        raise DimensionMismatchError(f"Input state has dimension {rho.dim}, channel expects {J.d_a}")
    rho_b, rho_c = output_matrices(J.matrix, J.d_b, J.d_c, rho.matrix)
    return DensityOperator(rho_b), DensityOperator(rho_c)


def minimal_output_dims(J: Isometry, tol: float = settings.rank_tol) -> tuple[int, int]:
    """Ranks of B(I_a) and C(I_a)."""
    joint = J.matrix @ J.matrix.conj().T
    return (
        numerical_rank(partial_trace(joint, J.d_b, J.d_c, Keep.FIRST), tol),
        numerical_rank(partial_trace(joint, J.d_b, J.d_c, Keep.SECOND), tol),
    )


def is_minimal(J: Isometry, tol: float = settings.rank_tol) -> bool:
    return minimal_output_dims(J, tol) == (J.d_b, J.d_c)


def _support(operator: ComplexMatrix, tol: float) -> ComplexMatrix:
    values, vectors = np.linalg.eigh(hermitian_part(operator))
    return vectors[:, values > tol][:, ::-1]


def trim(J: Isometry, tol: float = settings.rank_tol) -> Isometry:
    """Restricts both output spaces to the supports of B(I_a) and C(I_a)."""
    joint = J.matrix @ J.matrix.conj().T
    support_b = _support(partial_trace(joint, J.d_b, J.d_c, Keep.FIRST), tol)
    support_c = _support(partial_trace(joint, J.d_b, J.d_c, Keep.SECOND), tol)
    reduced = np.kron(support_b.conj().T, support_c.conj().T) @ J.matrix
    logger.debug("Trimmed (%d, %d) outputs to (%d, %d)", J.d_b, J.d_c, support_b.shape[1], support_c.shape[1])
    return Isometry(reduced, d_b=support_b.shape[1], d_c=support_c.shape[1])


def _check_unit_interval(**params: float) -> None:
    for name, value in params.items():
        if not 0.0 <= value <= 1.0:
            raise ParameterRangeError(f"{name}={value!r} must lie in [0, 1]")


def _from_columns(columns: list[dict[tuple[int, int], complex]], d_b: int, d_c: int) -> Isometry:
    matrix = np.zeros((d_b * d_c, len(columns)), dtype=complex)
    for a, column in enumerate(columns):
        for (i_b, i_c), amplitude in column.items():
            matrix[i_b * d_c + i_c, a] += amplitude
    return Isometry(matrix, d_b=d_b, d_c=d_c)


def build_identity(dim: int) -> Isometry:
    """J|i> = |i>_b |0>_c: B is the identity channel, C the trace channel."""
    return _from_columns([{(i, 0): 1.0} for i in range(dim)], d_b=dim, d_c=1)


def build_pedagogic(p: float) -> Isometry:
    """J|0> = sqrt(1-p)|00> + sqrt(p)|11>, J|1> = |21>, J|2> = |12>; symmetric under b <-> c for p = 0."""
    _check_unit_interval(p=p)
    return _from_columns(
        [
            {(0, 0): np.sqrt(1 - p), (1, 1): np.sqrt(p)},
            {(2, 1): 1.0},
            {(1, 2): 1.0},
        ],
        d_b=3,
        d_c=3,
    )


def build_qubit_family(m: float, p: float) -> Isometry:
    """Qubit pairs up to local unitaries: J|0> = sqrt(1-mp)|00> + sqrt(mp)|11>, J|1> = sqrt(1-p)|10> + sqrt(p)|01>."""
    _check_unit_interval(m=m, p=p)
    return _from_columns(
        [
            {(0, 0): np.sqrt(1 - m * p), (1, 1): np.sqrt(m * p)},
            {(1, 0): np.sqrt(1 - p), (0, 1): np.sqrt(p)},
        ],
        d_b=2,
        d_c=2,
    )


def build_amplitude_damping(p: float) -> Isometry:
    return build_qubit_family(0.0, p)


def build_qutrit(s: float) -> Isometry:
    _check_unit_interval(s=s)
    return _from_columns(
        [
            {(0, 0): np.sqrt(s), (1, 1): np.sqrt(1 - s)},
            {(2, 1): 1.0},
            {(2, 0): 1.0},
        ],
        d_b=3,
        d_c=2,
    )


def build_generalized_erasure(J1: Isometry, lam: float) -> Isometry:
    """Direct sum of (B1, C1) weighted 1 - lam with the (trace, identity) pair weighted lam.

    The erasure flag |e> is the last basis vector of H_b; the copy of the input follows H_c1 in H_c.
    """
    _check_unit_interval(lam=lam)
    d_b, d_c = J1.d_b + 1, J1.d_c + J1.d_a
    blocks = J1.matrix.reshape(J1.d_b, J1.d_c, J1.d_a)
    tensor = np.zeros((d_b, d_c, J1.d_a), dtype=complex)
    tensor[: J1.d_b, : J1.d_c, :] = np.sqrt(1 - lam) * blocks
    for a in range(J1.d_a):
        tensor[J1.d_b, J1.d_c + a, a] = np.sqrt(lam)
    return Isometry(tensor.reshape(d_b * d_c, J1.d_a), d_b=d_b, d_c=d_c)


def build_erasure(lam: float) -> Isometry:
    """Qubit erasure channel with erasure probability 1 - lam, as the complement of the p = 0 generalized erasure pair."""
    return build_generalized_erasure(build_qubit_family(0.0, 0.0), lam).complement()


def tensor_pair(Jx: Isometry, Jy: Isometry) -> Isometry:
    """Isometry for (Bx (x) By, Cx (x) Cy), outputs reordered from (b_x c_x b_y c_y) to (b_x b_y)(c_x c_y)."""
    product = np.kron(Jx.matrix, Jy.matrix).reshape(Jx.d_b, Jx.d_c, Jy.d_b, Jy.d_c, Jx.d_a * Jy.d_a)
    reordered = product.transpose(0, 2, 1, 3, 4).reshape(-1, Jx.d_a * Jy.d_a)
    return Isometry(reordered, d_b=Jx.d_b * Jy.d_b, d_c=Jx.d_c * Jy.d_c)


def random_isometry(d_a: int, d_b: int, d_c: int, rng: np.random.Generator) -> Isometry:
    if d_b * d_c < d_a:
        raise DimensionMismatchError(f"No isometry from dimension {d_a} into {d_b}x{d_c}")
    return Isometry(random_isometry_matrix(d_a, d_b * d_c, rng), d_b=d_b, d_c=d_c)
