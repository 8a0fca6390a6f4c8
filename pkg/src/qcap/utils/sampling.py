"""Seeded random states and isometries, plus the structured witness list."""

import itertools

import numpy as np
import numpy.typing as npt

from qcap.utils.linalg import ComplexMatrix

ComplexVector = npt.NDArray[np.complex128]


def basis_ket(index: int, dim: int) -> ComplexVector:
    ket = np.zeros(dim, dtype=complex)
    ket[index] = 1.0
    return ket


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> ComplexMatrix:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_ket(dim: int, rng: np.random.Generator) -> ComplexVector:
    ket = ginibre(dim, 1, rng)[:, 0]
    return ket / np.linalg.norm(ket)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> ComplexMatrix:
    """Ginibre ensemble; full rank unless ``rank`` is given."""
    factor = ginibre(dim, rank or dim, rng)
    rho = factor @ factor.conj().T
    return rho / np.trace(rho).real


def random_isometry_matrix(d_a: int, d_out: int, rng: np.random.Generator) -> ComplexMatrix:
    q, r = np.linalg.qr(ginibre(d_out, d_a, rng))
    # fix column phases so the distribution is Haar
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def structured_kets(dim: int) -> list[ComplexVector]:
    """Basis kets, then two-term superpositions (|j> + phase|k>)/sqrt(2), then uniform superpositions, phases in {1, i}."""
    kets = [basis_ket(index, dim) for index in range(dim)]
    for j, k in itertools.combinations(range(dim), 2):
        for phase in (1.0, 1j):
            kets.append((basis_ket(j, dim) + phase * basis_ket(k, dim)) / np.sqrt(2))
    if dim > 2:
        for phases in itertools.product((1.0, 1j), repeat=dim - 1):
            ket = np.array((1.0, *phases), dtype=complex)
            kets.append(ket / np.sqrt(dim))
    return kets
