"""Scalar golden-section search and simplex maximization of the entropy bias over density operators."""

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import numpy.typing as npt
from scipy.optimize import minimize

from qcap.capacity.channels import DensityOperator, Isometry
from qcap.capacity.entropy import bias_of_matrix, entropy_bias
from qcap.core.config import settings
from qcap.core.errors import ParameterRangeError
from qcap.utils.linalg import ComplexMatrix

logger = logging.getLogger(__name__)

INV_PHI = (np.sqrt(5) - 1) / 2


def golden_section_maximize(f: Callable[[float], float], a: float, b: float, tol: float = settings.golden_tol) -> tuple[float, float]:
    """Maximizer and maximum of a unimodal f on [a, b]; ties move the bracket towards a."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def density_from_factor(params: npt.NDArray[np.float64], dim: int) -> ComplexMatrix:
    """rho = V V^dagger / Tr(V V^dagger) for V lower triangular with real diagonal (dim**2 real parameters)."""
    rows, cols = np.tril_indices(dim, -1)
    count = rows.size
    factor = np.diag(params[:dim]).astype(complex)
    factor[rows, cols] = params[dim : dim + count] + 1j * params[dim + count : dim + 2 * count]
    rho = factor @ factor.conj().T
    trace = np.trace(rho).real
    if trace <= 0:
        return np.eye(dim, dtype=complex) / dim
    return rho / trace


def factor_from_density(rho: ComplexMatrix) -> npt.NDArray[np.float64]:
    """Inverse of density_from_factor, valid for rank-deficient rho too."""
    dim = rho.shape[0]
    values, vectors = np.linalg.eigh((rho + rho.conj().T) / 2)
    root = vectors * np.sqrt(np.clip(values, 0.0, None))
    upper = np.linalg.qr(root.conj().T, mode="r")
    diagonal = np.diag(upper)
    phases = np.where(np.abs(diagonal) > 0, diagonal.conj() / np.where(np.abs(diagonal) > 0, np.abs(diagonal), 1.0), 1.0)
    factor = (phases[:, None] * upper).conj().T
    rows, cols = np.tril_indices(dim, -1)
    lower = factor[rows, cols]
    return np.concatenate([np.diag(factor).real, lower.real, lower.imag])


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    value: float
    argmax: DensityOperator
    restarts_used: int
    converged: bool
    history: tuple[float, ...] = ()


def maximize_bias(
    J: Isometry,
    restarts: int = settings.restarts,
    seed: int = settings.seed,
    tol: float = settings.optimizer_tol,
    initial: Sequence[DensityOperator] = (),
    max_evals: int | None = None,
) -> OptimizationResult:
    """Local maximization of Delta(B, rho) by Nelder-Mead over a triangular factor of rho.

    The runs start from each state in ``initial``, then I/d, then ``restarts - 1`` seeded
    random factors. Each run is restarted once from its own end point with a fresh simplex.
    ``converged`` means the two best runs agree within ``tol``.
    """
    if restarts < 1:
        raise ParameterRangeError(f"restarts={restarts} must be at least 1")
    dim = J.d_a
    rng = np.random.default_rng(seed)
    starts = [factor_from_density(state.matrix) for state in initial]
    starts.append(factor_from_density(np.eye(dim, dtype=complex) / dim))
    starts.extend(rng.standard_normal(dim * dim) for _ in range(restarts - 1))

    budget = max_evals or settings.optimizer_max_evals + settings.optimizer_evals_per_param * dim * dim
    options = {"maxiter": budget, "maxfev": budget, "xatol": 1e-10, "fatol": 1e-13, "adaptive": True}

    def objective(params: npt.NDArray[np.float64]) -> float:
        return -bias_of_matrix(J.matrix, J.d_b, J.d_c, density_from_factor(params, dim))

    runs: list[tuple[float, npt.NDArray[np.float64]]] = []
    for index, start in enumerate(starts):
        first = minimize(objective, start, method="Nelder-Mead", options=options)
        polished = minimize(objective, first.x, method="Nelder-Mead", options=options)
        best = polished if polished.fun <= first.fun else first
        runs.append((-float(best.fun), best.x))
        logger.debug("Run %d/%d: Delta = %.12f after %d evaluations", index + 1, len(starts), -best.fun, first.nfev + polished.nfev)

    values = np.array([value for value, _ in runs])
    order = np.argsort(-values, kind="stable")
    argmax = DensityOperator(density_from_factor(runs[order[0]][1], dim))
    converged = len(runs) > 1 and values[order[0]] - values[order[1]] <= tol
    return OptimizationResult(
        value=entropy_bias(J, argmax).delta,
        argmax=argmax,
        restarts_used=len(runs),
        converged=bool(converged),
        history=tuple(float(value) for value in values),
    )
