"""Coherent information of the qutrit channel and the non-additivity construction.

The witness family pairs amplitude damping (probability p >= 1/2, zero Q1) with the qutrit
channel of parameter s:

    rho(eps) = (1 - w)[00] + w[chi_eps],   chi_eps = sqrt(1 - eps)|01> + sqrt(eps)|12>

At eps = 0 its bias equals Q1 of the qutrit channel. The direct output gains an eigenvalue
(1 - p) w eps and the complementary output one p k w eps, so the bias rises above the sum of
single-letter values whenever p < 1 / (1 + k).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, NamedTuple, Sequence

import numpy as np
from mpmath.ctx_mp import MPContext

from qcap.capacity.channels import DensityOperator, build_amplitude_damping, build_qutrit, output_matrices, tensor_pair
from qcap.capacity.entropy import bias_of_matrix
from qcap.capacity.highprec import Ensemble, deep_gain_profile, first_positive, to_mp_ket
from qcap.capacity.optimize import golden_section_maximize
from qcap.capacity.singularity import FamilyKind, StateFamily, fitted_emergence_rate
from qcap.core.config import settings
from qcap.core.errors import ParameterRangeError
from qcap.utils.linalg import numerical_rank
from qcap.utils.sampling import basis_ket, random_density_matrix

logger = logging.getLogger(__name__)

RATE_AGREEMENT = 0.01


class Verdict(str, Enum):
    NONADDITIVE = "nonadditive"
    NOT_SHOWN = "not_shown"


@dataclass(frozen=True)
class QutritOptimum:
    value: float
    w_star: float
    flat: bool


class ThresholdPoint(NamedTuple):
    s: float
    w_star: float
    k: float
    p_bar: float


@dataclass(frozen=True)
class NonAdditivityReport:
    p: float
    s: float
    w_star: float
    k: float
    p_bar: float
    rate_b: float
    rate_c: float
    delta0: float
    delta_eps: float
    eps_used: float
    verdict: Verdict
    fitted_rate_b: float = float("nan")
    fitted_rate_c: float = float("nan")
    rates_consistent: bool = False
    gain: float = 0.0
    probe_precision: str = "double"


def q1_qutrit(s: float, grid_tol: float = settings.golden_tol, *, z: int | None = None, extended: bool = False) -> QutritOptimum:
    """Maximum of Delta over (1 - w)[0] + w[1] for the qutrit channel, by grid bracketing and golden section.

    ``z=-1`` uses (1 - w)[0] + w[2] instead. With ``extended`` s may exceed 1/2, where the
    relabeled branch z=-1 is the default.
    """
    if not 0.0 <= s <= (1.0 if extended else 0.5):
        raise ParameterRangeError(f"s={s!r} outside [0, {1.0 if extended else 0.5}]")
    branch = z if z is not None else (1 if s <= 0.5 else -1)
    if branch not in (1, -1):
        raise ParameterRangeError(f"z={z!r} must be 1 or -1")
    J = build_qutrit(s)
    second = 1 if branch == 1 else 2

    def delta(w: float) -> float:
        rho = np.zeros((3, 3), dtype=complex)
        rho[0, 0], rho[second, second] = 1 - w, w
        return bias_of_matrix(J.matrix, J.d_b, J.d_c, rho)

    grid = np.linspace(0.0, 1.0, settings.golden_grid_points + 1)[1:-1]
    values = np.array([delta(w) for w in grid])
    index = int(np.argmax(values))
    low = grid[index - 1] if index > 0 else 0.0
    high = grid[index + 1] if index < grid.size - 1 else 1.0
    w_star, value = golden_section_maximize(delta, low, high, grid_tol)
    if values[index] > value:
        w_star, value = float(grid[index]), float(values[index])
    flat = bool(np.count_nonzero(values >= values[index] - 1e-12) > 1)
    return QutritOptimum(value=float(value), w_star=float(w_star), flat=flat)


def reduction_check(s: float, samples: int = 200, seed: int = settings.seed, z: int = 1) -> bool:
    """True when no random full-rank qutrit input beats the one-parameter maximum."""
    bound = q1_qutrit(s, z=z).value + 1e-8
    J = build_qutrit(s)
    rng = np.random.default_rng(seed)
    for index in range(samples):
        delta = bias_of_matrix(J.matrix, J.d_b, J.d_c, random_density_matrix(3, rng))
        if delta > bound:
            logger.info("Sample %d exceeds the reduced maximum at s=%s: %.10f > %.10f", index, s, delta, bound)
            return False
    return True


def k_factor(s: float, w: float) -> float:
    return (1 - s) * (1 - w) / (w + (1 - s) * (1 - w))


def witness_family(w: float) -> StateFamily:
    """rho(eps) = (1 - w)[00] + w[chi_eps] on the two-party input of dimension 2 x 3."""
    ket00, ket01, ket12 = basis_ket(0, 6), basis_ket(1, 6), basis_ket(5, 6)

    def evaluate(eps: float) -> DensityOperator:
        chi = np.sqrt(1 - eps) * ket01 + np.sqrt(eps) * ket12
        return DensityOperator((1 - w) * np.outer(ket00, ket00) + w * np.outer(chi, chi.conj()))

    def ensemble(ctx: MPContext, eps: Any) -> Ensemble:
        chi = ctx.sqrt(1 - eps) * to_mp_ket(ket01, ctx) + ctx.sqrt(eps) * to_mp_ket(ket12, ctx)
        return [(1 - ctx.mpf(w), to_mp_ket(ket00, ctx)), (ctx.mpf(w), chi)]

    return StateFamily(base=evaluate(0.0), evaluate=evaluate, kind=FamilyKind.GENERAL, ensemble=ensemble)


def _agrees(fitted: float, closed: float) -> bool:
    return abs(fitted - closed) <= RATE_AGREEMENT * abs(closed)


def nonadditivity_report(
    p: float,
    s: float,
    eps_grid: Sequence[float] = settings.probe_eps_grid,
    fit_eps_grid: Sequence[float] = settings.fit_eps_grid,
    deep: bool = True,
    dps: int = settings.mp_digits,
) -> NonAdditivityReport:
    """Probes whether amplitude damping (p) and the qutrit channel (s) have superadditive Q1.

    Raises:
        ParameterRangeError: Unless 1/2 <= p <= 1 and 0 <= s <= 1/2.
    """
    if not 0.5 <= p <= 1.0:
        raise ParameterRangeError(f"p={p!r} outside [1/2, 1]")
    if not 0.0 <= s <= 0.5:
        raise ParameterRangeError(f"s={s!r} outside [0, 1/2]")

    optimum = q1_qutrit(s)
    w = optimum.w_star
    k = k_factor(s, w)
    J = tensor_pair(build_amplitude_damping(p), build_qutrit(s))
    family = witness_family(w)

    def bias(eps: float) -> float:
        return bias_of_matrix(J.matrix, J.d_b, J.d_c, family.evaluate(eps).matrix)

    delta0 = bias(0.0)
    if abs(delta0 - optimum.value) > 1e-8:
        logger.warning("Delta(0)=%.12f differs from the qutrit maximum %.12f", delta0, optimum.value)

    rate_b, rate_c = (1 - p) * w, p * k * w
    base_b, base_c = output_matrices(J.matrix, J.d_b, J.d_c, family.base.matrix)
    fitted_b = fitted_emergence_rate(
        lambda eps: output_matrices(J.matrix, J.d_b, J.d_c, family.evaluate(eps).matrix)[0], J.d_b - numerical_rank(base_b), fit_eps_grid
    )
    fitted_c = fitted_emergence_rate(
        lambda eps: output_matrices(J.matrix, J.d_b, J.d_c, family.evaluate(eps).matrix)[1], J.d_c - numerical_rank(base_c), fit_eps_grid
    )
    consistent = fitted_b.usable and fitted_c.usable and _agrees(fitted_b.rate, rate_b) and _agrees(fitted_c.rate, rate_c)
    if not consistent:
        logger.warning("Fitted rates (%.6g, %.6g) disagree with closed form (%.6g, %.6g) at p=%s, s=%s", fitted_b.rate, fitted_c.rate, rate_b, rate_c, p, s)

    probes = [(float(eps), bias(eps)) for eps in eps_grid]
    eps_used, delta_eps = max(probes, key=lambda probe: probe[1])
    gain = delta_eps - delta0
    precision = "double"
    verdict = Verdict.NOT_SHOWN
    if rate_b > rate_c + settings.rate_margin:
        if gain > settings.bias_margin:
            verdict = Verdict.NONADDITIVE
        elif deep and family.ensemble is not None:
            probe = first_positive(deep_gain_profile(J, family.ensemble, dps=dps))
            if probe is not None:
                eps_used, gain, precision = probe.eps, probe.gain, f"mp{dps}"
                delta_eps = delta0 + gain
                verdict = Verdict.NONADDITIVE
    logger.info("p=%s s=%s: rates (%.6g, %.6g), gain %.3e at eps=%.1e [%s] -> %s", p, s, rate_b, rate_c, gain, eps_used, precision, verdict.value)

    return NonAdditivityReport(
        p=p,
        s=s,
        w_star=w,
        k=k,
        p_bar=1 / (1 + k),
        rate_b=rate_b,
        rate_c=rate_c,
        delta0=delta0,
        delta_eps=delta_eps,
        eps_used=eps_used,
        verdict=verdict,
        fitted_rate_b=fitted_b.rate,
        fitted_rate_c=fitted_c.rate,
        rates_consistent=consistent,
        gain=gain,
        probe_precision=precision,
    )


def _threshold_point(s: float) -> ThresholdPoint:
    optimum = q1_qutrit(s)
    k = k_factor(s, optimum.w_star)
    return ThresholdPoint(s=s, w_star=optimum.w_star, k=k, p_bar=1 / (1 + k))


def threshold_curve(s_grid: Sequence[float], workers: int = 1) -> list[ThresholdPoint]:
    """(s, w*, k, p_bar) per grid point, in grid order."""
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        return list(executor.map(_threshold_point, [float(s) for s in s_grid]))
