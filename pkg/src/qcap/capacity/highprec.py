"""Entropy bias in extended precision.

Near a threshold the x * eps * log(1/eps) advantage of one output only overtakes the O(eps)
terms for eps far below double resolution. States are handled as ensembles of pure
components so that a pure base point stays exactly pure at any working precision.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np
import numpy.typing as npt
from mpmath import mp
from mpmath.ctx_mp import MPContext

from qcap.capacity.channels import Isometry
from qcap.core.config import settings

logger = logging.getLogger(__name__)

# (weight, column ket) pairs whose weighted dyads sum to the state
Ensemble = list[tuple[Any, Any]]
# (context, eps) -> ensemble, with every number created in the given context
EnsembleBuilder = Callable[[MPContext, Any], Ensemble]


@dataclass(frozen=True)
class DeepProbe:
    eps: float
    gain: float  # rounded to double; may underflow the double margin while still resolved
    resolved: bool  # |gain| clears the working-precision floor


def working_context(dps: int = settings.mp_digits) -> MPContext:
    """A private mpmath context at ``dps`` digits; the shared ``mp`` precision is never touched."""
    ctx = mp.clone()
    ctx.dps = dps
    return ctx


def to_mp_matrix(array: npt.ArrayLike, ctx: MPContext = mp) -> Any:
    values = np.asarray(array, dtype=complex)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    return ctx.matrix([[ctx.mpc(complex(entry)) for entry in row] for row in values])


def to_mp_ket(vector: npt.ArrayLike, ctx: MPContext = mp) -> Any:
    """Column ket renormalized at the working precision."""
    ket = to_mp_matrix(vector, ctx)
    norm = ctx.sqrt(ctx.fsum(abs(ket[i, 0]) ** 2 for i in range(ket.rows)))
    return ket / norm


def ensemble_from_matrix(rho: npt.ArrayLike, ctx: MPContext = mp) -> Ensemble:
    """Eigen-ensemble of a double-precision density matrix."""
    values, vectors = np.linalg.eigh(np.asarray(rho, dtype=complex))
    return [(ctx.mpf(float(value)), to_mp_ket(vectors[:, index], ctx)) for index, value in enumerate(values) if value > 0]


def _outputs(ctx: MPContext, J_mp: Any, d_b: int, d_c: int, ensemble: Ensemble) -> tuple[Any, Any]:
    rho_b = ctx.matrix(d_b, d_b)
    rho_c = ctx.matrix(d_c, d_c)
    for weight, ket in ensemble:
        if weight == 0:
            continue
        image = J_mp * ket
        amplitudes = [[image[i_b * d_c + i_c, 0] for i_c in range(d_c)] for i_b in range(d_b)]
        for i in range(d_b):
            for j in range(d_b):
                rho_b[i, j] += weight * ctx.fsum(amplitudes[i][c] * ctx.conj(amplitudes[j][c]) for c in range(d_c))
        for i in range(d_c):
            for j in range(d_c):
                rho_c[i, j] += weight * ctx.fsum(amplitudes[b][i] * ctx.conj(amplitudes[b][j]) for b in range(d_b))
    return rho_b, rho_c


def _entropy(ctx: MPContext, matrix: Any, floor: Any) -> Any:
    trace = ctx.re(ctx.fsum(matrix[i, i] for i in range(matrix.rows)))
    values = [value for row in ctx.eigh(matrix / trace, eigvals_only=True).tolist() for value in row]
    return -ctx.fsum(ctx.re(value) * ctx.log(ctx.re(value), 2) for value in values if ctx.re(value) > floor)


def mp_bias(J_mp: Any, d_b: int, d_c: int, ensemble: Ensemble, floor: Any, ctx: MPContext = mp) -> Any:
    rho_b, rho_c = _outputs(ctx, J_mp, d_b, d_c, ensemble)
    return _entropy(ctx, rho_b, floor) - _entropy(ctx, rho_c, floor)


def deep_gain_profile(
    J: Isometry,
    ensemble_at: EnsembleBuilder,
    exponents: tuple[int, ...] = settings.deep_eps_exponents,
    dps: int = settings.mp_digits,
    sign: int = 1,
    stop_at_first: bool = True,
) -> list[DeepProbe]:
    """sign * (Delta(eps) - Delta(0)) at eps = 10^-k for each exponent k, in ``dps``-digit arithmetic.

    Each call works in its own context, so concurrent profiles do not share precision state.
    With ``stop_at_first`` the probe ends at the first resolved positive gain.
    """
    ctx = working_context(dps)
    floor = ctx.mpf(10) ** (-(dps - 10))
    J_mp = to_mp_matrix(J.matrix, ctx)
    base = mp_bias(J_mp, J.d_b, J.d_c, ensemble_at(ctx, ctx.mpf(0)), floor, ctx)
    probes: list[DeepProbe] = []
    for exponent in exponents:
        eps = ctx.mpf(10) ** (-exponent)
        gain = sign * (mp_bias(J_mp, J.d_b, J.d_c, ensemble_at(ctx, eps), floor, ctx) - base)
        probe = DeepProbe(eps=float(eps), gain=float(gain), resolved=abs(gain) > floor * 10**5)
        logger.debug("Deep probe eps=1e-%d gain=%s", exponent, ctx.nstr(gain, 6))
        probes.append(probe)
        if stop_at_first and probe.resolved and probe.gain > 0:
            break
    return probes


def first_positive(probes: list[DeepProbe]) -> DeepProbe | None:
    return next((probe for probe in probes if probe.resolved and probe.gain > 0), None)
