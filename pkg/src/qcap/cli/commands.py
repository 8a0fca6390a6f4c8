"""Command implementations; each returns the artifact text and leaves I/O to the entry point."""

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from qcap.capacity.channels import DensityOperator, minimal_output_dims
from qcap.capacity.coherent_info import NonAdditivityReport, ThresholdPoint, nonadditivity_report, threshold_curve
from qcap.capacity.optimize import maximize_bias
from qcap.capacity.singularity import (
    PositivityCertificate,
    Side,
    confirm_certificate,
    dimension_criterion,
    positivity_certificate,
    search_certificates,
    theorem_scan,
)
from qcap.cli.models import (
    CertificateDocument,
    ChannelSpec,
    IsometryDocument,
    OptimizationDocument,
    PositivityDocument,
    ReportDocument,
    RunConfig,
    RunMetadata,
    parse_sigma,
)
from qcap.core.errors import ParameterRangeError
from qcap.utils.sampling import basis_ket

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2

THRESHOLD_HEADER = ("s", "w_star", "k", "p_bar")
VERIFICATION_HEADER = ("s", "p", "p_bar", "rate_b", "rate_c", "delta0", "delta_eps", "eps_used", "gain", "probe_precision", "verdict")


def _json(document: IsometryDocument | PositivityDocument | OptimizationDocument | ReportDocument) -> str:
    return document.model_dump_json(indent=2) + "\n"


def _csv(metadata: RunMetadata, header: Sequence[str], rows: list[Sequence[object]]) -> str:
    buffer = io.StringIO()
    buffer.write(f"# {metadata.model_dump_json()}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def cmd_isometry(config: RunConfig, spec: ChannelSpec) -> str:
    return _json(IsometryDocument.from_isometry(spec.build(), RunMetadata(config=config)))


def cmd_positivity(
    config: RunConfig,
    spec: ChannelSpec,
    sigma_spec: str | None = None,
    seed: int = 0,
    samples: int = 64,
    confirm: bool = True,
) -> tuple[str, int]:
    """Certificates for the channel pair; exit code 0 if any is positive, 2 otherwise."""
    J = spec.build()
    sigma = parse_sigma(sigma_spec, J.d_a)
    minimal = minimal_output_dims(J)

    found: list[tuple[PositivityCertificate, str]] = []
    theorem = theorem_scan(J, samples=samples, seed=seed, sigma=sigma)
    if theorem is not None:
        found.append((theorem, "theorem"))
    covered = {certificate.target for certificate, _ in found if certificate.positive}
    searched = search_certificates(J, sigmas=[sigma] if sigma is not None else None, samples=samples, seed=seed)
    for side in Side:
        if side in covered:
            continue
        certificate = searched[side]
        if certificate is not None:
            found.append((certificate, "search"))
        elif not any(existing.target is side for existing, _ in found):
            # inconclusive record of the first candidate, for audit
            direction = sigma or DensityOperator.maximally_mixed(J.d_a)
            found.append((positivity_certificate(J, basis_ket(0, J.d_a), direction, target=side), "search"))

    if confirm:
        found = [(confirm_certificate(J, certificate), source) for certificate, source in found]

    positive = any(certificate.positive for certificate, _ in found)
    document = PositivityDocument(
        metadata=RunMetadata(config=config),
        dims=J.dims,
        minimal_dims=minimal,
        dimension_verdict=dimension_criterion(J.d_a, *minimal).value if J.d_a > 1 else None,
        certificates=[CertificateDocument.from_certificate(certificate, source) for certificate, source in found],
    )
    logger.info("Positivity: %d certificate(s), positive=%s", len(found), positive)
    return _json(document), EXIT_OK if positive else EXIT_INCONCLUSIVE


def cmd_qcoh(config: RunConfig, spec: ChannelSpec, restarts: int = 20, seed: int = 0) -> str:
    result = maximize_bias(spec.build(), restarts=restarts, seed=seed)
    return _json(OptimizationDocument.from_result(RunMetadata(config=config), result))


def cmd_nonadditivity(config: RunConfig, p: float, s: float, deep: bool = True) -> str:
    report = nonadditivity_report(p, s, deep=deep)
    return _json(ReportDocument.from_report(RunMetadata(config=config), report))


def s_grid(s_min: float, s_max: float, s_step: float) -> list[float]:
    if not 0.0 <= s_min <= s_max <= 0.5:
        raise ParameterRangeError(f"Need 0 <= s_min <= s_max <= 1/2, got [{s_min}, {s_max}]")
    if s_step <= 0:
        raise ParameterRangeError(f"s_step={s_step} must be positive")
    count = int(np.floor((s_max - s_min) / s_step + 1e-9)) + 1
    return [round(s_min + index * s_step, 12) for index in range(count)]


def _verification_row(report: NonAdditivityReport) -> tuple[object, ...]:
    return (
        report.s,
        report.p,
        report.p_bar,
        report.rate_b,
        report.rate_c,
        report.delta0,
        report.delta_eps,
        report.eps_used,
        report.gain,
        report.probe_precision,
        report.verdict.value,
    )


def cmd_figd(config: RunConfig, s_min: float = 0.0, s_max: float = 0.5, s_step: float = 0.025, workers: int = 1) -> tuple[str, str]:
    """Threshold curve rows and, per s, a verification report at p = (1/2 + p_bar) / 2."""
    points: list[ThresholdPoint] = threshold_curve(s_grid(s_min, s_max, s_step), workers=workers)

    def verify(point: ThresholdPoint) -> NonAdditivityReport:
        return nonadditivity_report((0.5 + point.p_bar) / 2, point.s)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        reports = list(executor.map(verify, points))

    metadata = RunMetadata(config=config)
    curve = _csv(metadata, THRESHOLD_HEADER, [tuple(point) for point in points])
    verification = _csv(metadata, VERIFICATION_HEADER, [_verification_row(report) for report in reports])
    return curve, verification
