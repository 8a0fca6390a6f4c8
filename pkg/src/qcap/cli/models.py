from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np
from pydantic import BaseModel, Field, model_validator

from qcap import __version__
from qcap.capacity import channels
from qcap.capacity.channels import DensityOperator, Isometry
from qcap.capacity.coherent_info import NonAdditivityReport
from qcap.capacity.optimize import OptimizationResult
from qcap.capacity.singularity import Confirmation, PositivityCertificate
from qcap.core.errors import ArtifactError
from qcap.utils.files import read_json_file

ComplexEntries = list[tuple[float, float]]


def _entries(values: np.ndarray) -> ComplexEntries:
    return [(float(z.real), float(z.imag)) for z in np.asarray(values, dtype=complex).reshape(-1)]


def _array(entries: ComplexEntries) -> np.ndarray:
    return np.array([complex(re, im) for re, im in entries], dtype=complex)


class Command(str, Enum):
    POSITIVITY = "positivity"
    QCOH = "qcoh"
    FIGD = "figd"
    NONADDITIVITY = "nonadditivity"
    ISOMETRY = "isometry"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    command: Command = Field(..., description="Subcommand that produced the artifact.")
    parameters: dict[str, float | int | str | bool | None] = Field(default_factory=dict, description="Every flag value of the run, seed included.")
    output_path: str = Field(..., description="Destination of the artifact; '-' for stdout.")
    format: OutputFormat = Field(..., description="Artifact format.")


class RunMetadata(BaseModel):
    tool: str = "qcap"
    version: str = __version__
    config: RunConfig


class IsometryDocument(BaseModel):
    d_a: int = Field(..., ge=1, description="Input dimension.")
    d_b: int = Field(..., ge=1, description="Dimension of the direct output.")
    d_c: int = Field(..., ge=1, description="Dimension of the complementary output.")
    entries: ComplexEntries = Field(..., description="Row-major [re, im] pairs of the (d_b*d_c) x d_a matrix.")
    metadata: RunMetadata | None = Field(None, description="Run that exported the isometry; ignored when reading it back.")

    @model_validator(mode="after")
    def _check_count(self) -> "IsometryDocument":
        if len(self.entries) != self.d_a * self.d_b * self.d_c:
            raise ValueError(f"Expected {self.d_a * self.d_b * self.d_c} entries, got {len(self.entries)}")
        return self

    @classmethod
    def from_isometry(cls, J: Isometry, metadata: RunMetadata | None = None) -> "IsometryDocument":
        return cls(d_a=J.d_a, d_b=J.d_b, d_c=J.d_c, entries=_entries(J.matrix), metadata=metadata)

    def to_isometry(self) -> Isometry:
        return Isometry(_array(self.entries).reshape(self.d_b * self.d_c, self.d_a), d_b=self.d_b, d_c=self.d_c)


class DensityDocument(BaseModel):
    dim: int = Field(..., ge=1)
    entries: ComplexEntries = Field(..., description="Row-major [re, im] pairs.")

    @classmethod
    def from_density(cls, rho: DensityOperator) -> "DensityDocument":
        return cls(dim=rho.dim, entries=_entries(rho.matrix))

    def to_density(self) -> DensityOperator:
        if len(self.entries) != self.dim**2:
            raise ArtifactError(f"Density document of dim {self.dim} has {len(self.entries)} entries")
        return DensityOperator(_array(self.entries).reshape(self.dim, self.dim))


class ConfirmationDocument(BaseModel):
    eps: float
    gain: float = Field(..., description="Bias gain Delta(eps) - Delta(0) for the certified side, bits.")
    precision: str

    @classmethod
    def from_confirmation(cls, confirmation: Confirmation) -> "ConfirmationDocument":
        return cls(eps=confirmation.eps, gain=confirmation.gain, precision=confirmation.precision)


class CertificateDocument(BaseModel):
    source: str = Field(..., description="'theorem' for a rank witness, 'search' otherwise.")
    target: str
    conclusion: str
    rate_b: float
    rate_c: float
    coefficients_b: list[float]
    coefficients_c: list[float]
    delta_base: float
    witness_pure: ComplexEntries
    witness_sigma: DensityDocument
    confirmation: ConfirmationDocument | None = None

    @classmethod
    def from_certificate(cls, certificate: PositivityCertificate, source: str) -> "CertificateDocument":
        return cls(
            source=source,
            target=certificate.target.value,
            conclusion=certificate.conclusion.value,
            rate_b=certificate.rate_b,
            rate_c=certificate.rate_c,
            coefficients_b=list(certificate.coefficients_b),
            coefficients_c=list(certificate.coefficients_c),
            delta_base=certificate.delta_base,
            witness_pure=_entries(certificate.witness_pure),
            witness_sigma=DensityDocument.from_density(certificate.witness_sigma),
            confirmation=ConfirmationDocument.from_confirmation(certificate.confirmation) if certificate.confirmation else None,
        )


class PositivityDocument(BaseModel):
    metadata: RunMetadata
    dims: tuple[int, int, int]
    minimal_dims: tuple[int, int]
    dimension_verdict: str | None = Field(None, description="Arithmetic verdict on minimal dims; null for one-dimensional inputs.")
    certificates: list[CertificateDocument]


class OptimizationDocument(BaseModel):
    metadata: RunMetadata
    value: float = Field(..., description="Best entropy bias found, bits.")
    argmax: DensityDocument
    restarts_used: int
    converged: bool
    history: list[float]

    @classmethod
    def from_result(cls, metadata: RunMetadata, result: OptimizationResult) -> "OptimizationDocument":
        return cls(
            metadata=metadata,
            value=result.value,
            argmax=DensityDocument.from_density(result.argmax),
            restarts_used=result.restarts_used,
            converged=result.converged,
            history=list(result.history),
        )


class ReportDocument(BaseModel):
    metadata: RunMetadata
    p: float
    s: float
    w_star: float
    k: float
    p_bar: float
    rate_b: float
    rate_c: float
    fitted_rate_b: float | None
    fitted_rate_c: float | None
    rates_consistent: bool
    delta0: float
    delta_eps: float
    eps_used: float
    gain: float
    probe_precision: str
    verdict: str

    @classmethod
    def from_report(cls, metadata: RunMetadata, report: NonAdditivityReport) -> "ReportDocument":
        fields = {name: getattr(report, name) for name in cls.model_fields if name not in ("metadata", "verdict")}
        for name in ("fitted_rate_b", "fitted_rate_c"):
            if np.isnan(fields[name]):
                fields[name] = None
        return cls(metadata=metadata, verdict=report.verdict.value, **fields)


class ChannelName(str, Enum):
    PEDAGOGIC = "pedagogic"
    QUBIT = "qubit"
    AMP_DAMPING = "amp-damping"
    QUTRIT = "qutrit"
    GEN_ERASURE = "gen-erasure"
    ERASURE = "erasure"
    DAMPING_QUTRIT = "damping-qutrit"


CHANNEL_PARAMETERS: dict[ChannelName, tuple[str, ...]] = {
    ChannelName.PEDAGOGIC: ("p",),
    ChannelName.QUBIT: ("m", "p"),
    ChannelName.AMP_DAMPING: ("p",),
    ChannelName.QUTRIT: ("s",),
    ChannelName.GEN_ERASURE: ("m", "p", "lam"),
    ChannelName.ERASURE: ("lam",),
    ChannelName.DAMPING_QUTRIT: ("p", "s"),
}

CHANNEL_BUILDERS: dict[ChannelName, Callable[..., Isometry]] = {
    ChannelName.PEDAGOGIC: channels.build_pedagogic,
    ChannelName.QUBIT: channels.build_qubit_family,
    ChannelName.AMP_DAMPING: channels.build_amplitude_damping,
    ChannelName.QUTRIT: channels.build_qutrit,
    ChannelName.GEN_ERASURE: lambda m, p, lam: channels.build_generalized_erasure(channels.build_qubit_family(m, p), lam),
    ChannelName.ERASURE: channels.build_erasure,
    ChannelName.DAMPING_QUTRIT: lambda p, s: channels.tensor_pair(channels.build_amplitude_damping(p), channels.build_qutrit(s)),
}


class ChannelSpec(BaseModel):
    name: ChannelName | None = Field(None, description="Named constructor.")
    params: dict[str, float] = Field(default_factory=dict, description="Constructor parameters; lambda is spelled 'lam'.")
    isometry_path: Path | None = Field(None, description="JSON isometry document, instead of a name.")
    complement: bool = Field(False, description="Swap the direct and complementary outputs.")

    @model_validator(mode="after")
    def _check_source(self) -> "ChannelSpec":
        if (self.name is None) == (self.isometry_path is None):
            raise ValueError("Give exactly one of a channel name or an isometry file")
        if self.name is not None:
            missing = [key for key in CHANNEL_PARAMETERS[self.name] if key not in self.params]
            if missing:
                raise ValueError(f"Channel '{self.name.value}' needs parameters: {', '.join(missing)}")
        return self

    def build(self) -> Isometry:
        if self.isometry_path is not None:
            J = IsometryDocument.model_validate(read_json_file(self.isometry_path)).to_isometry()
        else:
            assert self.name is not None
            J = CHANNEL_BUILDERS[self.name](**{key: self.params[key] for key in CHANNEL_PARAMETERS[self.name]})
        return J.complement() if self.complement else J


def parse_sigma(spec: str | None, dim: int) -> DensityOperator | None:
    """'mixed', 'basis:K' or a path to a density document."""
    if spec is None:
        return None
    if spec == "mixed":
        return DensityOperator.maximally_mixed(dim)
    if spec.startswith("basis:"):
        try:
            index = int(spec.split(":", 1)[1])
        except ValueError as e:
            raise ArtifactError(f"Bad sigma spec '{spec}'") from e
        if not 0 <= index < dim:
            raise ArtifactError(f"Basis index {index} outside input dimension {dim}")
        return DensityOperator.basis(index, dim)
    sigma = DensityDocument.model_validate(read_json_file(Path(spec))).to_density()
    if sigma.dim != dim:
        raise ArtifactError(f"Sigma has dimension {sigma.dim}, channel input has {dim}")
    return sigma
