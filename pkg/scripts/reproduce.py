"""Reproduces the acceptance artifacts: one JSON file per check, deterministic given the seed."""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from qcap import __version__
from qcap.capacity.channels import (
    DensityOperator,
    build_erasure,
    build_generalized_erasure,
    build_pedagogic,
    build_qubit_family,
    build_qutrit,
    channel_outputs,
    random_isometry,
)
from qcap.capacity.coherent_info import k_factor, nonadditivity_report, q1_qutrit, reduction_check
from qcap.capacity.optimize import maximize_bias
from qcap.capacity.singularity import dimension_criterion, positivity_certificate, theorem_scan
from qcap.core.config import settings
from qcap.utils.linalg import eigenvalues_descending
from qcap.utils.sampling import basis_ket, random_ket

NON_ADDITIVITY_S = (0.0, 0.125, 0.25, 0.375, 0.5)
INCOMPLETE_ERASURE_WITNESS = np.array([1.0, 1j]) / np.sqrt(2)


def pure_spectra(seed: int, channels: int = 100, inputs: int = 5) -> dict[str, Any]:
    """Largest mismatch between the nonzero output spectra of random pure inputs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(channels):
        d_a, d_b, d_c = (int(d) for d in rng.integers(2, 5, size=3))
        J = random_isometry(d_a, d_b, d_c, rng)
        for _ in range(inputs):
            rho_b, rho_c = channel_outputs(J, DensityOperator.pure(random_ket(d_a, rng)))
            size = min(d_b, d_c)
            worst = max(worst, float(np.max(np.abs(eigenvalues_descending(rho_b.matrix)[:size] - eigenvalues_descending(rho_c.matrix)[:size]))))
    return {"channels": channels, "inputs": inputs, "max_mismatch": worst}


def pedagogic() -> dict[str, Any]:
    spectra = []
    for eps in (0.0, 0.01, 0.1):
        rho = DensityOperator.mixture([1 - eps, eps], [DensityOperator.basis(0, 3), DensityOperator.basis(1, 3)])
        rho_b, rho_c = channel_outputs(build_pedagogic(0.3), rho)
        spectra.append({"eps": eps, "b": eigenvalues_descending(rho_b.matrix).tolist(), "c": eigenvalues_descending(rho_c.matrix).tolist()})
    certificates = []
    for p in [round(0.1 * step, 1) for step in range(10)]:
        J = build_pedagogic(p)
        direct = positivity_certificate(J, basis_ket(0, 3), DensityOperator.basis(1, 3))
        complement = positivity_certificate(J, basis_ket(0, 3), DensityOperator.basis(2, 3))
        certificates.append({"p": p, "direct": direct.conclusion.value, "complement": complement.conclusion.value})
    return {"spectra": spectra, "certificates": certificates}


def dimension_grid() -> dict[str, Any]:
    verdicts = {
        f"{d_a},{d_b},{d_c}": dimension_criterion(d_a, d_b, d_c).value
        for d_a in range(2, 6)
        for d_b in range(1, 6)
        for d_c in range(1, 6)
    }
    return {"verdicts": verdicts}


def erasure(seed: int, restarts: int) -> dict[str, Any]:
    rows = []
    for lam in [round(0.05 * step, 2) for step in range(21)]:
        J = build_erasure(lam)
        result = maximize_bias(J, restarts=restarts, seed=seed)
        rows.append({"lambda": lam, "value": result.value, "expected": max(0.0, 2 * lam - 1)})
    return {"rows": rows}


def qutrit_reduction(seed: int, restarts: int, samples: int) -> dict[str, Any]:
    rows = []
    for s in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5):
        optimum = q1_qutrit(s)
        result = maximize_bias(build_qutrit(s), restarts=restarts, seed=seed)
        rows.append(
            {
                "s": s,
                "q1": optimum.value,
                "w_star": optimum.w_star,
                "optimizer": result.value,
                "reduction_holds": reduction_check(s, samples=samples, seed=seed),
            }
        )
    return {"rows": rows}


def non_additivity() -> dict[str, Any]:
    rows = []
    for s in NON_ADDITIVITY_S:
        optimum = q1_qutrit(s)
        p_bar = 1 / (1 + k_factor(s, optimum.w_star))
        for p in (0.5, 0.9 * p_bar + 0.05, min(1.0, 1.05 * p_bar)):
            report = nonadditivity_report(p, s)
            rows.append({"s": s, "p": p, "verdict": report.verdict.value, "gain": report.gain, "precision": report.probe_precision})
    return {"rows": rows}


def incomplete_erasure() -> dict[str, Any]:
    rows = []
    for m in (0.0, 0.5, 1.0):
        for p in (0.05, 0.25, 0.5):
            for lam in (0.1, 0.5, 0.9):
                J = build_generalized_erasure(build_qubit_family(m, p), lam)
                certificate = theorem_scan(J, candidates=[INCOMPLETE_ERASURE_WITNESS])
                rows.append({"m": m, "p": p, "lambda": lam, "conclusion": certificate.conclusion.value if certificate else None})
    return {"rows": rows}


def build_checks(seed: int, restarts: int, samples: int) -> dict[str, Callable[[], dict[str, Any]]]:
    return {
        "pure_spectra": lambda: pure_spectra(seed),
        "pedagogic": pedagogic,
        "dimension_grid": dimension_grid,
        "erasure": lambda: erasure(seed, restarts),
        "qutrit_reduction": lambda: qutrit_reduction(seed, restarts, samples),
        "non_additivity": non_additivity,
        "incomplete_erasure": incomplete_erasure,
    }


def write_check(output_dir: Path, name: str, result: dict[str, Any], seed: int) -> Path:
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / f"{name}.json"
    document = {"metadata": {"tool": "qcap", "version": __version__, "check": name, "seed": seed}, "result": result}
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output-dir", type=Path, default=Path("data/reproduce"))
    parser.add_argument("--seed", type=int, default=settings.seed)
    parser.add_argument("--restarts", type=int, default=settings.restarts)
    parser.add_argument("--samples", type=int, default=200)
    parser.add_argument("--only", nargs="*", help="Names of the checks to run.")
    args = parser.parse_args(argv)

    checks = build_checks(args.seed, args.restarts, args.samples)
    selected = args.only or list(checks)
    unknown = sorted(set(selected) - set(checks))
    if unknown:
        print(f"Error: unknown checks {unknown}; choose from {sorted(checks)}")
        return 1
    for name in selected:
        print(f"Running check: {name}")
        path = write_check(args.output_dir, name, checks[name](), args.seed)
        print(f"Wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
