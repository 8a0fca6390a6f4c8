from typing import Callable

import numpy as np
import pytest

from qcap.capacity.channels import Isometry, build_generalized_erasure, build_pedagogic, build_qubit_family, build_qutrit, is_minimal, random_isometry

SEED = 20240611

# (d_a, d_b, d_c) that a random isometry realizes minimally
MINIMAL_DIMS = [
    (2, 2, 2),
    (2, 3, 2),
    (2, 2, 3),
    (2, 4, 2),
    (2, 3, 3),
    (3, 2, 2),
    (3, 3, 2),
    (3, 2, 3),
    (3, 4, 2),
    (3, 3, 3),
    (4, 2, 2),
    (4, 3, 2),
]

# one-parameter constructors, swept over [0, 1]
CONSTRUCTORS: dict[str, Callable[[float], Isometry]] = {
    "pedagogic": build_pedagogic,
    "qubit_m0": lambda t: build_qubit_family(0.0, t),
    "qubit_m_half": lambda t: build_qubit_family(0.5, t),
    "qubit_m1": lambda t: build_qubit_family(1.0, t),
    "qutrit": build_qutrit,
    "gen_erasure": lambda t: build_generalized_erasure(build_qubit_family(0.5, 0.3), t),
}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(SEED)


@pytest.fixture
def pedagogic() -> Isometry:
    return build_pedagogic(0.3)


@pytest.fixture
def random_minimal_isometry(rng: np.random.Generator) -> Callable[..., Isometry]:
    """Draws random isometries until one is minimal for the requested (or a random) shape."""

    def draw(dims: tuple[int, int, int] | None = None) -> Isometry:
        d_a, d_b, d_c = dims or MINIMAL_DIMS[int(rng.integers(len(MINIMAL_DIMS)))]
        while True:
            J = random_isometry(d_a, d_b, d_c, rng)
            if is_minimal(J):
                return J

    return draw


def parameter_grid(step: float = 0.05) -> list[float]:
    return [round(step * index, 10) for index in range(int(round(1 / step)) + 1)]
