"""Two-qubit transverse-field Ising system with a nonnegative total Hamiltonian.

The system is two spins A, B with local fields along z and an x-x coupling,
shifted by constants so the ground energy is exactly zero:

    H_A = h * sigma_A^z + h^2 / eps
    H_B = h * sigma_B^z + h^2 / eps
    V   = 2 k * sigma_A^x sigma_B^x + 2 k^2 / eps
    H   = H_A + H_B + V,        eps = sqrt(h^2 + k^2)

with h > 0, k > 0.  The mixing angle sigma of the ground state satisfies
cos(sigma) = h / eps and sin(sigma) = k / eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmath


class InvalidParams(ValueError):
    """Model parameters outside the open quadrant h > 0, k > 0."""


@dataclass(frozen=True)
class ModelParams:
    """Field strength ``h`` and coupling ``k``, both strictly positive."""

    h: float
    k: float

    def __post_init__(self) -> None:
        h, k = self.h, self.k
        if not (isinstance(h, (int, float)) and isinstance(k, (int, float))):
            raise InvalidParams(f"h and k must be real numbers, got {h!r}, {k!r}")
        if not (math.isfinite(h) and math.isfinite(k)):
            raise InvalidParams(f"h and k must be finite, got h={h}, k={k}")
        if h <= 0.0 or k <= 0.0:
            raise InvalidParams(f"h and k must be strictly positive, got h={h}, k={k}")

    @property
    def eps(self) -> float:
        return math.hypot(self.h, self.k)

    @property
    def cos_sigma(self) -> float:
        return self.h / self.eps

    @property
    def sin_sigma(self) -> float:
        return self.k / self.eps


@dataclass(frozen=True)
class HamiltonianParts:
    """The three commutation-checked summands and their total, as 4x4 arrays."""

    h_a: np.ndarray
    h_b: np.ndarray
    v: np.ndarray
    total: np.ndarray

    def __post_init__(self) -> None:
        for m in (self.h_a, self.h_b, self.v, self.total):
            m.setflags(write=False)

    def observables(self) -> dict[str, np.ndarray]:
        return {"H_A": self.h_a, "H_B": self.h_b, "V": self.v, "H": self.total}


def energy_observables(parts: HamiltonianParts) -> dict[str, np.ndarray]:
    """The four named observables of a built Hamiltonian, keyed H_A, H_B, V, H."""
    return parts.observables()


def build_hamiltonian(params: ModelParams) -> HamiltonianParts:
    """Assemble H_A, H_B, V and their sum for the given parameters."""
    h, k, eps = params.h, params.k, params.eps
    sz = qmath.pauli("z")
    sx = qmath.pauli("x")
    one = qmath.identity(2)
    eye4 = qmath.identity(4)
    h_a = h * qmath.tensor(sz, one) + (h * h / eps) * eye4
    h_b = h * qmath.tensor(one, sz) + (h * h / eps) * eye4
    v = 2.0 * k * qmath.tensor(sx, sx) + (2.0 * k * k / eps) * eye4
    return HamiltonianParts(h_a=h_a, h_b=h_b, v=v, total=h_a + h_b + v)


def ground_state(params: ModelParams) -> np.ndarray:
    """Normalized ground ket of H, with ground energy exactly zero.

    In the sigma-z product basis (|++>, |+->, |-+>, |-->) the ground state
    lives in the even-parity block:

        |g> = (1/sqrt(2)) [ sqrt(1 - h/eps) |++>  -  sqrt(1 + h/eps) |--> ]
    """
    c = params.cos_sigma
    g = np.zeros(4, dtype=complex)
    g[0] = math.sqrt(0.5 * (1.0 - c))
    g[3] = -math.sqrt(0.5 * (1.0 + c))
    return g


def spectrum_closed(params: ModelParams) -> np.ndarray:
    """The four eigenvalues of H in ascending order, in closed form.

    H is block diagonal in the parity grading of the product basis; both
    2x2 blocks diagonalize by hand, giving {0, 2 eps - 2k, 2 eps + 2k, 4 eps}.
    Intended for documentation and cross-checks; the package's runtime
    spectra always come from the dense eigensolver.
    """
    eps, k = params.eps, params.k
    return np.sort(np.array([0.0, 2.0 * eps - 2.0 * k, 2.0 * eps + 2.0 * k, 4.0 * eps]))
