"""Test and demo states: Haar samples, |H>, |F> and random stabilizer states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GuardError, InvalidArgument
from .pauli import MAX_DENSE_QUBITS, MAX_VECTOR_QUBITS, pauli_decompose, tensor_power
from .stabilizers import StabilizerId, column, count_stabilizer_states

STATE_KINDS = ("haar-pure", "haar-mixed", "h-state", "f-state", "stabilizer-random")

# |H><H| = (I + (X + Y)/sqrt2)/2 and |F><F| = (I + (X + Y + Z)/sqrt3)/2
H_STATE = np.array([1.0, 1 / np.sqrt(2), 1 / np.sqrt(2), 0.0])
F_STATE = np.array([1.0, 1 / np.sqrt(3), 1 / np.sqrt(3), 1 / np.sqrt(3)])


def haar_pure(n: int, rng: np.random.Generator) -> np.ndarray:
    """Projector onto a normalized standard complex Gaussian vector."""
    d = 1 << n
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def haar_mixed(n: int, rng: np.random.Generator) -> np.ndarray:
    """Hilbert-Schmidt (Ginibre) random mixed state ``G G^dag / Tr``."""
    d = 1 << n
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_stabilizer(n: int, rng: np.random.Generator) -> np.ndarray:
    """Pauli vector of a uniformly random pure stabilizer state."""
    lin = int(rng.integers(count_stabilizer_states(n)))
    return column(StabilizerId.from_linear(lin, n), n).dense().astype(float)


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int = 1
    copies: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in STATE_KINDS:
            raise InvalidArgument(f"unknown state kind {self.kind!r}")
        if self.n < 1 or self.copies < 1:
            raise InvalidArgument("n and copies must be positive")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgument("seed must be a 64-bit unsigned integer")

    @property
    def total_qubits(self) -> int:
        return self.n * self.copies


def generate(spec: GenSpec) -> tuple[str, np.ndarray]:
    """``("qdm", rho)`` for sampled states, ``("qpv", b)`` for exact ones.

    ``copies`` takes the tensor power of the ``n``-qubit state.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind in ("haar-pure", "haar-mixed"):
        if spec.total_qubits > MAX_DENSE_QUBITS:
            raise GuardError(f"dense states are capped at {MAX_DENSE_QUBITS} qubits")
        rho = (haar_pure if spec.kind == "haar-pure" else haar_mixed)(spec.n, rng)
        out = rho
        for _ in range(spec.copies - 1):
            out = np.kron(out, rho)
        return "qdm", out
    if spec.total_qubits > MAX_VECTOR_QUBITS:
        raise GuardError(f"Pauli vectors are capped at {MAX_VECTOR_QUBITS} qubits")
    if spec.kind == "stabilizer-random":
        b = random_stabilizer(spec.n, rng)
    else:
        b = tensor_power(H_STATE if spec.kind == "h-state" else F_STATE, spec.n)
    return "qpv", tensor_power(b, spec.copies)


def pauli_vector_of(kind: str, arr: np.ndarray) -> np.ndarray:
    return pauli_decompose(arr) if kind == "qdm" else np.asarray(arr, dtype=float)
