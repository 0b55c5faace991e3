"""Pauli-basis representation of n-qubit states and the Walsh-Hadamard kernel.

A state is carried around as its Pauli vector ``b`` with ``b[i] = Tr[P_i rho]``.
Pauli strings are indexed with one base-4 digit per qubit (I=0, X=1, Y=2, Z=3),
qubit 1 being the most significant digit, so ``index("XZ") == 1*4 + 3``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument, InvalidState

MAX_DENSE_QUBITS = 12
MAX_VECTOR_QUBITS = 16
HERMITIAN_TOL = 1e-9

LETTERS = "IXYZ"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _log_size(size: int, base: int) -> int:
    n = 0
    while size > 1 and size % base == 0:
        size //= base
        n += 1
    if size != 1:
        raise InvalidArgument(f"length is not a power of {base}")
    return n


def num_qubits(b) -> int:
    """Qubit count of a Pauli vector (length 4^n)."""
    n = _log_size(len(b), 4)
    if n > MAX_VECTOR_QUBITS:
        raise InvalidArgument(f"Pauli vectors are capped at {MAX_VECTOR_QUBITS} qubits")
    return n


def pauli_index(label: str) -> int:
    idx = 0
    for ch in label.upper():
        idx = 4 * idx + LETTERS.index(ch)
    return idx


def pauli_label(index: int, n: int) -> str:
    digits = []
    for _ in range(n):
        digits.append(LETTERS[index % 4])
        index //= 4
    return "".join(reversed(digits))


@lru_cache(maxsize=None)
def _spread_table(n: int) -> np.ndarray:
    # bit p of the input lands on bit 2p of the output
    vals = np.arange(1 << n, dtype=np.int64)
    out = np.zeros_like(vals)
    for p in range(n):
        out |= ((vals >> p) & 1) << (2 * p)
    return out


def index_from_xz(x, z, n: int):
    """Pauli index of the Hermitian Pauli with X-bits ``x`` and Z-bits ``z``.

    Bit ``n-1-q`` of each mask refers to qubit ``q`` (0-based), so the masks read
    as the check-matrix row ``[x_1..x_n | z_1..z_n]``.  The digit of one qubit is
    ``2*z + (x ^ z)``, which maps (0,0)->I, (1,0)->X, (1,1)->Y, (0,1)->Z.
    Works elementwise on integer arrays.
    """
    spread = _spread_table(n)
    x = np.asarray(x, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    return (spread[z] << 1) | spread[x ^ z]


def xz_from_index(index: int, n: int) -> tuple[int, int]:
    x = z = 0
    for q in range(n):
        digit = (index >> (2 * (n - 1 - q))) & 3
        bit = 1 << (n - 1 - q)
        if digit in (1, 2):
            x |= bit
        if digit in (2, 3):
            z |= bit
    return x, z


def fwht_inplace(v):
    """Unnormalized Walsh-Hadamard transform along the last axis, in place.

    Leading axes are treated as a batch.  The array must be C-contiguous with a
    float or complex dtype; it is overwritten with ``H_m v`` and returned.
    """
    v = np.asarray(v)
    if v.ndim == 0:
        raise InvalidArgument("fwht needs at least one axis")
    size = v.shape[-1]
    if size < 1 or size & (size - 1):
        raise InvalidArgument(f"length {size} is not a power of two")
    if not v.flags.c_contiguous or not v.flags.writeable:
        raise InvalidArgument("fwht_inplace needs a writeable C-contiguous array")
    if v.dtype.kind not in "fc":
        raise InvalidArgument("fwht_inplace needs a float or complex array")
    batch = v.reshape(-1, size)
    h = 1
    while h < size:
        view = batch.reshape(batch.shape[0], -1, 2, h)
        lo = view[:, :, 0, :]
        hi = view[:, :, 1, :]
        diff = lo - hi
        lo += hi
        hi[...] = diff
        h *= 2
    return v


def fwht(v) -> np.ndarray:
    """Out-of-place convenience wrapper around :func:`fwht_inplace`."""
    arr = np.array(v, dtype=np.result_type(np.asarray(v).dtype, np.float64), order="C")
    return fwht_inplace(arr)


def _interleave_axes(n: int) -> list[int]:
    # (i_1..i_n, j_1..j_n) -> (i_1, j_1, ..., i_n, j_n)
    axes = []
    for q in range(n):
        axes += [q, n + q]
    return axes


def _check_dense(rho) -> tuple[np.ndarray, int]:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidArgument("density matrix must be square")
    n = _log_size(rho.shape[0], 2)
    if n > MAX_DENSE_QUBITS:
        raise InvalidArgument(f"dense matrices are capped at {MAX_DENSE_QUBITS} qubits")
    return rho, n


def pauli_decompose(rho) -> np.ndarray:
    """Pauli vector ``b_i = Tr[P_i rho]`` in O(n 4^n).

    The matrix is vectorized in Z-order (row and column bits interleaved per
    qubit) and the single-qubit map (c00, c01, c10, c11) -> (I, X, Y, Z) is
    applied in place along every qubit axis.
    """
    rho, n = _check_dense(rho)
    if n == 0:
        return np.array([rho[0, 0].real])
    c = rho.reshape((2,) * (2 * n)).transpose(_interleave_axes(n)).reshape(-1).copy()
    for q in range(n):
        view = c.reshape(4**q, 4, 4 ** (n - q - 1))
        c00 = view[:, 0, :].copy()
        c01 = view[:, 1, :].copy()
        view[:, 0, :] += view[:, 3, :]
        view[:, 1, :] += view[:, 2, :]
        view[:, 3, :] = c00 - view[:, 3, :]
        view[:, 2, :] = 1j * (c01 - view[:, 2, :])
    residue = np.max(np.abs(c.imag))
    if residue > HERMITIAN_TOL:
        raise InvalidState(f"matrix is not Hermitian (imaginary residue {residue:.3g})")
    return np.ascontiguousarray(c.real)


def pauli_reconstruct(b) -> np.ndarray:
    """Density matrix ``(1/2^n) sum_i b_i P_i`` (inverse of :func:`pauli_decompose`)."""
    b = np.asarray(b, dtype=float)
    n = num_qubits(b)
    if n > MAX_DENSE_QUBITS:
        raise InvalidArgument(f"dense matrices are capped at {MAX_DENSE_QUBITS} qubits")
    c = b.astype(complex)
    for q in range(n):
        view = c.reshape(4**q, 4, 4 ** (n - q - 1))
        bi = view[:, 0, :].copy()
        bx = view[:, 1, :].copy()
        view[:, 0, :] = 0.5 * (bi + view[:, 3, :])
        view[:, 3, :] = 0.5 * (bi - view[:, 3, :])
        view[:, 1, :] = 0.5 * (bx - 1j * view[:, 2, :])
        view[:, 2, :] = 0.5 * (bx + 1j * view[:, 2, :])
    dim = 2**n
    inverse = np.argsort(_interleave_axes(n)) if n else []
    return c.reshape((2,) * (2 * n)).transpose(inverse).reshape(dim, dim)


def st_norm(b) -> float:
    """Stabilizer-norm lower bound ``||b||_1 / 2^n`` on the robustness."""
    b = np.asarray(b, dtype=float)
    return float(np.abs(b).sum() / 2 ** num_qubits(b))


def tensor(b1, b2) -> np.ndarray:
    """Pauli vector of ``rho_1 (x) rho_2``; the left operand holds the leading qubits."""
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if num_qubits(b1) + num_qubits(b2) > MAX_VECTOR_QUBITS:
        raise InvalidArgument(f"Pauli vectors are capped at {MAX_VECTOR_QUBITS} qubits")
    return np.kron(b1, b2)


def tensor_power(b, copies: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(copies):
        out = tensor(out, b)
    return out


@dataclass
class StateReport:
    n: int
    b0: float
    max_abs_entry: float
    identity_ok: bool
    bounded_ok: bool
    min_eigenvalue: float | None = None
    psd_ok: bool | None = None

    @property
    def passed(self) -> bool:
        return self.identity_ok and self.bounded_ok and self.psd_ok is not False

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "b0": self.b0,
            "max_abs_entry": self.max_abs_entry,
            "identity_ok": self.identity_ok,
            "bounded_ok": self.bounded_ok,
            "min_eigenvalue": self.min_eigenvalue,
            "psd_ok": self.psd_ok,
            "passed": self.passed,
        }


def validate_state(b, check_psd: bool = False, tol: float = 1e-9) -> StateReport:
    """Report-only validity checks on a Pauli vector; never raises on bad data."""
    b = np.asarray(b, dtype=float)
    n = num_qubits(b)
    rest = np.abs(b[1:]) if len(b) > 1 else np.zeros(1)
    report = StateReport(
        n=n,
        b0=float(b[0]),
        max_abs_entry=float(rest.max()),
        identity_ok=bool(abs(b[0] - 1.0) <= tol),
        bounded_ok=bool(np.all(np.abs(b) <= 1.0 + tol)),
    )
    if check_psd and n <= MAX_DENSE_QUBITS:
        eig = float(np.linalg.eigvalsh(pauli_reconstruct(b)).min())
        report.min_eigenvalue = eig
        report.psd_ok = eig >= -tol
    return report
