"""Independent reference implementations used by the tests.

Nothing here imports romkit: Pauli vectors come from explicit traces,
stabilizer states from a Clifford-orbit search over state vectors, and LPs
from vertex enumeration or SciPy's HiGHS.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
SINGLE = [I2, X2, Y2, Z2]


def dense_pauli(index: int, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for q in range(n):
        digit = (index >> (2 * (n - 1 - q))) & 3
        out = np.kron(out, SINGLE[digit])
    return out


def trace_decompose(rho) -> np.ndarray:
    """b_i = Tr[P_i rho] by explicit matrix products, O(8^n)."""
    rho = np.asarray(rho, dtype=complex)
    n = rho.shape[0].bit_length() - 1
    return np.array([np.trace(dense_pauli(i, n) @ rho).real for i in range(4**n)])


def trace_reconstruct(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    n = int(round(np.log(len(b)) / np.log(4)))
    return sum(b[i] * dense_pauli(i, n) for i in range(4**n)) / 2**n


def random_density(n: int, rng) -> np.ndarray:
    d = 2**n
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure(n: int, rng) -> np.ndarray:
    d = 2**n
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_hermitian(n: int, rng) -> np.ndarray:
    d = 2**n
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return g + g.conj().T


# --------------------------------------------------------------------------
# stabilizer states by Clifford orbit of |0...0>


def _gates(n: int):
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    s = np.diag([1, 1j])

    def on(q, g):
        return np.kron(np.kron(np.eye(2**q), g), np.eye(2 ** (n - q - 1)))

    gates = [on(q, h) for q in range(n)] + [on(q, s) for q in range(n)]
    for c, t in itertools.permutations(range(n), 2):
        m = np.zeros((2**n, 2**n))
        for k in range(2**n):
            bits = [(k >> (n - 1 - q)) & 1 for q in range(n)]
            if bits[c]:
                bits[t] ^= 1
            m[sum(b << (n - 1 - q) for q, b in enumerate(bits)), k] = 1
        gates.append(m)
    return gates


def _phase_key(psi):
    k = np.flatnonzero(np.abs(psi) > 1e-9)[0]
    psi = psi * abs(psi[k]) / psi[k]
    v = np.round(np.concatenate([psi.real, psi.imag]), 6)
    v[v == 0] = 0.0  # folds -0.0 into 0.0
    return v.tobytes()


@lru_cache(maxsize=None)
def clifford_orbit(n: int) -> tuple:
    """All n-qubit stabilizer state vectors (n <= 4), by breadth-first search."""
    start = np.zeros(2**n, dtype=complex)
    start[0] = 1
    gates = _gates(n)
    seen = {_phase_key(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for psi in frontier:
            for g in gates:
                phi = g @ psi
                key = _phase_key(phi)
                if key not in seen:
                    seen[key] = phi
                    nxt.append(phi)
        frontier = nxt
    return tuple(seen.values())


@lru_cache(maxsize=None)
def stabilizer_pauli_vectors(n: int) -> np.ndarray:
    """(|S_n|, 4^n) integer Pauli vectors <psi|P_i|psi> of all stabilizer states."""
    psi = np.array(clifford_orbit(n))
    out = np.empty((len(psi), 4**n), dtype=np.int8)
    for i in range(4**n):
        vals = np.sum(psi.conj() * (psi @ dense_pauli(i, n).T), axis=1).real
        out[:, i] = np.rint(vals)
    return out


def generator_matrix(x: int, z: int, n: int) -> np.ndarray:
    """Hermitian Pauli with X-bits ``x`` and Z-bits ``z`` (qubit 1 = most significant bit)."""
    by_bits = {(0, 0): I2, (1, 0): X2, (1, 1): Y2, (0, 1): Z2}
    out = np.ones((1, 1), dtype=complex)
    for q in range(n):
        bit = 1 << (n - 1 - q)
        out = np.kron(out, by_bits[(int(bool(x & bit)), int(bool(z & bit)))])
    return out


def group_projector(x_rows, z_rows, n: int, delta: int) -> np.ndarray:
    """prod_i (I + (-1)^{delta_i} g_i) / 2 over the generators of a check matrix."""
    out = np.eye(2**n, dtype=complex)
    for i, (x, z) in enumerate(zip(x_rows, z_rows)):
        sign = -1.0 if (delta >> i) & 1 else 1.0
        out = out @ (np.eye(2**n) + sign * generator_matrix(x, z, n)) / 2
    return out


def dense_overlap_table(check_matrices, rho) -> np.ndarray:
    """(blocks, 2^n) table of 2^n Tr[sigma rho], one projector per (block, delta)."""
    rho = np.asarray(rho, dtype=complex)
    n = rho.shape[0].bit_length() - 1
    out = np.empty((len(check_matrices), 2**n))
    for j, (xs, zs) in enumerate(check_matrices):
        for d in range(2**n):
            out[j, d] = 2**n * np.trace(group_projector(xs, zs, n, d) @ rho).real
    return out


# --------------------------------------------------------------------------
# GF(2) brute force


def count_rref(k: int, n: int) -> int:
    """Number of k x n reduced row echelon GF(2) matrices of rank k, exhaustively."""
    count = 0
    for bits in range(2 ** (k * n)):
        m = np.array([(bits >> i) & 1 for i in range(k * n)]).reshape(k, n)
        if _is_rref_full_rank(m):
            count += 1
    return count


def _is_rref_full_rank(m) -> bool:
    k, n = m.shape
    last = -1
    for r in range(k):
        nz = np.flatnonzero(m[r])
        if len(nz) == 0 or nz[0] <= last:
            return False
        p = nz[0]
        if m[:, p].sum() != 1:
            return False
        last = p
    return True


# --------------------------------------------------------------------------
# L1 minimization


def vertex_l1(A, b) -> float:
    """min ||x||_1 s.t. Ax = b by enumerating every basic solution (tiny problems)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    r = np.linalg.matrix_rank(A)
    best = np.inf
    for cols in itertools.combinations(range(A.shape[1]), r):
        sub = A[:, cols]
        if np.linalg.matrix_rank(sub) < r:
            continue
        x, *_ = np.linalg.lstsq(sub, b, rcond=None)
        if np.max(np.abs(sub @ x - b)) < 1e-9:
            best = min(best, np.abs(x).sum())
    return best


def highs_l1(A, b, w=None) -> float:
    A = np.asarray(A, dtype=float)
    N = A.shape[1]
    w = np.ones(N) if w is None else np.asarray(w, dtype=float)
    res = linprog(np.concatenate([w, w]), A_eq=np.hstack([A, -A]), b_eq=b,
                  bounds=(0, None), method="highs")
    return res.fun if res.status == 0 else np.nan
