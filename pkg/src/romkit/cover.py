"""Minimum cover set of 2^n + 1 stabilizer groups and the FWHT feasible solution.

The cover consists of the groups ``[X_k | I]`` for every ``X_k`` in a family of
2^n symmetric matrices with ``{X_k v} = F_2^n`` for all nonzero ``v``, plus
``[I | 0]``.  The family is the GF(2)-span of the coefficient matrices ``C_i``
of the Hankel matrix ``C(x)_{ij} = x^{i+j} mod f`` for an irreducible ``f``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument, InvalidState
from .pauli import fwht_inplace, index_from_xz, num_qubits
from .stabilizers import CheckMatrix, canonical_ids, element_tables

MAX_COVER_QUBITS = 14
VERIFY_QUBITS = 10


# --------------------------------------------------------------------------
# GF(2)[x] arithmetic on integer bitmasks (bit i = coefficient of x^i)


def poly_degree(p: int) -> int:
    return p.bit_length() - 1


def poly_mod(a: int, m: int) -> int:
    dm = poly_degree(m)
    while a and poly_degree(a) >= dm:
        a ^= m << (poly_degree(a) - dm)
    return a


def is_irreducible(f: int) -> bool:
    """Trial division by every polynomial of degree 1..deg(f)//2."""
    d = poly_degree(f)
    if d < 1:
        return False
    for g in range(2, 1 << (d // 2 + 1)):
        if poly_mod(f, g) == 0:
            return False
    return True


@lru_cache(maxsize=None)
def find_irreducible(n: int) -> int:
    """Smallest monic degree-n irreducible polynomial, compared as coefficient integers.

    For n = 1 this is ``x`` (0b10), which precedes ``x + 1``.
    """
    if not 1 <= n <= 16:
        raise InvalidArgument("irreducible search supports 1 <= n <= 16")
    for f in range(1 << n, 1 << (n + 1)):
        if is_irreducible(f):
            return f
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


def poly_str(f: int) -> str:
    terms = []
    for i in range(poly_degree(f) + 1):
        if (f >> i) & 1:
            terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
    return " + ".join(terms) or "0"


# --------------------------------------------------------------------------
# symmetric matrices, stored as n x n uint8 arrays


def build_Ci(n: int, f: int) -> list[np.ndarray]:
    """Coefficient matrices with ``sum_i C_i x^i = (x^{r+c} mod f)_{r,c}``."""
    if poly_degree(f) != n:
        raise InvalidArgument("polynomial degree must equal n")
    if not is_irreducible(f):
        raise InvalidArgument(f"{poly_str(f)} is reducible over GF(2)")
    powers = [poly_mod(1 << e, f) for e in range(2 * n - 1)]
    mats = [np.zeros((n, n), dtype=np.uint8) for _ in range(n)]
    for r in range(n):
        for c in range(n):
            p = powers[r + c]
            for i in range(n):
                mats[i][r, c] = (p >> i) & 1
    return mats


def build_Xk_family(n: int, f: int | None = None) -> list[np.ndarray]:
    """All 2^n subset sums of the ``C_i``; entry ``k`` uses the bits of ``k`` as coefficients."""
    Cs = build_Ci(n, f if f is not None else find_irreducible(n))
    family = []
    for k in range(1 << n):
        m = np.zeros((n, n), dtype=np.uint8)
        for i in range(n):
            if (k >> i) & 1:
                m ^= Cs[i]
        family.append(m)
    return family


# --------------------------------------------------------------------------
# cover set


@dataclass(frozen=True)
class CoverSet:
    n: int
    blocks: tuple[CheckMatrix, ...]


def _row_masks(mat: np.ndarray) -> list[int]:
    n = mat.shape[0]
    weights = 1 << np.arange(n - 1, -1, -1)
    return [int(v) for v in mat.astype(np.int64) @ weights]


@lru_cache(maxsize=None)
def build_cover_set(n: int) -> CoverSet:
    if not 1 <= n <= MAX_COVER_QUBITS:
        raise InvalidArgument(f"cover sets are built for 1 <= n <= {MAX_COVER_QUBITS}")
    identity = [1 << (n - 1 - q) for q in range(n)]
    blocks = [CheckMatrix.from_xz(n, _row_masks(X), identity) for X in build_Xk_family(n)]
    blocks.append(CheckMatrix.from_xz(n, identity, [0] * n))
    return CoverSet(n, tuple(blocks))


def cover_tables(cover: CoverSet, start: int = 0, stop: int | None = None):
    """Element indices and signs (shape ``(blocks, 2^n)``) of a slice of the cover."""
    n = cover.n
    sel = cover.blocks[start:stop]
    xr = np.array([C.x_rows for C in sel], dtype=np.int64).reshape(len(sel), n)
    zr = np.array([C.z_rows for C in sel], dtype=np.int64).reshape(len(sel), n)
    return element_tables(n, xr, zr)


def verify_cover(cover: CoverSet) -> bool:
    """Every Pauli row is hit, and every non-identity row by exactly one block."""
    n = cover.n
    if n > VERIFY_QUBITS:
        raise InvalidArgument(f"cover verification is capped at {VERIFY_QUBITS} qubits")
    hits = np.zeros(4**n, dtype=np.int64)
    step = max(1, (1 << 16) >> n)
    for s in range(0, len(cover.blocks), step):
        idx, _ = cover_tables(cover, s, s + step)
        np.add.at(hits, idx.reshape(-1), 1)
    return bool(np.all(hits[1:] == 1) and hits[0] >= 1)


@lru_cache(maxsize=None)
def cover_linear_ids(n: int) -> np.ndarray:
    """Canonical stabilizer ids of all (2^n + 1) 2^n cover columns, block-major."""
    return np.concatenate([canonical_ids(C) for C in build_cover_set(n).blocks])


@dataclass
class FeasibleDecomposition:
    n: int
    weights: np.ndarray | None  # (2^n + 1, 2^n): weight of (cover block j, delta)
    r_fwht: float
    residual_inf: float | None = None

    @property
    def blocks(self) -> int:
        return (1 << self.n) + 1

    def entries(self):
        """Nonzero ``((block, delta), weight)`` pairs."""
        j, d = np.nonzero(self.weights)
        return [((int(a), int(b)), float(self.weights[a, b])) for a, b in zip(j, d)]

    def as_dict(self) -> dict:
        return {"r_fwht": self.r_fwht, "residual_inf": self.residual_inf, "blocks": self.blocks}


def minimal_feasible_solution(
    b, check: bool = True, keep_weights: bool | None = None
) -> FeasibleDecomposition:
    """Feasible decomposition over the cover matrix in O(n 4^n).

    For block ``j`` the gathered vector has ``1/(2^n + 1)`` in the identity slot and
    the sign-adjusted entries of ``b`` elsewhere; its weights are ``H b_j / 2^n``.
    ``keep_weights`` defaults to True up to 12 qubits; beyond that only the
    objective (and the residual when ``check``) is accumulated.
    """
    b = np.asarray(b, dtype=float)
    n = num_qubits(b)
    if abs(b[0] - 1.0) > 1e-9:
        raise InvalidState(f"Pauli vector must have b_0 = 1 (got {b[0]!r})")
    cover = build_cover_set(n)
    nblocks = len(cover.blocks)
    size = 1 << n
    if keep_weights is None:
        keep_weights = n <= 12
    weights = np.empty((nblocks, size)) if keep_weights else None
    r_fwht = 0.0
    step = max(1, (1 << 18) >> n)
    recon = np.zeros_like(b) if check else None
    for s in range(0, nblocks, step):
        idx, signs = cover_tables(cover, s, s + step)
        v = b[idx] * signs
        v[:, 0] = 1.0 / (nblocks)
        fwht_inplace(v)
        v /= size
        r_fwht += float(np.abs(v).sum(axis=1).sum())
        if keep_weights:
            weights[s : s + len(v)] = v
        if check:
            # M x restricted to these blocks: H x_j scattered back with signs
            back = v.copy()
            fwht_inplace(back)
            np.add.at(recon, idx.reshape(-1), (back * signs).reshape(-1))
    residual = float(np.max(np.abs(recon - b))) if check else None
    return FeasibleDecomposition(n, weights, r_fwht, residual)


def pauli_rows_of(C: CheckMatrix) -> set[int]:
    """Nonzero-row set R(W) of the block of ``C``."""
    n = C.n
    out = set()
    for v in range(1 << n):
        x = z = 0
        for i in range(n):
            if (v >> i) & 1:
                x ^= C.x_rows[i]
                z ^= C.z_rows[i]
        out.add(int(index_from_xz(x, z, n)))
    return out
