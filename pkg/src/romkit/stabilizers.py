"""Enumeration of n-qubit stabilizer groups and fast stabilizer overlaps.

Every stabilizer group has a unique check matrix in the standard form

    [ R          | Zhat on pivots, 0 elsewhere ]     (k rows)
    [ 0          | kernel basis of R           ]     (n-k rows)

where R is a k x n reduced row echelon GF(2) matrix and Zhat is symmetric.
Blocks are numbered in the order (k, pivot set, free entries of R, upper
triangle of Zhat); the free-entry and Zhat bit strings are read row-major with
the first position as the most significant bit.  A pure stabilizer state is
``(block, delta)``: bit ``i`` of ``delta`` is the sign bit of generator ``i``.
The group element ``gamma`` is the product of the generators selected by the
bits of ``gamma``, so the 2^n overlaps of one block are the Walsh-Hadamard
transform of the sign-adjusted gathered Pauli vector.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument
from .pauli import fwht_inplace, index_from_xz, num_qubits, xz_from_index

MAX_SWEEP_QUBITS = 8
TABLE_CACHE_QUBITS = 5
CHUNK_ELEMENTS = 1 << 18


def default_threads() -> int:
    env = os.environ.get("ROMKIT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# --------------------------------------------------------------------------
# counting


def qbinom2(n: int, k: int) -> int:
    """Gaussian binomial coefficient [n choose k]_2."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= (1 << (n - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


def count_stabilizer_states(n: int) -> int:
    """|S_n| = 2^n prod_{k=0}^{n-1} (2^{n-k} + 1)."""
    total = 1 << n
    for k in range(n):
        total *= (1 << (n - k)) + 1
    return total


def num_blocks(n: int) -> int:
    return count_stabilizer_states(n) >> n


# --------------------------------------------------------------------------
# check matrices


def popcount(v: int) -> int:
    return bin(v).count("1")


def gf2_rank(rows) -> int:
    """Rank of a list of integer bit rows over GF(2)."""
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
    return len(basis)


@dataclass(frozen=True)
class CheckMatrix:
    """n x 2n GF(2) matrix [X | Z]; each row is stored as a 2n-bit word ``x << n | z``.

    Within each half, qubit 1 is the most significant bit.
    """

    n: int
    rows: tuple[int, ...]

    @classmethod
    def from_xz(cls, n: int, x_rows, z_rows) -> "CheckMatrix":
        return cls(n, tuple((int(x) << n) | int(z) for x, z in zip(x_rows, z_rows)))

    @classmethod
    def from_parts(cls, x_part, z_part) -> "CheckMatrix":
        x_part = np.asarray(x_part, dtype=int) % 2
        z_part = np.asarray(z_part, dtype=int) % 2
        n = x_part.shape[1]
        weights = 1 << np.arange(n - 1, -1, -1)
        return cls.from_xz(n, x_part @ weights, z_part @ weights)

    @classmethod
    def from_labels(cls, labels) -> "CheckMatrix":
        """Build from Pauli strings such as ``["XX", "ZZ"]`` (signs are ignored)."""
        n = len(labels[0])
        xs, zs = [], []
        for lab in labels:
            x = z = 0
            for ch in lab.upper():
                x, z = x << 1, z << 1
                x |= ch in "XY"
                z |= ch in "YZ"
            xs.append(x)
            zs.append(z)
        return cls.from_xz(n, xs, zs)

    @property
    def x_rows(self) -> list[int]:
        return [r >> self.n for r in self.rows]

    @property
    def z_rows(self) -> list[int]:
        mask = (1 << self.n) - 1
        return [r & mask for r in self.rows]

    def _bits(self, rows) -> np.ndarray:
        shifts = np.arange(self.n - 1, -1, -1)
        return (np.asarray(rows, dtype=np.int64)[:, None] >> shifts) & 1

    @property
    def x_part(self) -> np.ndarray:
        return self._bits(self.x_rows)

    @property
    def z_part(self) -> np.ndarray:
        return self._bits(self.z_rows)

    def labels(self) -> list[str]:
        out = []
        for x, z in zip(self.x_rows, self.z_rows):
            s = ""
            for q in range(self.n):
                bit = 1 << (self.n - 1 - q)
                s += "IXZY"[bool(x & bit) + 2 * bool(z & bit)]
            out.append(s)
        return out


def symplectic_product(n: int, r1: int, r2: int) -> int:
    mask = (1 << n) - 1
    x1, z1 = r1 >> n, r1 & mask
    x2, z2 = r2 >> n, r2 & mask
    return (popcount(x1 & z2) + popcount(z1 & x2)) & 1


def check_matrix_valid(C: CheckMatrix) -> bool:
    """True iff the rows are independent and pairwise commuting."""
    if len(C.rows) != C.n or gf2_rank(C.rows) != C.n:
        return False
    return all(
        symplectic_product(C.n, a, b) == 0 for a, b in itertools.combinations(C.rows, 2)
    )


# --------------------------------------------------------------------------
# standard form enumeration


@dataclass(frozen=True)
class Segment:
    """All blocks sharing one rank ``k`` and pivot set."""

    k: int
    pivots: tuple[int, ...]
    free: tuple[tuple[int, int], ...]  # (row, column) positions of free entries of R
    nonpivots: tuple[int, ...]
    offset: int

    @property
    def z_bits(self) -> int:
        return self.k * (self.k + 1) // 2

    @property
    def size(self) -> int:
        return 1 << (len(self.free) + self.z_bits)


@dataclass(frozen=True)
class StandardFormParams:
    k: int
    pivot_columns: tuple[int, ...]
    xhat: np.ndarray  # k x (n-k), entries of R on the non-pivot columns
    zhat: np.ndarray  # k x k symmetric


@lru_cache(maxsize=None)
def segments(n: int) -> tuple[Segment, ...]:
    out = []
    offset = 0
    for k in range(n + 1):
        for pivots in itertools.combinations(range(n), k):
            pset = set(pivots)
            nonpivots = tuple(c for c in range(n) if c not in pset)
            free = tuple(
                (i, c) for i, p in enumerate(pivots) for c in range(p + 1, n) if c not in pset
            )
            seg = Segment(k, pivots, free, nonpivots, offset)
            out.append(seg)
            offset += seg.size
    assert offset == num_blocks(n)
    return tuple(out)


@lru_cache(maxsize=None)
def _segment_offsets(n: int) -> np.ndarray:
    return np.array([s.offset for s in segments(n)], dtype=np.int64)


def _zhat_positions(k: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(k) for j in range(i, k)]


def block_rows(n: int, blocks) -> tuple[np.ndarray, np.ndarray]:
    """Standard-form generator masks for an array of block indices.

    Returns ``(x_rows, z_rows)``, both int64 arrays of shape ``(len(blocks), n)``.
    """
    blocks = np.asarray(blocks, dtype=np.int64).reshape(-1)
    x_rows = np.zeros((len(blocks), n), dtype=np.int64)
    z_rows = np.zeros((len(blocks), n), dtype=np.int64)
    if len(blocks) == 0:
        return x_rows, z_rows
    if blocks.min() < 0 or blocks.max() >= num_blocks(n):
        raise InvalidArgument("block index out of range")
    segs = segments(n)
    seg_of = np.searchsorted(_segment_offsets(n), blocks, side="right") - 1
    for s in np.unique(seg_of):
        seg = segs[s]
        sel = np.flatnonzero(seg_of == s)
        local = blocks[sel] - seg.offset
        xcode = local >> seg.z_bits
        zcode = local & ((1 << seg.z_bits) - 1)
        xr = np.zeros((len(sel), n), dtype=np.int64)
        zr = np.zeros((len(sel), n), dtype=np.int64)
        col_bit = [1 << (n - 1 - c) for c in range(n)]
        bottom_row = {c: seg.k + j for j, c in enumerate(seg.nonpivots)}
        for i, p in enumerate(seg.pivots):
            xr[:, i] = col_bit[p]
        for c in seg.nonpivots:
            zr[:, bottom_row[c]] = col_bit[c]
        nfree = len(seg.free)
        for f, (i, c) in enumerate(seg.free):
            bit = (xcode >> (nfree - 1 - f)) & 1
            xr[:, i] |= bit * col_bit[c]
            # kernel row of column c picks up the pivot of row i
            zr[:, bottom_row[c]] |= bit * col_bit[seg.pivots[i]]
        zpos = _zhat_positions(seg.k)
        for f, (i, j) in enumerate(zpos):
            bit = (zcode >> (seg.z_bits - 1 - f)) & 1
            zr[:, i] |= bit * col_bit[seg.pivots[j]]
            if i != j:
                zr[:, j] |= bit * col_bit[seg.pivots[i]]
        x_rows[sel] = xr
        z_rows[sel] = zr
    return x_rows, z_rows


def block_check_matrix(n: int, block: int) -> CheckMatrix:
    xr, zr = block_rows(n, [block])
    return CheckMatrix.from_xz(n, xr[0], zr[0])


def enumerate_blocks(n: int) -> Iterator[CheckMatrix]:
    """Every stabilizer group as a standard-form check matrix, in block order."""
    total = num_blocks(n)
    step = max(1, CHUNK_ELEMENTS >> n)
    for start in range(0, total, step):
        xr, zr = block_rows(n, np.arange(start, min(total, start + step)))
        for x, z in zip(xr, zr):
            yield CheckMatrix.from_xz(n, x, z)


def standard_form(C: CheckMatrix) -> tuple[CheckMatrix, StandardFormParams]:
    """Canonical generators of the group spanned by ``C`` and their parameters."""
    n = C.n
    mask = (1 << n) - 1
    rows = [[r >> n, r & mask] for r in C.rows]
    pivots = []
    r = 0
    for c in range(n):
        bit = 1 << (n - 1 - c)
        hit = next((i for i in range(r, n) if rows[i][0] & bit), None)
        if hit is None:
            continue
        rows[r], rows[hit] = rows[hit], rows[r]
        for i in range(n):
            if i != r and rows[i][0] & bit:
                rows[i][0] ^= rows[r][0]
                rows[i][1] ^= rows[r][1]
        pivots.append(c)
        r += 1
    k = r
    nonpivots = [c for c in range(n) if c not in pivots]
    for j, c in enumerate(nonpivots):
        bit = 1 << (n - 1 - c)
        b = k + j
        hit = next((i for i in range(b, n) if rows[i][1] & bit), None)
        if hit is None:
            raise InvalidArgument("check matrix does not describe a stabilizer group")
        rows[b], rows[hit] = rows[hit], rows[b]
        for i in range(n):
            if i != b and rows[i][1] & bit:
                rows[i][1] ^= rows[b][1]
    canon = CheckMatrix.from_xz(n, [x for x, _ in rows], [z for _, z in rows])
    xhat = np.array(
        [[(rows[i][0] >> (n - 1 - c)) & 1 for c in nonpivots] for i in range(k)], dtype=np.uint8
    ).reshape(k, n - k)
    zhat = np.array(
        [[(rows[i][1] >> (n - 1 - p)) & 1 for p in pivots] for i in range(k)], dtype=np.uint8
    ).reshape(k, k)
    return canon, StandardFormParams(k, tuple(pivots), xhat, zhat)


def block_index(C: CheckMatrix) -> int:
    """Position of the group of ``C`` in the enumeration order."""
    _, params = standard_form(C)
    seg = next(
        s for s in segments(C.n) if s.k == params.k and s.pivots == params.pivot_columns
    )
    xcode = 0
    col_index = {c: j for j, c in enumerate(seg.nonpivots)}
    for i, c in seg.free:
        xcode = (xcode << 1) | int(params.xhat[i, col_index[c]])
    zcode = 0
    for i, j in _zhat_positions(seg.k):
        zcode = (zcode << 1) | int(params.zhat[i, j])
    return seg.offset + (xcode << seg.z_bits) + zcode


# --------------------------------------------------------------------------
# group elements


class PauliElement(NamedTuple):
    index: int
    sign: int


def _mul_phase(x1, z1, x2, z2):
    """Exponent e (mod 4) with P(x1,z1) P(x2,z2) = i^e P(x1^x2, z1^z2).

    P(x, z) = i^{x.z} X^x Z^z is the Hermitian Pauli with the given masks.
    """
    if isinstance(x1, np.ndarray):
        pc = lambda v: np.bitwise_count(v).astype(np.int64)  # noqa: E731
    else:
        pc = popcount
    x3, z3 = x1 ^ x2, z1 ^ z2
    return pc(x1 & z1) + pc(x2 & z2) + 2 * pc(z1 & x2) - pc(x3 & z3)


def block_paulis(C: CheckMatrix) -> list[PauliElement]:
    """The 2^n signed group elements of ``C`` (all generator signs +), indexed by gamma.

    Elements are visited in Gray-code order so each step multiplies by a single
    generator; the running phase is tracked mod 4 and must stay real.
    """
    n = C.n
    xs, zs = C.x_rows, C.z_rows
    out: list[PauliElement | None] = [None] * (1 << n)
    x = z = phase = 0
    out[0] = PauliElement(0, 1)
    prev = 0
    for t in range(1, 1 << n):
        gray = t ^ (t >> 1)
        i = (gray ^ prev).bit_length() - 1
        phase = (phase + _mul_phase(x, z, xs[i], zs[i])) % 4
        x ^= xs[i]
        z ^= zs[i]
        if phase & 1:
            raise AssertionError("imaginary phase in a stabilizer group: generators anticommute")
        out[gray] = PauliElement(int(index_from_xz(x, z, n)), 1 - phase)
        prev = gray
    return out  # type: ignore[return-value]


def element_tables(n: int, x_rows: np.ndarray, z_rows: np.ndarray):
    """Vectorized group expansion for a batch of check matrices.

    Returns ``(indices, signs)`` of shape ``(B, 2^n)``; element ``gamma`` is built
    from ``gamma`` without its top bit times one generator.
    """
    B = x_rows.shape[0]
    size = 1 << n
    ex = np.zeros((B, size), dtype=np.int64)
    ez = np.zeros((B, size), dtype=np.int64)
    ph = np.zeros((B, size), dtype=np.int64)
    for i in range(n):
        h = 1 << i
        gx = x_rows[:, i : i + 1]
        gz = z_rows[:, i : i + 1]
        x1, z1 = ex[:, :h], ez[:, :h]
        ph[:, h : 2 * h] = (ph[:, :h] + _mul_phase(x1, z1, gx, gz)) & 3
        ex[:, h : 2 * h] = x1 ^ gx
        ez[:, h : 2 * h] = z1 ^ gz
    if np.any(ph & 1):
        raise AssertionError("imaginary phase in a stabilizer group: generators anticommute")
    idx = index_from_xz(ex, ez, n)
    signs = (1 - ph).astype(np.int8)
    return idx, signs


@lru_cache(maxsize=None)
def _full_tables(n: int):
    xr, zr = block_rows(n, np.arange(num_blocks(n)))
    idx, signs = element_tables(n, xr, zr)
    dtype = np.int32 if n <= 15 else np.int64
    idx = idx.astype(dtype)
    idx.setflags(write=False)
    signs.setflags(write=False)
    return idx, signs


def block_tables(n: int, blocks) -> tuple[np.ndarray, np.ndarray]:
    """Element indices and signs for the given standard-form blocks."""
    blocks = np.asarray(blocks, dtype=np.int64)
    if n <= TABLE_CACHE_QUBITS:
        idx, signs = _full_tables(n)
        return idx[blocks], signs[blocks]
    xr, zr = block_rows(n, blocks)
    return element_tables(n, xr, zr)


def _range_tables(n: int, start: int, stop: int):
    if n <= TABLE_CACHE_QUBITS:
        idx, signs = _full_tables(n)
        return idx[start:stop], signs[start:stop]
    xr, zr = block_rows(n, np.arange(start, stop))
    return element_tables(n, xr, zr)


@lru_cache(maxsize=None)
def hadamard_signs(n: int) -> np.ndarray:
    """(-1)^{popcount(gamma & delta)} as an int8 matrix."""
    g = np.arange(1 << n)
    return (1 - 2 * (np.bitwise_count(g[:, None] & g[None, :]) & 1)).astype(np.int8)


# --------------------------------------------------------------------------
# ids and columns


class StabilizerId(NamedTuple):
    block: int
    delta: int

    def linear(self, n: int) -> int:
        return (self.block << n) | self.delta

    @classmethod
    def from_linear(cls, lin: int, n: int) -> "StabilizerId":
        return cls(int(lin) >> n, int(lin) & ((1 << n) - 1))


@dataclass(frozen=True)
class SparseColumn:
    n: int
    rows: np.ndarray
    values: np.ndarray

    def dot(self, b) -> float:
        return float(np.dot(self.values, np.asarray(b)[self.rows]))

    def dense(self) -> np.ndarray:
        out = np.zeros(4**self.n)
        out[self.rows] = self.values
        return out


def column(sid: StabilizerId, n: int) -> SparseColumn:
    """Pauli vector of the stabilizer state ``sid`` as its 2^n nonzeros."""
    block, delta = sid
    if not 0 <= delta < (1 << n):
        raise InvalidArgument("delta out of range")
    idx, signs = block_tables(n, [block])
    values = signs[0].astype(np.int64) * hadamard_signs(n)[:, delta]
    return SparseColumn(n, idx[0].astype(np.int64), values)


def columns_matrix(n: int, lin_ids) -> sp.csc_matrix:
    """Sparse 4^n x N matrix whose columns are the states with the given linear ids."""
    lin_ids = np.asarray(lin_ids, dtype=np.int64).reshape(-1)
    size = 1 << n
    blocks = lin_ids >> n
    deltas = lin_ids & (size - 1)
    ublocks, inverse = np.unique(blocks, return_inverse=True)
    idx, signs = block_tables(n, ublocks)
    rows = idx[inverse]
    vals = signs[inverse].astype(np.float64) * hadamard_signs(n)[:, deltas].T
    indptr = np.arange(len(lin_ids) + 1, dtype=np.int64) * size
    return sp.csc_matrix(
        (vals.reshape(-1), rows.reshape(-1).astype(np.int64), indptr),
        shape=(4**n, len(lin_ids)),
    )


def canonical_ids(C: CheckMatrix) -> np.ndarray:
    """Linear ids of the 2^n states of an arbitrary valid check matrix, indexed by its delta."""
    n = C.n
    canon, _ = standard_form(C)
    block = block_index(canon)
    elems = block_paulis(C)
    where = {e.index: (gamma, e.sign) for gamma, e in enumerate(elems)}
    deltas = np.arange(1 << n)
    mapped = np.zeros(1 << n, dtype=np.int64)
    for i, (x, z) in enumerate(zip(canon.x_rows, canon.z_rows)):
        gamma, sign = where[int(index_from_xz(x, z, n))]
        bit = (np.bitwise_count(deltas & gamma) & 1) ^ (sign < 0)
        mapped |= bit.astype(np.int64) << i
    return (np.int64(block) << n) | mapped


def stabilizer_id_of_column(n: int, rows, values) -> StabilizerId:
    """Identify a stabilizer state from its Pauli-vector nonzeros."""
    rows = [int(r) for r in rows]
    gens: list[int] = []
    for r in rows:
        if r == 0:
            continue
        x, z = xz_from_index(r, n)
        word = (x << n) | z
        if gf2_rank(gens + [word]) > len(gens):
            gens.append(word)
        if len(gens) == n:
            break
    C = CheckMatrix(n, tuple(gens))
    if not check_matrix_valid(C):
        raise InvalidArgument("support is not a stabilizer group")
    canon, _ = standard_form(C)
    value_at = dict(zip(rows, values))
    delta = 0
    for i, (x, z) in enumerate(zip(canon.x_rows, canon.z_rows)):
        v = value_at.get(int(index_from_xz(x, z, n)), 0)
        if v == 0:
            raise InvalidArgument("support is not a stabilizer group")
        delta |= (v < 0) << i
    return StabilizerId(block_index(canon), delta)


# --------------------------------------------------------------------------
# overlaps


def overlaps_block(C: CheckMatrix, b) -> np.ndarray:
    """All 2^n overlaps ``a^T b`` of the states of one group, indexed by delta."""
    b = np.asarray(b, dtype=float)
    v = np.array([e.sign * b[e.index] for e in block_paulis(C)], dtype=float)
    return fwht_inplace(v)


@dataclass
class OverlapChunk:
    start: int  # first block of the chunk
    values: np.ndarray  # (blocks, 2^n) overlaps

    @property
    def stop(self) -> int:
        return self.start + self.values.shape[0]

    def linear_ids(self, n: int) -> np.ndarray:
        return np.arange(self.start << n, self.stop << n, dtype=np.int64)


def _chunk_overlaps(n: int, b: np.ndarray, start: int, stop: int) -> OverlapChunk:
    idx, signs = _range_tables(n, start, stop)
    v = b[idx]
    v *= signs
    fwht_inplace(v)
    return OverlapChunk(start, v)


def overlaps_all(
    b, chunk_blocks: int | None = None, threads: int | None = None, max_qubits: int = MAX_SWEEP_QUBITS
) -> Iterator[OverlapChunk]:
    """Stream the overlaps of every stabilizer state with ``b``, in block order.

    ``b`` may be any length-4^n real vector (a Pauli vector or a dual vector).
    At most a few chunks of ``chunk_blocks x 2^n`` values are alive at once.
    """
    b = np.ascontiguousarray(b, dtype=float)
    n = num_qubits(b)
    if n > max_qubits:
        raise InvalidArgument(f"full stabilizer sweeps are capped at {max_qubits} qubits")
    total = num_blocks(n)
    step = chunk_blocks or max(1, CHUNK_ELEMENTS >> n)
    starts = range(0, total, step)
    threads = threads or default_threads()
    if threads <= 1:
        for s in starts:
            yield _chunk_overlaps(n, b, s, min(total, s + step))
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # bounded look-ahead keeps memory per worker O(chunk)
        pending = []
        for s in starts:
            pending.append(pool.submit(_chunk_overlaps, n, b, s, min(total, s + step)))
            if len(pending) >= 2 * threads:
                yield pending.pop(0).result()
        for fut in pending:
            yield fut.result()


def overlap_table(b, **kwargs) -> np.ndarray:
    """Dense (blocks, 2^n) table of all overlaps; only sensible for small n."""
    return np.concatenate([c.values for c in overlaps_all(b, **kwargs)], axis=0)


# --------------------------------------------------------------------------
# selection


class TopSelector:
    """Keeps the ``count`` best (value, id) pairs of a stream.

    Order is value descending (``largest=True``) or ascending, ties broken by the
    smaller id.  The buffer never holds more than ``count`` items between pushes.
    """

    def __init__(self, count: int, largest: bool = True):
        self.count = int(count)
        self.largest = largest
        self.values = np.empty(0)
        self.ids = np.empty(0, dtype=np.int64)

    def _key(self, values):
        return -values if self.largest else values

    def push(self, values, ids) -> None:
        if self.count <= 0:
            return
        values = np.asarray(values, dtype=float).reshape(-1)
        ids = np.asarray(ids, dtype=np.int64).reshape(-1)
        if len(self.values) >= self.count:
            worst = self._key(self.values).max()
            keep = self._key(values) <= worst
            values, ids = values[keep], ids[keep]
            if len(values) == 0:
                return
        vals = np.concatenate([self.values, values])
        lins = np.concatenate([self.ids, ids])
        if len(vals) > self.count:
            key = self._key(vals)
            kth = np.partition(key, self.count - 1)[self.count - 1]
            better = np.flatnonzero(key < kth)
            ties = np.flatnonzero(key == kth)
            need = self.count - len(better)
            ties = ties[np.argsort(lins[ties], kind="stable")[:need]]
            keep = np.concatenate([better, ties])
            vals, lins = vals[keep], lins[keep]
        self.values, self.ids = vals, lins

    def result(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.lexsort((self.ids, self._key(self.values)))
        return self.values[order], self.ids[order]


def select_extremes(b, count_hi: int, count_lo: int, **kwargs):
    """Linear ids (and overlaps) of the largest and, disjointly, the smallest overlaps.

    The low selection is taken among states not already in the high selection,
    so ``count_hi + count_lo = |S_n|`` returns every state exactly once.
    """
    b = np.asarray(b, dtype=float)
    n = num_qubits(b)
    total = count_stabilizer_states(n)
    if count_hi < 0 or count_lo < 0 or count_hi + count_lo > total:
        raise InvalidArgument("selection counts exceed the number of stabilizer states")
    hi = TopSelector(count_hi, largest=True)
    lo = TopSelector(count_hi + count_lo, largest=False)
    for chunk in overlaps_all(b, **kwargs):
        ids = chunk.linear_ids(n)
        hi.push(chunk.values, ids)
        lo.push(chunk.values, ids)
    hi_vals, hi_ids = hi.result()
    lo_vals, lo_ids = lo.result()
    keep = ~np.isin(lo_ids, hi_ids)
    return hi_ids, hi_vals, lo_ids[keep][:count_lo], lo_vals[keep][:count_lo]


def top_overlap_select(b, count_hi: int, count_lo: int, **kwargs):
    """``(ids_hi, ids_lo)`` as lists of :class:`StabilizerId`."""
    n = num_qubits(b)
    hi_ids, _, lo_ids, _ = select_extremes(b, count_hi, count_lo, **kwargs)
    return (
        [StabilizerId.from_linear(i, n) for i in hi_ids],
        [StabilizerId.from_linear(i, n) for i in lo_ids],
    )


def max_fidelity(b, **kwargs) -> tuple[float, StabilizerId]:
    """``max_j a_j^T b / 2^n`` and the state attaining it (smallest id on ties)."""
    b = np.asarray(b, dtype=float)
    n = num_qubits(b)
    sel = TopSelector(1, largest=True)
    for chunk in overlaps_all(b, **kwargs):
        sel.push(chunk.values, chunk.linear_ids(n))
    vals, ids = sel.result()
    return float(vals[0]) / 2**n, StabilizerId.from_linear(ids[0], n)


@dataclass
class DualSweep:
    """Outcome of checking ``|a_j^T y| <= 1`` over all stabilizer states."""

    max_abs: float
    n_violations: int
    violator_ids: np.ndarray  # most violated first
    violator_values: np.ndarray


def dual_sweep(y, tol: float = 1e-7, max_report: int = 0, **kwargs) -> DualSweep:
    y = np.asarray(y, dtype=float)
    n = num_qubits(y)
    sel = TopSelector(max_report, largest=True)
    max_abs = 0.0
    count = 0
    for chunk in overlaps_all(y, **kwargs):
        mags = np.abs(chunk.values)
        max_abs = max(max_abs, float(mags.max()))
        hit = mags > 1.0 + tol
        nhit = int(hit.sum())
        if nhit:
            count += nhit
            sel.push(mags[hit], chunk.linear_ids(n).reshape(mags.shape)[hit])
    vals, ids = sel.result()
    return DualSweep(max_abs, count, ids, vals)


def dense_stabilizer_matrix(n: int) -> np.ndarray:
    """The full 4^n x |S_n| matrix A_n as a dense array (tiny n only)."""
    if n > 3:
        raise InvalidArgument("dense A_n is only built for n <= 3")
    total = count_stabilizer_states(n)
    return columns_matrix(n, np.arange(total)).toarray()



__all__ = [
    "CheckMatrix",
    "PauliElement",
    "StabilizerId",
    "SparseColumn",
    "StandardFormParams",
    "OverlapChunk",
    "TopSelector",
    "DualSweep",
    "qbinom2",
    "count_stabilizer_states",
    "num_blocks",
    "check_matrix_valid",
    "enumerate_blocks",
    "block_rows",
    "block_check_matrix",
    "standard_form",
    "block_index",
    "block_paulis",
    "element_tables",
    "block_tables",
    "column",
    "columns_matrix",
    "canonical_ids",
    "stabilizer_id_of_column",
    "overlaps_block",
    "overlaps_all",
    "overlap_table",
    "select_extremes",
    "top_overlap_select",
    "max_fidelity",
    "dual_sweep",
    "dense_stabilizer_matrix",
]
