"""RoM of tensor-product targets.

Copies ``rho^{(x)n}`` are handled in a permutation-compressed space whose rows
are Pauli types (letter counts).  A stabilizer state ``s`` maps to
``q_t(s) = sum of its Pauli-vector entries over rows of type t``; states with
equal ``q`` have equal permutation averages, so one representative per ``q``
suffices.  The averaged state has entry ``q_t/|t|`` on every row of type ``t``,
which gives the constraint ``sum_j u_j q_{t,j}/|t| = b1(I)^{n_I} ... b1(Z)^{n_Z}``
with a plain L1 objective.

Products of independent states are handled by trying every grouping of the
factors into joint solves.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from types import SimpleNamespace

import numpy as np
import scipy.sparse as sp

from .errors import GuardError, InvalidArgument
from .lp import OPTIMAL, ColumnSet, solve_l1, verify_solution
from .pauli import num_qubits, tensor
from .rom import DUAL_TOL, RomResult, check_pauli_vector, rom_column_generation, rom_naive
from .stabilizers import (
    MAX_SWEEP_QUBITS,
    StabilizerId,
    columns_matrix,
    count_stabilizer_states,
    dual_sweep,
    num_blocks,
)

log = logging.getLogger(__name__)

SYMMETRIC_BASIS_QUBITS = 5
COPIES_GUARD = 12
TYPE_TABLE_QUBITS = 10
SUPPORT_TOL = 1e-10
MAX_PARTITION_GROUP = 6


# --------------------------------------------------------------------------
# Pauli types


@dataclass(frozen=True, order=True)
class PauliType:
    counts: tuple[int, int, int, int]  # (n_I, n_X, n_Y, n_Z)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def size(self) -> int:
        """Number of Pauli strings of this type (a multinomial)."""
        out = math.factorial(self.n)
        for c in self.counts:
            out //= math.factorial(c)
        return out

    def __str__(self) -> str:
        return "".join(f"{l}{c}" for l, c in zip("IXYZ", self.counts) if c) or "-"


@lru_cache(maxsize=None)
def pauli_types(n: int) -> tuple[PauliType, ...]:
    """All types of ``n`` letters, lexicographically descending (identity type first)."""
    if n < 1:
        raise InvalidArgument("n must be positive")
    out = [
        PauliType((a, b, c, n - a - b - c))
        for a in range(n + 1)
        for b in range(n + 1 - a)
        for c in range(n + 1 - a - b)
    ]
    return tuple(sorted(out, reverse=True))


@lru_cache(maxsize=None)
def _type_position(n: int) -> dict:
    return {t.counts: k for k, t in enumerate(pauli_types(n))}


@lru_cache(maxsize=None)
def type_sizes(n: int) -> np.ndarray:
    return np.array([t.size for t in pauli_types(n)], dtype=np.int64)


@lru_cache(maxsize=None)
def type_of_index(n: int) -> np.ndarray:
    """Type position of every Pauli index 0..4^n-1."""
    if n > TYPE_TABLE_QUBITS:
        raise GuardError(f"type tables are built for n <= {TYPE_TABLE_QUBITS}")
    idx = np.arange(4**n, dtype=np.int64)
    digits = (idx[:, None] >> (2 * np.arange(n, dtype=np.int64))) & 3
    counts = np.stack([(digits == k).sum(axis=1) for k in range(4)], axis=1)
    # (a, b, c) determine the type; map them through a dense lookup
    lut = np.full((n + 1, n + 1, n + 1), -1, dtype=np.int64)
    for (a, b, c, _), k in _type_position(n).items():
        lut[a, b, c] = k
    return lut[counts[:, 0], counts[:, 1], counts[:, 2]]


@lru_cache(maxsize=None)
def _aggregation(n: int) -> sp.csr_matrix:
    """Sparse (types x 4^n) matrix summing full vectors over type classes."""
    t = type_of_index(n)
    return sp.csr_matrix(
        (np.ones(len(t)), (t, np.arange(len(t)))), shape=(len(pauli_types(n)), len(t))
    )


def compress_vector(v) -> np.ndarray:
    """Sum a length-4^n vector (or a 4^n x k matrix) over each type class."""
    v = np.asarray(v, dtype=float)
    n = num_qubits(v if v.ndim == 1 else v[:, 0])
    return _aggregation(n) @ v


@dataclass
class CompressedPauliVector:
    n: int
    entries: np.ndarray  # indexed like pauli_types(n)

    def expand(self) -> np.ndarray:
        return self.entries[type_of_index(self.n)]


def compress_pauli_vector(b1, n: int) -> CompressedPauliVector:
    """Entries ``prod_P b1(P)^{n_P}`` of ``b1^{(x)n}`` per Pauli type."""
    b1 = np.asarray(b1, dtype=float)
    if b1.shape != (4,):
        raise InvalidArgument("b1 must be a single-qubit Pauli vector")
    if not 1 <= n <= 20:
        raise InvalidArgument("copies must satisfy 1 <= n <= 20")
    counts = np.array([t.counts for t in pauli_types(n)])
    return CompressedPauliVector(n, np.prod(b1[None, :] ** counts, axis=1))


# --------------------------------------------------------------------------
# compressed columns


@dataclass
class CompressedColumn:
    tag: object
    n: int
    q: np.ndarray  # integer, indexed like pauli_types(n)
    orbit_weight: int = 1

    def key(self) -> bytes:
        return np.ascontiguousarray(self.q, dtype=np.int64).tobytes()

    def averaged(self) -> np.ndarray:
        return self.q / type_sizes(self.n)


def compress_columns(n: int, lin_ids) -> np.ndarray:
    """``q`` vectors (rows) of the stabilizer states with the given linear ids."""
    cols = columns_matrix(n, lin_ids)
    q = (_aggregation(n) @ cols).T
    return np.rint(q.toarray()).astype(np.int64)


def symmetrize_column(sid, n: int) -> CompressedColumn:
    lin = sid.linear(n) if isinstance(sid, StabilizerId) else int(sid)
    return CompressedColumn(lin, n, compress_columns(n, [lin])[0])


@dataclass
class SymmetricBasis:
    n: int
    q: np.ndarray  # (columns, types)
    tags: np.ndarray  # smallest linear id of each class
    orbit_weights: np.ndarray

    def __len__(self) -> int:
        return len(self.tags)

    def columns(self) -> list[CompressedColumn]:
        return [
            CompressedColumn(int(t), self.n, q, int(w))
            for t, q, w in zip(self.tags, self.q, self.orbit_weights)
        ]

    def column_set(self) -> ColumnSet:
        return _compressed_column_set(self.n, self.q, [int(t) for t in self.tags])


def _compressed_column_set(n, q, ids) -> ColumnSet:
    mat = np.asarray(q, dtype=float).T / type_sizes(n)[:, None]
    return ColumnSet(sp.csc_matrix(mat), list(ids), tag="compressed")


def _unique_rows(q: np.ndarray):
    """np.unique over rows with first-occurrence indices, inverse and counts."""
    q = np.ascontiguousarray(q)
    view = q.view(np.dtype((np.void, q.dtype.itemsize * q.shape[1]))).ravel()
    _, first, inverse, counts = np.unique(
        view, return_index=True, return_inverse=True, return_counts=True
    )
    return first, inverse, counts


@lru_cache(maxsize=None)
def build_symmetric_basis(n: int) -> SymmetricBasis:
    """One column per distinct ``q`` over all stabilizer states, with class sizes."""
    if not 1 <= n <= SYMMETRIC_BASIS_QUBITS:
        raise GuardError(f"the full symmetric basis is built for n <= {SYMMETRIC_BASIS_QUBITS}")
    size = 1 << n
    step = max(1, (1 << 17) >> n)
    qs, tags, weights = [], [], []
    total = num_blocks(n)
    for s in range(0, total, step):
        ids = np.arange(s * size, min(total, s + step) * size, dtype=np.int64)
        q = compress_columns(n, ids)
        first, _, counts = _unique_rows(q)
        qs.append(q[first])
        tags.append(ids[first])
        weights.append(counts)
    q = np.concatenate(qs)
    tags = np.concatenate(tags)
    weights = np.concatenate(weights)
    first, inverse, _ = _unique_rows(q)
    merged = np.zeros(len(first), dtype=np.int64)
    np.add.at(merged, inverse.reshape(-1), weights)
    order = np.argsort(tags[first])
    return SymmetricBasis(n, q[first][order], tags[first][order], merged[order])


# --------------------------------------------------------------------------
# tensor products of compressed columns


@lru_cache(maxsize=None)
def _type_sum_map(l: int, m: int) -> np.ndarray:
    """Position in pauli_types(l+m) of t_a + t_b, shape (types(l), types(m))."""
    pos = _type_position(l + m)
    ta, tb = pauli_types(l), pauli_types(m)
    return np.array(
        [[pos[tuple(x + y for x, y in zip(a.counts, b.counts))] for b in tb] for a in ta]
    )


def compressed_tensor_q(qa: np.ndarray, qb: np.ndarray, l: int, m: int) -> np.ndarray:
    """Batched tensor product: rows of ``qa`` (l qubits) against rows of ``qb`` (m qubits).

    Returns ``(len(qa) * len(qb), types(l+m))`` with the ``qa`` index varying slowest.
    """
    qa = np.atleast_2d(np.asarray(qa, dtype=np.int64))
    qb = np.atleast_2d(np.asarray(qb, dtype=np.int64))
    smap = _type_sum_map(l, m).reshape(-1)
    agg = sp.csr_matrix(
        (np.ones(len(smap), dtype=np.int64), (np.arange(len(smap)), smap)),
        shape=(len(smap), len(pauli_types(l + m))),
    )
    outer = (qa[:, None, :, None] * qb[None, :, None, :]).reshape(len(qa) * len(qb), -1)
    return np.asarray((agg.T @ outer.T).T, dtype=np.int64)


def compressed_tensor(qa: CompressedColumn, qb: CompressedColumn) -> CompressedColumn:
    q = compressed_tensor_q(qa.q, qb.q, qa.n, qb.n)[0]
    return CompressedColumn((qa.tag, qb.tag), qa.n + qb.n, q, qa.orbit_weight * qb.orbit_weight)


# --------------------------------------------------------------------------
# solvers for rho^{(x)n}


def _check_b1(b1) -> np.ndarray:
    b1, n1 = check_pauli_vector(b1)
    if n1 != 1:
        raise InvalidArgument("symmetric solvers take a single-qubit state")
    return b1


def _solve_compressed(n, q, ids, target, backend, hint=None):
    cols = _compressed_column_set(n, q, ids)
    return cols, solve_l1(cols, target.entries, backend=backend, basis_hint=hint)


def _compressed_result(n, target, cols, sol, method, t0, exact, lower=None, **kw) -> RomResult:
    st = float(np.abs(target.entries) @ type_sizes(n)) / 2**n
    return RomResult(
        value=sol.objective,
        exact=exact and sol.status == OPTIMAL,
        decomposition=dict(sol.x),
        dual=sol.y,
        lower_bound=st if lower is None else lower,
        upper_bound=sol.objective,
        method=method,
        n=n,
        n_columns=len(cols),
        seconds=time.perf_counter() - t0,
        status=sol.status,
        column_ids=np.asarray(cols.ids, dtype=object),
        **kw,
    )


def rom_symmetric_exact(b1, n: int, backend: str = "simplex") -> RomResult:
    """Exact RoM of ``rho^{(x)n}`` over the full symmetric basis (n <= 5)."""
    t0 = time.perf_counter()
    b1 = _check_b1(b1)
    basis = build_symmetric_basis(n)
    target = compress_pauli_vector(b1, n)
    cols, sol = _solve_compressed(n, basis.q, [int(t) for t in basis.tags], target, backend)
    lower = float(target.entries @ sol.y) if sol.status == OPTIMAL else None
    return _compressed_result(n, target, cols, sol, "symmetric", t0, True, lower)


@dataclass
class DivideConquerResult:
    values: list  # R_1 .. R_n
    exact: list  # per level
    supports: list  # q-arrays of the recorded supports C_i
    splits: list = field(default_factory=list)  # (i, l, m)
    candidates: list = field(default_factory=list)  # candidate count per level

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)


def _support(sol, q: np.ndarray) -> np.ndarray:
    keep = np.abs(sol.x_array) > SUPPORT_TOL
    return q[keep]


def _dedup(q: np.ndarray) -> np.ndarray:
    first, _, _ = _unique_rows(q)
    return q[np.sort(first)]


def tensor_candidates(supports: dict, i: int) -> np.ndarray:
    """Deduplicated ``q_l (x) q_m`` over all recorded splits ``l + m = i`` with ``l <= m``."""
    parts = [
        compressed_tensor_q(supports[l], supports[i - l], l, i - l) for l in range(1, i // 2 + 1)
    ]
    return _dedup(np.concatenate(parts))


def rom_symmetric_divide_conquer(
    b1, n: int, k: int, backend: str = "simplex", guard: int = COPIES_GUARD
) -> DivideConquerResult:
    """Exact values for ``i <= k``, then restricted solves over tensor-product supports."""
    b1 = _check_b1(b1)
    if not 1 <= k <= SYMMETRIC_BASIS_QUBITS:
        raise InvalidArgument(f"k must lie in 1..{SYMMETRIC_BASIS_QUBITS}")
    if n > guard:
        raise GuardError(f"divide-and-conquer limited to n <= {guard} copies")
    values, exact, supports, splits, ncand = [], [], {}, [], []
    for i in range(1, n + 1):
        target = compress_pauli_vector(b1, i)
        if i <= k:
            basis = build_symmetric_basis(i)
            q = basis.q
        else:
            q = tensor_candidates(supports, i)
            splits.extend((i, l, i - l) for l in range(1, i // 2 + 1))
        cols, sol = _solve_compressed(i, q, range(len(q)), target, backend)
        assert sol.status == OPTIMAL, f"level {i}: {sol.status}"
        supports[i] = _support(sol, q)
        values.append(sol.objective)
        exact.append(i <= k)
        ncand.append(len(q))
        log.info("copies %d: R = %.10f over %d candidates", i, sol.objective, len(q))
    return DivideConquerResult(values, exact, [supports[i] for i in range(1, n + 1)], splits, ncand)


def rom_symmetric_cg(
    b1,
    n: int,
    seed_k: int = 3,
    max_new: int = 200,
    max_iters: int = 50,
    tol_dual: float = DUAL_TOL,
    backend: str = "simplex",
    threads: int | None = None,
) -> RomResult:
    """Exact RoM of ``rho^{(x)n}`` by column generation in the compressed space.

    Starts from the divide-and-conquer candidates; violations are found by a
    full stabilizer sweep with the dual spread back as ``y_t/|t|`` per row.
    """
    t0 = time.perf_counter()
    b1 = _check_b1(b1)
    if n > MAX_SWEEP_QUBITS:
        raise GuardError(f"compressed column generation sweeps need n <= {MAX_SWEEP_QUBITS}")
    target = compress_pauli_vector(b1, n)
    if n <= min(seed_k, SYMMETRIC_BASIS_QUBITS):
        return rom_symmetric_exact(b1, n, backend)
    dc = rom_symmetric_divide_conquer(b1, n - 1, min(seed_k, n - 1), backend)
    supports = {i + 1: s for i, s in enumerate(dc.supports)}
    q = tensor_candidates(supports, n)
    seen = {row.tobytes() for row in q}
    spread = type_of_index(n)
    sizes = type_sizes(n)
    hint, lower, history = None, 0.0, []
    for it in range(max_iters + 1):
        cols, sol = _solve_compressed(n, q, range(len(q)), target, backend, hint)
        if sol.status != OPTIMAL:
            return _compressed_result(n, target, cols, sol, "symmetric-cg", t0, False,
                                      iterations=it, history=history)
        sweep = dual_sweep((sol.y / sizes)[spread], tol=tol_dual, max_report=max_new * 8,
                           threads=threads)
        lower = max(lower, float(target.entries @ sol.y) / max(1.0, sweep.max_abs))
        history.append({"iteration": it, "value": sol.objective, "lower_bound": lower,
                        "n_violations": sweep.n_violations, "n_columns": len(q)})
        log.info("symmetric cg round %d: value %.10f, %d violations", it, sol.objective,
                 sweep.n_violations)
        if sweep.n_violations == 0:
            return _compressed_result(n, target, cols, sol, "symmetric-cg", t0, True, lower,
                                      iterations=it, history=history)
        if it == max_iters:
            break
        fresh = []
        for row in compress_columns(n, sweep.violator_ids):
            key = row.tobytes()
            if key not in seen:
                seen.add(key)
                fresh.append(row)
            if len(fresh) >= max_new:
                break
        if not fresh:
            break
        q = np.concatenate([q, np.array(fresh)])
        hint = sol.basis
    return _compressed_result(n, target, cols, sol, "symmetric-cg", t0, False, lower,
                              iterations=it, history=history)


# --------------------------------------------------------------------------
# subsystem partitions


def set_partitions(m: int):
    """Set partitions of ``range(m)`` as lists of groups, in restricted-growth order."""

    def rec(i, labels, nblocks):
        if i == m:
            groups = [[] for _ in range(nblocks)]
            for j, g in enumerate(labels):
                groups[g].append(j)
            yield groups
            return
        for g in range(nblocks + 1):
            labels.append(g)
            yield from rec(i + 1, labels, max(nblocks, g + 1))
            labels.pop()

    yield from rec(0, [], 0)


@dataclass
class PartitionResult:
    value: float
    best_partition: list
    per_group_values: list
    group_results: list  # RomResult per group of the best partition
    n_partitions: int
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "best_partition": self.best_partition,
            "per_group_values": self.per_group_values,
            "n_partitions": self.n_partitions,
            "seconds": self.seconds,
        }

    def tensor_decomposition(self) -> dict:
        """Weights ``prod_g x_g`` keyed by tuples of per-group linear ids."""
        out = {}
        items = [list(r.decomposition.items()) for r in self.group_results]
        for combo in itertools.product(*items):
            out[tuple(k for k, _ in combo)] = float(np.prod([v for _, v in combo]))
        return out


def _group_solver(method: str, backend: str):
    if method == "cg":
        return lambda b: rom_column_generation(b, backend=backend)
    if method == "naive":
        return lambda b: rom_naive(b, backend=backend)
    raise InvalidArgument(f"unknown group method {method!r}")


def rom_partition(
    states, max_group_qubits: int = 4, method: str = "cg", backend: str = "simplex"
) -> PartitionResult:
    """Minimum over groupings of the factors of the product of per-group RoM values."""
    t0 = time.perf_counter()
    states = [check_pauli_vector(s)[0] for s in states]
    if not states:
        raise InvalidArgument("at least one state is required")
    if not 1 <= max_group_qubits <= MAX_PARTITION_GROUP:
        raise InvalidArgument(f"max_group_qubits must lie in 1..{MAX_PARTITION_GROUP}")
    sizes = [num_qubits(s) for s in states]
    for i, q in enumerate(sizes):
        if q > max_group_qubits:
            raise InvalidArgument(f"state {i} has {q} qubits, above the group cap")
    solve = _group_solver(method, backend)
    cache: dict[tuple, RomResult] = {}

    def group_result(group):
        key = tuple(group)
        if key not in cache:
            b = states[group[0]]
            for j in group[1:]:
                b = tensor(b, states[j])
            cache[key] = solve(b)
        return cache[key]

    best, count = None, 0
    for part in set_partitions(len(states)):
        if any(sum(sizes[j] for j in g) > max_group_qubits for g in part):
            continue
        count += 1
        vals = [group_result(g).value for g in part]
        value = float(np.prod(vals))
        if best is None or value < best[0] - 1e-12:
            best = (value, part, vals)
    value, part, vals = best
    return PartitionResult(
        value=value,
        best_partition=part,
        per_group_values=vals,
        group_results=[cache[tuple(g)] for g in part],
        n_partitions=count,
        seconds=time.perf_counter() - t0,
    )


@dataclass
class TensorCertificate:
    report: object  # VerificationReport
    columns: ColumnSet
    x_array: np.ndarray
    y: np.ndarray
    b: np.ndarray
    support_only: bool


def tensor_certificate(results, states, max_columns: int = 50_000) -> TensorCertificate:
    """Check ``x = (x)x_i`` and ``y = (x)y_i`` on the tensor-product column set.

    The column set is the product of each factor's final LP columns, or of the
    supports alone when that product would exceed ``max_columns``.
    """
    states = [np.asarray(s, dtype=float) for s in states]
    ns = [num_qubits(s) for s in states]
    full = [np.asarray(r.column_ids, dtype=np.int64) for r in results]
    support_only = math.prod(len(f) for f in full) > max_columns
    mats, xs, idsets = [], [], []
    for r, n, ids in zip(results, ns, full):
        if support_only:
            ids = np.array(sorted(r.decomposition), dtype=np.int64)
        mats.append(columns_matrix(n, ids))
        xs.append(np.array([r.decomposition.get(int(i), 0.0) for i in ids]))
        idsets.append([int(i) for i in ids])
    M, x, y, b = mats[0], xs[0], results[0].dual, states[0]
    for Mi, xi, r, bi in zip(mats[1:], xs[1:], results[1:], states[1:]):
        M = sp.kron(M, Mi, format="csc")
        x, y, b = np.kron(x, xi), np.kron(y, r.dual), np.kron(b, bi)
    cols = ColumnSet(M, list(itertools.product(*idsets)), tag="tensor")
    sol = SimpleNamespace(x_array=x, y=y)
    return TensorCertificate(verify_solution(cols, b, sol, gap_tol=1e-9), cols, x, y, b,
                             support_only)
