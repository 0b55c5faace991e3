"""Robustness of Magic for general states: naive LP, top-overlap, column generation."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cover import cover_linear_ids, minimal_feasible_solution
from .errors import GuardError, InvalidArgument, InvalidState
from .lp import OPTIMAL, ColumnSet, LPSolution, solve_l1
from .pauli import num_qubits, st_norm
from .stabilizers import (
    MAX_SWEEP_QUBITS,
    StabilizerId,
    count_stabilizer_states,
    dual_sweep,
    select_extremes,
)

log = logging.getLogger(__name__)

NAIVE_GUARD = 4
DUAL_TOL = 1e-7
DISCARD_THRESHOLD = 0.8

# initial column fraction K0 by qubit count (small n: a sizeable share is cheap)
DEFAULT_K0 = {1: 1.0, 2: 0.5, 3: 0.1, 4: 0.1, 5: 1e-2, 6: 1e-3, 7: 1e-5, 8: 1e-8}


@dataclass
class RomResult:
    value: float
    exact: bool
    decomposition: dict  # linear stabilizer id -> weight
    dual: np.ndarray
    lower_bound: float
    upper_bound: float
    method: str
    n: int
    iterations: int = 0
    n_columns: int = 0
    seconds: float = 0.0
    status: str = OPTIMAL
    history: list = field(default_factory=list)
    column_ids: np.ndarray | None = field(default=None, repr=False)  # final LP column set

    def stabilizer_weights(self) -> dict:
        return {StabilizerId.from_linear(k, self.n): v for k, v in self.decomposition.items()}

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "exact": self.exact,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "iterations": self.iterations,
            "n_columns_final": self.n_columns,
            "seconds": self.seconds,
            "method": self.method,
            "status": self.status,
        }


def check_pauli_vector(b) -> tuple[np.ndarray, int]:
    b = np.asarray(b, dtype=float)
    n = num_qubits(b)
    if abs(b[0] - 1.0) > 1e-9:
        raise InvalidState(f"state must have unit trace (b_0 = {b[0]!r})")
    return b, n


def split_counts(n: int, K: float) -> tuple[int, int]:
    """``(ceil(K|S_n|/2), floor(K|S_n|/2))`` columns from the top and the bottom."""
    if not 0.0 < K <= 1.0:
        raise InvalidArgument(f"K must lie in (0, 1], got {K!r}")
    half = K * count_stabilizer_states(n) / 2
    return math.ceil(half), math.floor(half)


def _sweep_guard(n: int) -> None:
    if n > MAX_SWEEP_QUBITS:
        raise GuardError(f"stabilizer sweeps are limited to {MAX_SWEEP_QUBITS} qubits (got {n})")


def _result(b, n, cols, sol: LPSolution, method, t0, **kw) -> RomResult:
    return RomResult(
        value=sol.objective,
        exact=kw.pop("exact", False),
        decomposition=dict(sol.x),
        dual=sol.y,
        lower_bound=kw.pop("lower_bound", st_norm(b)),
        upper_bound=sol.objective,
        method=method,
        n=n,
        n_columns=len(cols),
        seconds=time.perf_counter() - t0,
        status=sol.status,
        column_ids=np.asarray(cols.ids),
        **kw,
    )


def rom_naive(b, guard: int = NAIVE_GUARD, backend: str = "simplex") -> RomResult:
    """Exact RoM from one LP over every stabilizer state."""
    t0 = time.perf_counter()
    b, n = check_pauli_vector(b)
    if n > guard:
        raise GuardError(
            f"naive LP refused for n = {n} (guard {guard}); use rom_column_generation instead"
        )
    cols = ColumnSet.from_stabilizer_ids(n, np.arange(count_stabilizer_states(n)))
    sol = solve_l1(cols, b, backend=backend)
    ok = sol.status == OPTIMAL
    lower = max(st_norm(b), float(b @ sol.y)) if ok else st_norm(b)
    return _result(b, n, cols, sol, "naive", t0, exact=ok, lower_bound=lower)


def rom_top_overlap(
    b,
    K: float,
    include_cover: bool = True,
    certify: bool = False,
    backend: str = "simplex",
    threads: int | None = None,
) -> RomResult:
    """Approximate RoM over the largest and smallest overlap columns (plus the cover).

    With ``certify`` a full dual sweep turns the LP dual into a valid lower bound
    (and marks the result exact when nothing is violated).
    """
    t0 = time.perf_counter()
    b, n = check_pauli_vector(b)
    _sweep_guard(n)
    hi, lo = split_counts(n, K)
    hi_ids, _, lo_ids, _ = select_extremes(b, hi, lo, threads=threads)
    parts = [hi_ids, lo_ids]
    if include_cover:
        parts.append(cover_linear_ids(n))
    ids = np.unique(np.concatenate(parts))
    cols = ColumnSet.from_stabilizer_ids(n, ids)
    sol = solve_l1(cols, b, backend=backend)
    if sol.status != OPTIMAL:
        return _result(b, n, cols, sol, "top", t0)
    lower, exact = st_norm(b), False
    if certify:
        sweep = dual_sweep(sol.y, tol=DUAL_TOL, threads=threads)
        lower = max(lower, float(b @ sol.y) / max(1.0, sweep.max_abs))
        exact = sweep.n_violations == 0
    return _result(b, n, cols, sol, "top", t0, exact=exact, lower_bound=lower)


def rom_column_generation(
    b,
    K0: float | None = None,
    d: float = DISCARD_THRESHOLD,
    max_new: int | None = None,
    max_iters: int = 100,
    tol_dual: float = DUAL_TOL,
    include_cover: bool = True,
    backend: str = "simplex",
    threads: int | None = None,
) -> RomResult:
    """Exact RoM by column generation, certified by a full dual sweep.

    Each round solves the restricted LP, sweeps ``|a_j^T y|`` over all
    stabilizer states, drops idle columns with ``|a_j^T y| < d`` (tabu for one
    round) and adds the ``max_new`` most violated ones.  An empty violation set
    ends the loop with ``exact=True``.
    """
    t0 = time.perf_counter()
    b, n = check_pauli_vector(b)
    _sweep_guard(n)
    if not 0.0 < d < 1.0:
        raise InvalidArgument("discard threshold d must lie in (0, 1)")
    if K0 is None:
        K0 = DEFAULT_K0[n]
    total = count_stabilizer_states(n)
    if max_new is None:
        max_new = math.ceil(K0 * total)
    if max_new < 1:
        raise InvalidArgument("max_new must be positive")

    hi, lo = split_counts(n, K0)
    hi_ids, _, lo_ids, _ = select_extremes(b, hi, lo, threads=threads)
    parts = [hi_ids, lo_ids]
    if include_cover:
        parts.append(cover_linear_ids(n))
    active = np.unique(np.concatenate(parts))

    stn = st_norm(b)
    y_st = np.sign(b) / 2**n
    lower = stn
    tabu = np.empty(0, dtype=np.int64)
    hint = None
    history = []
    for k in range(max_iters + 1):
        cols = ColumnSet.from_stabilizer_ids(n, active)
        sol = solve_l1(cols, b, backend=backend, basis_hint=hint)
        if sol.status != OPTIMAL:
            log.warning("restricted LP ended with status %s at round %d", sol.status, k)
            return _result(b, n, cols, sol, "cg", t0, iterations=k, history=history)
        entry = {"iteration": k, "value": sol.objective, "n_columns": len(active)}
        if stn >= sol.objective - 1e-9:
            # the st-norm dual vector is feasible for every column and attains the value
            lower = max(lower, stn)
            entry.update(lower_bound=lower, n_violations=0)
            history.append(entry)
            res = _result(b, n, cols, sol, "cg", t0, exact=True, lower_bound=lower,
                          iterations=k, history=history)
            res.dual = y_st
            return res
        sweep = dual_sweep(sol.y, tol=tol_dual, max_report=max_new + len(tabu), threads=threads)
        lower = max(lower, float(b @ sol.y) / max(1.0, sweep.max_abs))
        entry.update(lower_bound=lower, n_violations=sweep.n_violations, max_abs=sweep.max_abs)
        history.append(entry)
        log.info("cg round %d: value %.10f, lower %.10f, %d violations, %d columns",
                 k, sol.objective, lower, sweep.n_violations, len(active))
        if sweep.n_violations == 0:
            return _result(b, n, cols, sol, "cg", t0, exact=True, lower_bound=lower,
                           iterations=k, history=history)
        if k == max_iters:
            break
        # drop idle columns, then add the most violated ones that are not tabu
        ay = np.abs(cols.matrix.T @ sol.y)
        idle = (ay < d) & (sol.x_array == 0)
        dropped = active[idle]
        keep = active[~idle]
        fresh = sweep.violator_ids[~np.isin(sweep.violator_ids, np.concatenate([keep, tabu]))]
        active = np.unique(np.concatenate([keep, fresh[:max_new]]))
        tabu = dropped
        hint = sol.basis
    res = _result(b, n, cols, sol, "cg", t0, lower_bound=lower, iterations=k, history=history)
    return res


def rom_fwht(b) -> RomResult:
    """The cover-matrix feasible value R_FWHT as an (inexact) upper bound."""
    t0 = time.perf_counter()
    b, n = check_pauli_vector(b)
    dec = minimal_feasible_solution(b, check=False, keep_weights=False)
    stn = st_norm(b)
    return RomResult(
        value=dec.r_fwht,
        exact=False,
        decomposition={},
        dual=np.sign(b) / 2**n,
        lower_bound=stn,
        upper_bound=dec.r_fwht,
        method="fwht",
        n=n,
        n_columns=dec.blocks << n,
        seconds=time.perf_counter() - t0,
    )
