"""L1-minimization over a column set, with primal weights and dual multipliers.

``solve_l1`` solves  min sum_j w_j |x_j|  s.t.  C x = b  through the split
standard form  [C, -C] u = b, u >= 0, whose dual is  max b^T y  s.t.
|c_j^T y| <= w_j.  The built-in backend is a revised simplex with an explicit
basis inverse; ``backend="highs"`` routes the same problem to SciPy's HiGHS.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument

log = logging.getLogger(__name__)

PRIMAL_TOL = 1e-9
DUAL_TOL = 1e-7
GAP_TOL = 1e-6
PIVOT_TOL = 1e-7

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"


@dataclass
class ColumnSet:
    """Constraint columns with stable ids (and optional objective weights)."""

    matrix: sp.csc_matrix
    ids: Sequence[Any]
    weights: np.ndarray | None = None
    tag: str = ""

    def __post_init__(self):
        self.matrix = sp.csc_matrix(self.matrix, dtype=float)
        if self.matrix.shape[1] != len(self.ids):
            raise InvalidArgument("one id per column is required")
        if len(set(self.ids)) != len(self.ids):
            raise InvalidArgument("column ids must be unique")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != (len(self.ids),) or np.any(self.weights <= 0):
                raise InvalidArgument("weights must be positive, one per column")

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    def __len__(self) -> int:
        return self.matrix.shape[1]

    def objective_weights(self) -> np.ndarray:
        return np.ones(len(self)) if self.weights is None else self.weights

    @classmethod
    def from_dense(cls, mat, ids=None, weights=None, tag="") -> "ColumnSet":
        mat = np.asarray(mat, dtype=float)
        if ids is None:
            ids = list(range(mat.shape[1]))
        return cls(sp.csc_matrix(mat), list(ids), weights, tag)

    @classmethod
    def from_stabilizer_ids(cls, n: int, lin_ids) -> "ColumnSet":
        from .stabilizers import columns_matrix

        lin_ids = np.asarray(lin_ids, dtype=np.int64)
        return cls(columns_matrix(n, lin_ids), [int(i) for i in lin_ids], tag="stabilizer")


@dataclass
class LPSolution:
    x: dict
    y: np.ndarray
    objective: float
    status: str
    x_array: np.ndarray = field(repr=False)
    iterations: int = 0
    backend: str = "simplex"
    best_bound: float | None = None
    basis: list | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def dual_objective(self) -> float:
        return float(self._b @ self.y) if hasattr(self, "_b") else float("nan")


class _Simplex:
    """Two-phase revised simplex on [A, -A, artificials] with a dense basis inverse."""

    REFACTOR_EVERY = 64
    DEGENERATE_LIMIT = 40

    def __init__(self, A: sp.csc_matrix, b: np.ndarray, w: np.ndarray, max_iter: int):
        self.A = A
        self.At = A.T.tocsr()
        self.b = b
        self.w = w
        self.m, self.N = A.shape
        self.max_iter = max_iter
        self.iterations = 0
        self.signs = np.where(b >= 0, 1.0, -1.0)
        self.basis = np.arange(2 * self.N, 2 * self.N + self.m)
        self.is_basic = np.zeros(2 * self.N + self.m, dtype=bool)
        self.is_basic[self.basis] = True
        self.Binv = np.diag(self.signs)
        self.xB = np.abs(b).astype(float)
        self.b_eff = b  # right-hand side after anti-degeneracy perturbation
        self.rng = np.random.default_rng(0)

    # variable j: [0, N) = +a_j, [N, 2N) = -a_j, [2N, 2N + m) = artificial rows
    def column(self, j: int) -> np.ndarray:
        col = np.zeros(self.m)
        if j >= 2 * self.N:
            r = j - 2 * self.N
            col[r] = self.signs[r]
            return col
        jj = j % self.N
        lo, hi = self.A.indptr[jj], self.A.indptr[jj + 1]
        col[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        return col if j < self.N else -col

    def costs(self, phase: int) -> np.ndarray:
        if phase == 1:
            return (self.basis >= 2 * self.N).astype(float)
        out = np.zeros(self.m)
        struct = self.basis < 2 * self.N
        out[struct] = self.w[self.basis[struct] % self.N]
        return out

    def basis_matrix(self) -> np.ndarray:
        return np.column_stack([self.column(j) for j in self.basis])

    def refactor(self) -> None:
        self.Binv = np.linalg.inv(self.basis_matrix())
        self.xB = self.Binv @ self.b_eff
        self.xB[(self.xB < 0) & (self.xB > -1e-9)] = 0.0

    def pivot(self, r: int, j: int, d: np.ndarray) -> float:
        theta = max(self.xB[r] / d[r], 0.0)
        self.xB -= theta * d
        self.xB[r] = theta
        self.is_basic[self.basis[r]] = False
        self.is_basic[j] = True
        self.basis[r] = j
        row = self.Binv[r] / d[r]
        self.Binv -= np.outer(d, row)
        self.Binv[r] = row
        self.iterations += 1
        if self.iterations % self.REFACTOR_EVERY == 0:
            self.refactor()
        return theta

    def perturb(self) -> None:
        """Shift the basic values by tiny random amounts to break a degenerate stall."""
        delta = self.rng.uniform(1e-7, 2e-7, self.m) * (1.0 + np.abs(self.xB))
        delta[self.basis >= 2 * self.N] = 0.0
        self.b_eff = self.b_eff + self.basis_matrix() @ delta
        self.xB = self.xB + delta

    def run_phase(self, phase: int) -> str:
        """Primal simplex with devex pricing.

        In phase 2 a degenerate streak first perturbs the right-hand side; Bland's
        rule is the last resort.
        """
        struct_cost = np.zeros(self.N) if phase == 1 else self.w
        ref = np.ones(2 * self.N)
        degenerate = 0
        bland = False
        rejected: set[int] = set()
        while True:
            if self.iterations >= self.max_iter:
                return ITERATION_LIMIT
            cB = self.costs(phase)
            y = cB @ self.Binv
            r = self.At @ y
            d = np.concatenate([struct_cost - r, struct_cost + r])
            basic = self.is_basic[: self.N] | self.is_basic[self.N : 2 * self.N]
            d[np.concatenate([basic, basic])] = np.inf
            if rejected:
                d[list(rejected)] = np.inf
            if bland:
                cand = np.flatnonzero(d < -PRIMAL_TOL)
                if len(cand) == 0:
                    return OPTIMAL
                j = int(cand[0])
            else:
                neg = np.minimum(d, 0.0)
                j = int(np.argmax(neg * neg / ref))
                if d[j] >= -PRIMAL_TOL:
                    return OPTIMAL
            dirn = self.Binv @ self.column(j)
            pos = np.flatnonzero(dirn > PIVOT_TOL)
            if len(pos) == 0:
                # round-off made a non-improving column look attractive
                rejected.add(j)
                self.refactor()
                continue
            ratios = self.xB[pos] / dirn[pos]
            if bland:
                tmin = ratios.min()
                ties = pos[ratios <= tmin + 1e-12]
                leave = int(ties[np.argmin(self.basis[ties])])
            else:
                # Harris two-pass: relax bounds, then take the largest pivot
                relaxed = ((self.xB[pos] + 1e-9) / dirn[pos]).min()
                ok = pos[ratios <= relaxed]
                leave = int(ok[np.argmax(dirn[ok])])
            # devex reference weights from the pivot row
            alpha = self.At @ self.Binv[leave]
            ratio = np.concatenate([alpha, -alpha]) / dirn[leave]
            wq = ref[j]
            np.maximum(ref, ratio * ratio * wq, out=ref)
            out = self.basis[leave]
            if out < 2 * self.N:
                ref[out] = max(wq / dirn[leave] ** 2, 1.0)
            if wq > 1e6:
                ref[:] = 1.0
            theta = self.pivot(leave, j, dirn)
            rejected.clear()
            if theta <= 1e-12:
                degenerate += 1
                if phase == 2 and degenerate == self.DEGENERATE_LIMIT // 2:
                    self.perturb()
                if degenerate > self.DEGENERATE_LIMIT:
                    bland = True
            else:
                degenerate = 0
                bland = False

    def drive_out_artificials(self) -> None:
        for r in range(self.m):
            if self.basis[r] < 2 * self.N:
                continue
            row = self.At @ self.Binv[r]
            row[self.is_basic[: self.N] | self.is_basic[self.N : 2 * self.N]] = 0.0
            jj = int(np.argmax(np.abs(row)))
            if abs(row[jj]) <= 1e-7:
                continue  # redundant constraint row
            j = jj if row[jj] > 0 else jj + self.N
            self.pivot(r, j, self.Binv @ self.column(j))

    def warm_start(self, basis) -> bool:
        """Install a primal feasible starting basis; False leaves the slack start untouched."""
        if len(basis) != self.m or len(set(basis)) != self.m:
            return False
        basis = np.asarray(basis, dtype=np.int64)
        try:
            Binv = np.linalg.inv(np.column_stack([self.column(j) for j in basis]))
        except np.linalg.LinAlgError:
            return False
        xB = Binv @ self.b
        art = basis >= 2 * self.N
        if xB.min() < -PRIMAL_TOL or np.abs(xB[art]).max(initial=0.0) > PRIMAL_TOL:
            return False
        self.is_basic[:] = False
        self.is_basic[basis] = True
        self.basis, self.Binv = basis, Binv
        self.xB = np.maximum(xB, 0.0)
        return True

    def solve(self, basis_hint=None):
        if basis_hint is None or not self.warm_start(basis_hint):
            status = self.run_phase(1)
            if status != OPTIMAL:
                return status
            self.refactor()
            infeas = self.xB[self.basis >= 2 * self.N].sum()
            if infeas > 1e-8 * max(1.0, np.abs(self.b).max()):
                return INFEASIBLE
            self.drive_out_artificials()
            self.refactor()
        for _ in range(5):
            status = self.run_phase(2)
            if status != OPTIMAL or self.b_eff is self.b:
                break
            # drop the perturbation; the basis stays dual feasible
            self.b_eff = self.b
            self.refactor()
            status = self.dual_cleanup()
            if status != OPTIMAL:
                break
        self.refactor()
        return status

    def dual_cleanup(self) -> str:
        """Dual simplex pivots until the basic values are nonnegative again."""
        while True:
            if self.iterations >= self.max_iter:
                return ITERATION_LIMIT
            r = int(np.argmin(self.xB))
            if self.xB[r] >= -PRIMAL_TOL:
                return OPTIMAL
            y = self.costs(2) @ self.Binv
            red = self.At @ y
            d = np.concatenate([self.w - red, self.w + red])
            alpha = self.At @ self.Binv[r]
            a = np.concatenate([alpha, -alpha])
            a[self.is_basic[: 2 * self.N]] = 0.0
            cand = np.flatnonzero(a < -PIVOT_TOL)
            if len(cand) == 0:
                return INFEASIBLE
            ratios = np.maximum(d[cand], 0.0) / -a[cand]
            ok = cand[ratios <= ratios.min() + 1e-12]
            q = int(ok[np.argmin(a[ok])])
            self.pivot(r, q, self.Binv @ self.column(q))

    def primal(self) -> np.ndarray:
        x = np.zeros(self.N)
        for pos, j in enumerate(self.basis):
            if j < self.N:
                x[j] += self.xB[pos]
            elif j < 2 * self.N:
                x[j - self.N] -= self.xB[pos]
        return x

    def dual(self) -> np.ndarray:
        return np.linalg.solve(self.basis_matrix().T, self.costs(2))


def _solve_simplex(A, b, w, max_iter, hint=None):
    s = _Simplex(A, b, w, max_iter)
    status = s.solve(hint)
    x = s.primal()
    y = s.dual() if status != INFEASIBLE else np.zeros(len(b))
    return x, y, status, s.iterations, s.basis


def _hint_positions(cols: ColumnSet, hint) -> list[int] | None:
    """Map a basis description [(id, +-1) or (None, row)] to simplex variable numbers."""
    pos = {cid: k for k, cid in enumerate(cols.ids)}
    N = len(cols)
    out = []
    for cid, tag in hint:
        if cid is None:
            out.append(2 * N + int(tag))
        elif cid in pos:
            out.append(pos[cid] + (0 if tag > 0 else N))
        else:
            return None
    return out


def _describe_basis(cols: ColumnSet, basis) -> list:
    N = len(cols)
    return [
        (None, int(j) - 2 * N) if j >= 2 * N else (cols.ids[j % N], 1 if j < N else -1)
        for j in basis
    ]


def _solve_highs(A, b, w, max_iter, hint=None):
    from scipy.optimize import linprog

    N = A.shape[1]
    res = linprog(
        np.concatenate([w, w]),
        A_eq=sp.hstack([A, -A]).tocsc(),
        b_eq=b,
        bounds=(0, None),
        method="highs",
        options={"maxiter": max_iter},
    )
    status = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE}.get(res.status, INFEASIBLE)
    if res.x is None:
        return np.zeros(N), np.zeros(len(b)), status, int(getattr(res, "nit", 0)), None
    x = res.x[:N] - res.x[N:]
    y = np.asarray(res.eqlin.marginals, dtype=float)
    return x, y, status, int(res.nit), None


BACKENDS = {"simplex": _solve_simplex, "highs": _solve_highs}


def solve_l1(
    cols: ColumnSet,
    b,
    weights=None,
    backend: str = "simplex",
    max_iter: int | None = None,
    basis_hint=None,
) -> LPSolution:
    """Minimize the weighted L1 norm of ``x`` subject to ``cols x = b``.

    Infeasible systems come back with ``status == "infeasible"`` and no weights;
    nothing is fabricated.  ``basis_hint`` is the ``basis`` of an earlier
    simplex solution with the same right-hand side; it is used when all its
    columns are present and it is still primal feasible.
    """
    if len(cols) == 0:
        raise InvalidArgument("column set is empty")
    b = np.asarray(b, dtype=float)
    if b.shape != (cols.n_rows,):
        raise InvalidArgument("right-hand side does not match the column length")
    w = cols.objective_weights() if weights is None else np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise InvalidArgument("objective weights must be positive")
    if backend not in BACKENDS:
        raise InvalidArgument(f"unknown LP backend {backend!r}")
    if max_iter is None:
        max_iter = max(50000, 200 * cols.n_rows)
    hint = _hint_positions(cols, basis_hint) if basis_hint is not None else None
    x, y, status, iters, basis = BACKENDS[backend](cols.matrix, b, w, max_iter, hint)
    objective = float(np.abs(x) @ w) if status != INFEASIBLE else float("nan")
    nz = np.flatnonzero(x)
    sol = LPSolution(
        x={cols.ids[i]: float(x[i]) for i in nz} if status != INFEASIBLE else {},
        y=y,
        objective=objective,
        status=status,
        x_array=x,
        iterations=iters,
        backend=backend,
        best_bound=float(b @ y) if status == ITERATION_LIMIT else None,
        basis=_describe_basis(cols, basis) if basis is not None else None,
    )
    sol._b = b
    log.debug("solve_l1 %s: %s obj=%.12g after %d pivots", backend, status, objective, iters)
    return sol


@dataclass
class VerificationReport:
    primal_residual: float
    dual_margin: float  # max_j |c_j^T y| / w_j - 1
    duality_gap: float
    slackness_violations: int
    primal_ok: bool
    dual_ok: bool
    gap_ok: bool

    @property
    def passed(self) -> bool:
        return self.primal_ok and self.dual_ok and self.gap_ok and self.slackness_violations == 0

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {"passed": self.passed}


def verify_solution(
    cols: ColumnSet,
    b,
    sol,
    primal_tol: float = PRIMAL_TOL,
    dual_tol: float = DUAL_TOL,
    gap_tol: float = GAP_TOL,
) -> VerificationReport:
    """Check primal feasibility, dual feasibility, the duality gap and complementary slackness.

    ``sol`` needs ``x_array`` (aligned with ``cols``) and ``y``.
    """
    b = np.asarray(b, dtype=float)
    x = np.asarray(sol.x_array, dtype=float)
    y = np.asarray(sol.y, dtype=float)
    w = cols.objective_weights()
    residual = float(np.max(np.abs(cols.matrix @ x - b)))
    ay = cols.matrix.T @ y
    margin = float(np.max(np.abs(ay) / w) - 1.0)
    gap = float(abs(b @ y - np.abs(x) @ w))
    support = np.abs(x) > primal_tol
    slack = int(np.sum(np.abs(ay[support] - w[support] * np.sign(x[support])) > dual_tol))
    return VerificationReport(
        primal_residual=residual,
        dual_margin=margin,
        duality_gap=gap,
        slackness_violations=slack,
        primal_ok=residual <= primal_tol,
        dual_ok=margin <= dual_tol,
        gap_ok=gap <= gap_tol,
    )
