"""Revised simplex over bounded variables, with primal and dual solutions.

Every linear program in the package goes through :func:`solve` or
:func:`solve_with_basis_hint`. The engine works on the canonical form::

    min  c @ x
    s.t. A @ x - r = 0
         lo <= (x, r) <= hi

where ``r`` holds one logical variable per row whose bounds encode the row
relation. Duals are reported as the sensitivity of the optimal objective to
the right-hand side, so a binding ``>=`` row of a minimisation has a
nonnegative dual.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp


class LpError(Exception):
    """Base class for engine errors."""


class MalformedProblem(LpError):
    pass


class NumericalBreakdown(LpError):
    pass


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


LE, GE, EQ = "<=", ">=", "="

# nonbasic / basic status codes used in basis descriptors
BASIC, AT_LOWER, AT_UPPER, FREE_ZERO = 0, 1, 2, 3


@dataclasses.dataclass(frozen=True)
class Tolerances:
    feas: float = 1e-7
    pivot: float = 1e-9
    comp: float = 1e-6
    opt: float = 1e-9
    refactor_every: int = 64


DEFAULT_TOLERANCES = Tolerances()


@dataclasses.dataclass(frozen=True, eq=False)
class LinearProgram:
    """An LP with row relations and (possibly infinite) variable bounds."""

    objective_coeffs: np.ndarray
    constraint_matrix: np.ndarray
    row_relations: tuple
    rhs: np.ndarray
    variable_lower_bounds: np.ndarray
    variable_upper_bounds: np.ndarray
    objective_sense: str = "min"
    var_names: Optional[tuple] = None
    row_names: Optional[tuple] = None

    def __post_init__(self):
        c = np.asarray(self.objective_coeffs, dtype=float).ravel()
        A = self.constraint_matrix
        if sp.issparse(A):
            A = A.toarray()
        A = np.asarray(A, dtype=float)
        if A.ndim == 1 and A.size == 0:
            A = A.reshape(0, c.size)
        rhs = np.asarray(self.rhs, dtype=float).ravel()
        lo = np.broadcast_to(np.asarray(self.variable_lower_bounds, dtype=float), c.shape).copy()
        hi = np.broadcast_to(np.asarray(self.variable_upper_bounds, dtype=float), c.shape).copy()
        rel = tuple(self.row_relations)
        if A.ndim != 2 or A.shape[1] != c.size:
            raise MalformedProblem(f"constraint matrix shape {A.shape} does not match {c.size} variables")
        if A.shape[0] != rhs.size or len(rel) != rhs.size:
            raise MalformedProblem(
                f"row count mismatch: matrix {A.shape[0]}, rhs {rhs.size}, relations {len(rel)}"
            )
        bad = [r for r in rel if r not in (LE, GE, EQ)]
        if bad:
            raise MalformedProblem(f"unknown row relation {bad[0]!r}")
        if self.objective_sense not in ("min", "max"):
            raise MalformedProblem(f"objective sense must be min or max, got {self.objective_sense!r}")
        for name, arr in (("objective", c), ("matrix", A), ("rhs", rhs)):
            if not np.all(np.isfinite(arr)):
                raise MalformedProblem(f"non-finite {name} coefficient")
        if np.isnan(lo).any() or np.isnan(hi).any():
            raise MalformedProblem("NaN variable bound")
        if np.any(lo > hi):
            j = int(np.argmax(lo > hi))
            raise MalformedProblem(f"lower bound exceeds upper bound for variable {j}")
        if self.var_names is not None and len(self.var_names) != c.size:
            raise MalformedProblem("var_names length mismatch")
        if self.row_names is not None and len(self.row_names) != rhs.size:
            raise MalformedProblem("row_names length mismatch")
        for arr in (c, A, rhs, lo, hi):
            arr.setflags(write=False)
        object.__setattr__(self, "objective_coeffs", c)
        object.__setattr__(self, "constraint_matrix", A)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "variable_lower_bounds", lo)
        object.__setattr__(self, "variable_upper_bounds", hi)
        object.__setattr__(self, "row_relations", rel)

    @property
    def n_vars(self) -> int:
        return self.objective_coeffs.size

    @property
    def n_rows(self) -> int:
        return self.rhs.size

    def with_rows(self, rows, relations, rhs, names=None) -> "LinearProgram":
        """Return a copy with extra rows appended at the end."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        row_names = None
        if self.row_names is not None:
            extra = names if names is not None else [f"r{self.n_rows + i}" for i in range(rows.shape[0])]
            row_names = tuple(self.row_names) + tuple(extra)
        return dataclasses.replace(
            self,
            constraint_matrix=np.vstack([self.constraint_matrix, rows]),
            row_relations=self.row_relations + tuple(relations),
            rhs=np.concatenate([self.rhs, np.atleast_1d(rhs)]),
            row_names=row_names,
        )

    def row_bounds(self):
        lo = np.full(self.n_rows, -np.inf)
        hi = np.full(self.n_rows, np.inf)
        for i, rel in enumerate(self.row_relations):
            if rel in (GE, EQ):
                lo[i] = self.rhs[i]
            if rel in (LE, EQ):
                hi[i] = self.rhs[i]
        return lo, hi


@dataclasses.dataclass(frozen=True, eq=False)
class LpBasis:
    """Status code per variable then per row logical (BASIC, AT_LOWER, ...)."""

    status: np.ndarray
    n_vars: int

    @property
    def n_rows(self) -> int:
        return self.status.size - self.n_vars

    def basic_indices(self) -> np.ndarray:
        return np.flatnonzero(self.status == BASIC)


@dataclasses.dataclass(frozen=True, eq=False)
class LpSolution:
    status: Status
    objective_value: float
    primal: np.ndarray
    duals: np.ndarray
    reduced_costs: np.ndarray
    row_activity: np.ndarray
    basis: Optional[LpBasis] = None
    iterations: int = 0
    witness: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# ---------------------------------------------------------------------------
# core simplex


class _Simplex:
    def __init__(self, A, c, lo, hi, tol: Tolerances):
        self.A = A
        self.m, self.n = A.shape
        self.c = np.concatenate([c, np.zeros(self.m)])
        self.lo = lo
        self.hi = hi
        self.tol = tol
        # per-column optimality threshold, relative to the column's own cost
        self.cscale = 1.0 + np.abs(self.c)
        self.iterations = 0

    # columns of [A, -I]
    def _col(self, j):
        if j < self.n:
            return self.A[:, j]
        e = np.zeros(self.m)
        e[j - self.n] = -1.0
        return e

    def _binv_col(self, j):
        if j < self.n:
            return self.Binv @ self.A[:, j]
        return -self.Binv[:, j - self.n]

    def _factor(self):
        Bm = np.empty((self.m, self.m))
        for k, j in enumerate(self.head):
            Bm[:, k] = self._col(j)
        self.Binv = np.linalg.inv(Bm)
        if not np.all(np.isfinite(self.Binv)):
            raise np.linalg.LinAlgError("singular basis")
        self.since_refactor = 0

    def _recompute_basics(self):
        z = self.x.copy()
        z[self.head] = 0.0
        Mz = self.A @ z[: self.n] - z[self.n :]
        self.x[self.head] = -(self.Binv @ Mz)

    def start(self, status=None):
        n, m = self.n, self.m
        lo, hi = self.lo, self.hi
        self.x = np.zeros(n + m)
        if status is None:
            status = np.empty(n + m, dtype=np.int8)
            status[n:] = BASIC
            for j in range(n):
                if np.isfinite(lo[j]):
                    status[j] = AT_LOWER
                elif np.isfinite(hi[j]):
                    status[j] = AT_UPPER
                else:
                    status[j] = FREE_ZERO
        status = np.asarray(status, dtype=np.int8).copy()
        for j in np.flatnonzero(status != BASIC):
            s = status[j]
            if s == AT_LOWER and np.isfinite(lo[j]):
                self.x[j] = lo[j]
            elif s == AT_UPPER and np.isfinite(hi[j]):
                self.x[j] = hi[j]
            elif s == FREE_ZERO and not np.isfinite(lo[j]) and not np.isfinite(hi[j]):
                self.x[j] = 0.0
            elif np.isfinite(lo[j]):
                status[j] = AT_LOWER
                self.x[j] = lo[j]
            elif np.isfinite(hi[j]):
                status[j] = AT_UPPER
                self.x[j] = hi[j]
            else:
                status[j] = FREE_ZERO
        self.status = status
        self.head = np.flatnonzero(status == BASIC)
        if self.head.size != m:
            raise np.linalg.LinAlgError("basis has wrong size")
        self._factor()
        self._recompute_basics()

    def run(self, max_iter):
        tol = self.tol
        n, m = self.n, self.m
        lo, hi = self.lo, self.hi
        degenerate = 0
        bland = False
        bland_after = 2 * (n + m)
        phase = 1
        restarts = 0
        while True:
            head = self.head
            xB = self.x[head]
            loB, hiB = lo[head], hi[head]
            below = xB < loB - tol.feas * (1.0 + np.abs(loB).clip(max=1e300))
            above = xB > hiB + tol.feas * (1.0 + np.abs(hiB).clip(max=1e300))
            if phase == 1 and not (below.any() or above.any()):
                phase = 2
                degenerate = 0
                bland = False
            if phase == 1:
                cB = above.astype(float) - below.astype(float)
                cN_struct = np.zeros(n)
                scale = 1.0
            else:
                cB = self.c[head]
                cN_struct = self.c[:n]
                scale = self.cscale
            y = cB @ self.Binv
            d = np.empty(n + m)
            d[:n] = cN_struct - self.A.T @ y
            d[n:] = y
            d[head] = 0.0

            st = self.status
            thr = tol.opt * scale
            can_up = ((st == AT_LOWER) | (st == FREE_ZERO)) & (hi > lo)
            can_down = ((st == AT_UPPER) | (st == FREE_ZERO)) & (hi > lo)
            elig_up = can_up & (d < -thr)
            elig_down = can_down & (d > thr)
            elig = elig_up | elig_down
            if not elig.any():
                if phase == 1 and restarts < 3:
                    restarts += 1
                    self._factor()
                    self._recompute_basics()
                    continue
                if phase == 1:
                    infeas = float(np.sum(np.maximum(loB - xB, 0)) + np.sum(np.maximum(xB - hiB, 0)))
                    return Status.INFEASIBLE, f"phase 1 stalled with total infeasibility {infeas:.3g}"
                if self.since_refactor and restarts < 3:
                    # confirm on a fresh factorization; drift sends us back to phase 1
                    restarts += 1
                    self._factor()
                    self._recompute_basics()
                    xB = self.x[head]
                    tolB = 10 * tol.feas
                    if np.any(xB < loB - tolB * (1.0 + np.abs(loB).clip(max=1e300))) or np.any(
                        xB > hiB + tolB * (1.0 + np.abs(hiB).clip(max=1e300))
                    ):
                        phase = 1
                    continue
                self.y = y
                self.d = d
                return Status.OPTIMAL, ""

            self.iterations += 1
            if self.iterations > max_iter:
                raise NumericalBreakdown(f"iteration limit {max_iter} reached")
            if bland:
                q = int(np.flatnonzero(elig)[0])
            else:
                score = np.where(elig, np.abs(d), -1.0)
                q = int(np.argmax(score))
            sigma = 1.0 if elig_up[q] else -1.0

            alpha = self._binv_col(q)
            delta = -sigma * alpha
            piv = tol.pivot
            ratios = np.full(m, np.inf)
            dec = delta < -piv
            inc = delta > piv
            if phase == 1:
                # infeasible basics may move through their violated bound
                lim_dec = np.where(above, hiB, np.where(below, -np.inf, loB))
                lim_inc = np.where(below, loB, np.where(above, np.inf, hiB))
            else:
                lim_dec, lim_inc = loB, hiB
            with np.errstate(invalid="ignore", divide="ignore"):
                r_dec = (xB - lim_dec) / -delta
                r_inc = (lim_inc - xB) / delta
            ratios = np.where(dec, r_dec, ratios)
            ratios = np.where(inc, r_inc, ratios)
            ratios = np.where(np.isnan(ratios), np.inf, ratios)
            ratios = np.maximum(ratios, 0.0)
            t_flip = hi[q] - lo[q]
            t_min = float(ratios.min()) if m else np.inf
            if not np.isfinite(t_min) and not np.isfinite(t_flip):
                if phase == 1:
                    raise NumericalBreakdown("unbounded ray during phase 1")
                self.ray_var = q
                return Status.UNBOUNDED, f"objective decreases without bound along variable {q}"

            if t_flip <= t_min:
                t = t_flip
                self.x[q] += sigma * t
                self.x[head] += delta * t
                self.status[q] = AT_UPPER if sigma > 0 else AT_LOWER
            else:
                t = t_min
                cand = np.flatnonzero(ratios <= t_min + 1e-12 * (1.0 + t_min))
                if bland:
                    r = int(cand[np.argmin(head[cand])])
                else:
                    r = int(cand[np.argmax(np.abs(alpha[cand]))])
                if abs(alpha[r]) < piv:
                    raise NumericalBreakdown(f"pivot {alpha[r]:.3g} below tolerance")
                leaving = head[r]
                self.x[q] += sigma * t
                self.x[head] += delta * t
                if delta[r] < 0:
                    bound_is_lower = not (phase == 1 and above[r])
                else:
                    bound_is_lower = bool(phase == 1 and below[r])
                if bound_is_lower:
                    self.x[leaving] = lo[leaving]
                    self.status[leaving] = AT_LOWER
                else:
                    self.x[leaving] = hi[leaving]
                    self.status[leaving] = AT_UPPER
                if self.status[leaving] == AT_LOWER and not np.isfinite(lo[leaving]):
                    raise NumericalBreakdown("leaving variable has no finite bound")
                self.status[q] = BASIC
                self.head[r] = q
                # eta update of the explicit inverse
                prow = self.Binv[r] / alpha[r]
                self.Binv -= np.outer(alpha, prow)
                self.Binv[r] = prow
                self.since_refactor += 1
                if self.since_refactor >= self.tol.refactor_every:
                    self._factor()
                    self._recompute_basics()
            if t <= 1e-12:
                degenerate += 1
                if degenerate > bland_after:
                    bland = True
            else:
                degenerate = 0
                bland = False


def _presolve(lp: LinearProgram):
    """Drop empty rows and columns; return kept index arrays or a final status."""
    A = lp.constraint_matrix
    nz = A != 0
    keep_rows = np.flatnonzero(nz.any(axis=1))
    keep_cols = np.flatnonzero(nz.any(axis=0))
    rlo, rhi = lp.row_bounds()
    empty_rows = np.setdiff1d(np.arange(lp.n_rows), keep_rows)
    for i in empty_rows:
        if rlo[i] > DEFAULT_TOLERANCES.feas or rhi[i] < -DEFAULT_TOLERANCES.feas:
            return keep_rows, keep_cols, f"empty row {i} cannot satisfy its bound"
    return keep_rows, keep_cols, None


def solve(lp: LinearProgram, tol: Tolerances = DEFAULT_TOLERANCES, backend: str = "simplex") -> LpSolution:
    """Solve ``lp`` from a cold start."""
    return _solve(lp, None, tol, backend)


def solve_with_basis_hint(
    lp: LinearProgram, hint: Optional[LpBasis], tol: Tolerances = DEFAULT_TOLERANCES
) -> LpSolution:
    """Solve ``lp`` starting from a basis of an earlier solve.

    Rows appended since the hint was produced start with their logical basic.
    An inconsistent hint silently falls back to a cold start.
    """
    return _solve(lp, hint, tol, "simplex")


def _solve(lp, hint, tol, backend):
    if backend == "highs":
        return _solve_highs(lp)
    if backend != "simplex":
        raise ValueError(f"unknown backend {backend!r}")
    sign = 1.0 if lp.objective_sense == "min" else -1.0
    c_full = sign * lp.objective_coeffs
    n, m = lp.n_vars, lp.n_rows
    keep_rows, keep_cols, fail = _presolve(lp)
    if fail:
        return _failed(lp, Status.INFEASIBLE, fail)

    x_full = np.zeros(n)
    lo, hi = lp.variable_lower_bounds, lp.variable_upper_bounds
    drop_cols = np.setdiff1d(np.arange(n), keep_cols)
    free_ray = None
    for j in drop_cols:
        cj = c_full[j]
        if cj > 0:
            v = lo[j]
        elif cj < 0:
            v = hi[j]
        else:
            v = lo[j] if np.isfinite(lo[j]) else (hi[j] if np.isfinite(hi[j]) else 0.0)
        if not np.isfinite(v):
            # decided after the remaining LP: infeasibility takes precedence
            free_ray = free_ray or f"empty column {j} with cost {cj} is unbounded"
            v = 0.0
        x_full[j] = v

    A = lp.constraint_matrix[np.ix_(keep_rows, keep_cols)]
    rlo, rhi = lp.row_bounds()
    rs, cs = _equilibrate(A)
    As = A * rs[:, None] * cs[None, :]
    lo_r = np.concatenate([lo[keep_cols] / cs, rlo[keep_rows] * rs])
    hi_r = np.concatenate([hi[keep_cols] / cs, rhi[keep_rows] * rs])
    cs_obj = c_full[keep_cols] * cs
    max_iter = 50 * (A.shape[0] + A.shape[1]) + 1000

    status0 = None
    if hint is not None:
        status0 = _map_hint(hint, lp, keep_rows, keep_cols)
    engine = None
    if status0 is not None:
        engine = _Simplex(As, cs_obj, lo_r, hi_r, tol)
        try:
            engine.start(status0)
            status, witness = engine.run(max_iter)
        except (np.linalg.LinAlgError, ValueError, NumericalBreakdown):
            engine = None
    if engine is None:
        engine = _Simplex(As, cs_obj, lo_r, hi_r, tol)
        try:
            engine.start()
            status, witness = engine.run(max_iter)
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown(str(exc)) from exc
    if status is Status.INFEASIBLE:
        # confirm an infeasibility verdict without scaling, from scratch
        its = engine.iterations
        rs, cs = np.ones(A.shape[0]), np.ones(A.shape[1])
        engine = _Simplex(A, c_full[keep_cols], np.concatenate([lo[keep_cols], rlo[keep_rows]]),
                          np.concatenate([hi[keep_cols], rhi[keep_rows]]), tol)
        try:
            engine.start()
            status, witness = engine.run(max_iter)
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown(str(exc)) from exc
        engine.iterations += its
    if status is Status.OPTIMAL and not (
        _within_bounds(engine.x[: A.shape[1]] * cs, A, lo[keep_cols], hi[keep_cols], rlo[keep_rows], rhi[keep_rows], tol)
        and _dual_ok(engine, cs, rs, c_full[keep_cols], tol)
    ):
        # scaled tolerances can hide violations; finish on the unscaled problem
        rs, cs = np.ones(A.shape[0]), np.ones(A.shape[1])
        lo_u = np.concatenate([lo[keep_cols], rlo[keep_rows]])
        hi_u = np.concatenate([hi[keep_cols], rhi[keep_rows]])
        its = engine.iterations
        warm = engine.status.copy()
        engine = _Simplex(A, c_full[keep_cols], lo_u, hi_u, tol)
        try:
            engine.start(warm)
            status, witness = engine.run(max_iter)
        except (np.linalg.LinAlgError, NumericalBreakdown):
            engine = _Simplex(A, c_full[keep_cols], lo_u, hi_u, tol)
            try:
                engine.start()
                status, witness = engine.run(max_iter)
            except np.linalg.LinAlgError as exc:
                raise NumericalBreakdown(str(exc)) from exc
        engine.iterations += its
    if status is Status.OPTIMAL:
        engine = _strict_cleanup(engine, A, c_full[keep_cols], lo[keep_cols], hi[keep_cols],
                                 rlo[keep_rows], rhi[keep_rows], cs, rs, tol, max_iter)
        if engine.unscaled:
            rs, cs = np.ones(A.shape[0]), np.ones(A.shape[1])
    if free_ray and status is not Status.INFEASIBLE:
        return _failed(lp, Status.UNBOUNDED, free_ray, engine.iterations)
    if status is not Status.OPTIMAL:
        return _failed(lp, status, witness, engine.iterations)

    nk = keep_cols.size
    z, y, d = engine.x[:nk] * cs, engine.y * rs, engine.d[:nk] / cs
    polished = _polish(A, c_full[keep_cols], engine.status, np.concatenate([lo[keep_cols], rlo[keep_rows]]),
                       np.concatenate([hi[keep_cols], rhi[keep_rows]]), tol)
    if polished is not None:
        z, y, d = polished
    x_full[keep_cols] = z
    row_act = lp.constraint_matrix @ x_full
    duals = np.zeros(m)
    duals[keep_rows] = y
    rc = c_full.copy()
    rc[keep_cols] = d
    rc[keep_cols[engine.status[:nk] == BASIC]] = 0.0

    full_status = np.empty(n + m, dtype=np.int8)
    full_status[n:] = BASIC
    full_status[n + keep_rows] = engine.status[nk:]
    for j in drop_cols:
        full_status[j] = _bound_status(x_full[j], lo[j], hi[j])
    full_status[keep_cols] = engine.status[:nk]

    obj = float(lp.objective_coeffs @ x_full)
    return LpSolution(
        status=Status.OPTIMAL,
        objective_value=obj,
        primal=x_full,
        duals=sign * duals,
        reduced_costs=sign * rc,
        row_activity=row_act,
        basis=LpBasis(full_status, n),
        iterations=engine.iterations,
    )


STRICT_FEAS = 1e-9


def _strict_cleanup(engine, A, c, lo, hi, rlo, rhi, cs, rs, tol, max_iter):
    """Remove bound violations the ratio test tolerated.

    Violations of up to ``tol.feas`` are harmless in isolation but large cost
    coefficients turn them into visible objective errors. If the final basis
    is off by more than STRICT_FEAS (relative), re-solve unscaled with a tight
    feasibility tolerance from that basis; keep the old answer if this fails.
    """
    engine.unscaled = bool(np.all(cs == 1.0) and np.all(rs == 1.0))
    lo_u, hi_u = np.concatenate([lo, rlo]), np.concatenate([hi, rhi])
    strict = dataclasses.replace(tol, feas=STRICT_FEAS)
    if _polish(A, c, engine.status, lo_u, hi_u, strict) is not None:
        return engine
    fresh = _Simplex(A, c, lo_u, hi_u, strict)
    try:
        fresh.start(engine.status.copy())
        status, _ = fresh.run(max_iter)
    except (np.linalg.LinAlgError, ValueError, NumericalBreakdown):
        return engine
    if status is not Status.OPTIMAL:
        return engine
    fresh.iterations += engine.iterations
    fresh.unscaled = True
    return fresh


def _polish(A, c, status, lo, hi, tol):
    """Basic solution and duals of the final basis, recomputed on unscaled data.

    Solving in scaled space and scaling back leaves residuals that large cost
    coefficients amplify; one refinement step removes them. Returns
    ``(x, y, d)`` or None when the recomputed point leaves its bounds.
    """
    m, n = A.shape
    head = np.flatnonzero(status == BASIC)
    if head.size != m:
        return None
    M = np.hstack([A, -np.eye(m)])
    z = np.zeros(n + m)
    for j in np.flatnonzero(status != BASIC):
        if status[j] == AT_LOWER:
            z[j] = lo[j]
        elif status[j] == AT_UPPER:
            z[j] = hi[j]
    Bm = M[:, head]
    try:
        z[head] = np.linalg.solve(Bm, -(M @ z))
        z[head] += np.linalg.solve(Bm, -(M @ z))
        cext = np.concatenate([c, np.zeros(m)])
        y = np.linalg.solve(Bm.T, cext[head])
        y += np.linalg.solve(Bm.T, cext[head] - Bm.T @ y)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(z)) or not np.all(np.isfinite(y)):
        return None
    slack = tol.feas * (1.0 + np.abs(np.where(np.isfinite(lo), lo, 0.0)))
    slack_hi = tol.feas * (1.0 + np.abs(np.where(np.isfinite(hi), hi, 0.0)))
    if np.any(z < lo - slack) or np.any(z > hi + slack_hi):
        return None
    d = cext - M.T @ y
    return z[:n], y, d[:n]


def _within_bounds(x, A, lo, hi, rlo, rhi, tol) -> bool:
    """Unscaled bound and row feasibility of ``x`` within the feasibility tolerance."""
    def slack(b):
        return tol.feas * (1.0 + np.abs(np.where(np.isfinite(b), b, 0.0)))

    act = A @ x
    return not (
        np.any(x < lo - slack(lo)) or np.any(x > hi + slack(hi))
        or np.any(act < rlo - slack(rlo)) or np.any(act > rhi + slack(rhi))
    )


def _dual_ok(engine, cs, rs, c, tol) -> bool:
    """Reduced-cost signs of the scaled engine's basis, measured unscaled."""
    nk = cs.size
    d = np.concatenate([engine.d[:nk] / cs, engine.d[nk:] * rs])
    thr = tol.opt * (1.0 + np.abs(np.concatenate([c, np.zeros(rs.size)])))
    st = engine.status
    movable = engine.hi > engine.lo
    up = ((st == AT_LOWER) | (st == FREE_ZERO)) & movable & (d < -thr)
    down = ((st == AT_UPPER) | (st == FREE_ZERO)) & movable & (d > thr)
    return not (up.any() or down.any())


def _equilibrate(A, passes: int = 4, limit: int = 16):
    """Row and column scale factors (powers of two) from geometric-mean passes."""
    m, n = A.shape
    rs, cs = np.ones(m), np.ones(n)
    absA = np.abs(A)
    mask = absA > 0
    if not mask.any():
        return rs, cs
    logA = np.where(mask, np.log2(np.where(mask, absA, 1.0)), 0.0)
    lr, lc = np.zeros(m), np.zeros(n)
    for _ in range(passes):
        M = np.where(mask, logA + lr[:, None] + lc[None, :], np.nan)
        with np.errstate(all="ignore"):
            rmax, rmin = np.nanmax(M, axis=1), np.nanmin(M, axis=1)
        lr -= np.nan_to_num(0.5 * (rmax + rmin))
        M = np.where(mask, logA + lr[:, None] + lc[None, :], np.nan)
        with np.errstate(all="ignore"):
            cmax, cmin = np.nanmax(M, axis=0), np.nanmin(M, axis=0)
        lc -= np.nan_to_num(0.5 * (cmax + cmin))
    return np.exp2(np.clip(np.round(lr), -limit, limit)), np.exp2(np.clip(np.round(lc), -limit, limit))


def _bound_status(v, lo, hi):
    if np.isfinite(lo) and v == lo:
        return AT_LOWER
    if np.isfinite(hi) and v == hi:
        return AT_UPPER
    return FREE_ZERO


def _map_hint(hint: LpBasis, lp: LinearProgram, keep_rows, keep_cols):
    n, m = lp.n_vars, lp.n_rows
    if not isinstance(hint, LpBasis) or hint.n_vars != n or hint.n_rows > m:
        return None
    st = np.asarray(hint.status)
    if st.size != hint.n_vars + hint.n_rows or np.any((st < 0) | (st > 3)):
        return None
    full = np.empty(n + m, dtype=np.int8)
    full[:n] = st[:n]
    full[n : n + hint.n_rows] = st[n:]
    full[n + hint.n_rows :] = BASIC
    reduced = np.concatenate([full[keep_cols], full[n + keep_rows]])
    if np.count_nonzero(reduced == BASIC) != keep_rows.size:
        return None
    return reduced


def _failed(lp, status, witness, iterations=0):
    n, m = lp.n_vars, lp.n_rows
    nan = math.nan
    return LpSolution(
        status=status,
        objective_value=nan,
        primal=np.full(n, nan),
        duals=np.full(m, nan),
        reduced_costs=np.full(n, nan),
        row_activity=np.full(m, nan),
        iterations=iterations,
        witness=witness,
    )


def _solve_highs(lp: LinearProgram) -> LpSolution:
    """Cross-check backend through scipy's HiGHS interface."""
    from scipy.optimize import linprog

    sign = 1.0 if lp.objective_sense == "min" else -1.0
    A = lp.constraint_matrix
    rel = np.array(lp.row_relations)
    le, ge, eq = rel == LE, rel == GE, rel == EQ
    A_ub = np.vstack([A[le], -A[ge]])
    b_ub = np.concatenate([lp.rhs[le], -lp.rhs[ge]])
    bounds = list(
        zip(
            [None if not np.isfinite(v) else v for v in lp.variable_lower_bounds],
            [None if not np.isfinite(v) else v for v in lp.variable_upper_bounds],
        )
    )
    res = linprog(
        sign * lp.objective_coeffs,
        A_ub=A_ub if A_ub.size else None,
        b_ub=b_ub if A_ub.size else None,
        A_eq=A[eq] if eq.any() else None,
        b_eq=lp.rhs[eq] if eq.any() else None,
        bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        return _failed(lp, Status.INFEASIBLE, res.message)
    if res.status == 3:
        return _failed(lp, Status.UNBOUNDED, res.message)
    if res.status != 0:
        raise NumericalBreakdown(res.message)
    duals = np.zeros(lp.n_rows)
    n_le = int(le.sum())
    if A_ub.size:
        mu = res.ineqlin.marginals
        duals[le] = mu[:n_le]
        duals[ge] = -mu[n_le:]
    if eq.any():
        duals[eq] = res.eqlin.marginals
    rc = res.lower.marginals + res.upper.marginals
    x = res.x
    return LpSolution(
        status=Status.OPTIMAL,
        objective_value=float(lp.objective_coeffs @ x),
        primal=x,
        duals=sign * duals,
        reduced_costs=sign * rc,
        row_activity=A @ x,
    )


# ---------------------------------------------------------------------------
# certificates and checks


def dual_objective(lp: LinearProgram, sol: LpSolution) -> float:
    """Objective value reconstructed from duals and reduced costs."""
    return float(sol.duals @ lp.rhs + sol.reduced_costs @ sol.primal)


def residuals(lp: LinearProgram, sol: LpSolution) -> dict:
    """Primal feasibility, complementary slackness and duality gap residuals."""
    rlo, rhi = lp.row_bounds()
    act = sol.row_activity
    primal = max(
        float(np.max(np.maximum(rlo - act, 0), initial=0.0)),
        float(np.max(np.maximum(act - rhi, 0), initial=0.0)),
        float(np.max(np.maximum(lp.variable_lower_bounds - sol.primal, 0), initial=0.0)),
        float(np.max(np.maximum(sol.primal - lp.variable_upper_bounds, 0), initial=0.0)),
    )
    slack = act - lp.rhs
    comp_rows = np.abs(sol.duals * slack)
    lo, hi = lp.variable_lower_bounds, lp.variable_upper_bounds
    dist = np.minimum(
        np.where(np.isfinite(lo), np.abs(sol.primal - lo), np.inf),
        np.where(np.isfinite(hi), np.abs(sol.primal - hi), np.inf),
    )
    dist = np.where(np.isfinite(dist), dist, np.abs(sol.primal))
    comp_cols = np.abs(sol.reduced_costs) * dist
    comp = float(max(np.max(comp_rows, initial=0.0), np.max(comp_cols, initial=0.0)))
    gap = abs(sol.objective_value - dual_objective(lp, sol))
    return {"primal": primal, "complementarity": comp, "duality_gap": gap}


def optimal_for_objectives(lp: LinearProgram, basis: LpBasis, objectives: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Which of several objective vectors keep ``basis`` optimal.

    ``objectives`` has one row per candidate cost vector (same sense as
    ``lp``). Feasibility of a basis does not depend on the objective, so a
    basis returned by an optimal solve is optimal for a cost vector exactly
    when its reduced costs have the right signs. Returns a boolean mask.
    """
    objectives = np.atleast_2d(objectives)
    sign = 1.0 if lp.objective_sense == "min" else -1.0
    n, m = lp.n_vars, lp.n_rows
    st = basis.status
    head = np.flatnonzero(st == BASIC)
    Bm = np.empty((m, m))
    for k, j in enumerate(head):
        if j < n:
            Bm[:, k] = lp.constraint_matrix[:, j]
        else:
            Bm[:, k] = 0.0
            Bm[j - n, k] = -1.0
    Binv = np.linalg.inv(Bm)
    C = sign * objectives
    Cfull = np.hstack([C, np.zeros((C.shape[0], m))])
    Y = Cfull[:, head] @ Binv
    D = np.empty_like(Cfull)
    D[:, :n] = C - Y @ lp.constraint_matrix
    D[:, n:] = Y
    lo = np.concatenate([lp.variable_lower_bounds, lp.row_bounds()[0]])
    hi = np.concatenate([lp.variable_upper_bounds, lp.row_bounds()[1]])
    movable = hi > lo
    scale = tol * np.maximum(1.0, np.abs(C).max(axis=1, keepdims=True))
    bad_up = ((st == AT_LOWER) | (st == FREE_ZERO)) & movable
    bad_down = ((st == AT_UPPER) | (st == FREE_ZERO)) & movable
    viol = (bad_up[None, :] & (D < -scale)) | (bad_down[None, :] & (D > scale))
    return ~viol.any(axis=1)


# ---------------------------------------------------------------------------
# LP text format


def _fmt(v: float) -> str:
    if v == np.inf:
        return "+inf"
    if v == -np.inf:
        return "-inf"
    return repr(float(v))


def to_lp_text(lp: LinearProgram) -> str:
    """Dump in a fixed-layout text format: objective, constraints, bounds."""
    vn = lp.var_names or tuple(f"x{j}" for j in range(lp.n_vars))
    rn = lp.row_names or tuple(f"r{i}" for i in range(lp.n_rows))

    def expr(coeffs):
        terms = [f"{_fmt(a)} {vn[j]}" for j, a in enumerate(coeffs) if a != 0]
        return " + ".join(terms) if terms else "0"

    out = ["Minimize" if lp.objective_sense == "min" else "Maximize"]
    out.append(f" obj: {expr(lp.objective_coeffs)}")
    out.append("Subject To")
    for i in range(lp.n_rows):
        out.append(f" {rn[i]}: {expr(lp.constraint_matrix[i])} {lp.row_relations[i]} {_fmt(lp.rhs[i])}")
    out.append("Bounds")
    for j in range(lp.n_vars):
        out.append(f" {_fmt(lp.variable_lower_bounds[j])} <= {vn[j]} <= {_fmt(lp.variable_upper_bounds[j])}")
    out.append("End")
    return "\n".join(out) + "\n"


def _parse_num(tok: str) -> float:
    return float(tok)


def from_lp_text(text: str) -> LinearProgram:
    """Parse the format written by :func:`to_lp_text`."""
    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip()]
    sense = "min" if lines[0].strip() == "Minimize" else "max"
    sec = None
    obj_line = None
    rows, bounds = [], []
    for ln in lines[1:]:
        s = ln.strip()
        if s in ("Subject To", "Bounds", "End"):
            sec = s
            continue
        if sec is None:
            obj_line = s
        elif sec == "Subject To":
            rows.append(s)
        elif sec == "Bounds":
            bounds.append(s)
    names, lo, hi = [], [], []
    for b in bounds:
        lo_s, _, name, _, hi_s = b.split()
        names.append(name)
        lo.append(_parse_num(lo_s))
        hi.append(_parse_num(hi_s))
    index = {nm: j for j, nm in enumerate(names)}

    def parse_expr(body):
        v = np.zeros(len(names))
        if body.strip() == "0":
            return v
        for term in body.split(" + "):
            coef, nm = term.split()
            v[index[nm]] += float(coef)
        return v

    c = parse_expr(obj_line.split(":", 1)[1])
    mat, rel, rhs, rnames = [], [], [], []
    for r in rows:
        nm, body = r.split(":", 1)
        body = body.strip()
        for op in (" <= ", " >= ", " = "):
            if op in body:
                lhs, rv = body.rsplit(op, 1)
                rel.append(op.strip())
                break
        else:
            raise MalformedProblem(f"cannot parse row {r!r}")
        mat.append(parse_expr(lhs))
        rhs.append(_parse_num(rv.strip()))
        rnames.append(nm.strip())
    A = np.array(mat) if mat else np.zeros((0, len(names)))
    return LinearProgram(c, A, tuple(rel), np.array(rhs), np.array(lo), np.array(hi), sense,
                         tuple(names), tuple(rnames))


def build(
    c: Sequence[float],
    rows=(),
    relations=(),
    rhs=(),
    lower=0.0,
    upper=np.inf,
    sense: str = "min",
) -> LinearProgram:
    """Convenience constructor with nonnegative defaults."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(rows, dtype=float) if len(rows) else np.zeros((0, c.size))
    if A.ndim != 2:
        raise MalformedProblem(f"rows must form a matrix, got shape {A.shape}")
    return LinearProgram(c, A, tuple(relations), np.asarray(rhs, dtype=float), lower, upper, sense)
