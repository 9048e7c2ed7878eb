"""Min-max regret by (column and) constraint generation.

The generic problem is::

    min_x max_p  c@x + min_y p@A@y  -  min_{x*, y*} (c@x* + p@A@y*)
    s.t.  B x + C y >= d,  G x >= h,  E p >= f,  all variables >= 0

with the comparator (x*, y*) constrained by its own block, which coincides
with the design block unless a scalarization adds rows to only one side.

For a fixed design ``x`` and price ``p`` the regret splits into

* ``g1(p) = min{p@A@y : C y >= d - B x}`` (concave in p), and
* ``g2(p) = max{-c@x* - p@A@y*}`` over the comparator block (convex in p),

and the subproblem ``sp(x) = max_p g1(p) + g2(p)`` is solved by
branch-and-bound over the price box.
"""

from __future__ import annotations

import dataclasses
import heapq
import json
import math
import time
from typing import Optional

import numpy as np

from . import lp as lpmod
from .lp import GE, LinearProgram, Status

ETA_FLOOR = -1e12
DEFAULT_MAX_ITER = 500
DEFAULT_NODE_LIMIT = 4000


class RegretError(Exception):
    pass


class InfeasibleFirstStage(RegretError):
    pass


class DualityGapDetected(RegretError):
    pass


class RecourseViolation(RegretError):
    """The second stage has no feasible control for some design and price."""


@dataclasses.dataclass(frozen=True, eq=False)
class RegretProblem:
    c: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    d: np.ndarray
    E: np.ndarray
    f: np.ndarray
    G: np.ndarray
    h: np.ndarray
    comp_B: np.ndarray
    comp_C: np.ndarray
    comp_d: np.ndarray
    comp_G: np.ndarray
    comp_h: np.ndarray
    x_names: tuple = ()
    p_names: tuple = ()

    @classmethod
    def from_standard_form(cls, sf) -> "RegretProblem":
        return cls(
            c=sf.c, A=sf.A, B=sf.B, C=sf.C, d=sf.d, E=sf.E, f=sf.f_u, G=sf.G, h=sf.h,
            comp_B=sf.B, comp_C=sf.C, comp_d=sf.d, comp_G=sf.G, comp_h=sf.h,
            x_names=tuple(sf.x_names), p_names=tuple(sf.p_names),
        )

    @classmethod
    def from_matrices(cls, c, A, B, C, d, E, f, G, h, **names) -> "RegretProblem":
        arr = lambda v: np.asarray(v, dtype=float)  # noqa: E731
        c, A, B, C, d, E, f, G, h = map(arr, (c, A, B, C, d, E, f, G, h))
        G = G.reshape(-1, c.size)
        return cls(c, A, B, C, d, E, f, G, h, B, C, d, G, h, **names)

    @property
    def n_x(self):
        return self.c.size

    @property
    def n_y(self):
        return self.A.shape[1]

    @property
    def n_p(self):
        return self.A.shape[0]

    def add_rows(self, *, design=None, design_g=None, comparator=None, comparator_g=None) -> "RegretProblem":
        """Append linking rows ``(Bx, Cy, d)`` or design rows ``(G, h)`` to either side."""
        ch = {}
        if design is not None:
            b, cc, dd = design
            ch.update(B=np.vstack([self.B, b]), C=np.vstack([self.C, cc]), d=np.concatenate([self.d, np.atleast_1d(dd)]))
        if design_g is not None:
            g, hh = design_g
            ch.update(G=np.vstack([self.G, g]), h=np.concatenate([self.h, np.atleast_1d(hh)]))
        if comparator is not None:
            b, cc, dd = comparator
            ch.update(
                comp_B=np.vstack([self.comp_B, b]), comp_C=np.vstack([self.comp_C, cc]),
                comp_d=np.concatenate([self.comp_d, np.atleast_1d(dd)]),
            )
        if comparator_g is not None:
            g, hh = comparator_g
            ch.update(comp_G=np.vstack([self.comp_G, g]), comp_h=np.concatenate([self.comp_h, np.atleast_1d(hh)]))
        return dataclasses.replace(self, **ch)

    def price_bounds(self):
        """Per-component bounds of the price polyhedron, which must be a box."""
        lo = np.full(self.n_p, -np.inf)
        hi = np.full(self.n_p, np.inf)
        for row, rhs in zip(self.E, self.f):
            nz = np.flatnonzero(row)
            if nz.size != 1:
                raise NotImplementedError("price polyhedron is not a box")
            j = nz[0]
            if row[j] > 0:
                lo[j] = max(lo[j], rhs / row[j])
            else:
                hi[j] = min(hi[j], rhs / row[j])
        lo = np.maximum(lo, 0.0)
        if np.any(~np.isfinite(hi)) or np.any(lo > hi + 1e-12):
            raise RegretError("price box is unbounded or empty")
        return lo, np.maximum(hi, lo)

    def first_stage_feasible(self, x, tol=1e-7) -> bool:
        x = np.asarray(x, float)
        return bool(np.all(x >= -tol) and np.all(self.G @ x >= self.h - tol * (1 + np.abs(self.h))))


@dataclasses.dataclass(frozen=True, eq=False)
class Scenario:
    p: np.ndarray
    x_star: np.ndarray
    y_star: np.ndarray
    pi: Optional[np.ndarray]
    value: float = math.nan

    def to_dict(self):
        return {
            "p": self.p.tolist(),
            "x_star": self.x_star.tolist(),
            "y_star": self.y_star.tolist(),
            "pi": None if self.pi is None else self.pi.tolist(),
            "value": self.value,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            np.array(doc["p"], float), np.array(doc["x_star"], float), np.array(doc["y_star"], float),
            None if doc.get("pi") is None else np.array(doc["pi"], float), doc.get("value", math.nan),
        )


@dataclasses.dataclass(frozen=True)
class GValues:
    g1: float
    g2: float
    pi: np.ndarray
    y: np.ndarray
    x_star: np.ndarray
    y_star: np.ndarray

    @property
    def sp_value(self):
        return self.g1 + self.g2


# ---------------------------------------------------------------------------
# LP builders


def design_lp(problem: RegretProblem, x, p) -> LinearProgram:
    """min p@A@y s.t. C y >= d - B x, y >= 0."""
    rhs = problem.d - problem.B @ np.asarray(x, float)
    return LinearProgram(problem.A.T @ p, problem.C, (GE,) * rhs.size, rhs, 0.0, np.inf)


def dual_design_lp(problem: RegretProblem, x, p) -> LinearProgram:
    """max (d - B x)@pi s.t. C^T pi <= A^T p, pi >= 0."""
    obj = problem.d - problem.B @ np.asarray(x, float)
    rhs = problem.A.T @ p
    return LinearProgram(obj, problem.C.T, ("<=",) * rhs.size, rhs, 0.0, np.inf, "max")


def comparator_lp(problem: RegretProblem, p) -> LinearProgram:
    """min c@x* + p@A@y* over the comparator block."""
    nx, ny = problem.n_x, problem.n_y
    top = np.hstack([problem.comp_B, problem.comp_C])
    bot = np.hstack([problem.comp_G, np.zeros((problem.comp_G.shape[0], ny))])
    M = np.vstack([top, bot])
    rhs = np.concatenate([problem.comp_d, problem.comp_h])
    obj = np.concatenate([problem.c, problem.A.T @ p])
    return LinearProgram(obj, M, (GE,) * rhs.size, rhs, 0.0, np.inf)


def design_cost_lp(problem: RegretProblem, p) -> LinearProgram:
    """min c@x + p@A@y over the design block (first and second stage jointly)."""
    nx, ny = problem.n_x, problem.n_y
    top = np.hstack([problem.B, problem.C])
    bot = np.hstack([problem.G, np.zeros((problem.G.shape[0], ny))])
    rhs = np.concatenate([problem.d, problem.h])
    obj = np.concatenate([problem.c, problem.A.T @ p])
    return LinearProgram(obj, np.vstack([top, bot]), (GE,) * rhs.size, rhs, 0.0, np.inf)


class Evaluator:
    """Caches comparator solves (independent of x) and warm-start bases."""

    def __init__(self, problem: RegretProblem, tol: lpmod.Tolerances = lpmod.DEFAULT_TOLERANCES):
        self.problem = problem
        self.tol = tol
        self._g2 = {}
        self._comp_hint = None
        self._design_hint = None
        self.lp_solves = 0

    def _solve(self, lp, hint=None):
        self.lp_solves += 1
        return lpmod.solve_with_basis_hint(lp, hint, self.tol)

    def g2(self, p):
        key = tuple(np.round(p, 15))
        hit = self._g2.get(key)
        if hit is not None:
            return hit
        pb = self.problem
        sol = self._solve(comparator_lp(pb, p), self._comp_hint)
        if not sol.optimal:
            raise RecourseViolation(f"comparator problem {sol.status.value} at p={p}: {sol.witness}")
        self._comp_hint = sol.basis
        nx = pb.n_x
        out = (-sol.objective_value, sol.primal[:nx].copy(), sol.primal[nx:].copy())
        self._g2[key] = out
        return out

    def g1(self, x, p, check=True):
        sol = self._solve(design_lp(self.problem, x, p), self._design_hint)
        if not sol.optimal:
            raise RecourseViolation(f"second stage {sol.status.value} at p={p}: {sol.witness}")
        self._design_hint = sol.basis
        val = sol.objective_value
        if check:
            rhs = self.problem.d - self.problem.B @ x
            dual_val = float(sol.duals @ rhs)
            if abs(dual_val - val) > 1e-6 * max(1.0, abs(val)):
                raise DualityGapDetected(f"primal {val!r} vs dual {dual_val!r}")
        return val, sol.duals.copy(), sol.primal.copy()

    def evaluate(self, x, p) -> GValues:
        g1, pi, y = self.g1(x, p)
        g2, xs, ys = self.g2(p)
        return GValues(g1, g2, pi, y, xs, ys)


def eval_g(problem: RegretProblem, x, p, evaluator: Optional[Evaluator] = None, dual_lp: bool = False) -> GValues:
    """Split regret terms at (x, p); regret of x at p is ``c@x + g1 + g2``.

    With ``dual_lp`` the first term is also obtained from the explicit dual
    LP and compared with the primal value.
    """
    ev = evaluator or Evaluator(problem)
    x = np.asarray(x, float)
    p = np.asarray(p, float)
    out = ev.evaluate(x, p)
    if dual_lp:
        dsol = lpmod.solve(dual_design_lp(problem, x, p), ev.tol)
        if not dsol.optimal or abs(dsol.objective_value - out.g1) > 1e-6 * max(1.0, abs(out.g1)):
            raise DualityGapDetected(f"primal {out.g1!r} vs dual LP {dsol.objective_value!r}")
    return out


def regret_at(problem: RegretProblem, x, p, evaluator: Optional[Evaluator] = None) -> float:
    g = eval_g(problem, x, p, evaluator)
    return float(problem.c @ np.asarray(x, float) + g.g1 + g.g2)


# ---------------------------------------------------------------------------
# subproblem


@dataclasses.dataclass(frozen=True, eq=False)
class BilinearProblem:
    """SP(x): max (d-Bx)@pi - c@x* - p@A@y*  over (p, pi, x*, y*).

    Constraints: C^T pi <= A^T p, comparator block on (x*, y*), E p >= f.
    Only the objective depends on x.
    """

    problem: RegretProblem
    pi_objective: np.ndarray

    @property
    def n_pi(self):
        return self.pi_objective.size

    def objective(self, p, pi, x_star, y_star) -> float:
        pb = self.problem
        return float(self.pi_objective @ pi - pb.c @ x_star - p @ (pb.A @ y_star))

    def feasible(self, p, pi, x_star, y_star, tol=1e-6) -> bool:
        pb = self.problem
        ok = np.all(pb.C.T @ pi <= pb.A.T @ p + tol * (1 + np.abs(pb.A.T @ p)))
        ok &= np.all(pb.comp_B @ x_star + pb.comp_C @ y_star >= pb.comp_d - tol * (1 + np.abs(pb.comp_d)))
        ok &= np.all(pb.comp_G @ x_star >= pb.comp_h - tol * (1 + np.abs(pb.comp_h)))
        ok &= np.all(pb.E @ p >= pb.f - tol * (1 + np.abs(pb.f)))
        for v in (p, pi, x_star, y_star):
            ok &= np.all(v >= -tol)
        return bool(ok)


def build_subproblem(problem: RegretProblem, x) -> BilinearProblem:
    x = np.asarray(x, float)
    if not problem.first_stage_feasible(x):
        raise InfeasibleFirstStage("x violates G x >= h or x >= 0")
    return BilinearProblem(problem, problem.d - problem.B @ x)


@dataclasses.dataclass(frozen=True, eq=False)
class SubproblemResult:
    upper: float
    incumbent: Scenario
    incumbent_value: float
    nodes: int
    converged: bool


def _scenario(ev: Evaluator, x, p) -> Scenario:
    g = ev.evaluate(x, p)
    return Scenario(np.asarray(p, float).copy(), g.x_star, g.y_star, g.pi, g.sp_value)


def alternating_ascent(problem: RegretProblem, x, p_start, evaluator: Optional[Evaluator] = None,
                       tol: float = 1e-6, max_rounds: int = 50) -> Scenario:
    """Local search alternating between (p, pi) and (pi, x*, y*) blocks.

    Each half-step is an exact LP maximisation, so the value never drops.
    """
    ev = evaluator or Evaluator(problem)
    x = np.asarray(x, float)
    lo, hi = problem.price_bounds()
    best = _scenario(ev, x, p_start)
    obj_pi = problem.d - problem.B @ x
    ny, npi, n_p = problem.n_y, obj_pi.size, problem.n_p
    M = np.hstack([problem.C.T, -problem.A.T])
    hint = None
    for _ in range(max_rounds):
        # (p, pi) with the comparator fixed
        obj = np.concatenate([obj_pi, -(problem.A @ best.y_star)])
        lpp = LinearProgram(obj, M, ("<=",) * ny, np.zeros(ny),
                            np.concatenate([np.zeros(npi), lo]), np.concatenate([np.full(npi, np.inf), hi]), "max")
        sol = lpmod.solve_with_basis_hint(lpp, hint, ev.tol)
        ev.lp_solves += 1
        if not sol.optimal:
            break
        hint = sol.basis
        p_new = np.clip(sol.primal[npi:], lo, hi)
        cand = _scenario(ev, x, p_new)
        if cand.value <= best.value + tol:
            if cand.value > best.value:
                best = cand
            break
        best = cand
    return best


def _node_bound(problem, obj_pi, corners_p, g2_vals, ev, hint):
    """max (d-Bx)@pi + sum lam_v g2(v) s.t. C^T pi <= A^T (sum lam_v v), sum lam = 1."""
    ny, npi = problem.n_y, obj_pi.size
    V = corners_p.shape[0]
    AtP = problem.A.T @ corners_p.T  # (ny, V)
    M = np.vstack([
        np.hstack([problem.C.T, -AtP]),
        np.concatenate([np.zeros(npi), np.ones(V)])[None, :],
    ])
    rel = ("<=",) * ny + ("=",)
    rhs = np.concatenate([np.zeros(ny), [1.0]])
    obj = np.concatenate([obj_pi, g2_vals])
    lpb = LinearProgram(obj, M, rel, rhs, 0.0, np.inf, "max")
    sol = lpmod.solve_with_basis_hint(lpb, hint, ev.tol)
    ev.lp_solves += 1
    if not sol.optimal:
        raise RegretError(f"node bound LP {sol.status.value}: {sol.witness}")
    lam = sol.primal[npi:]
    return sol.objective_value, lam @ corners_p, sol.basis


def solve_subproblem(problem: RegretProblem, x, gap: float, evaluator: Optional[Evaluator] = None,
                     node_limit: int = DEFAULT_NODE_LIMIT, rel_gap: float = 1e-8) -> SubproblemResult:
    """Branch-and-bound for ``sp(x)`` over the price box.

    A node's bound replaces g2 by its concave envelope from the node corners
    (exact at corners and wherever g2 is affine) and keeps g1 exact, giving
    one joint LP in (pi, corner weights). Incumbents come from corner and
    bound-point evaluations refined by :func:`alternating_ascent`.
    """
    if gap <= 0:
        raise ValueError("gap must be positive")
    ev = evaluator or Evaluator(problem)
    x = np.asarray(x, float)
    sub = build_subproblem(problem, x)
    obj_pi = sub.pi_objective
    lo, hi = problem.price_bounds()
    width = hi - lo
    active = [j for j in range(problem.n_p) if width[j] > 0 and np.any(problem.A[j] != 0)]
    base = 0.5 * (lo + hi)
    root_w = width.copy()

    def corner_points(nlo, nhi):
        pts = []
        for bits in range(1 << len(active)):
            p = base.copy()
            for k, j in enumerate(active):
                # first active component varies slowest
                p[j] = nhi[j] if (bits >> (len(active) - 1 - k)) & 1 else nlo[j]
            pts.append(p)
        return np.array(pts)

    g1_cache = {}

    def value_at(p):
        key = tuple(np.round(p, 15))
        if key not in g1_cache:
            g1_cache[key] = ev.g1(x, p)[0]
        return g1_cache[key] + ev.g2(p)[0]

    best_p, best_val = None, -np.inf

    def consider(p):
        nonlocal best_p, best_val
        v = value_at(p)
        if v > best_val + 1e-12 * max(1.0, abs(v)):
            best_p, best_val = p.copy(), v
            return True
        return False

    counter = 0
    heap = []

    def push(nlo, nhi, parent_bound, hint):
        nonlocal counter
        pts = corner_points(nlo, nhi)
        g2v = np.array([ev.g2(p)[0] for p in pts])
        for p in pts:
            consider(p)
        if not active:
            bound = best_val
            basis = None
        else:
            bound, p_hat, basis = _node_bound(problem, obj_pi, pts, g2v, ev, hint)
            consider(np.clip(p_hat, nlo, nhi))
            bound = min(bound, parent_bound)
        heapq.heappush(heap, (-bound, counter, nlo, nhi, basis))
        counter += 1

    push(lo.copy(), hi.copy(), np.inf, None)
    refined_from = None
    nodes = 1
    converged = True
    upper = -np.inf
    while heap:
        neg_bound, _, nlo, nhi, basis = heap[0]
        bound = -neg_bound
        if refined_from is None or not np.array_equal(refined_from, best_p):
            scen = alternating_ascent(problem, x, best_p, ev)
            refined_from = best_p.copy()
            if scen.value > best_val:
                best_p, best_val = scen.p.copy(), scen.value
                refined_from = best_p.copy()
        tol_here = max(gap, rel_gap * max(1.0, abs(best_val)))
        if bound - best_val <= tol_here:
            upper = max(bound, best_val)
            break
        if nodes >= node_limit:
            converged = False
            upper = bound
            break
        heapq.heappop(heap)
        rel = np.where(root_w > 0, (nhi - nlo) / np.where(root_w > 0, root_w, 1.0), 0.0)
        rel_active = np.array([rel[j] for j in active])
        j = active[int(np.argmax(rel_active))]
        mid = 0.5 * (nlo[j] + nhi[j])
        left_hi = nhi.copy()
        left_hi[j] = mid
        right_lo = nlo.copy()
        right_lo[j] = mid
        push(nlo, left_hi, bound, basis)
        push(right_lo, nhi, bound, basis)
        nodes += 2
    else:
        upper = best_val

    scen = _scenario(ev, x, best_p)
    return SubproblemResult(max(upper, scen.value), scen, scen.value, nodes, converged)


# ---------------------------------------------------------------------------
# main problems


def main_cg(problem: RegretProblem, pool, eta_floor: float = ETA_FLOOR, hint=None):
    """Master LP with one dual cut per scenario; returns (x, eta, solution)."""
    nx = problem.n_x
    rows, rhs = [], []
    for s in pool:
        if s.pi is None:
            raise ValueError("constraint generation needs scenario duals")
        comp = -s_value_g2(problem, s)
        rows.append(np.concatenate([s.pi @ problem.B, [1.0]]))
        rhs.append(float(s.pi @ problem.d) - comp)
    G = problem.G
    rows_all = np.vstack(rows + [np.hstack([G, np.zeros((G.shape[0], 1))])]) if (rows or G.size) else np.zeros((0, nx + 1))
    rhs_all = np.concatenate([rhs, problem.h])
    lpm = LinearProgram(
        np.concatenate([problem.c, [1.0]]),
        rows_all,
        (GE,) * rhs_all.size,
        rhs_all,
        np.concatenate([np.zeros(nx), [eta_floor]]),
        np.inf,
    )
    sol = lpmod.solve_with_basis_hint(lpm, hint) if hint is not None else lpmod.solve(lpm)
    if sol.status is Status.UNBOUNDED and pool and np.isinf(eta_floor):
        return main_cg(problem, pool, ETA_FLOOR)
    if sol.status is Status.UNBOUNDED:
        raise RegretError("main problem unbounded")
    if not sol.optimal:
        raise InfeasibleFirstStage(f"main problem {sol.status.value}: {sol.witness}")
    return sol.primal[:nx].copy(), float(sol.primal[nx]), sol


def s_value_g2(problem: RegretProblem, s: Scenario) -> float:
    """g2 at the scenario's price, recomputed from its comparator point."""
    return float(-(problem.c @ s.x_star) - s.p @ (problem.A @ s.y_star))


def main_ccg(problem: RegretProblem, pool, eta_floor: float = ETA_FLOOR):
    """Master LP with a fresh recourse block per scenario; returns (x, eta, [y_l], solution)."""
    nx, ny, nd = problem.n_x, problem.n_y, problem.d.size
    k = len(pool)
    nv = nx + 1 + k * ny
    blocks, rhs = [], []
    for l, s in enumerate(pool):
        comp = -s_value_g2(problem, s)
        r = np.zeros(nv)
        r[nx] = 1.0
        r[nx + 1 + l * ny : nx + 1 + (l + 1) * ny] = -(problem.A.T @ s.p)
        blocks.append(r[None, :])
        rhs.append([-comp])
        link = np.zeros((nd, nv))
        link[:, :nx] = problem.B
        link[:, nx + 1 + l * ny : nx + 1 + (l + 1) * ny] = problem.C
        blocks.append(link)
        rhs.append(problem.d)
    g = np.zeros((problem.G.shape[0], nv))
    g[:, :nx] = problem.G
    blocks.append(g)
    rhs.append(problem.h)
    M = np.vstack(blocks)
    b = np.concatenate(rhs)
    lo = np.zeros(nv)
    lo[nx] = eta_floor
    obj = np.zeros(nv)
    obj[:nx] = problem.c
    obj[nx] = 1.0
    sol = lpmod.solve(LinearProgram(obj, M, (GE,) * b.size, b, lo, np.inf))
    if sol.status is Status.UNBOUNDED and pool and np.isinf(eta_floor):
        return main_ccg(problem, pool, ETA_FLOOR)
    if sol.status is Status.UNBOUNDED:
        raise RegretError("main problem unbounded")
    if not sol.optimal:
        raise InfeasibleFirstStage(f"main problem {sol.status.value}: {sol.witness}")
    ys = [sol.primal[nx + 1 + l * ny : nx + 1 + (l + 1) * ny].copy() for l in range(k)]
    return sol.primal[:nx].copy(), float(sol.primal[nx]), ys, sol


# ---------------------------------------------------------------------------
# Algorithm loop


@dataclasses.dataclass
class IterationRecord:
    lb: float
    ub: float
    wall_time: float


@dataclasses.dataclass(eq=False)
class RegretCertificate:
    design: np.ndarray
    lower_bound: float
    upper_bound: float
    epsilon: float
    iterations: int
    scenario_pool: list
    history: list
    worst_scenario: np.ndarray
    algorithm: str
    status: str  # converged | stalled | iteration_limit | subproblem_gap
    x_names: tuple = ()
    p_names: tuple = ()
    wall_time: float = 0.0

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def value(self) -> float:
        return self.upper_bound

    def design_by_name(self) -> dict:
        names = self.x_names or tuple(f"x{i}" for i in range(self.design.size))
        return {n: float(v) for n, v in zip(names, self.design)}

    def display_design(self, atol: float = 1e-9) -> dict:
        """Like :meth:`design_by_name` with solver noise below ``atol`` shown as zero."""
        return {n: v if abs(v) > atol else 0.0 for n, v in self.design_by_name().items()}

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "status": self.status,
            "epsilon": self.epsilon,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "iterations": self.iterations,
            "wall_time": self.wall_time,
            "design": self.design_by_name(),
            "worst_scenario": dict(zip(self.p_names or [f"p{i}" for i in range(self.worst_scenario.size)],
                                       map(float, self.worst_scenario))),
            "history": [dataclasses.asdict(h) for h in self.history],
            "scenario_pool": [s.to_dict() for s in self.scenario_pool],
        }

    @classmethod
    def from_dict(cls, doc) -> "RegretCertificate":
        names = tuple(doc["design"].keys())
        pnames = tuple(doc["worst_scenario"].keys())
        return cls(
            design=np.array(list(doc["design"].values()), float),
            lower_bound=doc["lower_bound"],
            upper_bound=doc["upper_bound"],
            epsilon=doc["epsilon"],
            iterations=doc["iterations"],
            scenario_pool=[Scenario.from_dict(s) for s in doc["scenario_pool"]],
            history=[IterationRecord(**h) for h in doc["history"]],
            worst_scenario=np.array(list(doc["worst_scenario"].values()), float),
            algorithm=doc["algorithm"],
            status=doc["status"],
            x_names=names,
            p_names=pnames,
            wall_time=doc.get("wall_time", 0.0),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text) -> "RegretCertificate":
        return cls.from_dict(json.loads(text))

    CSV_HEADER = ("algorithm", "status", "epsilon", "lower_bound", "upper_bound", "iterations", "wall_time")

    def csv_row(self) -> str:
        vals = (self.algorithm, self.status, repr(self.epsilon), repr(self.lower_bound),
                repr(self.upper_bound), str(self.iterations), f"{self.wall_time:.3f}")
        return ",".join(vals)


def _same_scenario(a: Scenario, b: Scenario, algorithm: str, rtol=1e-9) -> bool:
    if not np.allclose(a.p, b.p, rtol=rtol, atol=rtol):
        return False
    if algorithm == "ccg":
        return True
    return a.pi is not None and b.pi is not None and np.allclose(a.pi, b.pi, rtol=rtol, atol=rtol)


def run(problem: RegretProblem, algorithm: str = "ccg", epsilon: float = 100.0,
        sp_gap: Optional[float] = None, max_iter: int = DEFAULT_MAX_ITER,
        node_limit: int = DEFAULT_NODE_LIMIT, eta_floor: float = ETA_FLOOR) -> RegretCertificate:
    """Alternate main and subproblem until the bounds are within ``epsilon``."""
    algorithm = algorithm.lower()
    if algorithm not in ("cg", "ccg"):
        raise ValueError(f"algorithm must be 'cg' or 'ccg', got {algorithm!r}")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    sp_gap = epsilon / 10.0 if sp_gap is None else sp_gap
    t0 = time.perf_counter()
    ev = Evaluator(problem)
    pool: list = []
    history: list = []
    lb, ub = -np.inf, np.inf
    best_x, worst_p = None, None
    status = "converged"
    cg_hint = None

    def main(pool):
        nonlocal cg_hint
        # eta only needs the artificial floor until the first cut exists
        floor = eta_floor if not pool else -np.inf
        if algorithm == "cg":
            x, eta, sol = main_cg(problem, pool, floor, cg_hint)
            cg_hint = sol.basis
            return x, eta
        x, eta, _, _ = main_ccg(problem, pool, floor)
        return x, eta

    def step(x, eta):
        nonlocal lb, ub, best_x, worst_p, status
        res = solve_subproblem(problem, x, sp_gap, ev, node_limit)
        cx = float(problem.c @ x)
        lb = max(lb, cx + eta)
        if cx + res.upper < ub:
            ub = cx + res.upper
            best_x, worst_p = x.copy(), res.incumbent.p.copy()
        if not res.converged:
            status = "subproblem_gap"
        history.append(IterationRecord(lb, ub, time.perf_counter() - t0))
        return res.incumbent

    x, eta = main(pool)
    pool.append(step(x, eta))
    k = 1
    while ub - lb > epsilon:
        if k > max_iter:
            status = "iteration_limit"
            break
        x, eta = main(pool)
        scen = step(x, eta)
        k += 1
        if ub - lb <= epsilon:
            break
        if any(_same_scenario(scen, s, algorithm) for s in pool):
            status = "stalled"
            break
        pool.append(scen)
    if status == "converged" and ub - lb > epsilon:
        status = "stalled"
    return RegretCertificate(
        design=best_x,
        lower_bound=float(lb),
        upper_bound=float(ub),
        epsilon=float(epsilon),
        iterations=k - 1,
        scenario_pool=pool,
        history=history,
        worst_scenario=worst_p,
        algorithm=algorithm,
        status=status,
        x_names=problem.x_names,
        p_names=problem.p_names,
        wall_time=time.perf_counter() - t0,
    )
