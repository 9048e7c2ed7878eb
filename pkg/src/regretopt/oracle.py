"""Brute-force min-max regret over a price lattice.

Used as an independent check of the decomposition: no branch-and-bound, no
main problems. Every LP value on the lattice comes from a direct solve or
from a basis proven optimal for that lattice point.
"""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np

from . import lp as lpmod
from .lp import GE, LinearProgram
from .regret import Evaluator, RegretProblem, comparator_lp, design_cost_lp, design_lp, regret_at

MAX_LATTICE = 10**6


class TooLarge(ValueError):
    pass


@dataclasses.dataclass(frozen=True, eq=False)
class OracleResult:
    value: float
    design: np.ndarray
    lower_bound: float  # Kelley bound on the lattice min-max
    lattice_slack: float
    n_candidates: int
    lattice: np.ndarray
    worst_p: np.ndarray


def price_lattice(problem: RegretProblem, grid_n: int):
    """Lattice over the active price axes (corners always included)."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    lo, hi = problem.price_bounds()
    active = [j for j in range(problem.n_p) if hi[j] > lo[j] and np.any(problem.A[j] != 0)]
    if grid_n ** len(active) > MAX_LATTICE:
        raise TooLarge(f"{grid_n}^{len(active)} lattice points exceed {MAX_LATTICE}")
    base = 0.5 * (lo + hi)
    axes = [np.linspace(lo[j], hi[j], grid_n) for j in active]
    pts = np.tile(base, (grid_n ** len(active), 1))
    for r, combo in enumerate(itertools.product(*axes)):
        pts[r, active] = combo
    steps = np.zeros(problem.n_p)
    for j in active:
        steps[j] = (hi[j] - lo[j]) / (grid_n - 1)
    return pts, steps


def _sweep_objectives(lp: LinearProgram, objectives: np.ndarray):
    """Optimal value and primal index for each objective row, reusing bases."""
    N = objectives.shape[0]
    values = np.full(N, np.nan)
    which = np.full(N, -1)
    primals = []
    todo = np.arange(N)
    hint = None
    while todo.size:
        i = todo[0]
        lpi = dataclasses.replace(lp, objective_coeffs=objectives[i])
        sol = lpmod.solve_with_basis_hint(lpi, hint)
        if not sol.optimal:
            raise lpmod.NumericalBreakdown(f"oracle LP {sol.status.value}: {sol.witness}")
        hint = sol.basis
        mask = lpmod.optimal_for_objectives(lpi, sol.basis, objectives[todo])
        mask[0] = True
        hit = todo[mask]
        values[hit] = objectives[hit] @ sol.primal
        which[hit] = len(primals)
        primals.append(sol.primal.copy())
        todo = todo[~mask]
    return values, which, primals


def oracle_regret(problem: RegretProblem, grid_n: int = 101, kelley_iters: int = 60,
                  kelley_tol: float = 1e-3) -> OracleResult:
    """Min over candidate designs of the max regret over the lattice.

    Candidates are the optimal designs of the design-side cost LP at each
    lattice point, plus the iterates of a cutting-plane method on the convex
    lattice-max regret, which also supplies a lower bound.
    """
    pts, steps = price_lattice(problem, grid_n)
    nx = problem.n_x

    comp = comparator_lp(problem, pts[0])
    obj = np.hstack([np.tile(problem.c, (len(pts), 1)), pts @ problem.A])
    cvals, _, cprim = _sweep_objectives(comp, obj)
    g2 = -cvals
    e_comp = np.max([np.abs(problem.A @ z[nx:]) for z in cprim], axis=0)

    cost = design_cost_lp(problem, pts[0])
    _, _, dprim = _sweep_objectives(cost, obj)
    candidates = [z[:nx] for z in dprim]

    e_design = np.zeros(problem.n_p)
    cache = {}

    def lattice_max(x):
        nonlocal e_design
        key = tuple(np.round(x, 12))
        if key in cache:
            return cache[key]
        dl = design_lp(problem, x, pts[0])
        vals, which, prim = _sweep_objectives(dl, pts @ problem.A)
        for y in prim:
            e_design = np.maximum(e_design, np.abs(problem.A @ y))
        reg = problem.c @ x + vals + g2
        i = int(np.argmax(reg))
        # subgradient in x: c - B^T pi at the worst lattice point
        dsol = lpmod.solve(design_lp(problem, x, pts[i]))
        sub = problem.c - problem.B.T @ dsol.duals
        cache[key] = (float(reg[i]), i, sub)
        return cache[key]

    best_val, best_x, best_i = np.inf, None, -1
    for x in candidates:
        v, i, _ = lattice_max(x)
        if v < best_val:
            best_val, best_x, best_i = v, x, i

    # cutting planes on F(x) = max_lattice regret(x, p) over G x >= h, 0 <= x <= U
    U = 2.0 * max(1.0, max(float(np.max(x)) for x in candidates))
    cuts = []
    for x in candidates:
        v, _, s = lattice_max(x)
        cuts.append((v, x, s))
    lower = -np.inf
    for _ in range(kelley_iters):
        rows = [np.concatenate([-s, [1.0]]) for _, _, s in cuts]
        rhs = [v - s @ x for v, x, s in cuts]
        G = np.hstack([problem.G, np.zeros((problem.G.shape[0], 1))])
        M = np.vstack(rows + [G])
        b = np.concatenate([rhs, problem.h])
        kl = LinearProgram(np.concatenate([np.zeros(nx), [1.0]]), M, (GE,) * b.size, b,
                           np.concatenate([np.zeros(nx), [-np.inf]]), np.concatenate([np.full(nx, U), [np.inf]]))
        sol = lpmod.solve(kl)
        if not sol.optimal:
            break
        lower = float(sol.objective_value)
        xk = sol.primal[:nx]
        v, i, s = lattice_max(xk)
        if v < best_val:
            best_val, best_x, best_i = v, xk.copy(), i
        cuts.append((v, xk.copy(), s))
        if best_val - lower <= kelley_tol * max(1.0, abs(best_val)):
            break

    slack = float(0.5 * steps @ (e_design + e_comp))
    return OracleResult(best_val, best_x, lower, slack, len(cache), pts, pts[best_i])


def corner_regret(problem: RegretProblem, x) -> float:
    """Max regret of ``x`` over the box corners only."""
    pts, _ = price_lattice(problem, 2)
    ev = Evaluator(problem)
    return max(regret_at(problem, x, p, ev) for p in pts)
