"""Carbon caps on top of the regret problem, the min-carbon anchor and sweeps."""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import lp as lpmod
from .lp import GE, LinearProgram
from .model import RESOURCES, TABLE_ORDER, ModelInstance, StandardFormProblem, _Layout, build_standard_form
from .regret import DEFAULT_MAX_ITER, RegretError, RegretProblem, run
from .uncertainty import PriceBox, to_polyhedron


class ComparatorMode(enum.Enum):
    UNCONSTRAINED = "unconstrained"
    CARBON_CAPPED = "carbon-capped"


class CapBelowFloor(ValueError):
    pass


class CarbonInfeasible(RuntimeError):
    pass


def apply_carbon_cap(problem: RegretProblem, sf: StandardFormProblem, cap: float,
                     mode: ComparatorMode = ComparatorMode.CARBON_CAPPED) -> RegretProblem:
    """Add ``co2 <= cap`` to the linking rows and ``co2_inv <= cap`` to the design rows.

    In carbon-capped mode the comparator receives the same two rows.
    """
    if not cap > 0:
        raise CapBelowFloor(f"carbon cap must be positive, got {cap}")
    mode = ComparatorMode(mode)
    link = (-sf.carbon_x[None, :], -sf.carbon_y[None, :], -float(cap))
    guard = (-sf.carbon_x[None, :], -float(cap))
    if mode is ComparatorMode.CARBON_CAPPED:
        return problem.add_rows(design=link, design_g=guard, comparator=link, comparator_g=guard)
    return problem.add_rows(design=link, design_g=guard)


def regret_problem(instance: ModelInstance, alpha: float, cap: Optional[float] = None,
                   mode: ComparatorMode = ComparatorMode.CARBON_CAPPED, free=RESOURCES,
                   sf: Optional[StandardFormProblem] = None) -> RegretProblem:
    """Compile ``instance`` into the regret problem for one (alpha, cap) cell."""
    sf = sf if sf is not None else build_standard_form(instance)
    box = PriceBox(instance.nominal_prices, alpha, tuple(free))
    E, f, names = to_polyhedron(box, {"dummy": instance.dummy_marginal_cost})
    prob = RegretProblem.from_standard_form(sf.with_polyhedron(E, f, names))
    if cap is not None:
        prob = apply_carbon_cap(prob, sf, cap, mode)
    return prob


def min_carbon(instance: ModelInstance, sf: Optional[StandardFormProblem] = None):
    """Least annual emissions reachable without dummy generation.

    Returns ``(kg, x, y)``.
    """
    sf = sf if sf is not None else build_standard_form(instance)
    lay = _Layout(instance)
    nx, ny = sf.n_x, sf.n_y
    upper = np.full(nx + ny, np.inf)
    for i, dev in enumerate(instance.devices):
        if dev.is_dummy:
            for k in range(lay.K):
                for t in range(lay.n):
                    upper[nx + lay.y_ctrl(i, k, t)] = 0.0
    M = np.vstack([np.hstack([sf.B, sf.C]), np.hstack([sf.G, np.zeros((sf.G.shape[0], ny))])])
    rhs = np.concatenate([sf.d, sf.h])
    obj = np.concatenate([sf.carbon_x, sf.carbon_y])
    sol = lpmod.solve(LinearProgram(obj, M, (GE,) * rhs.size, rhs, 0.0, upper))
    if not sol.optimal:
        raise CarbonInfeasible(f"loads cannot be met without dummies ({sol.status.value})")
    return float(sol.objective_value), sol.primal[:nx].copy(), sol.primal[nx:].copy()


@dataclasses.dataclass(frozen=True)
class TradeoffRecord:
    alpha: float
    cap_kg: float
    regret_lb: float
    regret_ub: float
    iterations: int
    wall_time: float
    algorithm: str
    sizes: dict
    mode: str
    status: str = "converged"


def _cell(args):
    base, sf, instance, alpha, cap, algorithm, epsilon, sp_gap, mode, free, max_iter = args
    t0 = time.perf_counter()
    try:
        box = PriceBox(instance.nominal_prices, alpha, tuple(free))
        E, f, names = to_polyhedron(box, {"dummy": instance.dummy_marginal_cost})
        prob = dataclasses.replace(base, E=E, f=f)
        prob = apply_carbon_cap(prob, sf, cap, mode)
        cert = run(prob, algorithm, epsilon, sp_gap, max_iter=max_iter)
    except (RegretError, lpmod.LpError, ValueError) as exc:
        return TradeoffRecord(alpha, cap, float("nan"), float("nan"), 0, time.perf_counter() - t0,
                              algorithm, {}, ComparatorMode(mode).value, f"error: {exc}")
    return TradeoffRecord(
        alpha, cap, cert.lower_bound, cert.upper_bound, cert.iterations, cert.wall_time, algorithm,
        cert.display_design(), ComparatorMode(mode).value, cert.status,
    )


def sweep(instance: ModelInstance, alphas: Sequence[float], caps: Sequence[float], algorithm: str = "ccg",
          epsilon: float = 100.0, mode: ComparatorMode = ComparatorMode.CARBON_CAPPED, free=RESOURCES,
          sp_gap: Optional[float] = None, jobs: int = 1, max_iter: int = DEFAULT_MAX_ITER) -> list:
    """One regret run per (alpha, cap) cell, alpha-major."""
    if any(not c > 0 for c in caps):
        raise CapBelowFloor("all caps must be positive")
    if any(a < 0 for a in alphas):
        raise ValueError("alphas must be nonnegative")
    sf = build_standard_form(instance)
    base = RegretProblem.from_standard_form(sf)
    cells = [(base, sf, instance, float(a), float(c), algorithm, epsilon, sp_gap, ComparatorMode(mode), tuple(free), max_iter)
             for a in alphas for c in caps]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_cell, cells))
    return [_cell(c) for c in cells]


FRONT_HEADER = ("alpha", "cap_kg", "regret_lb", "regret_ub", "iterations", "time_s", "status") + TABLE_ORDER


def _num(v: float) -> str:
    return repr(float(v))


def front_csv(records: Sequence[TradeoffRecord], timing: bool = True) -> str:
    """CSV text of a sweep; without ``timing`` the time column is left blank."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FRONT_HEADER)
    for r in records:
        cap = int(r.cap_kg) if float(r.cap_kg).is_integer() else r.cap_kg
        row = [_num(r.alpha), cap, _num(r.regret_lb), _num(r.regret_ub), r.iterations,
               f"{r.wall_time:.3f}" if timing else "", r.status]
        row += [_num(r.sizes[a]) if a in r.sizes else "" for a in TABLE_ORDER]
        w.writerow(row)
    return buf.getvalue()


def read_front_csv(text: str) -> list:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        sizes = {a: float(row[a]) for a in TABLE_ORDER if row.get(a)}
        out.append(TradeoffRecord(
            float(row["alpha"]), float(row["cap_kg"]), float(row["regret_lb"]), float(row["regret_ub"]),
            int(row["iterations"]), float(row["time_s"]) if row["time_s"] else 0.0, "", sizes, "", row["status"],
        ))
    return out
