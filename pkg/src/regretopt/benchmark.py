"""Paired CG / C&CG runs over a grid of model sizes, alphas and caps."""

from __future__ import annotations

import csv
import dataclasses
import io
import itertools
from typing import Callable, Optional, Sequence

from .model import RESOURCES, ModelInstance
from .regret import run
from .scalarization import ComparatorMode, regret_problem
from .synthetic import benchmark_instance

DEFAULT_SIZES = ((1, 1), (1, 3), (3, 1), (3, 3))
DEFAULT_ALPHAS = (0.3, 0.7)
DEFAULT_CAPS_KG = (30000.0, 60000.0)


@dataclasses.dataclass(frozen=True)
class BenchmarkCell:
    n_days: int
    steps_per_day: int
    alpha: float
    cap_kg: float
    iterations_cg: int
    iterations_ccg: int
    time_cg: float
    time_ccg: float
    value_cg: float
    value_ccg: float
    status_cg: str
    status_ccg: str

    @property
    def iteration_ratio(self) -> float:
        return self.iterations_ccg / self.iterations_cg if self.iterations_cg else float("nan")

    @property
    def time_ratio(self) -> float:
        return self.time_ccg / self.time_cg if self.time_cg > 0 else float("nan")


def run_benchmark(sizes: Sequence = DEFAULT_SIZES, alphas: Sequence = DEFAULT_ALPHAS,
                  caps: Sequence = DEFAULT_CAPS_KG, epsilon: float = 100.0,
                  mode: ComparatorMode = ComparatorMode.UNCONSTRAINED, free=RESOURCES,
                  make: Callable[[int, int], ModelInstance] = benchmark_instance,
                  sp_gap: Optional[float] = None) -> list:
    cells = []
    for (K, n) in sizes:
        inst = make(K, n)
        for alpha, cap in itertools.product(alphas, caps):
            prob = regret_problem(inst, alpha, cap, mode, free)
            cg = run(prob, "cg", epsilon, sp_gap)
            ccg = run(prob, "ccg", epsilon, sp_gap)
            cells.append(BenchmarkCell(
                K, n, float(alpha), float(cap), cg.iterations, ccg.iterations, cg.wall_time, ccg.wall_time,
                cg.upper_bound, ccg.upper_bound, cg.status, ccg.status,
            ))
    return cells


CELL_HEADER = (
    "days", "steps", "alpha", "cap_t", "iterations_cg", "iterations_ccg", "iterations_ratio",
    "time_cg_s", "time_ccg_s", "time_ratio", "regret_cg", "regret_ccg", "status_cg", "status_ccg",
)


def cells_csv(cells: Sequence[BenchmarkCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CELL_HEADER)
    for c in cells:
        w.writerow([
            c.n_days, c.steps_per_day, c.alpha, f"{c.cap_kg / 1000:g}", c.iterations_cg, c.iterations_ccg,
            f"{c.iteration_ratio:.2f}", f"{c.time_cg:.2f}", f"{c.time_ccg:.2f}", f"{c.time_ratio:.2f}",
            f"{c.value_cg:.2f}", f"{c.value_ccg:.2f}", c.status_cg, c.status_ccg,
        ])
    return buf.getvalue()


ROW_LABELS = ("#iterations CG", "#iterations C&CG", "#iterations ratio", "time CG [s]", "time C&CG [s]", "time ratio")


def comparison_table(cells: Sequence[BenchmarkCell]) -> str:
    """Block table: one block per (days, steps), rows per metric, columns per (alpha, cap)."""
    cols = sorted({(c.alpha, c.cap_kg) for c in cells})
    blocks = sorted({(c.n_days, c.steps_per_day) for c in cells})
    by_key = {(c.n_days, c.steps_per_day, c.alpha, c.cap_kg): c for c in cells}
    width = 10
    lines = [
        f"{'alpha':<20}" + "".join(f"{a:>{width}g}" for a, _ in cols),
        f"{'carbon limit [t]':<20}" + "".join(f"{cap / 1000:>{width}g}" for _, cap in cols),
    ]
    getters = (
        lambda c: f"{c.iterations_cg}", lambda c: f"{c.iterations_ccg}", lambda c: f"{c.iteration_ratio:.2f}",
        lambda c: f"{c.time_cg:.2f}", lambda c: f"{c.time_ccg:.2f}", lambda c: f"{c.time_ratio:.2f}",
    )
    for K, n in blocks:
        lines.append(f"|U|={K}, n={n}")
        for label, get in zip(ROW_LABELS, getters):
            vals = [by_key.get((K, n) + col) for col in cols]
            lines.append(f"{label:<20}" + "".join(f"{get(v) if v else '-':>{width}}" for v in vals))
    return "\n".join(lines) + "\n"
