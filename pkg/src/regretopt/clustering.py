"""Representative-day selection by k-medoids (PAM: build then swap)."""

from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import warnings
from typing import Optional, Sequence

import numpy as np

from .model import RepresentativeDay

DAYS_PER_YEAR = 365.0


class DegenerateInput(UserWarning):
    pass


@dataclasses.dataclass(frozen=True, eq=False)
class DayProfile:
    tag: str
    heat: np.ndarray
    cold: np.ndarray
    extra: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "heat", np.asarray(self.heat, dtype=float))
        object.__setattr__(self, "cold", np.asarray(self.cold, dtype=float))
        object.__setattr__(self, "extra", {k: np.asarray(v, dtype=float) for k, v in self.extra.items()})
        n = self.heat.shape
        if self.cold.shape != n or any(v.shape != n for v in self.extra.values()):
            raise ValueError(f"day {self.tag}: series lengths differ")
        for v in (self.heat, self.cold, *self.extra.values()):
            if not np.all(np.isfinite(v)):
                raise ValueError(f"day {self.tag}: non-finite values")


@dataclasses.dataclass(frozen=True)
class ClusteringResult:
    days: tuple  # RepresentativeDay per medoid
    medoids: tuple  # indices into the input profiles
    labels: np.ndarray
    cost: float
    cost_history: tuple  # total distance after build and after each swap


def feature_matrix(profiles: Sequence[DayProfile], use_extra: bool = False) -> np.ndarray:
    """Concatenate per-series z-normalised vectors, one row per day."""
    blocks = [np.array([p.heat for p in profiles]), np.array([p.cold for p in profiles])]
    if use_extra and profiles[0].extra:
        for key in sorted(profiles[0].extra):
            blocks.append(np.array([p.extra[key] for p in profiles]))
    out = []
    for b in blocks:
        sd = b.std()
        out.append((b - b.mean()) / sd if sd > 0 else b - b.mean())
    return np.hstack(out)


def distance_matrix(features: np.ndarray) -> np.ndarray:
    diff = features[:, None, :] - features[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def total_cost(D: np.ndarray, medoids) -> float:
    return float(D[:, list(medoids)].min(axis=1).sum())


def _build(D, k, rng):
    n = D.shape[0]
    # first medoid minimises total distance; ties broken by a seeded permutation
    order = rng.permutation(n)
    sums = D.sum(axis=1)
    first = int(order[np.argmin(sums[order])])
    medoids = [first]
    nearest = D[:, first].copy()
    while len(medoids) < k:
        gains = np.maximum(nearest[:, None] - D, 0.0).sum(axis=0)
        gains[medoids] = -np.inf
        cand = int(order[np.argmax(gains[order])])
        if gains[cand] <= 0:
            break
        medoids.append(cand)
        nearest = np.minimum(nearest, D[:, cand])
    return medoids


def _swap(D, medoids, history, max_iter=1000):
    n = D.shape[0]
    cost = total_cost(D, medoids)
    for _ in range(max_iter):
        best = (0.0, None, None)
        for mi, m in enumerate(medoids):
            others = medoids[:mi] + medoids[mi + 1:]
            base = D[:, others].min(axis=1) if others else np.full(n, np.inf)
            for h in range(n):
                if h in medoids:
                    continue
                c = float(np.minimum(base, D[:, h]).sum())
                if c < cost + best[0] - 1e-12:
                    best = (c - cost, mi, h)
        if best[1] is None:
            break
        medoids[best[1]] = best[2]
        cost = total_cost(D, medoids)
        history.append(cost)
    return medoids


def k_medoids(profiles: Sequence[DayProfile], k: int, seed: int = 0, use_extra: bool = False) -> ClusteringResult:
    """Pick ``k`` actual days as medoids; weights count members, scaled to 365."""
    N = len(profiles)
    if not 1 <= k <= N:
        raise ValueError(f"k must lie in [1, {N}], got {k}")
    D = distance_matrix(feature_matrix(profiles, use_extra))
    rng = np.random.default_rng(seed)
    medoids = _build(D, k, rng)
    if len(medoids) < k:
        warnings.warn(f"only {len(medoids)} distinct medoids for k={k}", DegenerateInput, stacklevel=2)
    history = [total_cost(D, medoids)]
    medoids = _swap(D, medoids, history)
    medoids = sorted(medoids)
    labels = np.argmin(D[:, medoids], axis=1)
    counts = np.bincount(labels, minlength=len(medoids))
    # distribute 365 so that the float sum is exact
    weights = counts * DAYS_PER_YEAR / N
    weights[-1] = DAYS_PER_YEAR - weights[:-1].sum()
    days = tuple(
        RepresentativeDay(profiles[m].tag, float(w), profiles[m].heat.copy(), profiles[m].cold.copy())
        for m, w in zip(medoids, weights)
    )
    return ClusteringResult(days, tuple(medoids), labels, total_cost(D, medoids), tuple(history))


def exhaustive_medoids(profiles: Sequence[DayProfile], k: int, use_extra: bool = False):
    """Best medoid set by enumeration (small inputs only); returns (indices, cost)."""
    if len(profiles) > 12:
        raise ValueError("exhaustive search is limited to 12 days")
    D = distance_matrix(feature_matrix(profiles, use_extra))
    best = min(itertools.combinations(range(len(profiles)), k), key=lambda m: (total_cost(D, m), m))
    return tuple(best), total_cost(D, best)


def read_profiles_csv(text: str, extra: Optional[Sequence[str]] = None) -> list:
    """Rows ``day, step, heat_kwh, cold_kwh, [extra...]``; days keep first-seen order."""
    reader = csv.DictReader(io.StringIO(text))
    needed = {"day", "step", "heat_kwh", "cold_kwh"}
    if reader.fieldnames is None or not needed <= set(reader.fieldnames):
        raise ValueError(f"CSV needs columns {sorted(needed)}")
    extra = list(extra) if extra is not None else [c for c in reader.fieldnames if c not in needed]
    rows = {}
    for r in reader:
        rows.setdefault(r["day"], []).append(r)
    out = []
    for tag, rs in rows.items():
        rs = sorted(rs, key=lambda r: int(r["step"]))
        steps = [int(r["step"]) for r in rs]
        if steps != list(range(len(rs))):
            raise ValueError(f"day {tag}: steps must be 0..n-1, got {steps}")
        out.append(DayProfile(
            tag,
            [float(r["heat_kwh"]) for r in rs],
            [float(r["cold_kwh"]) for r in rs],
            {key: [float(r[key]) for r in rs] for key in extra},
        ))
    lengths = {p.heat.size for p in out}
    if len(lengths) > 1:
        raise ValueError(f"days have different step counts {sorted(lengths)}")
    return out


def days_section(days: Sequence[RepresentativeDay]) -> list:
    """The instance file's ``days`` list."""
    return [
        {"id": d.id, "weight": d.weight, "heat_load": d.heat_load.tolist(), "cold_load": d.cold_load.tolist()}
        for d in days
    ]
