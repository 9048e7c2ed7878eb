"""Box price uncertainty around the nominal prices."""

from __future__ import annotations

import dataclasses
import itertools
from typing import Mapping, Optional

import numpy as np

from .model import RESOURCES, PriceVector

CONTAINS_SLACK = 1e-9


@dataclasses.dataclass(frozen=True)
class PriceBox:
    """Each free price may deviate from nominal by a relative ``alpha``.

    Prices not listed in ``free`` stay pinned at their nominal value.
    """

    nominal: PriceVector
    alpha: float
    free: tuple = RESOURCES

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        unknown = set(self.free) - set(RESOURCES)
        if unknown:
            raise ValueError(f"unknown price components {sorted(unknown)}")
        object.__setattr__(self, "free", tuple(r for r in RESOURCES if r in self.free))
        if np.any(self.nominal.as_array() < 0):
            raise ValueError("nominal prices must be nonnegative")

    def bounds(self):
        nom = self.nominal.as_array()
        a = np.array([self.alpha if r in self.free else 0.0 for r in RESOURCES])
        return nom * (1.0 - a), nom * (1.0 + a)

    def free_indices(self):
        """Indices of components whose interval has positive width."""
        lo, hi = self.bounds()
        return [i for i in range(len(RESOURCES)) if hi[i] > lo[i]]


def to_polyhedron(box: PriceBox, pinned: Optional[Mapping[str, float]] = None):
    """Rows ``E @ p >= f`` for the box plus equality pairs for pseudo prices.

    Returns ``(E, f, row_names)``; columns are the five resources followed by
    the pinned pseudo prices in mapping order.
    """
    pinned = dict(pinned or {})
    n_p = len(RESOURCES) + len(pinned)
    lo, hi = box.bounds()
    rows, rhs, names = [], [], []
    for i, r in enumerate(RESOURCES):
        e = np.zeros(n_p)
        e[i] = 1.0
        rows += [e, -e]
        rhs += [lo[i], -hi[i]]
        names += [f"{r}:lower", f"{r}:upper"]
    for k, (name, value) in enumerate(pinned.items()):
        e = np.zeros(n_p)
        e[len(RESOURCES) + k] = 1.0
        rows += [e, -e]
        rhs += [value, -value]
        names += [f"{name}:pin_ge", f"{name}:pin_le"]
    return np.array(rows), np.array(rhs, dtype=float), tuple(names)


def corners(box: PriceBox) -> list:
    """All corners over the free components, first component slowest, low before high."""
    lo, hi = box.bounds()
    free = box.free_indices()
    out = []
    for choice in itertools.product((0, 1), repeat=len(free)):
        p = box.nominal.as_array().copy()
        for idx, bit in zip(free, choice):
            p[idx] = hi[idx] if bit else lo[idx]
        out.append(PriceVector.from_array(p))
    return out


def contains(box: PriceBox, p) -> bool:
    arr = p.as_array() if isinstance(p, PriceVector) else np.asarray(p, dtype=float)
    if arr.shape != (len(RESOURCES),):
        raise ValueError(f"price vector must have {len(RESOURCES)} components")
    lo, hi = box.bounds()
    return bool(np.all(arr >= lo - CONTAINS_SLACK) and np.all(arr <= hi + CONTAINS_SLACK))
