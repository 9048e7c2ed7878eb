"""Building energy supply model: instance schema, objectives, standard form.

The standard form follows the two-stage regret layout::

    design cost     c @ x
    operating cost  p @ (A @ y)
    linking rows    B @ x + C @ y >= d
    price rows      E @ p >= f_u
    design rows     G @ x >= h

with ``x`` the device and storage sizes and ``y`` the controls and storage
states. All equalities are split into two ``>=`` rows.
"""

from __future__ import annotations

import dataclasses
import json
import math
from importlib import resources
from typing import Optional, Sequence

import numpy as np

# price vector order used throughout (buy electricity, sell electricity,
# wood pellets, gas, district heat)
RESOURCES = ("e", "el", "w", "g", "h")
# device coefficient series: consumptions e, k, w, g, t; productions el, h, c
SERIES = ("e", "el", "k", "w", "g", "t", "h", "c")
DUMMY_PRICE = "dummy"

# display order of device abbreviations
TABLE_ORDER = (
    "AWHP", "AdC", "AC", "BWHP", "CU", "CS", "CC", "C-Dummy", "DH", "FC", "GB",
    "H-Dummy", "HS", "PB", "PV", "rev. AWHP", "rev. BWHP", "rev. WWHP", "ST", "WWHP",
)
PV_ROOF_FACTOR = 2.975


class InvalidInstance(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class DimensionMismatch(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class PriceVector:
    """Resource prices in EUR/kWh."""

    e: float
    el: float
    w: float
    g: float
    h: float

    def as_array(self) -> np.ndarray:
        return np.array([self.e, self.el, self.w, self.g, self.h], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "PriceVector":
        arr = [float(v) for v in arr]
        return cls(*arr[: len(RESOURCES)])

    def to_dict(self):
        return dataclasses.asdict(self)


# nominal prices in EUR per kWh
NOMINAL_PRICES = PriceVector(e=0.2074, el=0.2074, w=0.0817, g=0.0934, h=0.095)


@dataclasses.dataclass(frozen=True)
class CarbonFactors:
    """kg CO2-eq per kWh of each resource; ``el`` is the credit for selling."""

    e: float
    el: float
    w: float
    g: float
    h: float

    def as_array(self) -> np.ndarray:
        return np.array([self.e, self.el, self.w, self.g, self.h], dtype=float)


@dataclasses.dataclass(frozen=True)
class TimeGrid:
    steps_per_day: int

    @property
    def step_hours(self) -> float:
        return 24.0 / self.steps_per_day


@dataclasses.dataclass(frozen=True, eq=False)
class RepresentativeDay:
    id: str
    weight: float
    heat_load: np.ndarray
    cold_load: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "heat_load", np.asarray(self.heat_load, dtype=float))
        object.__setattr__(self, "cold_load", np.asarray(self.cold_load, dtype=float))


@dataclasses.dataclass(frozen=True, eq=False)
class DeviceSpec:
    """A converter type with per-size-unit coefficient series of shape (days, steps).

    ``base_price``/``base_carbon`` and the ``k`` series are kept for
    completeness but enter no objective or constraint.
    """

    name: str
    abbreviation: str
    depreciation_price: float
    depreciation_carbon: float
    series: dict
    is_dummy: bool = False
    roof_area_per_unit: float = 0.0
    reversible_partner: Optional[str] = None
    reversible_ratio: float = 1.0
    adsorption_linked: bool = False
    base_price: float = 0.0
    base_carbon: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "series", {k: np.asarray(v, dtype=float) for k, v in self.series.items()}
        )

    def coeff(self, key: str, shape) -> np.ndarray:
        arr = self.series.get(key)
        if arr is None:
            return np.zeros(shape)
        return np.broadcast_to(arr, shape)

    @property
    def dummy_kind(self) -> Optional[str]:
        if not self.is_dummy:
            return None
        if np.any(self.series.get("h", 0) > 0):
            return "heat"
        if np.any(self.series.get("c", 0) > 0):
            return "cold"
        return None


@dataclasses.dataclass(frozen=True)
class StorageSpec:
    kind: str
    price: float
    carbon: float


@dataclasses.dataclass(frozen=True, eq=False)
class ModelInstance:
    grid: TimeGrid
    days: tuple
    devices: tuple
    heat_storage: StorageSpec
    cold_storage: StorageSpec
    nominal_prices: PriceVector
    carbon: CarbonFactors
    roof_area_total: float
    dummy_size: float
    dummy_marginal_cost: float

    def __post_init__(self):
        object.__setattr__(self, "days", tuple(self.days))
        object.__setattr__(self, "devices", tuple(self.devices))

    @property
    def n_steps(self) -> int:
        return self.grid.steps_per_day

    @property
    def n_days(self) -> int:
        return len(self.days)

    @property
    def weights(self) -> np.ndarray:
        return np.array([d.weight for d in self.days], dtype=float)

    def device_index(self, abbreviation: str) -> int:
        for i, dev in enumerate(self.devices):
            if dev.abbreviation == abbreviation or dev.name == abbreviation:
                return i
        raise KeyError(abbreviation)

    def series(self, key: str) -> np.ndarray:
        """Coefficient ``key`` for every device, shape (devices, days, steps)."""
        shape = (self.n_days, self.n_steps)
        return np.stack([dev.coeff(key, shape) for dev in self.devices]) if self.devices else np.zeros((0,) + shape)

    def replace(self, **changes) -> "ModelInstance":
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True, eq=False)
class DesignVector:
    device_sizes: np.ndarray
    heat_storage: float = 0.0
    cold_storage: float = 0.0


@dataclasses.dataclass(frozen=True, eq=False)
class ControlVector:
    """Device loads (devices, days, steps) and storage states (days, steps + 1)."""

    loads: np.ndarray
    heat_state: np.ndarray
    cold_state: np.ndarray


# ---------------------------------------------------------------------------
# dummies


def default_dummy_parameters(days: Sequence[RepresentativeDay], prices: PriceVector):
    """Dummy size of 10x the peak per-step load and cost of 1000x the top price."""
    peak = max(float(np.max(d.heat_load + d.cold_load, initial=0.0)) for d in days)
    size = 10.0 * max(peak, 1.0)
    cost = 1000.0 * float(np.max(prices.as_array()))
    return size, cost


def dummy_devices(n_days: int, n_steps: int):
    ones = np.ones((n_days, n_steps))
    return (
        DeviceSpec("heating dummy", "H-Dummy", 0.0, 0.0, {"h": ones}, is_dummy=True),
        DeviceSpec("cooling dummy", "C-Dummy", 0.0, 0.0, {"c": ones}, is_dummy=True),
    )


# ---------------------------------------------------------------------------
# objectives


def derived_price_coeff(instance: ModelInstance, i: int, t: int, k: int, p: PriceVector) -> float:
    """Operating cost per size unit of device ``i`` in step ``t`` of day ``k``."""
    dev = instance.devices[i]
    shape = (instance.n_days, instance.n_steps)
    if not (0 <= t < shape[1] and 0 <= k < shape[0]):
        raise IndexError(f"step {t} / day {k} out of range")
    c = {key: float(dev.coeff(key, shape)[k, t]) for key in ("e", "el", "w", "g", "t")}
    return c["e"] * p.e - c["el"] * p.el + c["w"] * p.w + c["g"] * p.g + c["t"] * p.h


def derived_carbon_coeff(instance: ModelInstance, i: int, t: int, k: int) -> float:
    dev = instance.devices[i]
    cf = instance.carbon
    shape = (instance.n_days, instance.n_steps)
    if not (0 <= t < shape[1] and 0 <= k < shape[0]):
        raise IndexError(f"step {t} / day {k} out of range")
    c = {key: float(dev.coeff(key, shape)[k, t]) for key in ("e", "el", "w", "g", "t")}
    return c["e"] * cf.e - c["el"] * cf.el + c["w"] * cf.w + c["g"] * cf.g + c["t"] * cf.h


def _price_coeff_array(instance, p: PriceVector):
    return (
        instance.series("e") * p.e
        - instance.series("el") * p.el
        + instance.series("w") * p.w
        + instance.series("g") * p.g
        + instance.series("t") * p.h
    )


def _carbon_coeff_array(instance):
    cf = instance.carbon
    return (
        instance.series("e") * cf.e
        - instance.series("el") * cf.el
        + instance.series("w") * cf.w
        + instance.series("g") * cf.g
        + instance.series("t") * cf.h
    )


def _dummy_energy(instance) -> np.ndarray:
    """Energy per size unit delivered by dummies (zero for real devices)."""
    mask = np.array([dev.is_dummy for dev in instance.devices], dtype=float)
    return (instance.series("h") + instance.series("c")) * mask[:, None, None]


def _check_dims(instance, design: DesignVector, controls: Optional[ControlVector]):
    nd = len(instance.devices)
    if np.shape(design.device_sizes) != (nd,):
        raise DimensionMismatch(f"expected {nd} device sizes, got {np.shape(design.device_sizes)}")
    if controls is not None:
        K, n = instance.n_days, instance.n_steps
        if np.shape(controls.loads) != (nd, K, n):
            raise DimensionMismatch(f"controls shape {np.shape(controls.loads)} != {(nd, K, n)}")
        for st in (controls.heat_state, controls.cold_state):
            if np.shape(st) != (K, n + 1):
                raise DimensionMismatch(f"storage state shape {np.shape(st)} != {(K, n + 1)}")


def investment_cost(instance: ModelInstance, design: DesignVector) -> float:
    f = instance.grid.step_hours
    dev = np.array([d.depreciation_price for d in instance.devices])
    return float(
        f * design.heat_storage * instance.heat_storage.price
        + f * design.cold_storage * instance.cold_storage.price
        + dev @ np.asarray(design.device_sizes, dtype=float)
    )


def investment_carbon(instance: ModelInstance, design: DesignVector) -> float:
    f = instance.grid.step_hours
    dev = np.array([d.depreciation_carbon for d in instance.devices])
    return float(
        f * design.heat_storage * instance.heat_storage.carbon
        + f * design.cold_storage * instance.cold_storage.carbon
        + dev @ np.asarray(design.device_sizes, dtype=float)
    )


def eval_costs(instance: ModelInstance, design: DesignVector, controls: ControlVector, p: PriceVector) -> float:
    """Annual cost: weighted operating cost plus depreciation.

    Dummy generation is charged at the instance's dummy marginal cost.
    """
    _check_dims(instance, design, controls)
    f = instance.grid.step_hours
    w = instance.weights[None, :, None]
    unit = _price_coeff_array(instance, p) + instance.dummy_marginal_cost * _dummy_energy(instance)
    op = f * float(np.sum(w * controls.loads * unit))
    return op + investment_cost(instance, design)


def eval_co2(instance: ModelInstance, design: DesignVector, controls: ControlVector):
    """Return (investment, operational, total) annual emissions in kg."""
    _check_dims(instance, design, controls)
    f = instance.grid.step_hours
    w = instance.weights[None, :, None]
    op = f * float(np.sum(w * controls.loads * _carbon_coeff_array(instance)))
    inv = investment_carbon(instance, design)
    return inv, op, inv + op


# ---------------------------------------------------------------------------
# standard form


@dataclasses.dataclass(frozen=True, eq=False)
class StandardFormProblem:
    c: np.ndarray
    d: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    E: np.ndarray
    f_u: np.ndarray
    G: np.ndarray
    h: np.ndarray
    x_names: tuple
    y_names: tuple
    p_names: tuple
    row_names: tuple
    g_row_names: tuple
    e_row_names: tuple
    carbon_x: np.ndarray
    carbon_y: np.ndarray

    @property
    def n_x(self) -> int:
        return self.c.size

    @property
    def n_y(self) -> int:
        return self.A.shape[1]

    @property
    def n_p(self) -> int:
        return self.A.shape[0]

    def with_polyhedron(self, E, f_u, names=None) -> "StandardFormProblem":
        return dataclasses.replace(
            self, E=np.asarray(E, float), f_u=np.asarray(f_u, float),
            e_row_names=tuple(names) if names is not None else tuple(f"price{i}" for i in range(len(f_u))),
        )

    def x_index(self, name: str) -> int:
        return self.x_names.index(name)


class _Layout:
    """Variable index bookkeeping for one instance."""

    def __init__(self, instance: ModelInstance):
        self.nd = len(instance.devices)
        self.K = instance.n_days
        self.n = instance.n_steps
        self.n_x = 2 + self.nd
        self.n_ctrl = self.nd * self.K * self.n
        self.n_state = self.K * (self.n + 1)
        self.n_y = self.n_ctrl + 2 * self.n_state

    def x_dev(self, i):
        return 2 + i

    def y_ctrl(self, i, k, t):
        return (i * self.K + k) * self.n + t

    def y_cold(self, k, t):
        return self.n_ctrl + k * (self.n + 1) + t

    def y_heat(self, k, t):
        return self.n_ctrl + self.n_state + k * (self.n + 1) + t


def _x_names(instance):
    return ("HS", "CS") + tuple(dev.abbreviation for dev in instance.devices)


def _y_names(instance, lay):
    names = []
    for dev in instance.devices:
        for k in range(lay.K):
            for t in range(lay.n):
                names.append(f"s[{dev.abbreviation},{t},{instance.days[k].id}]")
    for tag in ("cold", "heat"):
        for k in range(lay.K):
            for t in range(lay.n + 1):
                names.append(f"{tag}[{t},{instance.days[k].id}]")
    return tuple(names)


def build_standard_form(instance: ModelInstance, box=None) -> StandardFormProblem:
    """Compile ``instance`` into standard-form matrices.

    ``box`` is a :class:`~regretopt.uncertainty.PriceBox`; without one the
    price rows pin the nominal prices.
    """
    diags = [d for d in validate_instance(instance) if d.level == "error"]
    if diags:
        raise InvalidInstance(diags)
    from .uncertainty import PriceBox, to_polyhedron

    lay = _Layout(instance)
    f = instance.grid.step_hours
    w = instance.weights
    nd, K, n = lay.nd, lay.K, lay.n

    # design cost and carbon
    c = np.zeros(lay.n_x)
    cx = np.zeros(lay.n_x)
    c[0], c[1] = f * instance.heat_storage.price, f * instance.cold_storage.price
    cx[0], cx[1] = f * instance.heat_storage.carbon, f * instance.cold_storage.carbon
    for i, dev in enumerate(instance.devices):
        c[lay.x_dev(i)] = dev.depreciation_price
        cx[lay.x_dev(i)] = dev.depreciation_carbon

    # operating cost per resource: A[r, y] = f * w_k * (signed coefficient)
    signed = {"e": 1.0, "el": -1.0, "w": 1.0, "g": 1.0, "h": 1.0}
    key_of = {"e": "e", "el": "el", "w": "w", "g": "g", "h": "t"}
    A = np.zeros((len(RESOURCES) + 1, lay.n_y))
    cy = np.zeros(lay.n_y)
    q = _carbon_coeff_array(instance)
    dummy_energy = _dummy_energy(instance)
    for r, res in enumerate(RESOURCES):
        coef = instance.series(key_of[res])
        for i in range(nd):
            for k in range(K):
                for t in range(n):
                    A[r, lay.y_ctrl(i, k, t)] = signed[res] * f * w[k] * coef[i, k, t]
    for i in range(nd):
        for k in range(K):
            for t in range(n):
                j = lay.y_ctrl(i, k, t)
                A[-1, j] = f * w[k] * dummy_energy[i, k, t]
                cy[j] = f * w[k] * q[i, k, t]

    B_rows, C_rows, d_rows, names = [], [], [], []

    def row(bx=None, cy_=None, rhs=0.0, name=""):
        b = np.zeros(lay.n_x)
        cc = np.zeros(lay.n_y)
        for idx, v in (bx or {}).items():
            b[idx] += v
        for idx, v in (cy_ or {}).items():
            cc[idx] += v
        B_rows.append(b)
        C_rows.append(cc)
        d_rows.append(rhs)
        names.append(name)

    def eq(bx=None, cy_=None, rhs=0.0, name=""):
        row(bx, cy_, rhs, name + ":ge")
        row({k: -v for k, v in (bx or {}).items()}, {k: -v for k, v in (cy_ or {}).items()}, -rhs, name + ":le")

    hcoef = instance.series("h") - instance.series("t")
    ccoef = instance.series("c")
    for k, day in enumerate(instance.days):
        for t in range(n):
            coefs = {lay.y_cold(k, t): 1.0, lay.y_cold(k, t + 1): -1.0}
            for i in range(nd):
                if ccoef[i, k, t] != 0:
                    coefs[lay.y_ctrl(i, k, t)] = ccoef[i, k, t]
            eq(None, coefs, float(day.cold_load[t]), f"cold_balance[{t},{day.id}]")
        for t in range(n):
            coefs = {lay.y_heat(k, t): 1.0, lay.y_heat(k, t + 1): -1.0}
            for i in range(nd):
                if hcoef[i, k, t] != 0:
                    coefs[lay.y_ctrl(i, k, t)] = hcoef[i, k, t]
            eq(None, coefs, float(day.heat_load[t]), f"heat_balance[{t},{day.id}]")
    for i, dev in enumerate(instance.devices):
        for k, day in enumerate(instance.days):
            for t in range(n):
                row({lay.x_dev(i): 1.0}, {lay.y_ctrl(i, k, t): -1.0}, 0.0, f"limit[{dev.abbreviation},{t},{day.id}]")
    for k, day in enumerate(instance.days):
        for t in range(n + 1):
            row({1: 1.0}, {lay.y_cold(k, t): -1.0}, 0.0, f"cold_cap[{t},{day.id}]")
        for t in range(n + 1):
            row({0: 1.0}, {lay.y_heat(k, t): -1.0}, 0.0, f"heat_cap[{t},{day.id}]")
    for k, day in enumerate(instance.days):
        eq(None, {lay.y_cold(k, 0): 1.0}, 0.0, f"cold_start[{day.id}]")
        eq(None, {lay.y_cold(k, n): 1.0}, 0.0, f"cold_end[{day.id}]")
        eq({0: -1.0}, {lay.y_heat(k, 0): 1.0}, 0.0, f"heat_start[{day.id}]")
        eq({0: -1.0}, {lay.y_heat(k, n): 1.0}, 0.0, f"heat_end[{day.id}]")

    # first-stage rows
    G_rows, h_rows, g_names = [], [], []

    def grow(coefs, rhs, name):
        g = np.zeros(lay.n_x)
        for idx, v in coefs.items():
            g[idx] += v
        G_rows.append(g)
        h_rows.append(rhs)
        g_names.append(name)

    roof = {lay.x_dev(i): -dev.roof_area_per_unit for i, dev in enumerate(instance.devices) if dev.roof_area_per_unit}
    if roof:
        grow(roof, -instance.roof_area_total, "roof_area")
    for i, dev in enumerate(instance.devices):
        if dev.reversible_partner:
            j = instance.device_index(dev.reversible_partner)
            if j > i or not instance.devices[j].reversible_partner:
                coefs = {lay.x_dev(j): 1.0, lay.x_dev(i): -dev.reversible_ratio}
                grow(coefs, 0.0, f"reversible[{dev.abbreviation}]:ge")
                grow({k: -v for k, v in coefs.items()}, 0.0, f"reversible[{dev.abbreviation}]:le")
        if dev.adsorption_linked:
            coefs = {lay.x_dev(i): -1.0}
            for j, other in enumerate(instance.devices):
                if other.abbreviation in ("DH", "CU"):
                    coefs[lay.x_dev(j)] = 1.0
            grow(coefs, 0.0, f"adsorption[{dev.abbreviation}]")
        if dev.is_dummy:
            grow({lay.x_dev(i): 1.0}, instance.dummy_size, f"dummy_size[{dev.abbreviation}]:ge")
            grow({lay.x_dev(i): -1.0}, -instance.dummy_size, f"dummy_size[{dev.abbreviation}]:le")

    if box is None:
        box = PriceBox(instance.nominal_prices, 0.0)
    E, f_u, e_names = to_polyhedron(box, {DUMMY_PRICE: instance.dummy_marginal_cost})

    return StandardFormProblem(
        c=c,
        d=np.array(d_rows),
        A=A,
        B=np.array(B_rows).reshape(-1, lay.n_x),
        C=np.array(C_rows).reshape(-1, lay.n_y),
        E=E,
        f_u=f_u,
        G=np.array(G_rows).reshape(-1, lay.n_x),
        h=np.array(h_rows),
        x_names=_x_names(instance),
        y_names=_y_names(instance, lay),
        p_names=RESOURCES + (DUMMY_PRICE,),
        row_names=tuple(names),
        g_row_names=tuple(g_names),
        e_row_names=tuple(e_names),
        carbon_x=cx,
        carbon_y=cy,
    )


def extended_prices(instance: ModelInstance, p: PriceVector) -> np.ndarray:
    """Price vector in standard-form order, including the pinned dummy price."""
    return np.concatenate([p.as_array(), [instance.dummy_marginal_cost]])


def pack(instance: ModelInstance, design: DesignVector, controls: Optional[ControlVector] = None):
    """Flatten to standard-form (x, y) vectors."""
    lay = _Layout(instance)
    x = np.concatenate([[design.heat_storage, design.cold_storage], np.asarray(design.device_sizes, float)])
    if controls is None:
        return x
    y = np.concatenate(
        [np.asarray(controls.loads, float).ravel(), np.asarray(controls.cold_state, float).ravel(),
         np.asarray(controls.heat_state, float).ravel()]
    )
    assert y.size == lay.n_y
    return x, y


def unpack(instance: ModelInstance, x, y=None):
    lay = _Layout(instance)
    x = np.asarray(x, float)
    design = DesignVector(x[2:].copy(), float(x[0]), float(x[1]))
    if y is None:
        return design
    y = np.asarray(y, float)
    loads = y[: lay.n_ctrl].reshape(lay.nd, lay.K, lay.n)
    cold = y[lay.n_ctrl : lay.n_ctrl + lay.n_state].reshape(lay.K, lay.n + 1)
    heat = y[lay.n_ctrl + lay.n_state :].reshape(lay.K, lay.n + 1)
    return design, ControlVector(loads.copy(), heat.copy(), cold.copy())


# ---------------------------------------------------------------------------
# validation


@dataclasses.dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" | "warning"
    message: str

    def __str__(self):
        return f"{self.level}: {self.message}"


def validate_instance(instance: ModelInstance, alpha: float = 0.0) -> list:
    """Collect hard errors and soft warnings; never raises."""
    out = []
    err = lambda msg: out.append(Diagnostic("error", msg))  # noqa: E731
    warn = lambda msg: out.append(Diagnostic("warning", msg))  # noqa: E731
    n = instance.grid.steps_per_day
    if n <= 0 or 24 % n:
        err(f"steps per day {n} must be a positive divisor of 24")
        return out
    if not instance.days:
        err("no representative days")
    for day in instance.days:
        if day.weight <= 0:
            err(f"day {day.id}: weight must be positive")
        for tag, arr in (("heat", day.heat_load), ("cold", day.cold_load)):
            if arr.shape != (n,):
                err(f"day {day.id}: {tag} load has length {arr.size}, expected {n}")
            elif not np.all(np.isfinite(arr)) or np.any(arr < 0):
                err(f"day {day.id}: {tag} load must be finite and nonnegative")
    if instance.days and abs(float(instance.weights.sum()) - 365.0) > 1e-6:
        err(f"day weights sum to {instance.weights.sum():.6g}, expected 365")
    shape = (instance.n_days, n)
    names = [dev.abbreviation for dev in instance.devices]
    if len(set(names)) != len(names):
        err("device abbreviations must be unique")
    for dev in instance.devices:
        for key, arr in dev.series.items():
            if key not in SERIES:
                err(f"device {dev.abbreviation}: unknown series {key!r}")
                continue
            try:
                b = np.broadcast_to(arr, shape)
            except ValueError:
                err(f"device {dev.abbreviation}: series {key} shape {arr.shape} does not cover {shape}")
                continue
            if not np.all(np.isfinite(b)) or np.any(b < 0):
                err(f"device {dev.abbreviation}: series {key} must be finite and nonnegative")
        if dev.depreciation_price < 0 or dev.depreciation_carbon < 0:
            warn(f"device {dev.abbreviation}: negative depreciation")
        if dev.reversible_partner:
            if dev.reversible_partner not in names:
                err(f"device {dev.abbreviation}: reversible partner {dev.reversible_partner} missing")
            else:
                other = instance.devices[names.index(dev.reversible_partner)]
                try:
                    prod_a = sum(np.broadcast_to(dev.coeff(k, shape), shape) for k in ("h", "c"))
                    prod_b = sum(np.broadcast_to(other.coeff(k, shape), shape) for k in ("h", "c"))
                    if np.any((prod_a > 0) & (prod_b > 0)):
                        err(f"reversible pair {dev.abbreviation}/{other.abbreviation} produces in the same step")
                except ValueError:
                    pass
    kinds = [dev.dummy_kind for dev in instance.devices if dev.is_dummy]
    if kinds.count("heat") != 1:
        err("no heating dummy" if kinds.count("heat") == 0 else "more than one heating dummy")
    if kinds.count("cold") != 1:
        err("no cooling dummy" if kinds.count("cold") == 0 else "more than one cooling dummy")
    if not instance.dummy_size > 0:
        err("dummy size must be positive")
    if instance.dummy_marginal_cost < 0:
        err("dummy marginal cost must be nonnegative")
    else:
        for dev in instance.devices:
            kind = dev.dummy_kind
            if kind is None:
                continue
            cap = instance.dummy_size * float(np.min(dev.coeff("h" if kind == "heat" else "c", shape)))
            peak = max((float(np.max(d.heat_load if kind == "heat" else d.cold_load, initial=0)) for d in instance.days), default=0)
            if cap < peak:
                warn(f"{dev.abbreviation} capacity {cap:.6g} below peak {kind} load {peak:.6g}")
    prices = instance.nominal_prices.as_array()
    if not np.all(np.isfinite(prices)) or np.any(prices < 0):
        err("nominal prices must be finite and nonnegative")
    for s in (instance.heat_storage, instance.cold_storage):
        if s.price < 0 or s.carbon < 0:
            err(f"{s.kind} storage price and carbon must be nonnegative")
    if not np.all(np.isfinite(instance.carbon.as_array())):
        err("carbon factors must be finite")
    if instance.roof_area_total < 0:
        err("roof area must be nonnegative")
    p = instance.nominal_prices
    if p.el * (1 + alpha) > p.e * (1 - alpha):
        warn(
            f"selling price can exceed buying price inside the box "
            f"({p.el * (1 + alpha):.6g} > {p.e * (1 - alpha):.6g}); arbitrage risk"
        )
    return out


# ---------------------------------------------------------------------------
# JSON instance files


def _schema():
    return json.loads(resources.files("regretopt").joinpath("data/instance.schema.json").read_text())


def instance_to_dict(instance: ModelInstance) -> dict:
    return {
        "grid": {"steps_per_day": instance.grid.steps_per_day},
        "days": [
            {"id": d.id, "weight": d.weight, "heat_load": d.heat_load.tolist(), "cold_load": d.cold_load.tolist()}
            for d in instance.days
        ],
        "devices": [
            {
                "name": dev.name,
                "abbreviation": dev.abbreviation,
                "depreciation_price": dev.depreciation_price,
                "depreciation_carbon": dev.depreciation_carbon,
                "base_price": dev.base_price,
                "base_carbon": dev.base_carbon,
                "is_dummy": dev.is_dummy,
                "roof_area_per_unit": dev.roof_area_per_unit,
                "reversible_partner": dev.reversible_partner,
                "reversible_ratio": dev.reversible_ratio,
                "adsorption_linked": dev.adsorption_linked,
                "series": {
                    k: np.broadcast_to(v, (instance.n_days, instance.n_steps)).tolist()
                    for k, v in dev.series.items()
                },
            }
            for dev in instance.devices
        ],
        "storages": {
            "heat": {"price": instance.heat_storage.price, "carbon": instance.heat_storage.carbon},
            "cold": {"price": instance.cold_storage.price, "carbon": instance.cold_storage.carbon},
        },
        "prices": instance.nominal_prices.to_dict(),
        "carbon": dataclasses.asdict(instance.carbon),
        "roof": {"area": instance.roof_area_total},
        "dummy": {"size": instance.dummy_size, "marginal_cost": instance.dummy_marginal_cost},
    }


def instance_from_dict(doc: dict) -> ModelInstance:
    import jsonschema

    jsonschema.validate(doc, _schema())
    n = doc["grid"]["steps_per_day"]
    days = [RepresentativeDay(d["id"], d["weight"], d["heat_load"], d["cold_load"]) for d in doc["days"]]
    devices = []
    for dv in doc["devices"]:
        devices.append(
            DeviceSpec(
                name=dv["name"],
                abbreviation=dv["abbreviation"],
                depreciation_price=dv["depreciation_price"],
                depreciation_carbon=dv["depreciation_carbon"],
                series=dv.get("series", {}),
                is_dummy=dv.get("is_dummy", False),
                roof_area_per_unit=dv.get("roof_area_per_unit", 0.0),
                reversible_partner=dv.get("reversible_partner"),
                reversible_ratio=dv.get("reversible_ratio", 1.0),
                adsorption_linked=dv.get("adsorption_linked", False),
                base_price=dv.get("base_price", 0.0),
                base_carbon=dv.get("base_carbon", 0.0),
            )
        )
    prices = PriceVector(**doc["prices"])
    dummy = doc.get("dummy", {})
    size, cost = default_dummy_parameters(days, prices) if days else (1.0, 0.0)
    st = doc["storages"]
    return ModelInstance(
        grid=TimeGrid(n),
        days=days,
        devices=devices,
        heat_storage=StorageSpec("heat", st["heat"]["price"], st["heat"]["carbon"]),
        cold_storage=StorageSpec("cold", st["cold"]["price"], st["cold"]["carbon"]),
        nominal_prices=prices,
        carbon=CarbonFactors(**doc["carbon"]),
        roof_area_total=doc.get("roof", {}).get("area", 0.0),
        dummy_size=dummy.get("size", size),
        dummy_marginal_cost=dummy.get("marginal_cost", cost),
    )


def load_instance(path) -> ModelInstance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def save_instance(instance: ModelInstance, path) -> None:
    from .io import atomic_write_text

    atomic_write_text(path, json.dumps(instance_to_dict(instance), indent=1))
