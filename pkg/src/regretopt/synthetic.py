"""Small synthetic energy-hub instances for tests, demos and benchmarks.

Coefficients are per-hour rates for one size unit (kW of output, or kWp for
solar devices), so a step of ``f`` hours on a day of weight ``w`` contributes
``f * w * rate`` kWh per year.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .model import (
    NOMINAL_PRICES,
    PV_ROOF_FACTOR,
    CarbonFactors,
    DeviceSpec,
    ModelInstance,
    RepresentativeDay,
    StorageSpec,
    TimeGrid,
    default_dummy_parameters,
    dummy_devices,
)

DEFAULT_CARBON = CarbonFactors(e=0.40, el=0.40, w=0.03, g=0.20, h=0.18)


@dataclasses.dataclass(frozen=True)
class DayType:
    name: str
    ambient: float  # mean temperature, deg C
    swing: float  # day/night amplitude
    irradiance: float  # peak solar fraction, 0..1
    heat: float  # mean heat load, kW
    cold: float  # mean cold load, kW


DAY_TYPES = {
    "winter": DayType("winter", 1.0, 4.0, 0.35, 40.0, 4.0),
    "transition": DayType("transition", 11.0, 6.0, 0.65, 20.0, 10.0),
    "summer": DayType("summer", 23.0, 7.0, 1.0, 7.0, 30.0),
}


def _hourly(day: DayType):
    hours = np.arange(24) + 0.5
    solar = day.irradiance * np.clip(np.sin(np.pi * (hours - 6.0) / 12.0), 0.0, None)
    ambient = day.ambient + day.swing * np.sin(np.pi * (hours - 9.0) / 12.0)
    heat = day.heat * (1.0 + 0.3 * np.cos(2 * np.pi * (hours - 3.0) / 24.0))
    cold = day.cold * (0.6 + 0.8 * solar / max(day.irradiance, 1e-9))
    return solar, ambient, heat, cold


def _per_step(series, n):
    return np.asarray(series).reshape(n, 24 // n).mean(axis=1)


def _device(abbr, profiles, n):
    """Catalog entry; ``profiles`` is a list of per-day (solar, ambient) step arrays."""
    solar = np.array([s for s, _ in profiles])
    amb = np.array([a for _, a in profiles])
    ones = np.ones_like(solar)
    if abbr == "GB":
        return DeviceSpec("gas boiler", "GB", 12.0, 5.0, {"h": ones, "g": ones / 0.92})
    if abbr == "AWHP":
        cop = np.clip(2.6 + 0.06 * amb, 1.8, 5.0)
        return DeviceSpec("air-water heat pump", "AWHP", 55.0, 20.0, {"h": ones, "e": 1.0 / cop})
    if abbr == "CC":
        eer = np.clip(5.0 - 0.06 * amb, 2.0, 6.0)
        return DeviceSpec("compression chiller", "CC", 40.0, 12.0, {"c": ones, "e": 1.0 / eer})
    if abbr == "PB":
        return DeviceSpec("pellet boiler", "PB", 35.0, 10.0, {"h": ones, "w": ones / 0.88})
    if abbr == "PV":
        return DeviceSpec(
            "photovoltaics", "PV", 330.0, 40.0, {"el": solar}, roof_area_per_unit=PV_ROOF_FACTOR
        )
    if abbr == "ST":
        return DeviceSpec("solar thermal", "ST", 25.0, 8.0, {"h": 0.6 * solar}, roof_area_per_unit=1.5)
    if abbr == "CU":
        return DeviceSpec("cogeneration unit", "CU", 60.0, 25.0, {"h": ones, "el": 0.7 * ones, "g": 2.0 * ones})
    if abbr == "FC":
        avail = (amb < 12.0).astype(float)
        return DeviceSpec("free cooling", "FC", 15.0, 4.0, {"c": avail, "e": 0.03 * ones})
    raise KeyError(f"unknown catalog device {abbr!r}")


CATALOG = ("GB", "AWHP", "CC", "PB", "PV", "ST", "CU", "FC")


def make_instance(
    devices=("GB", "AWHP", "CC"),
    day_types=("winter", "summer"),
    steps_per_day: int = 2,
    roof_area: float = 60.0,
    load_scale: float = 1.0,
    storage_price: float = 0.4,
    prices=NOMINAL_PRICES,
    carbon: CarbonFactors = DEFAULT_CARBON,
) -> ModelInstance:
    """Build a hub with the listed catalog devices plus the two dummies."""
    n = steps_per_day
    if n <= 0 or 24 % n:
        raise ValueError("steps_per_day must divide 24")
    K = len(day_types)
    days, profiles = [], []
    for k, name in enumerate(day_types):
        dt = DAY_TYPES[name]
        solar, amb, heat, cold = _hourly(dt)
        profiles.append((_per_step(solar, n), _per_step(amb, n)))
        days.append(RepresentativeDay(f"{name}{k}", 365.0 / K, load_scale * _per_step(heat, n), load_scale * _per_step(cold, n)))
    devs = [_device(a, profiles, n) for a in devices]
    # a hub without any real cooling (heating) device gets no cold (heat) load
    for key, attr in (("c", "cold_load"), ("h", "heat_load")):
        if not any(key in d.series for d in devs):
            days = [dataclasses.replace(d, **{attr: np.zeros(n)}) for d in days]
    devs += list(dummy_devices(K, n))
    size, cost = default_dummy_parameters(days, prices)
    return ModelInstance(
        grid=TimeGrid(n),
        days=tuple(days),
        devices=tuple(devs),
        heat_storage=StorageSpec("heat", storage_price, 0.1),
        cold_storage=StorageSpec("cold", storage_price, 0.1),
        nominal_prices=prices,
        carbon=carbon,
        roof_area_total=roof_area,
        dummy_size=size,
        dummy_marginal_cost=cost,
    )


@dataclasses.dataclass(frozen=True)
class ToyCase:
    name: str
    devices: tuple
    day_types: tuple
    steps_per_day: int
    free: tuple

    def instance(self) -> ModelInstance:
        return make_instance(self.devices, self.day_types, self.steps_per_day)


TOY_SUITE = (
    ToyCase("gas-vs-heatpump", ("GB", "AWHP"), ("winter",), 1, ("e", "g")),
    ToyCase("heat-and-cool", ("GB", "AWHP", "CC"), ("winter", "summer"), 2, ("e", "g")),
    ToyCase("biomass", ("GB", "PB"), ("winter", "transition"), 1, ("w", "g")),
    ToyCase("solar-sell", ("AWHP", "PV", "CC"), ("summer", "winter"), 2, ("e", "el")),
    ToyCase("cogeneration", ("GB", "CU"), ("winter",), 2, ("g", "el")),
    ToyCase("single-price", ("GB", "AWHP", "CC"), ("winter", "summer"), 2, ("e",)),
)


def benchmark_instance(n_days: int, steps_per_day: int, load_scale: float = 0.4) -> ModelInstance:
    """Hub used for the CG versus C&CG comparison grid.

    Loads are scaled so that caps of 30 and 60 t per year are both reachable.
    """
    order = ("winter", "summer", "transition")
    day_types = tuple(order[k % 3] for k in range(n_days))
    return make_instance(("GB", "AWHP", "CC", "PV"), day_types, steps_per_day, load_scale=load_scale)
