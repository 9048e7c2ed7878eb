"""Shared definitions of the toy acceptance cells."""

from functools import lru_cache

from regretopt.scalarization import ComparatorMode, min_carbon, regret_problem
from regretopt.synthetic import TOY_SUITE

CASES = {c.name: c for c in TOY_SUITE}
TOY_EPS = 1.0
ORACLE_ALPHA = 0.5
ORACLE_GRID = 101
MODES = (ComparatorMode.CARBON_CAPPED, ComparatorMode.UNCONSTRAINED)


@lru_cache(maxsize=None)
def instance(name):
    return CASES[name].instance()


@lru_cache(maxsize=None)
def min_kg(name):
    return min_carbon(instance(name))[0]


def default_cap(name):
    """A cap above the carbon floor that still restricts the cheapest design in some toys."""
    return 1.3 * min_kg(name) + 2000.0


def problem(name, alpha, mode, cap=None):
    cap = default_cap(name) if cap is None else cap
    return regret_problem(instance(name), alpha, cap, ComparatorMode(mode), CASES[name].free)
