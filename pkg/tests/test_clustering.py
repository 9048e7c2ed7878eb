import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regretopt.clustering import (
    DayProfile,
    DegenerateInput,
    days_section,
    distance_matrix,
    exhaustive_medoids,
    feature_matrix,
    k_medoids,
    read_profiles_csv,
    total_cost,
)


def two_clusters(rng, n_each=5, n=4):
    cold = [DayProfile(f"w{i}", 40 + rng.normal(0, 1, n), 2 + rng.normal(0, 0.3, n)) for i in range(n_each)]
    warm = [DayProfile(f"s{i}", 5 + rng.normal(0, 1, n), 30 + rng.normal(0, 1, n)) for i in range(n_each)]
    return cold + warm


def test_k_equals_n():
    profiles = two_clusters(np.random.default_rng(0), 3)
    res = k_medoids(profiles, len(profiles))
    assert res.medoids == tuple(range(len(profiles)))
    assert [d.weight for d in res.days] == pytest.approx([365.0 / 6] * 6)
    assert sum(d.weight for d in res.days) == 365.0


def test_two_separated_clusters_match_exhaustive():
    profiles = two_clusters(np.random.default_rng(1))
    res = k_medoids(profiles, 2)
    best, cost = exhaustive_medoids(profiles, 2)
    assert res.medoids == best
    assert res.cost == pytest.approx(cost)
    tags = {profiles[m].tag[0] for m in res.medoids}
    assert tags == {"w", "s"}
    assert [d.weight for d in res.days] == [182.5, 182.5]


def test_seed_invariance_with_unique_optimum():
    profiles = two_clusters(np.random.default_rng(2))
    sets = {k_medoids(profiles, 3, seed=s).medoids for s in range(5)}
    assert len(sets) == 1
    assert sets.pop() == exhaustive_medoids(profiles, 3)[0]


def test_cost_history_nonincreasing():
    rng = np.random.default_rng(3)
    profiles = [DayProfile(str(i), rng.uniform(0, 50, 6), rng.uniform(0, 20, 6)) for i in range(30)]
    res = k_medoids(profiles, 4, seed=1)
    h = np.array(res.cost_history)
    assert np.all(np.diff(h) <= 1e-12)
    assert res.cost == pytest.approx(h[-1])


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 25), st.integers(1, 5), st.integers(0, 10_000))
def test_weights_positive_and_sum(n_days, k, seed):
    rng = np.random.default_rng(seed)
    k = min(k, n_days)
    profiles = [DayProfile(str(i), rng.uniform(0, 50, 3), rng.uniform(0, 20, 3)) for i in range(n_days)]
    res = k_medoids(profiles, k, seed=seed)
    w = np.array([d.weight for d in res.days])
    assert np.all(w > 0)
    assert abs(w.sum() - 365.0) <= 1e-9


def test_identical_profiles_warn():
    profiles = [DayProfile(str(i), np.ones(3), np.ones(3)) for i in range(4)]
    with pytest.warns(DegenerateInput):
        res = k_medoids(profiles, 3)
    assert len(res.medoids) < 3
    assert sum(d.weight for d in res.days) == 365.0


def test_k_out_of_range():
    profiles = [DayProfile("a", [1.0], [1.0])]
    with pytest.raises(ValueError):
        k_medoids(profiles, 2)


def test_extra_series_change_distances():
    a = DayProfile("a", [1.0, 2.0], [0.0, 1.0], {"solar": [0.0, 0.0]})
    b = DayProfile("b", [1.0, 2.0], [0.0, 1.0], {"solar": [5.0, 5.0]})
    assert distance_matrix(feature_matrix([a, b]))[0, 1] == 0.0
    assert distance_matrix(feature_matrix([a, b], use_extra=True))[0, 1] > 0.0


def test_csv_and_days_section():
    text = "day,step,heat_kwh,cold_kwh,solar\n" + "".join(
        f"{d},{t},{10 + 5 * (d == 'b') + t},{t},{0.1 * t}\n" for d in ("a", "b", "c") for t in (1, 0))
    profiles = read_profiles_csv(text)
    assert [p.tag for p in profiles] == ["a", "b", "c"]
    assert profiles[1].heat.tolist() == [15.0, 16.0]
    assert "solar" in profiles[0].extra
    res = k_medoids(profiles, 2)
    doc = days_section(res.days)
    assert {"id", "weight", "heat_load", "cold_load"} == set(doc[0])


def test_csv_errors():
    with pytest.raises(ValueError):
        read_profiles_csv("day,step,heat\n")
    with pytest.raises(ValueError):
        read_profiles_csv("day,step,heat_kwh,cold_kwh\na,0,1,1\na,2,1,1\n")
    with pytest.raises(ValueError):
        read_profiles_csv("day,step,heat_kwh,cold_kwh\na,0,1,1\nb,0,1,1\nb,1,1,1\n")
