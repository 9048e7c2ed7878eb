import dataclasses
import json

import numpy as np
import pytest

from regretopt import model
from regretopt.model import (
    NOMINAL_PRICES,
    ControlVector,
    DesignVector,
    DeviceSpec,
    PriceVector,
    build_standard_form,
    derived_carbon_coeff,
    derived_price_coeff,
    eval_co2,
    eval_costs,
    extended_prices,
    pack,
    unpack,
    validate_instance,
)
from regretopt.synthetic import make_instance

from conftest import tiny_instance


def _dev(series, price=0.0, carbon=0.0, abbr="X"):
    return DeviceSpec("dev", abbr, price, carbon, series)


def test_price_coeff_gas_only():
    inst = tiny_instance([_dev({"h": 1.0, "g": 1.0})])
    assert derived_price_coeff(inst, 0, 0, 0, NOMINAL_PRICES) == pytest.approx(0.0934)


def test_price_coeff_zero_row():
    inst = tiny_instance([_dev({})])
    assert derived_price_coeff(inst, 0, 0, 0, NOMINAL_PRICES) == 0.0


def test_price_coeff_buy_and_sell():
    inst = tiny_instance([_dev({"e": 2.0, "el": 1.0})])
    p = PriceVector(0.2074, 0.2074, 0.0, 0.0, 0.0)
    assert derived_price_coeff(inst, 0, 0, 0, p) == pytest.approx(0.2074)


def test_coeff_index_error():
    inst = tiny_instance([_dev({"g": 1.0})])
    with pytest.raises(IndexError):
        derived_price_coeff(inst, 0, 5, 0, NOMINAL_PRICES)
    with pytest.raises(IndexError):
        derived_carbon_coeff(inst, 0, 0, 3)


def _zero_controls(inst):
    nd, K, n = len(inst.devices), inst.n_days, inst.n_steps
    return ControlVector(np.zeros((nd, K, n)), np.zeros((K, n + 1)), np.zeros((K, n + 1)))


def test_eval_costs_empty_system():
    inst = tiny_instance([_dev({"g": 1.0})])
    d = DesignVector(np.zeros(3))
    assert eval_costs(inst, d, _zero_controls(inst), NOMINAL_PRICES) == 0.0


def test_eval_costs_hand_arithmetic():
    # p_itk = 0.1 through the gas price, n = 1 so f = 24, w = 365
    inst = tiny_instance([_dev({"g": 1.0}, price=100.0)])
    p = PriceVector(0.0, 0.0, 0.0, 0.1, 0.0)
    ctrl = _zero_controls(inst)
    ctrl.loads[0, 0, 0] = 1.0
    d = DesignVector(np.array([1.0, 0.0, 0.0]))
    assert eval_costs(inst, d, ctrl, p) == pytest.approx(24 * 365 * 0.1 + 100)


def test_eval_costs_investment_only():
    inst = tiny_instance([_dev({"g": 1.0}, price=50.0)])
    d = DesignVector(np.array([2.0, 0.0, 0.0]))
    assert eval_costs(inst, d, _zero_controls(inst), NOMINAL_PRICES) == pytest.approx(100.0)


def test_eval_co2_examples():
    inst = tiny_instance([_dev({"g": 1.0}, carbon=30.0)])
    zero = DesignVector(np.zeros(3))
    assert eval_co2(inst, zero, _zero_controls(inst)) == (0.0, 0.0, 0.0)
    assert eval_co2(inst, DesignVector(np.array([1.0, 0, 0])), _zero_controls(inst)) == (30.0, 0.0, 30.0)
    # q = 0.2 via gas factor 0.2, f = 24, w = 365, s = 0.5
    ctrl = _zero_controls(inst)
    ctrl.loads[0, 0, 0] = 0.5
    inv, op, tot = eval_co2(inst, zero, ctrl)
    assert op == pytest.approx(876.0)
    assert tot == inv + op


def test_dimension_mismatch():
    inst = tiny_instance([_dev({"g": 1.0})])
    bad = ControlVector(np.zeros((1, 1, 1)), np.zeros((1, 2)), np.zeros((1, 2)))
    with pytest.raises(model.DimensionMismatch):
        eval_costs(inst, DesignVector(np.zeros(3)), bad, NOMINAL_PRICES)


def test_dimensions_one_device():
    inst = tiny_instance([_dev({"h": 1.0, "g": 1.0})])
    sf = build_standard_form(inst)
    nd = len(inst.devices)  # 1 device plus 2 dummies
    assert sf.n_x == 2 + nd
    # one control per device-step plus a storage state per boundary point and storage type
    assert sf.n_y == nd * 1 * 1 + 2 * (1 + 1)
    assert sf.x_names == ("HS", "CS", "X", "H-Dummy", "C-Dummy")


def test_heat_balance_rhs(toy_instances):
    inst = toy_instances["heat-and-cool"]
    sf = build_standard_form(inst)
    for k, day in enumerate(inst.days):
        for t in range(inst.n_steps):
            name = f"heat_balance[{t},{day.id}]"
            idx = [i for i, r in enumerate(sf.row_names) if r.startswith(name)]
            assert idx, name
            assert day.heat_load[t] in {abs(sf.d[i]) for i in idx}


def test_evaluator_matrix_identity(toy_instances):
    rng = np.random.default_rng(0)
    for inst in toy_instances.values():
        sf = build_standard_form(inst)
        for _ in range(10):
            x = rng.uniform(0, 5, sf.n_x)
            y = rng.uniform(0, 5, sf.n_y)
            p = PriceVector.from_array(NOMINAL_PRICES.as_array() * rng.uniform(0.5, 1.5, 5))
            d, ctrl = unpack(inst, x, y)
            lhs = eval_costs(inst, d, ctrl, p)
            rhs = sf.c @ x + extended_prices(inst, p) @ (sf.A @ y)
            assert lhs == pytest.approx(rhs, rel=1e-9)


def test_pack_unpack_round_trip(toy_instances):
    inst = toy_instances["solar-sell"]
    sf = build_standard_form(inst)
    x, y = np.arange(sf.n_x, dtype=float), np.arange(sf.n_y, dtype=float)
    x2, y2 = pack(inst, *unpack(inst, x, y))
    assert np.array_equal(x, x2) and np.array_equal(y, y2)


def test_validate_clean(toy_instances):
    assert validate_instance(toy_instances["heat-and-cool"]) == []


def test_validate_missing_cooling_dummy():
    inst = tiny_instance([_dev({"h": 1.0, "g": 1.0})])
    inst = inst.replace(devices=inst.devices[:-1])
    msgs = [d.message for d in validate_instance(inst) if d.level == "error"]
    assert "no cooling dummy" in msgs


def test_validate_arbitrage_warning():
    inst = tiny_instance([_dev({"h": 1.0, "g": 1.0})])
    assert not validate_instance(inst, 0.0)
    diags = validate_instance(inst, 0.2)
    assert any(d.level == "warning" and "arbitrage" in d.message for d in diags)


def test_build_rejects_invalid():
    inst = tiny_instance([_dev({"h": 1.0})])
    inst = inst.replace(days=(dataclasses.replace(inst.days[0], weight=-1.0),))
    with pytest.raises(model.InvalidInstance):
        build_standard_form(inst)


def test_json_round_trip(tmp_path, toy_instances):
    inst = toy_instances["cogeneration"]
    path = tmp_path / "inst.json"
    model.save_instance(inst, path)
    back = model.load_instance(path)
    a, b = build_standard_form(inst), build_standard_form(back)
    for field in ("c", "d", "A", "B", "C", "G", "h"):
        assert np.array_equal(getattr(a, field), getattr(b, field)), field
    assert json.loads(path.read_text())["days"][0]["weight"] == inst.days[0].weight


def test_storage_boundary_rows(toy_instances):
    sf = build_standard_form(toy_instances["heat-and-cool"])
    for tag in ("cold_start", "cold_end", "heat_start", "heat_end"):
        assert any(r.startswith(tag) for r in sf.row_names), tag


def test_roof_area_row():
    inst = make_instance(("GB", "PV"), ("summer",), 1)
    sf = build_standard_form(inst)
    j = sf.x_index("PV")
    rows = [i for i, n in enumerate(sf.g_row_names) if "roof" in n]
    assert rows
    assert abs(sf.G[rows[0], j]) == pytest.approx(model.PV_ROOF_FACTOR)
