"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the criterion lines are
written straight to the terminal.
"""

import csv
import itertools
import json
import pathlib
import time

import numpy as np
import pytest

import suite_config as cfg
from regretopt import cli, lp
from regretopt.model import eval_co2, eval_costs, extended_prices, unpack, PriceVector
from regretopt.oracle import oracle_regret
from regretopt.regret import Evaluator, design_cost_lp, dual_design_lp, regret_at, run
from regretopt.scalarization import ComparatorMode, regret_problem, sweep
from regretopt.uncertainty import PriceBox, corners

DATA = pathlib.Path(__file__).parent / "data"
ALPHAS = (0.0, 0.25, 0.5)
TOYS = tuple(cfg.CASES)

# every certificate produced here, for the bracketing criterion
CERTS = []


def report(capsys, n, ok, msg):
    with capsys.disabled():
        print(f"\n[criterion {n:>2}] {'PASS' if ok else 'FAIL'}: {msg}")
    assert ok, msg


def solve(prob, algorithm, eps=cfg.TOY_EPS, **kw):
    cert = run(prob, algorithm, eps, **kw)
    CERTS.append(cert)
    return cert


@pytest.fixture(scope="module")
def suite_runs():
    """Every toy x comparator mode x alpha x algorithm at the default cap."""
    out = {}
    for name, mode, alpha in itertools.product(TOYS, cfg.MODES, ALPHAS):
        prob = cfg.problem(name, alpha, mode)
        for alg in ("cg", "ccg"):
            out[(name, mode.value, alpha, alg)] = solve(prob, alg)
    return out


def random_design(rng, prob, inst, cap):
    """Random first-stage point: dummies at their fixed size, investment carbon within ``cap``."""
    names = prob.x_names
    x = np.zeros(prob.n_x)
    peak = max(float(np.max(d.heat_load + d.cold_load)) for d in inst.days)
    for j, nm in enumerate(names):
        if nm.endswith("Dummy"):
            x[j] = inst.dummy_size
        else:
            x[j] = rng.uniform(0, 2 * peak)
    real = np.array([not nm.endswith("Dummy") for nm in names])
    # shrink the real part until every first-stage row holds
    for _ in range(200):
        if prob.first_stage_feasible(x):
            return x
        x[real] *= 0.5
    x[real] = 0.0
    assert prob.first_stage_feasible(x)
    return x


# ---------------------------------------------------------------------------


def test_criterion_01_zero_regret_fixed_point(capsys):
    worst_iter, worst_time, worst_val, fails = 0, 0.0, 0.0, []
    for name in TOYS:
        for cap in (cfg.default_cap(name), 0.98 * cfg.min_kg(name)):
            t0 = time.perf_counter()
            prob = cfg.problem(name, 0.0, ComparatorMode.CARBON_CAPPED, cap)
            cert = solve(prob, "ccg")
            dt = time.perf_counter() - t0
            val = max(abs(cert.lower_bound), abs(cert.upper_bound))
            worst_iter, worst_time, worst_val = max(worst_iter, cert.iterations), max(worst_time, dt), max(worst_val, val)
            if not (val <= 1e-4 and cert.iterations <= 2 and dt < 1.0 and cert.converged):
                fails.append(f"{name}@{cap:.0f}kg: lb={cert.lower_bound:.3g} ub={cert.upper_bound:.3g} it={cert.iterations} t={dt:.2f}s")
    msg = (f"{2 * len(TOYS)} runs, max |bound| {worst_val:.2e} EUR, max iterations {worst_iter}, "
           f"max time {worst_time:.2f}s" + (f"; failures: {fails}" if fails else ""))
    report(capsys, 1, not fails, msg)


def test_criterion_02_oracle_equivalence(capsys):
    frozen = json.loads((DATA / "oracle_frozen.json").read_text())
    assert len({c["toy"] for c in frozen}) >= 5
    lines, fails = [], []
    for cell in frozen:
        t0 = time.perf_counter()
        prob = cfg.problem(cell["toy"], cell["alpha"], cell["mode"], cell["cap_kg"])
        cert = solve(prob, "ccg")
        live = oracle_regret(prob, cell["grid_n"])
        dt = time.perf_counter() - t0
        diff = abs(cert.upper_bound - cell["oracle_regret"])
        drift = abs(live.value - cell["oracle_regret"])
        ok = (diff <= cfg.TOY_EPS + cell["lattice_slack"] and dt < 60.0
              and drift <= 1e-6 * max(1.0, abs(cell["oracle_regret"])))
        lines.append(f"{cell['toy']}/{cell['mode']}: |diff|={diff:.3f} slack={cell['lattice_slack']:.1f} t={dt:.1f}s")
        if not ok:
            fails.append(lines[-1] + f" drift={drift:.2e}")
    msg = f"{len(frozen)} cells on {len({c['toy'] for c in frozen})} toys; " + "; ".join(lines)
    report(capsys, 2, not fails, msg if not fails else f"failures: {fails}")


def test_criterion_03_cg_ccg_agreement(capsys, suite_runs):
    pairs, bad, fewer = 0, [], 0
    max_diff = 0.0
    for (name, mode, alpha, alg), cert in suite_runs.items():
        if alg != "cg":
            continue
        other = suite_runs[(name, mode, alpha, "ccg")]
        pairs += 1
        diff = abs(cert.upper_bound - other.upper_bound)
        max_diff = max(max_diff, diff)
        if diff > 2 * cfg.TOY_EPS:
            bad.append(f"{name}/{mode}/a={alpha}: {cert.upper_bound:.3f} vs {other.upper_bound:.3f}")
        fewer += other.iterations <= cert.iterations
    share = fewer / pairs
    msg = (f"{pairs} pairs, max |ub_cg - ub_ccg| {max_diff:.3f} EUR (limit {2 * cfg.TOY_EPS:g}); "
           f"CCG iterations <= CG in {share:.0%} of cells"
           + ("" if share >= 0.9 else f" (shortfall: {0.9 - share:.0%} below the 90% expectation)")
           + (f"; disagreements: {bad}" if bad else ""))
    report(capsys, 3, not bad, msg)


def test_criterion_04_monotone_sweeps(capsys):
    name = "heat-and-cool"
    mc = cfg.min_kg(name)
    alphas = (0.25, 0.5, 0.75)
    caps = tuple(mc * f for f in (1.02, 1.25, 1.5, 2.0, 3.0))
    recs = sweep(cfg.instance(name), alphas, caps, "ccg", cfg.TOY_EPS, ComparatorMode.UNCONSTRAINED,
                 cfg.CASES[name].free)
    slack = 2 * cfg.TOY_EPS
    grid = {(r.alpha, r.cap_kg): r for r in recs}
    bad = [r.status for r in recs if r.status != "converged"]
    for a in alphas:
        for c1, c2 in zip(caps, caps[1:]):
            if grid[(a, c2)].regret_ub > grid[(a, c1)].regret_ub + slack:
                bad.append(f"ub rises in cap at alpha={a}: {c1:.0f}->{c2:.0f}")
    for c in caps:
        for a1, a2 in zip(alphas, alphas[1:]):
            if grid[(a2, c)].regret_lb < grid[(a1, c)].regret_lb - slack:
                bad.append(f"lb falls in alpha at cap={c:.0f}: {a1}->{a2}")
    front = "; ".join(f"a={a}: " + ",".join(f"{grid[(a, c)].regret_ub:.0f}" for c in caps) for a in alphas)
    report(capsys, 4, not bad, f"3x5 sweep on {name} (unconstrained comparator), ub by cap: {front}"
           + (f"; violations: {bad}" if bad else ""))


def test_criterion_05_bracketing_and_termination(capsys, suite_runs):
    bad = []
    for i, cert in enumerate(CERTS):
        lbs = [h.lb for h in cert.history]
        ubs = [h.ub for h in cert.history]
        if any(b < a for a, b in zip(lbs, lbs[1:])):
            bad.append(f"run {i}: lb decreased")
        if any(b > a for a, b in zip(ubs, ubs[1:])):
            bad.append(f"run {i}: ub increased")
        # regret is a difference of ~1e5 EUR cost terms, so near-zero values carry ~1e-9 noise
        if any(l > u + 1e-7 * (1.0 + abs(u)) for l, u in zip(lbs, ubs)):
            gap = max(l - u for l, u in zip(lbs, ubs))
            bad.append(f"run {i}: lb above ub by {gap:.2e} (ub {ubs[-1]:.6g})")
        if cert.status == "iteration_limit" or cert.iterations >= 500 or not cert.converged:
            bad.append(f"run {i}: status {cert.status} after {cert.iterations} iterations")
    most = max(c.iterations for c in CERTS)
    report(capsys, 5, not bad, f"{len(CERTS)} runs checked, max iterations {most}" + (f"; {bad[:10]}" if bad else ""))


def test_criterion_06_duality_self_check(capsys):
    rng = np.random.default_rng(6)
    worst, probes = 0.0, 0
    per_toy = int(np.ceil(1000 / len(TOYS)))
    for name in TOYS:
        inst = cfg.instance(name)
        prob = regret_problem(inst, 0.5, cfg.default_cap(name), ComparatorMode.UNCONSTRAINED)
        lo, hi = prob.price_bounds()
        ev = Evaluator(prob)
        for _ in range(per_toy):
            if probes == 1000:
                break
            x = random_design(rng, prob, inst, cfg.default_cap(name))
            p = rng.uniform(lo, hi)
            primal, _, _ = ev.g1(x, p, check=False)
            dual = lp.solve(dual_design_lp(prob, x, p))
            assert dual.optimal
            worst = max(worst, abs(primal - dual.objective_value) / max(1.0, abs(primal)))
            probes += 1
    report(capsys, 6, probes == 1000 and worst <= 1e-6,
           f"{probes} probes, max relative primal/dual gap of g1 {worst:.2e} (limit 1e-6)")


def test_criterion_07_recourse_guarantee(capsys):
    rng = np.random.default_rng(7)
    solved, bad = 0, []
    for name in TOYS:
        inst = cfg.instance(name)
        box = PriceBox(inst.nominal_prices, 0.5, cfg.CASES[name].free)
        pts = [np.append(c.as_array(), inst.dummy_marginal_cost) for c in corners(box)]
        probs = {cap: regret_problem(inst, 0.5, cap, ComparatorMode.CARBON_CAPPED, cfg.CASES[name].free)
                 for cap in (1.0, 1e3, 1e6)}
        designs = 100 // len(TOYS) + (1 if name in TOYS[: 100 % len(TOYS)] else 0)
        for _ in range(designs):
            for cap, prob in probs.items():
                x = random_design(rng, prob, inst, cap)
                ev = Evaluator(prob)
                for p in pts:
                    try:
                        ev.g1(x, p)
                        solved += 1
                    except Exception as exc:  # any failure is a recourse violation here
                        bad.append(f"{name} cap={cap:g}: {exc}")
    report(capsys, 7, not bad, f"100 designs x corners x caps {{1, 1e3, 1e6}} kg: {solved} second-stage LPs feasible"
           + (f"; failures: {bad[:5]}" if bad else ""))


def test_criterion_08_per_corner_guarantee(capsys, suite_runs):
    checked, bad = 0, []
    worst_regret, worst_co2 = -np.inf, -np.inf
    for (name, mode, alpha, alg), cert in suite_runs.items():
        if not cert.converged:
            continue
        inst = cfg.instance(name)
        cap = cfg.default_cap(name)
        prob = cfg.problem(name, alpha, mode)
        box = PriceBox(inst.nominal_prices, alpha, cfg.CASES[name].free)
        ev = Evaluator(prob)
        x = cert.design
        for corner in corners(box):
            p = extended_prices(inst, corner)
            r = regret_at(prob, x, p, ev)
            _, _, y = ev.g1(x, p)
            design, controls = unpack(inst, x, y)
            co2 = eval_co2(inst, design, controls)[2]
            cost = eval_costs(inst, design, controls, corner)
            worst_regret = max(worst_regret, r - cert.upper_bound)
            worst_co2 = max(worst_co2, co2 - cap)
            if r > cert.upper_bound + 1e-4:
                bad.append(f"{name}/{mode}/a={alpha}/{alg}: regret {r:.6f} > ub {cert.upper_bound:.6f}")
            if co2 > cap + 1e-4:
                bad.append(f"{name}/{mode}/a={alpha}/{alg}: co2 {co2:.4f} > cap {cap:.4f}")
            if abs(cost - (prob.c @ x + p @ (prob.A @ y))) > 1e-9 * max(1.0, abs(cost)):
                bad.append(f"{name}: evaluator cost mismatch")
            checked += 1
    report(capsys, 8, not bad and checked > 0,
           f"{checked} certificate corners: max(regret - ub) {worst_regret:.2e} EUR, max(co2 - cap) {worst_co2:.2e} kg"
           + (f"; {bad[:5]}" if bad else ""))


def test_criterion_09_compiler_faithfulness(capsys):
    rng = np.random.default_rng(9)
    worst, points = 0.0, 0
    for name in TOYS:
        inst = cfg.instance(name)
        prob = regret_problem(inst, 0.5, cfg.default_cap(name), ComparatorMode.UNCONSTRAINED)
        lo, hi = prob.price_bounds()
        vertices = []
        for _ in range(8):
            lpc = design_cost_lp(prob, rng.uniform(lo, hi))
            noise = np.concatenate([rng.uniform(0, 1, prob.n_x), rng.uniform(0, 1, prob.n_y)])
            sol = lp.solve(lpc.__class__(lpc.objective_coeffs * (1 + noise), lpc.constraint_matrix, lpc.row_relations,
                                         lpc.rhs, lpc.variable_lower_bounds, lpc.variable_upper_bounds))
            assert sol.optimal
            vertices.append(sol.primal)
        V = np.array(vertices)
        for _ in range(100):
            z = rng.dirichlet(np.ones(len(V))) @ V
            x, y = z[: prob.n_x], z[prob.n_x:]
            assert np.all(prob.B @ x + prob.C @ y >= prob.d - 1e-6 * (1 + np.abs(prob.d)))
            pv = PriceVector.from_array(rng.uniform(lo, hi)[:5])
            design, controls = unpack(inst, x, y)
            lhs = eval_costs(inst, design, controls, pv)
            rhs = prob.c @ x + extended_prices(inst, pv) @ (prob.A @ y)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
            points += 1
    report(capsys, 9, worst <= 1e-9, f"{points} feasible points on {len(TOYS)} instances, max relative mismatch {worst:.2e}")


def test_criterion_10_benchmark_shape(capsys, tmp_path):
    out = tmp_path / "bench.csv"
    t0 = time.perf_counter()
    code = cli.main(["benchmark", "--out", str(out)])
    dt = time.perf_counter() - t0
    table = capsys.readouterr().out
    rows = list(csv.DictReader(out.read_text().splitlines()))
    blocks = [ln for ln in table.splitlines() if ln.startswith("|U|=")]
    metric_rows = [ln for ln in table.splitlines() if ln.startswith(("#iterations", "time "))]
    shape_ok = (len(rows) == 16 and len(blocks) == 4 and len(metric_rows) == 24
                and all(len(ln.split()) >= 4 for ln in metric_rows))
    ratios = [float(r["iterations_ratio"]) for r in rows]
    below = sum(r < 1 for r in ratios)
    agree = all(abs(float(r["regret_cg"]) - float(r["regret_ccg"])) <= 200 for r in rows)
    with capsys.disabled():
        print("\n" + table, end="")
    report(capsys, 10, code == 0 and shape_ok and dt < 600 and agree,
           f"16 cells in {dt:.0f}s (limit 600s), 4 blocks x 6 rows; iteration ratio < 1 in {below}/16 cells "
           f"(informational); CG/C&CG values within 2 eps: {agree}")
