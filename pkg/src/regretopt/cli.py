"""Command-line entry point: ``regretopt <command> [options]``.

Exit codes: 0 ok, 2 bad input, 3 not converged, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import benchmark as bench
from . import clustering, lp, oracle, regret, scalarization
from .io import atomic_write_text
from .model import RESOURCES, TABLE_ORDER, InvalidInstance, load_instance, save_instance, validate_instance
from .synthetic import TOY_SUITE, benchmark_instance

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED, EXIT_SOLVER = 0, 2, 3, 4


class InputError(Exception):
    pass


def _floats(text: str) -> list:
    if text is None or not text.strip():
        return []
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"not a comma-separated list of numbers: {text!r}") from exc


def _load(path):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"instance file not found: {p}")
    try:
        return load_instance(p)
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: invalid JSON ({exc})") from exc
    except jsonschema.ValidationError as exc:
        raise InputError(f"{p}: schema violation: {exc.message}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{p}: {exc}") from exc


def _free(args):
    free = tuple(t.strip() for t in args.free.split(",") if t.strip())
    unknown = set(free) - set(RESOURCES)
    if unknown:
        raise InputError(f"unknown price components {sorted(unknown)}")
    return free


def _cap(args):
    if args.cap_t is not None:
        return args.cap_t * 1000.0
    return args.cap_kg


def _caps(args):
    if args.caps_t is not None:
        return [c * 1000.0 for c in _floats(args.caps_t)]
    return _floats(args.caps_kg)


def _problem(args, instance, alpha, cap):
    if not 0 <= alpha < 1:
        raise InputError(f"alpha must lie in [0, 1), got {alpha}")
    if cap is not None and not cap > 0:
        raise InputError(f"carbon cap must be positive, got {cap}")
    return scalarization.regret_problem(
        instance, alpha, cap, scalarization.ComparatorMode(args.comparator), _free(args)
    )


def _summary(cert: regret.RegretCertificate) -> str:
    sizes = cert.display_design()
    lines = [
        f"algorithm      {cert.algorithm}",
        f"status         {cert.status}",
        f"epsilon        {cert.epsilon:g} EUR",
        f"regret bounds  [{cert.lower_bound:.2f}, {cert.upper_bound:.2f}] EUR",
        f"iterations     {cert.iterations}",
        f"wall time      {cert.wall_time:.2f} s",
        "design:",
    ]
    for name in TABLE_ORDER:
        if name in sizes:
            lines.append(f"  {name:<10} {sizes[name]:12.4f}")
    for name, v in sizes.items():
        if name not in TABLE_ORDER:
            lines.append(f"  {name:<10} {v:12.4f}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    prob = _problem(args, inst, args.alpha, _cap(args))
    cert = regret.run(prob, args.algorithm, args.eps, args.sp_gap, max_iter=args.max_iter)
    if args.out:
        atomic_write_text(args.out, cert.to_json())
    print(_summary(cert))
    return EXIT_OK if cert.converged else EXIT_NONCONVERGED


def cmd_sweep(args) -> int:
    inst = _load(args.instance)
    alphas, caps = _floats(args.alphas), _caps(args)
    if any(not 0 <= a < 1 for a in alphas):
        raise InputError("alphas must lie in [0, 1)")
    if any(not c > 0 for c in caps):
        raise InputError("caps must be positive")
    records = scalarization.sweep(
        inst, alphas, caps, args.algorithm, args.eps, scalarization.ComparatorMode(args.comparator),
        _free(args), args.sp_gap, args.jobs, args.max_iter,
    )
    text = scalarization.front_csv(records, timing=not args.no_timing)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    bad = [r for r in records if r.status != "converged"]
    return EXIT_NONCONVERGED if bad else EXIT_OK


def _sizes(text):
    out = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        try:
            K, n = tok.lower().split("x")
            out.append((int(K), int(n)))
        except ValueError as exc:
            raise InputError(f"size {tok!r} is not of the form DAYSxSTEPS") from exc
    return out


def cmd_benchmark(args) -> int:
    sizes = _sizes(args.sizes)
    alphas = _floats(args.alphas)
    caps = _caps(args)
    cells = bench.run_benchmark(sizes, alphas, caps, args.eps, scalarization.ComparatorMode(args.comparator),
                                _free(args), benchmark_instance, args.sp_gap)
    text = bench.cells_csv(cells)
    if args.out:
        atomic_write_text(args.out, text)
    if cells:
        print(bench.comparison_table(cells), end="")
    elif not args.out:
        sys.stdout.write(text)
    bad = [c for c in cells if c.status_cg != "converged" or c.status_ccg != "converged"]
    return EXIT_NONCONVERGED if bad else EXIT_OK


def cmd_mincarbon(args) -> int:
    inst = _load(args.instance)
    kg, x, _ = scalarization.min_carbon(inst)
    print(f"minimum annual emissions without dummies: {kg:.3f} kg")
    if args.out:
        atomic_write_text(args.out, json.dumps({"min_carbon_kg": kg}, indent=1))
    return EXIT_OK


def cmd_cluster(args) -> int:
    p = Path(args.profiles)
    if not p.is_file():
        raise InputError(f"profile file not found: {p}")
    try:
        profiles = clustering.read_profiles_csv(p.read_text(), None if args.use_extra else [])
    except (ValueError, KeyError) as exc:
        raise InputError(f"{p}: {exc}") from exc
    if not 1 <= args.k <= len(profiles):
        raise InputError(f"k must lie in [1, {len(profiles)}]")
    res = clustering.k_medoids(profiles, args.k, args.seed, args.use_extra)
    text = json.dumps({"days": clustering.days_section(res.days)}, indent=1)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        print(text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    prob = _problem(args, inst, args.alpha, _cap(args))
    try:
        res = oracle.oracle_regret(prob, args.grid_n)
    except oracle.TooLarge as exc:
        raise InputError(str(exc)) from exc
    doc = {"oracle_regret": res.value, "lattice_slack": res.lattice_slack, "lower_bound": res.lower_bound,
           "grid_n": args.grid_n, "candidates": res.n_candidates}
    if args.out:
        atomic_write_text(args.out, json.dumps(doc, indent=1))
    print(f"oracle regret {res.value:.4f} EUR (lattice slack {res.lattice_slack:.2f}, grid {args.grid_n})")
    return EXIT_OK


def cmd_validate(args) -> int:
    inst = _load(args.instance)
    diags = validate_instance(inst, args.alpha)
    for d in diags:
        print(d)
    errors = [d for d in diags if d.level == "error"]
    if not diags:
        print("ok")
    return EXIT_INPUT if errors else EXIT_OK


def cmd_synth(args) -> int:
    names = {c.name: c for c in TOY_SUITE}
    if args.toy:
        if args.toy not in names:
            raise InputError(f"unknown toy {args.toy!r}; choose from {sorted(names)}")
        inst = names[args.toy].instance()
    else:
        inst = benchmark_instance(args.days, args.steps)
    save_instance(inst, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regretopt", description="Min-max regret design of building energy supply.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, alpha=True, caps=False):
        p.add_argument("--instance", required=True)
        p.add_argument("--algorithm", choices=("cg", "ccg"), default="ccg")
        p.add_argument("--eps", type=float, default=100.0)
        p.add_argument("--sp-gap", type=float, default=None)
        p.add_argument("--comparator", choices=("unconstrained", "carbon-capped"), default="unconstrained")
        p.add_argument("--free", default=",".join(RESOURCES), help="price components allowed to vary")
        p.add_argument("--out")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-iter", type=int, default=regret.DEFAULT_MAX_ITER)
        if alpha:
            p.add_argument("--alpha", type=float, default=0.0)
            g = p.add_mutually_exclusive_group()
            g.add_argument("--cap-kg", type=float, default=None)
            g.add_argument("--cap-t", type=float, default=None)

    p = sub.add_parser("solve", help="run the regret algorithm for one (alpha, cap)")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="trade-off front over alphas and caps")
    common(p, alpha=False)
    p.add_argument("--alphas", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--caps-kg")
    g.add_argument("--caps-t")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="leave time_s blank for byte-stable output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("benchmark", help="paired CG / C&CG runs on synthetic hubs")
    p.add_argument("--sizes", default="1x1,1x3,3x1,3x3", help="DAYSxSTEPS list")
    p.add_argument("--alphas", default="0.3,0.7")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--caps-t", default="30,60")
    g.add_argument("--caps-kg")
    p.add_argument("--eps", type=float, default=100.0)
    p.add_argument("--sp-gap", type=float, default=None)
    p.add_argument("--comparator", choices=("unconstrained", "carbon-capped"), default="unconstrained")
    p.add_argument("--free", default=",".join(RESOURCES))
    p.add_argument("--out")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("mincarbon", help="least emissions without dummy generation")
    p.add_argument("--instance", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mincarbon)

    p = sub.add_parser("cluster", help="k-medoids representative days from a profile CSV")
    p.add_argument("--profiles", required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--use-extra", action="store_true", help="include extra series in the distance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("oracle", help="brute-force lattice regret (small instances)")
    common(p)
    p.add_argument("--grid-n", type=int, default=101)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("synth", help="write a synthetic instance file")
    p.add_argument("--toy", help="toy case name")
    p.add_argument("--days", type=int, default=3)
    p.add_argument("--steps", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "eps", 1.0) is not None and getattr(args, "eps", 1.0) <= 0:
        print("error: --eps must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, InvalidInstance, scalarization.CapBelowFloor, clustering.DegenerateInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (lp.LpError, regret.RegretError, scalarization.CarbonInfeasible, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
