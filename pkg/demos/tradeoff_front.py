"""Regret versus carbon cap for a few price-box widths, written as a CSV front."""

import sys

from regretopt.scalarization import ComparatorMode, front_csv, min_carbon, sweep
from regretopt.synthetic import make_instance

inst = make_instance(("GB", "AWHP", "CC"), ("winter", "summer"), steps_per_day=2)
floor_kg, _, _ = min_carbon(inst)
caps = [floor_kg * f for f in (1.05, 1.25, 1.5, 2.0)]
records = sweep(inst, alphas=(0.25, 0.5), caps=caps, epsilon=1.0,
                mode=ComparatorMode.UNCONSTRAINED, free=("e", "g"))

for r in records:
    print(f"alpha={r.alpha:<5} cap={r.cap_kg / 1000:7.2f} t  regret <= {r.regret_ub:9.2f} EUR  ({r.status})")

if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write(front_csv(records, timing=False))
    print(f"front written to {sys.argv[1]}")
