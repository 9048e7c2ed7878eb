"""Solve one regret problem on a small heating-and-cooling hub and inspect the result."""

from regretopt import oracle, regret
from regretopt.scalarization import ComparatorMode, min_carbon, regret_problem
from regretopt.synthetic import make_instance

inst = make_instance(("GB", "AWHP", "CC"), ("winter", "summer"), steps_per_day=2)
floor_kg, _, _ = min_carbon(inst)
cap = 1.3 * floor_kg
print(f"emission floor {floor_kg:.0f} kg/yr, cap {cap:.0f} kg/yr")

for alpha in (0.0, 0.25, 0.5):
    prob = regret_problem(inst, alpha, cap, ComparatorMode.UNCONSTRAINED, free=("e", "g"))
    cert = regret.run(prob, "ccg", epsilon=1.0)
    sizes = {k: round(v, 1) for k, v in cert.display_design().items() if "Dummy" not in k}
    print(f"alpha={alpha:<5} regret in [{cert.lower_bound:9.2f}, {cert.upper_bound:9.2f}] EUR "
          f"after {cert.iterations} iterations ({cert.status})  sizes {sizes}")

# worst-case regret of the last design, re-evaluated on every box corner
print(f"corner regret of the alpha=0.5 design: {oracle.corner_regret(prob, cert.design):.2f} EUR")
