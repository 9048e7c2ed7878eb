"""Pick representative days from a synthetic year of load profiles with k-medoids."""

import numpy as np

from regretopt.clustering import DayProfile, k_medoids

rng = np.random.default_rng(7)
hours = np.arange(24)
profiles = []
for d in range(60):
    season = np.cos(2 * np.pi * d / 60)  # +1 winter, -1 summer
    heat = np.clip(25 + 20 * season + 5 * np.cos(2 * np.pi * (hours - 3) / 24), 0, None)
    cold = np.clip(10 - 12 * season + 6 * np.sin(np.pi * (hours - 6) / 12), 0, None)
    profiles.append(DayProfile(f"d{d:02d}", heat + rng.normal(0, 1, 24), cold + rng.normal(0, 1, 24)))

for k in (2, 4, 6):
    res = k_medoids(profiles, k, seed=0)
    picked = ", ".join(f"{day.id} (w={day.weight:.1f})" for day in res.days)
    print(f"k={k}: cost {res.cost:8.2f}, {len(res.cost_history) - 1} swaps, days {picked}")
