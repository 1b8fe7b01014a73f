"""Rejection rates of the goodness-of-fit test across departure
strengths, written to power.csv.

Uses a small grid and modest repetition count so the sweep finishes in
well under a minute; push width, reps, and the tau grid up for a
smoother curve.
"""

import numpy as np

from isinglab.gof import power_curve
from isinglab.io import write_csv

taus = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5]
rows = power_curve(12, 12, taus, 40, rng=np.random.default_rng(5))

print(f"{'tau':>5} {'test rejects':>13} {'gate alone':>11}")
for point in rows:
    print(
        f"{point.tau:>5.2f} {point.stat_reject_rate:>13.3f} "
        f"{point.gate_reject_rate:>11.3f}"
    )

write_csv(
    "power.csv",
    ("tau", "stat_reject_rate", "gate_reject_rate", "reps"),
    [(p.tau, p.stat_reject_rate, p.gate_reject_rate, p.reps) for p in rows],
)
print("\nwrote power.csv")
print("the test column should rise well before the gate column does;")
print("that ordering is the whole point of the centered statistic")
