"""Regenerates demo.csv: synthetic yearly water-temperature curves in three periods."""

import math
import random

rng = random.Random(1979)
days = list(range(4, 366, 7))
periods = [("1979-1990", 0.0), ("1991-2002", 0.3), ("2003-2014", 1.0)]

rows = []
for label, warming in periods:
    for _ in range(12):
        phase = rng.gauss(0.0, 3.0)
        amplitude = 10.5 + rng.gauss(0.0, 0.5)
        drift = 0.0
        values = []
        for day in days:
            drift = 0.85 * drift + rng.gauss(0.0, 0.35)
            season = max(0.0, math.sin(math.pi * (day - 75 + phase) / 230.0))
            spring = warming * 2.5 * math.exp(-((day - 135) / 18.0) ** 2)
            values.append(3.5 + amplitude * season + spring + drift)
        rows.append((label, values))

with open("demo.csv", "w") as out:
    out.write("group," + ",".join(str(d) for d in days) + "\n")
    for label, values in rows:
        out.write(label + "," + ",".join(f"{v:.2f}" for v in values) + "\n")

with open("demo_weights.csv", "w") as out:
    out.write("days_sampled\n")
    for _ in rows:
        out.write(f"{rng.randint(300, 365)}\n")
