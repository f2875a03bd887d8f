"""Generate the crafted cleansing fixture and its expected outputs.

Run from this directory: ``python3 make_cleansing_golden.py``.

The base series moves in small steps with a non-degenerate min/max/std, so
no rule fires on it. Events are then planted at isolated positions, and
the expected NA positions and counts are written from the plan itself,
independently of the package's cleansing code.
"""

import csv
import datetime as dt
import json

import numpy as np

N = 1000
T0 = dt.datetime(2015, 1, 1, tzinfo=dt.timezone.utc)
rng = np.random.default_rng(20150101)

avg = np.clip(1500 + np.cumsum(rng.normal(0, 40, N)), 400, 2800)
avg = avg + rng.uniform(0, 1, N)  # many significant digits
lo = avg - rng.uniform(5, 50, N)
hi = avg + rng.uniform(5, 50, N)
sd = rng.uniform(1, 30, N)
wind = rng.uniform(4, 20, N)

slots = iter(range(10, N - 10, 9))  # isolated event positions
expect = {"duplicate_timestamp": 0, "consecutive_identical": 0, "zero_std": 0, "unphysical_ramp": 0}
flagged = []
pre_na = []


def take():
    return next(slots)


# rule 1: repeated average with a spread interval -> flagged
for _ in range(12):
    i = take()
    avg[i] = avg[i - 1]
    lo[i], hi[i] = avg[i] - 20, avg[i] + 20
    flagged.append(i)
    expect["consecutive_identical"] += 1
# rule 1: equal at 5 decimals, different at the 8th -> flagged
for _ in range(4):
    i = take()
    avg[i] = avg[i - 1] + 3e-8
    lo[i], hi[i] = avg[i] - 20, avg[i] + 20
    flagged.append(i)
    expect["consecutive_identical"] += 1
# rule 1 near miss: differs at the 4th decimal -> kept
for _ in range(4):
    i = take()
    avg[i] = avg[i - 1] + 2e-4
    lo[i], hi[i] = avg[i] - 20, avg[i] + 20
# constant operation at rated power: avg = min = max, kept
for _ in range(3):
    i = take()
    for j in range(i, i + 4):
        avg[j] = lo[j] = hi[j] = 3600.0
        sd[j] = 0.25
    take()  # the plateau spans the next slot too

# rule 2: exact zero std -> flagged
for _ in range(15):
    i = take()
    sd[i] = 0.0
    flagged.append(i)
    expect["zero_std"] += 1
# rule 2 near miss: tiny but non-zero std
for _ in range(3):
    sd[take()] = 1e-9

# rule 3 upward: 100 -> 2600, min(t+1)=2550 > 0.99*124
for _ in range(8):
    i = take()
    avg[i], lo[i], hi[i] = 100.0 + i * 1e-3, 80.0, 124.0
    avg[i + 1], lo[i + 1], hi[i + 1] = 2600.0 + i * 1e-3, 2550.0, 2700.0
    flagged.append(i + 1)
    expect["unphysical_ramp"] += 1
# rule 3 downward: 3500 -> 300, min(t)=3450 > 0.99*max(t+1)=336.6
for _ in range(6):
    i = take()
    avg[i], lo[i], hi[i] = 3500.0 + i * 1e-3, 3450.0, 3550.0
    avg[i + 1], lo[i + 1], hi[i + 1] = 300.0 + i * 1e-3, 250.0, 340.0
    flagged.append(i + 1)
    expect["unphysical_ramp"] += 1
# rule 3 near miss: jump of 0.66 rated power with disjoint ranges
for _ in range(3):
    i = take()
    avg[i], lo[i], hi[i] = 200.0 + i * 1e-3, 190.0, 210.0
    avg[i + 1], lo[i + 1], hi[i + 1] = 200.0 + 0.66 * 3600 + i * 1e-3, 2550.0, 2600.0
# rule 3 near miss: large jump but overlapping extremes
for _ in range(3):
    i = take()
    avg[i], lo[i], hi[i] = 100.0 + i * 1e-3, 50.0, 2600.0
    avg[i + 1], lo[i + 1], hi[i + 1] = 2600.0 + i * 1e-3, 2500.0, 2700.0

# missing records already present in the source
for _ in range(10):
    i = take()
    pre_na.append(i)

rows = []
exp_rows = []
for i in range(N):
    t = (T0 + dt.timedelta(minutes=10 * i)).strftime("%Y-%m-%dT%H:%M:%SZ")
    vals = [avg[i], lo[i], hi[i], sd[i]]
    src = ["NA"] * 4 if i in pre_na else [repr(float(v)) for v in vals]
    rows.append([t, "WT07", *src, repr(float(wind[i]))])
    out = ["NA"] * 4 if (i in pre_na or i in flagged) else src
    exp_rows.append([t, "WT07", *out, repr(float(wind[i]))])

header = ["timestamp", "turbine_id", "power_avg_kw", "power_min_kw", "power_max_kw",
          "power_std_kw", "wind_speed_ms"]
for name, body in (("cleansing_input.csv", rows), ("cleansing_expected.csv", exp_rows)):
    with open(name, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(body)

with open("cleansing_expected.json", "w") as fh:
    json.dump({
        "counts": expect,
        "na_fraction_before": len(pre_na) / N,
        "na_fraction_after": (len(pre_na) + len(flagged)) / N,
        "flagged_rows": sorted(int(i) for i in flagged),
    }, fh, indent=2)
    fh.write("\n")
