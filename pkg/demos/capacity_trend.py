"""Capacity of a single space-time point as the time window grows.

A single atom has zero capacity for these parameters. The atomic estimate
should therefore decay as the window T_max doubles, at the rate that the
kernel's scaling law predicts.

    python3 demos/capacity_trend.py
"""

import json

from frackap import fixture_path
from frackap.capacity import predicted_trend_exponent, problem_from_dict, refine_and_trend

with open(fixture_path("capacity_singleton.json")) as fh:
    doc = json.load(fh)
spec, kset, p, variant, params, cfg = problem_from_dict(doc)

rep = refine_and_trend(spec, kset, p, variant, levels=4, base=params, cfg=cfg, mode="T_max")
for level, value in zip(rep.parameters, rep.values):
    print(f"T_max = {level['T_max']:5.1f}   capacity >= {value:.6f}")

print(f"classification: {rep.classification}")
print(f"fitted rate {rep.fitted_rate:.4f}, predicted {predicted_trend_exponent(spec, p):.4f}")
