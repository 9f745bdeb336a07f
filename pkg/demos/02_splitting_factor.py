"""Smallest TDD charging fraction that pays for the uplink, as a function of distance.

Writes beta_curves.csv and energy_curves.csv into the output directory
(first argument, default ./runs).
"""
import sys
from pathlib import Path

import numpy as np

from auvaet.harness import ExperimentConfig, beta_curves, cap_distance, energy_curves

out = Path(sys.argv[1] if len(sys.argv) > 1 else "runs")
out.mkdir(parents=True, exist_ok=True)
cfg = ExperimentConfig()

rows = beta_curves(cfg, out=out / "beta_curves.csv")
for f in (10.0, 20.0, 40.0, 60.0):
    col = [r for r in rows if r["f_khz"] == f]
    shown = [f"{r['d_m']:.0f}:{r['beta_star']:.3f}" for r in col[::10]]
    print(f"{f:4.0f} kHz  cap at {cap_distance(rows, f):6.0f} m  ", " ".join(shown))

# harvested vs required energy per slot; the crossing moves out as beta grows
rows = energy_curves(cfg, betas=(0.1, 0.5, 0.9), d_range=np.arange(10, 401, 5), out=out / "energy_curves.csv")
for beta in (0.1, 0.5, 0.9):
    crossing = next(r["d_m"] for r in rows if r["beta"] == beta and r["e_harv"] < r["e_req_exact"])
    print(f"beta={beta}: harvest first falls short of the uplink cost at {crossing:.0f} m")
print("wrote", out / "beta_curves.csv", "and", out / "energy_curves.csv")
