"""How the embedded BE/AVF pair steers the step size.

Both integrators advance the same state; the L2 distance between their
results estimates the local error of the first-order method, and the
next step size follows from the square-root controller law.  Tightening
the tolerance by 10 should multiply the accepted-step count by about
sqrt(10) ~ 3.16.

Run:  python3 demos/step_controller.py
"""

import numpy as np

import acdg
from acdg import config as cfgmod

overrides = ["nx=50", "t_end=40", "snapshot_times="]
print("tolerance sweep on a shortened 1D run (t_end = 40):")
print("  delta_tol   accepted   rejected   ratio")
prev = None
for tol in ("1e-3", "1e-4", "1e-5", "1e-6"):
    cfg = acdg.load_preset("ex_1d_dw", overrides=overrides + [f"delta_tol={tol}"])
    trace, _ = cfgmod.run_from_config(cfg)
    ratio = "" if prev is None else f"{trace.accepted / prev:.2f}"
    print(f"  {tol:>9}   {trace.accepted:8d}   {trace.rejected:8d}   {ratio}")
    prev = trace.accepted

print()
print("controller law at rho = 0.9, delta_tol = 1e-4:")
settings = acdg.AdaptiveSettings(delta_tol=1e-4, t_end=1.0)
for est in (0.9e-4, 1e-4, 4e-4, 1e-12):
    tau_next = acdg.propose_step(1.0, est, settings)
    print(f"  estimate {est:8.1e}  ->  next tau = {tau_next:.4f} x current")
