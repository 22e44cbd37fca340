"""Structured run outputs: energy history, snapshots, summary, sweeps.

File contracts (stable):

  energy.csv              header `t,dt,energy,min_u,max_u,newton_iters`,
                          one row per accepted step (row 0 = initial state)
  snapshots/t_<value>.csv header `x,u` (1D) or `x,y,u` (2D); one row per
                          nodal degree of freedom; a leading `#` comment
                          records the requested and actual times
  summary.txt             `key = value` lines with counters and metadata
  sweep.csv               header `tol,ripening_time,steps,ratio`; the
                          ratio column is empty on the first row

All numbers are written with fixed repr-style formatting, so identical
runs produce byte-identical files.
"""

from __future__ import annotations

import os

import numpy as np

from .config import RunConfig
from .dg_core import DGSpace
from .driver import RunTrace


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _time_label(t: float) -> str:
    return f"{t:g}".replace("-", "m")


def write_outputs(trace: RunTrace, space: DGSpace, cfg: RunConfig, outdir) -> list:
    """Write energy.csv, snapshots/, and summary.txt; returns the paths written."""
    os.makedirs(outdir, exist_ok=True)
    written = []

    energy_path = os.path.join(outdir, "energy.csv")
    with open(energy_path, "w", encoding="utf-8") as f:
        f.write("t,dt,energy,min_u,max_u,newton_iters\n")
        for i in range(len(trace.t)):
            f.write(",".join([
                _fmt(trace.t[i]), _fmt(trace.dt[i]), _fmt(trace.energy[i]),
                _fmt(trace.min_u[i]), _fmt(trace.max_u[i]),
                str(int(trace.newton_iterations[i])),
            ]) + "\n")
    written.append(energy_path)

    if trace.snapshots:
        snapdir = os.path.join(outdir, "snapshots")
        os.makedirs(snapdir, exist_ok=True)
        header = "x,u" if space.dim == 1 else "x,y,u"
        for t_req, t_actual, xi in trace.snapshots:
            path = os.path.join(snapdir, f"t_{_time_label(t_req)}.csv")
            with open(path, "w", encoding="utf-8") as f:
                f.write(f"# requested_t={_fmt(t_req)} actual_t={_fmt(t_actual)}\n")
                f.write(header + "\n")
                coords = space.node_coords
                order = np.lexsort(tuple(coords[:, d] for d in range(space.dim - 1, -1, -1)))
                for n in order:
                    cols = [_fmt(c) for c in coords[n]] + [_fmt(xi[n])]
                    f.write(",".join(cols) + "\n")
            written.append(path)

    summary_path = os.path.join(outdir, "summary.txt")
    with open(summary_path, "w", encoding="utf-8") as f:
        f.write(f"dimension = {cfg.dimension}\n")
        f.write(f"degree = {cfg.degree}\n")
        f.write(f"nx = {cfg.nx}\n")
        if cfg.dimension == 2:
            f.write(f"ny = {cfg.ny}\n")
        f.write(f"elements = {space.n_elements}\n")
        f.write(f"dofs = {space.n_dofs}\n")
        f.write(f"sigma = {_fmt(cfg.sigma)}\n")
        f.write(f"delta_tol = {_fmt(cfg.delta_tol)}\n")
        f.write(f"t_end = {_fmt(cfg.t_end)}\n")
        f.write(f"accepted_steps = {trace.accepted}\n")
        f.write(f"rejected_steps = {trace.rejected}\n")
        f.write(f"solver_calls = {trace.solver_calls}\n")
        rt = trace.ripening_time
        f.write(f"ripening_time = {_fmt(rt) if rt is not None else 'none'}\n")
        if rt is not None:
            f.write(f"steps_to_ripening = {trace.steps_until(rt)}\n")
        f.write(f"final_time = {_fmt(trace.t[-1])}\n")
        f.write(f"initial_energy = {_fmt(trace.energy[0])}\n")
        f.write(f"final_energy = {_fmt(trace.energy[-1])}\n")
    written.append(summary_path)
    return written


def write_sweep(rows, outdir) -> str:
    """rows: list of (tol_label, ripening_time_or_None, accepted_steps)."""
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, "sweep.csv")
    with open(path, "w", encoding="utf-8") as f:
        f.write("tol,ripening_time,steps,ratio\n")
        prev_steps = None
        for tol, ripening, steps in rows:
            ratio = "" if prev_steps is None else _fmt(steps / prev_steps)
            rt = _fmt(ripening) if ripening is not None else "nan"
            f.write(f"{tol},{rt},{steps},{ratio}\n")
            prev_steps = steps
    return path
