"""Render figures from the solver's CSV output directory.

Four figure kinds, all reading only the documented file contract of a run
directory (energy.csv and snapshots/t_*.csv):

  energy      broken-energy history (monotone decreasing curve)
  steps       accepted step sizes over time (log scale)
  profile_1d  waterfall of 1D solution profiles, one curve per snapshot
  contour_2d  filled contours of the final (or a chosen) 2D snapshot

Inputs are never modified.  Command line:

  render --kind energy --in RUNDIR --out energy.png
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("energy", "steps", "profile_1d", "contour_2d")


class RenderError(RuntimeError):
    pass


@dataclass(frozen=True)
class FigureRequest:
    input_dir: str
    kind: str
    output_path: str
    snapshot: str | None = None   # basename like "t_5.csv"; latest when omitted

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}; choices: {', '.join(KINDS)}")


def _read_csv_columns(path, required):
    """Columns of a comment-tolerant CSV as arrays; errors name missing columns."""
    if not os.path.exists(path):
        raise RenderError(f"missing input file {path}")
    with open(path, newline="", encoding="utf-8") as f:
        rows = [r for r in csv.reader(f) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise RenderError(f"{path} contains no data")
    header = [h.strip() for h in rows[0]]
    for col in required:
        if col not in header:
            raise RenderError(f"{path} is missing required column {col!r} "
                              f"(found: {', '.join(header)})")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    if data.size == 0:
        raise RenderError(f"{path} has a header but no rows")
    return {name: data[:, i] for i, name in enumerate(header)}


def _snapshot_files(input_dir):
    snapdir = Path(input_dir) / "snapshots"
    if not snapdir.is_dir():
        raise RenderError(f"no snapshots directory under {input_dir}")
    files = sorted(snapdir.glob("t_*.csv"))
    if not files:
        raise RenderError(f"no snapshot files in {snapdir}")

    def requested_time(path):
        label = path.stem[2:].replace("m", "-")
        try:
            return float(label)
        except ValueError:
            return float("inf")

    return sorted(files, key=requested_time)


def _render_energy(request, ax):
    cols = _read_csv_columns(os.path.join(request.input_dir, "energy.csv"),
                             required=("t", "energy"))
    ax.plot(cols["t"], cols["energy"], lw=1.5)
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.set_title("Discrete energy history")


def _render_steps(request, ax):
    cols = _read_csv_columns(os.path.join(request.input_dir, "energy.csv"),
                             required=("t", "dt"))
    t, dt = cols["t"][1:], cols["dt"][1:]   # row 0 is the initial state
    if len(t) == 0:
        raise RenderError("energy.csv records no accepted steps")
    ax.semilogy(t, dt, ".", ms=3)
    ax.set_xlabel("t")
    ax.set_ylabel("accepted step size")
    ax.set_title("Adaptive step sizes")


def _render_profile_1d(request, ax):
    for path in _snapshot_files(request.input_dir):
        cols = _read_csv_columns(path, required=("x", "u"))
        order = np.argsort(cols["x"])
        ax.plot(cols["x"][order], cols["u"][order], lw=1.2, label=path.stem[2:])
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.set_title("Phase profiles")
    ax.legend(title="t", fontsize=8)


def _render_contour_2d(request, fig, ax):
    files = _snapshot_files(request.input_dir)
    if request.snapshot:
        matches = [p for p in files if p.name == request.snapshot]
        if not matches:
            raise RenderError(f"snapshot {request.snapshot!r} not found "
                              f"(available: {', '.join(p.name for p in files)})")
        path = matches[0]
    else:
        path = files[-1]
    cols = _read_csv_columns(path, required=("x", "y", "u"))
    u = cols["u"]
    if np.ptp(u) < 1e-14:
        # degenerate flat field: a contour plot cannot tessellate it
        m = ax.tripcolor(cols["x"], cols["y"], u, shading="gouraud",
                         vmin=u[0] - 1.0, vmax=u[0] + 1.0)
    else:
        m = ax.tricontourf(cols["x"], cols["y"], u, levels=21)
    fig.colorbar(m, ax=ax)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"u at {path.stem.replace('t_', 't = ')}")


def render(request: FigureRequest) -> str:
    """Produce the requested image; returns the output path."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=110)
    try:
        if request.kind == "energy":
            _render_energy(request, ax)
        elif request.kind == "steps":
            _render_steps(request, ax)
        elif request.kind == "profile_1d":
            _render_profile_1d(request, ax)
        else:
            _render_contour_2d(request, fig, ax)
        fig.tight_layout()
        outdir = os.path.dirname(os.path.abspath(request.output_path))
        os.makedirs(outdir, exist_ok=True)
        fig.savefig(request.output_path)
    finally:
        plt.close(fig)
    return request.output_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render figures from an acdg run directory.")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="input_dir", required=True,
                        help="run directory containing energy.csv / snapshots/")
    parser.add_argument("--out", dest="output_path", required=True,
                        help="image file to write (format from the extension)")
    parser.add_argument("--snapshot", default=None,
                        help="snapshot basename for contour_2d (default: latest)")
    args = parser.parse_args(argv)
    try:
        request = FigureRequest(input_dir=args.input_dir, kind=args.kind,
                                output_path=args.output_path, snapshot=args.snapshot)
        path = render(request)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
