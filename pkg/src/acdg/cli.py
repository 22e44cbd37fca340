"""Command-line entry point: `acdg run|sweep|preset`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import config as cfgmod
from . import output
from .driver import AdaptiveStepError


def _add_common(p):
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="override any config key")
    p.add_argument("--out", default=None, help="output directory")


def _default_outdir(config_path, suffix=""):
    return Path(config_path).stem + "_out" + suffix


def _load(args):
    path = args.config
    if path in cfgmod.PRESET_NAMES:
        return cfgmod.load_preset(path, overrides=args.overrides), path
    return cfgmod.load_config(path, overrides=args.overrides), path


def _run_once(cfg):
    trace, space = cfgmod.run_from_config(cfg)
    return trace, space


def cmd_run(args) -> int:
    cfg, path = _load(args)
    outdir = args.out or _default_outdir(path)
    trace, space = _run_once(cfg)
    output.write_outputs(trace, space, cfg, outdir)
    rt = trace.ripening_time
    print(f"accepted steps: {trace.accepted}  rejected: {trace.rejected}")
    print(f"ripening time: {rt:.6g}" if rt is not None else "ripening time: none")
    print(f"final energy: {trace.energy[-1]:.8g}")
    print(f"outputs written to {outdir}")
    return 0


def cmd_sweep(args) -> int:
    cfg, path = _load(args)
    tol_labels = [s.strip() for s in args.tols.split(",") if s.strip()]
    if not tol_labels:
        raise cfgmod.ConfigError("--tols must list at least one tolerance")
    outdir = args.out or _default_outdir(path, "_sweep")
    rows = []
    for label in tol_labels:
        tol_cfg = cfgmod.load_config(path, overrides=args.overrides + [f"delta_tol={label}"]) \
            if path not in cfgmod.PRESET_NAMES \
            else cfgmod.load_preset(path, overrides=args.overrides + [f"delta_tol={label}"])
        trace, space = _run_once(tol_cfg)
        output.write_outputs(trace, space, tol_cfg, Path(outdir) / label)
        rows.append((label, trace.ripening_time, trace.accepted))
        rt = trace.ripening_time
        rt_text = f"{rt:.6g}" if rt is not None else "none"
        print(f"tol {label}: steps {trace.accepted}, ripening {rt_text}")
    sweep_path = output.write_sweep(rows, outdir)
    print(f"sweep table written to {sweep_path}")
    return 0


def cmd_preset(args) -> int:
    text = cfgmod.preset_text(args.name)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"preset {args.name} written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="acdg",
        description="Interior-penalty DG Allen-Cahn solver with adaptive "
                    "energy-stable time stepping.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configuration")
    p_run.add_argument("config", help="config file path or preset name")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a tolerance sweep")
    p_sweep.add_argument("config", help="config file path or preset name")
    p_sweep.add_argument("--tols", required=True,
                         help="comma-separated delta_tol values")
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_preset = sub.add_parser("preset", help="print or copy a shipped preset")
    p_preset.add_argument("name", choices=cfgmod.PRESET_NAMES)
    p_preset.add_argument("--out", default=None, help="write to this file instead of stdout")
    p_preset.set_defaults(func=cmd_preset)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (cfgmod.ConfigError, AdaptiveStepError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
