"""Command-line front end: config in, CSV/JSON artifacts out.

Commands: eval, uq, opt-classical, opt-robust, contour.  Every output file
starts with a header recording the tool version, the seed and the hash of
the effective config, so any artifact can be traced back to its run.  No
command mutates the config file or any other input.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod, mc_uq, mechmodel, optimizer
from .errors import BrakeOptError, ParseError


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _header(cfg, seed) -> str:
    return f"# brakeopt {__version__} seed={seed} config_sha256={cfgmod.config_sha256(cfg)[:12]}\n"


def _write_csv(path: Path, cfg, seed, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_header(cfg, seed))
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, cfg, seed, payload: dict) -> None:
    body = {
        "provenance": {
            "tool": "brakeopt",
            "version": __version__,
            "seed": seed,
            "config_sha256": cfgmod.config_sha256(cfg),
        },
        **payload,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _apply_overrides(cfg, args):
    mc = cfg.mc
    if getattr(args, "seed", None) is not None:
        mc = dataclasses.replace(mc, seed=args.seed)
    if getattr(args, "nu", None) is not None:
        mc = dataclasses.replace(mc, nu=args.nu)
    out = cfg.output
    if getattr(args, "grid", None) is not None:
        nx, ny = args.grid
        out = dataclasses.replace(out, grid_nx=nx, grid_ny=ny)
    if getattr(args, "out", None) is not None:
        out = dataclasses.replace(out, dir=args.out)
    return dataclasses.replace(cfg, mc=mc, output=out)


def _out_dir(cfg) -> Path:
    path = Path(cfg.output.dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _grid_arg(text: str):
    m = re.fullmatch(r"(\d+)x(\d+)", text)
    if not m:
        raise argparse.ArgumentTypeError("grid must look like 101x51")
    return int(m.group(1)), int(m.group(2))


def cmd_eval(cfg) -> int:
    sol = mechmodel.braking_force(cfg.geometry, cfg.friction, cfgmod.nominal_load(cfg))
    print(f"alpha_deg = {cfg.random.alpha_mean_deg!r}")
    print(f"Fs_kN = {cfg.random.fs_mean_kN!r}")
    for name in ("N1", "N2", "N3", "N4", "T1", "T2", "T3", "T4", "Rx", "Ry", "Fh"):
        print(f"{name}_kN = {getattr(sol, name)!r}")
    print(f"valid = {'true' if sol.valid else 'false'}")
    return 0


def cmd_uq(cfg, freeze_alpha, freeze_fs, workers) -> int:
    seed, nu = cfg.mc.seed, cfg.mc.nu
    model = cfgmod.input_model_from(cfg)
    uniforms = mc_uq.draw_uniform_matrix(seed, nu)
    ens = mc_uq.propagate(
        model, uniforms, cfg.geometry, cfg.friction,
        cfg.loads.Fg_kN, cfg.loads.Fb_kN,
        freeze_alpha_deg=freeze_alpha, freeze_fs_kn=freeze_fs, workers=workers)

    out = _out_dir(cfg)
    _write_csv(out / "ensemble.csv", cfg, seed,
               ["index", "alpha_deg", "fs_kN", "fh_kN", "valid"],
               ((i, ens.inputs[i, 0], ens.inputs[i, 1], ens.outputs[i], ens.valid[i])
                for i in range(ens.nu)))

    finite = ens.outputs[np.isfinite(ens.outputs)]
    stats = mc_uq.summarize(finite)
    _write_json(out / "stats.json", cfg, seed, {
        "nu": ens.nu,
        "evaluated": int(finite.size),
        "invalid_count": ens.invalid_count,
        "stats_kN": {
            "mean": stats.mean,
            "std": stats.std,
            "min": stats.min,
            "max": stats.max,
            "ci95_quantile": list(stats.ci95),
            "ci95_normal": list(stats.ci95_normal),
        },
        "histogram": {
            "edges_kN": [float(v) for v in stats.hist_edges],
            "counts": [int(v) for v in stats.hist_counts],
        },
    })

    running_mean, running_std = mc_uq.convergence_trace(finite)
    _write_csv(out / "trace.csv", cfg, seed,
               ["n", "running_mean_kN", "running_std_kN"],
               ((k + 1, running_mean[k], running_std[k]) for k in range(finite.size)))

    if stats.kde_grid is not None:
        _write_csv(out / "kde.csv", cfg, seed,
                   ["fh_kN", "density_per_kN"],
                   zip(stats.kde_grid, stats.kde_density))
    print(f"uq: nu={nu} seed={seed} mean={stats.mean:.6g} kN std={stats.std:.6g} kN "
          f"invalid={ens.invalid_count} -> {out}")
    return 0


def _optimum_payload(result: optimizer.OptimizationResult, units: str) -> dict:
    payload = {
        "s_opt": {"a_mm": result.s_opt.a, "c_mm": result.s_opt.c},
        "objective": result.objective,
        "objective_units": units,
        "feasible": result.feasible,
        "evaluations": result.evaluations,
        "certificate": {
            "value": result.certificate_value,
            "a_mm": result.certificate_point.a,
            "c_mm": result.certificate_point.c,
        },
    }
    if result.constraint_prob is not None:
        payload["constraint_probability"] = result.constraint_prob
    return payload


def _write_contour(cfg, seed, scan: optimizer.GridScan, out: Path) -> Path:
    value_col = {"classical": "fh_kN", "robust": "objective", "constraint": "probability"}
    rows = ((a, c, scan.values[i, j])
            for i, a in enumerate(scan.a_values)
            for j, c in enumerate(scan.c_values))
    path = out / f"contour_{scan.kind}.csv"
    _write_csv(path, cfg, seed, ["a_mm", "c_mm", value_col[scan.kind]], rows)
    return path


def cmd_opt_classical(cfg) -> int:
    setup = cfgmod.setup_from(cfg)
    result = optimizer.optimize_classical(
        cfg.design.box, setup, grid=(cfg.output.grid_nx, cfg.output.grid_ny))
    out = _out_dir(cfg)
    _write_json(out / "optimum.json", cfg, cfg.mc.seed,
                {"command": "opt-classical", **_optimum_payload(result, "kN")})
    print(f"opt-classical: s_opt=({result.s_opt.a:.6g}, {result.s_opt.c:.6g}) mm "
          f"Fh={result.objective:.6g} kN -> {out / 'optimum.json'}")
    return 0


def cmd_opt_robust(cfg) -> int:
    setup = cfgmod.setup_from(cfg)
    model = cfgmod.input_model_from(cfg)
    grid = (cfg.output.grid_nx, cfg.output.grid_ny)
    result = optimizer.optimize_robust(
        cfg.design.box, cfg.design.weights, cfg.design.constraint,
        cfg.mc.seed, setup, model, nu=cfg.mc.nu, grid=grid)
    out = _out_dir(cfg)
    _write_json(out / "optimum.json", cfg, cfg.mc.seed,
                {"command": "opt-robust", **_optimum_payload(result, "weighted")})
    for kind in ("robust", "constraint"):
        scan = optimizer.grid_scan(
            cfg.design.box, grid[0], grid[1], kind, setup,
            input_model=model, weights=cfg.design.weights,
            cspec=cfg.design.constraint, seed=cfg.mc.seed, nu=cfg.mc.nu)
        _write_contour(cfg, cfg.mc.seed, scan, out)
    print(f"opt-robust: s_opt=({result.s_opt.a:.6g}, {result.s_opt.c:.6g}) mm "
          f"objective={result.objective:.6g} feasible={result.feasible} -> {out}")
    return 0


def cmd_contour(cfg, kind: str) -> int:
    setup = cfgmod.setup_from(cfg)
    model = cfgmod.input_model_from(cfg) if kind != "classical" else None
    scan = optimizer.grid_scan(
        cfg.design.box, cfg.output.grid_nx, cfg.output.grid_ny, kind, setup,
        input_model=model, weights=cfg.design.weights,
        cspec=cfg.design.constraint, seed=cfg.mc.seed, nu=cfg.mc.nu)
    path = _write_contour(cfg, cfg.mc.seed, scan, _out_dir(cfg))
    print(f"contour: kind={kind} grid={cfg.output.grid_nx}x{cfg.output.grid_ny} -> {path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brakeopt",
        description="Safety-gear brake model: evaluation, Monte Carlo UQ and design optimization.")
    parser.add_argument("--version", action="version", version=f"brakeopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None,
                       help="config file (default: shipped configuration)")
        p.add_argument("--out", type=str, default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=None, help="Monte Carlo seed override")
        p.add_argument("--nu", type=int, default=None, help="sample count override")
        p.add_argument("--grid", type=_grid_arg, default=None, help="grid override, e.g. 101x51")

    common(sub.add_parser("eval", help="print the deterministic force balance"))

    p_uq = sub.add_parser("uq", help="propagate input uncertainty, write ensemble artifacts")
    common(p_uq)
    p_uq.add_argument("--freeze-alpha", type=float, default=None, metavar="DEG",
                      help="hold the cam angle fixed at this value")
    p_uq.add_argument("--freeze-fs", type=float, default=None, metavar="KN",
                      help="hold the spring force fixed at this value")
    p_uq.add_argument("--workers", type=int, default=1,
                      help="evaluation threads (output is identical for any count)")

    common(sub.add_parser("opt-classical", help="maximize nominal braking force over the box"))
    common(sub.add_parser("opt-robust", help="maximize the robust objective under the chance constraint"))

    p_ct = sub.add_parser("contour", help="write one dense grid map as CSV")
    common(p_ct)
    p_ct.add_argument("--kind", choices=optimizer.GRID_KINDS, required=True)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config is None:
            cfg = cfgmod.default_config()
        else:
            cfg = cfgmod.load_config(args.config)
        cfg = _apply_overrides(cfg, args)

        if args.command == "eval":
            return cmd_eval(cfg)
        if args.command == "uq":
            return cmd_uq(cfg, args.freeze_alpha, args.freeze_fs, args.workers)
        if args.command == "opt-classical":
            return cmd_opt_classical(cfg)
        if args.command == "opt-robust":
            return cmd_opt_robust(cfg)
        if args.command == "contour":
            return cmd_contour(cfg, args.kind)
        raise ParseError(f"unknown command {args.command!r}")
    except BrakeOptError as exc:
        json.dump({"error": type(exc).__name__,
                   "exit_code": exc.exit_code,
                   "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
