"""Command line driver: ``imd mesh|solve|sweep|report``.

Exit codes: 0 success, 2 configuration error, 3 mesh error, 4 load not
equilibrable, 5 numerical failure of the optimiser.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from threadpoolctl import threadpool_limits

from .config import BENCHMARKS, ConfigError, RunConfig, load_benchmark, load_config, parse_p_list
from .export import export_csv, read_csv, write_json, write_result_bundle
from .geometry import MeshError, write_mesh
from .model import Model
from .nullspace import StaticsError
from .optimizer import OptimizerError
from .statics import ConfigurationError
from .verify import SweepTable, check_p_list, monotonicity_sweep

EXIT_CONFIG, EXIT_MESH, EXIT_STATICS, EXIT_OPTIMIZER = 2, 3, 4, 5

log = logging.getLogger("lpimd")


def _p_text(p: float) -> str:
    return "inf" if math.isinf(p) else format(p, "g")


def format_table(table: SweepTable) -> str:
    head = f"{'p':>8}  {'C_vp [Nm]':>14}  {'C_sp [Nm]':>14}  {'C_vp/(1+b^2)^(1/p)':>20}"
    lines = [head, "-" * len(head)]
    for p, vp, sp, sc in table.rows():
        lines.append(f"{_p_text(p):>8}  {vp:>14.6g}  {sp:>14.6g}  {sc:>20.6g}")
    lines.append(f"sp nondecreasing in p: {'yes' if table.sp_monotone else 'NO'}")
    lines.append(f"scaled vp nondecreasing in p: {'yes' if table.vp_scaled_monotone else 'NO'}")
    if table.p1_coincide is not None:
        lines.append(f"p=1 vp and sp coincide: {'yes' if table.p1_coincide else 'NO'}")
    return "\n".join(lines)


def _load(args) -> RunConfig:
    path = Path(args.config)
    if not path.exists() and args.config in BENCHMARKS:
        cfg = load_benchmark(args.config)
    else:
        cfg = load_config(path)
    if args.method:
        cfg.method = args.method
    if args.p:
        cfg.p = parse_p_list(args.p)
    return cfg


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out) if args.out else Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_mesh(args) -> int:
    cfg = _load(args)
    mesh = cfg.build_mesh()
    out = _out_dir(args, cfg)
    path = out / "mesh.txt"
    write_mesh(mesh, path)
    print(f"nodes {mesh.num_nodes}  elements {mesh.num_elements}  area {mesh.area:.12g}")
    print(f"wrote {path}")
    return 0


def _model(cfg: RunConfig) -> Model:
    return Model(cfg.build_mesh(), **cfg.model_kwargs())


def cmd_solve(args) -> int:
    cfg = _load(args)
    model = _model(cfg)
    out = _out_dir(args, cfg)
    for p in cfg.p:
        res = model.solve(cfg.method, p, cfg.E0, **cfg.solve_kwargs())
        paths = write_result_bundle(model, res, out)
        s = res.summary()
        print(f"{cfg.method} p={_p_text(p)}: C = {res.compliance:.6g} N*m, "
              f"energy {res.energy:.6g}, {s['iterations']} iterations ({s['stop_reason']})")
        print(f"wrote {paths['summary']}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    ps = check_p_list(cfg.p)
    model = _model(cfg)
    out = _out_dir(args, cfg)
    table = monotonicity_sweep(model, ps, cfg.E0, **cfg.solve_kwargs())
    export_csv(out / "sweep.csv", {"p": [_p_text(p) for p in table.p], "C_vp": table.vp,
                                   "C_sp": table.sp, "C_vp_scaled": table.vp_scaled})
    text = format_table(table)
    (out / "sweep.txt").write_text(text + "\n")
    write_json(out / "sweep.json", {"name": cfg.name, "rows": [r.summary() for r in table.results],
                                    "sp_monotone": table.sp_monotone,
                                    "vp_scaled_monotone": table.vp_scaled_monotone})
    print(text)
    return 0


def cmd_report(args) -> int:
    cfg = _load(args)
    out = Path(args.out) if args.out else Path(cfg.output)
    path = out / "sweep.csv"
    if not path.exists():
        raise ConfigError(f"no sweep results at {path}; run 'imd sweep' first")
    cols = read_csv(path)
    table = SweepTable([float(p) for p in cols["p"]], [float(v) for v in cols["C_vp"]],
                       [float(v) for v in cols["C_sp"]])
    print(f"{cfg.name}: minimal compliance")
    print(format_table(table))
    return 0


COMMANDS = {"mesh": cmd_mesh, "solve": cmd_solve, "sweep": cmd_sweep, "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="imd", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True,
                    help="JSON run configuration, or a benchmark name: " + ", ".join(BENCHMARKS))
    ap.add_argument("--out", help="output directory (default: the config's 'output')")
    ap.add_argument("--p", help="comma-separated exponents, 'inf' allowed")
    ap.add_argument("--method", choices=("vp", "sp"))
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = os.environ.get("IMD_THREADS")
    try:
        limit = int(threads) if threads else None
        if limit is not None and limit < 1:
            raise ValueError
    except ValueError:
        print(f"error: IMD_THREADS must be a positive integer, got {threads!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with threadpool_limits(limits=limit):
            return COMMANDS[args.command](args)
    except (ConfigError, ConfigurationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MeshError as exc:
        print(f"mesh error: {exc}", file=sys.stderr)
        return EXIT_MESH
    except StaticsError as exc:
        print(f"statics error: {exc}", file=sys.stderr)
        return EXIT_STATICS
    except OptimizerError as exc:
        print(f"optimizer failure: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZER
    except ValueError as exc:
        # remaining invalid arguments, e.g. sweep lists or geometry parameters
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
