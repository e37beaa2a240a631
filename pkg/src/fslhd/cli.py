"""Command line front end.

    fslhd construct --slices 3,4,5 --factors 2 --seed 7 --out d.csv
    fslhd optimize  --algorithm sese --slices 4,8,12 --factors 2 --seed 1
    fslhd eval      d.csv --strict
    fslhd compare   --slices 4,8,12 --factors 2 --repeats 5000
    fslhd plot      d.csv --dims 1,2 --grid 4 --out d.svg

Exit codes: 0 success, 1 usage or config error, 2 I/O or file format error,
3 structure violation under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .construction import generate_level_matrix, random_designs
from .criteria import CriterionConfig, CriterionValue, DegenerateDesignError, cd2, csm, min_intersite_distance, phi_t
from .design import DesignMatrix, LevelMatrix, SliceSpec, to_design
from .io import FormatError, format_design, format_levels, parse_table, read_levels, spec_from_labels, group_rows
from .sese import SeseParams, sese_optimize
from .twopart import part1, should_skip_part2, twopart_optimize

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_STRUCTURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; we reserve 2 for I/O
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    return vals


def _add_criterion(p):
    p.add_argument("--criterion", choices=["phi_t", "cd2"], default="phi_t")
    p.add_argument("--t", type=int, default=50, help="phi_t exponent")
    p.add_argument("--m", type=int, default=2, help="distance power: 2 Euclidean, 1 rectangular")
    p.add_argument("--w", type=float, default=0.5, help="weight of the whole design in csm")


def _add_spec(p, required=True):
    p.add_argument("--slices", type=_int_list, required=required, help="slice sizes, e.g. 4,8,12")
    p.add_argument("--factors", type=int, required=required, help="number of factors q")


def _add_optimizer(p):
    p.add_argument("--inner-iters", type=int, default=20, help="SESE inner loop length P")
    p.add_argument("--outer-iters", type=int, default=10, help="SESE outer loop length N")
    p.add_argument("--part-budget", type=int, default=100, help="proposals per slice and part (two-part)")
    p.add_argument("--part2", choices=["auto", "on", "off"], default="auto",
                   help="run part II of the two-part optimizer")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fslhd", description="Flexible sliced Latin hypercube designs.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("construct", help="draw a random FSLHD")
    _add_spec(p)
    _add_criterion(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--jitter", choices=["midpoint", "uniform"], default="midpoint")
    p.add_argument("--out", help="design CSV (default: stdout)")
    p.add_argument("--levels", help="also write the integer level matrix here")
    p.add_argument("--meta", help="write a JSON metadata record here")

    p = sub.add_parser("optimize", help="optimize an FSLHD")
    _add_spec(p, required=False)
    _add_criterion(p)
    _add_optimizer(p)
    p.add_argument("--algorithm", choices=["sese", "twopart", "none"], default="sese")
    p.add_argument("--input", help="levels CSV to start from (default: a random design)")
    p.add_argument("--seed", type=int)
    p.add_argument("--jitter", choices=["midpoint", "uniform"], default="midpoint")
    p.add_argument("--out", help="design CSV (default: stdout)")
    p.add_argument("--levels", help="also write the integer level matrix here")
    p.add_argument("--trace", help="per-step JSON lines")
    p.add_argument("--summary", help="JSON summary (default: printed to stderr)")

    p = sub.add_parser("eval", help="score a design or levels file")
    p.add_argument("file")
    _add_criterion(p)
    p.add_argument("--strict", action="store_true", help="exit 3 on a structure violation")
    p.add_argument("--check-structure", action="store_true", help="same as --strict")

    p = sub.add_parser("compare", help="random designs against the optimizers")
    _add_spec(p)
    _add_criterion(p)
    _add_optimizer(p)
    p.add_argument("--repeats", type=int, default=1000, help="number of random designs R")
    p.add_argument("--runs", type=int, default=1, help="optimizer runs per algorithm")
    p.add_argument("--algorithms", default="sese", help="comma list from sese,part1,twopart")
    p.add_argument("--seed", type=int)
    p.add_argument("--json", help="also write the table as JSON")

    p = sub.add_parser("plot", help="SVG scatter of a 2-D projection")
    p.add_argument("file")
    p.add_argument("--dims", type=_int_list, default=(1, 2), help="1-based columns, e.g. 1,2")
    p.add_argument("--grid", type=int, default=0, help="overlay a g x g grid")
    p.add_argument("--size", type=int, default=400)
    p.add_argument("--out", help="SVG file (default: stdout)")
    return ap


# -- helpers ---------------------------------------------------------------

def _config(args) -> CriterionConfig:
    return CriterionConfig(args.criterion, args.t, args.m, args.w)


def _spec(args) -> SliceSpec:
    return SliceSpec(tuple(args.slices), args.factors)


def _seed(args) -> int:
    # without --seed draw one and record it so the run can be repeated
    if args.seed is None:
        return int(np.random.SeedSequence().entropy % 2**32)
    if args.seed < 0:
        raise UsageError("--seed must be non-negative")
    return args.seed


def _streams(seed: int):
    """Independent child seeds for construction, optimizer and jitter."""
    return np.random.SeedSequence(seed).spawn(3)


def _emit(path, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _value_dict(v: CriterionValue) -> dict:
    return {"whole": v.whole, "per_slice": list(v.per_slice), "csm": v.combined}


def _spec_dict(spec: SliceSpec) -> dict:
    return {"slices": list(spec.slice_sizes), "factors": spec.factors, "n": spec.n, "L": spec.L}


def _config_dict(c: CriterionConfig) -> dict:
    return {"criterion": c.kind, "t": c.t, "m": c.dist_power, "w": c.w}


def _write_design(args, M: LevelMatrix, jitter_seed):
    D = to_design(M, args.jitter, jitter_seed)
    _emit(args.out, format_design(D))
    if args.levels:
        Path(args.levels).write_text(format_levels(M))
    return D


# -- subcommands -----------------------------------------------------------

def cmd_construct(args) -> int:
    spec, config, seed = _spec(args), _config(args), _seed(args)
    s_build, _, s_jitter = _streams(seed)
    M = generate_level_matrix(spec, s_build)
    _write_design(args, M, s_jitter)
    if args.meta:
        meta = {"command": "construct", "spec": _spec_dict(spec), "config": _config_dict(config),
                "seed": seed, "jitter": args.jitter,
                "value": _value_dict(csm(to_design(M), config))}
        Path(args.meta).write_text(json.dumps(meta, indent=2) + "\n")
    return EXIT_OK


def cmd_optimize(args) -> int:
    config, seed = _config(args), _seed(args)
    s_build, s_opt, s_jitter = _streams(seed)
    if args.input:
        M0 = read_levels(args.input)
        if args.slices is not None and tuple(args.slices) != M0.spec.slice_sizes:
            raise UsageError("--slices disagrees with the input file")
    else:
        if args.slices is None or args.factors is None:
            raise UsageError("--slices and --factors are required without --input")
        M0 = generate_level_matrix(_spec(args), s_build)
    if not M0.is_valid():
        raise UsageError("input levels are not a valid FSLH")
    spec = M0.spec

    summary = {"command": "optimize", "algorithm": args.algorithm, "spec": _spec_dict(spec),
               "config": _config_dict(config), "seed": seed}
    trace_text = ""
    start = time.perf_counter()
    if args.algorithm == "sese":
        params = SeseParams(P=args.inner_iters, N=args.outer_iters, seed=s_opt)
        M, trace = sese_optimize(M0, config, params)
        trace_text = trace.to_jsonl()
        summary["iterations"] = {"P": args.inner_iters, "N": args.outer_iters, "steps": len(trace.records),
                                 "accepted": sum(r.accepted for r in trace.records)}
    elif args.algorithm == "twopart":
        run2 = {"auto": None, "on": True, "off": False}[args.part2]
        res = twopart_optimize(M0, config, args.part_budget, s_opt, run_part2=run2)
        M = res.design
        trace_text = "".join(json.dumps({"stage": k, "csm": v}) + "\n" for k, v in res.stages.items())
        summary["iterations"] = {"part_budget": args.part_budget, "proposals": res.proposals,
                                 "accepted": res.accepted, "part2": "part2" in res.stages}
        summary["repeat_free"] = all(res.repeat_free.values())
        summary["repeat_free_by_slice"] = {str(i + 1): v for i, v in res.repeat_free.items()}
    else:
        M = M0
        summary["iterations"] = {}
    wall = time.perf_counter() - start

    summary["initial"] = _value_dict(csm(to_design(M0), config))
    summary["final"] = _value_dict(csm(to_design(M), config))
    summary["wall_time_s"] = wall
    _write_design(args, M, s_jitter)
    if args.trace:
        Path(args.trace).write_text(trace_text)
    text = json.dumps(summary, indent=2) + "\n"
    if args.summary:
        Path(args.summary).write_text(text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def _load_points(path) -> DesignMatrix:
    kind, labels, values = parse_table(Path(path).read_text())
    labels, values = group_rows(labels, values)
    spec = spec_from_labels(labels, values.shape[1])
    if kind == "levels":
        return to_design(LevelMatrix(spec, values))
    return DesignMatrix(spec, values)


def _safe(fn, *a) -> float:
    try:
        return fn(*a)
    except DegenerateDesignError:
        return math.inf


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def cmd_eval(args) -> int:
    config = _config(args)
    D = _load_points(args.file)
    spec = D.spec
    out = [f"spec: {spec}", f"criterion: {config.kind} t={config.t} m={config.dist_power} w={config.w}"]
    out.append(f"phi_t: {_fmt(_safe(phi_t, D.points, config.t, config.dist_power))}")
    for i in range(spec.u):
        Xi = D.slice(i)
        v = _safe(phi_t, Xi, config.t, config.dist_power) if len(Xi) > 1 else math.nan
        out.append(f"phi_t slice {i + 1}: {_fmt(v)}")
    try:
        out.append(f"csm: {_fmt(csm(D, config).combined)}")
    except ValueError:
        out.append("csm: inf")
    out.append(f"cd2: {_fmt(cd2(D.points))}")
    out.append(f"min_distance: {_fmt(min_intersite_distance(D.points, config.dist_power))}")
    bad = D.structure_violations()
    if bad:
        where = "; ".join(f"({'whole design' if i is None else f'slice {i + 1}'}, column {j + 1})"
                          for i, j in bad)
        out.append(f"structure: violated {where}")
    else:
        out.append("structure: ok")
    print("\n".join(out))
    if bad and (args.strict or args.check_structure):
        return EXIT_STRUCTURE
    return EXIT_OK


def _stats(vals) -> dict:
    v = np.asarray(vals, dtype=float)
    return {"min": float(v.min()), "mean": float(v.mean()), "max": float(v.max()), "sd": float(v.std())}


def cmd_compare(args) -> int:
    spec, config, seed = _spec(args), _config(args), _seed(args)
    if args.repeats < 1 or args.runs < 0:
        raise UsageError("--repeats must be >= 1 and --runs >= 0")
    algs = [a for a in args.algorithms.split(",") if a]
    for a in algs:
        if a not in ("sese", "part1", "twopart"):
            raise UsageError(f"unknown algorithm {a!r}")
    s_random, s_runs = np.random.SeedSequence(seed).spawn(2)

    rows = []
    t0 = time.perf_counter()
    vals = [csm(to_design(M), config).combined for M in random_designs(spec, args.repeats, s_random)]
    rows.append({"method": "random", "runs": args.repeats, **_stats(vals),
                 "time_s": (time.perf_counter() - t0) / args.repeats})

    run_seeds = s_runs.spawn(args.runs)
    for a in algs:
        vals, times = [], []
        for rs in run_seeds:
            s_init, s_opt = rs.spawn(2)
            M0 = generate_level_matrix(spec, s_init)
            t0 = time.perf_counter()
            if a == "sese":
                M, _ = sese_optimize(M0, config, SeseParams(P=args.inner_iters, N=args.outer_iters, seed=s_opt))
                v = csm(to_design(M), config).combined
            elif a == "part1":
                v = part1(M0, config, args.part_budget, s_opt).value.combined
            else:
                run2 = {"auto": None, "on": True, "off": False}[args.part2]
                v = twopart_optimize(M0, config, args.part_budget, s_opt, run_part2=run2).value.combined
            times.append(time.perf_counter() - t0)
            vals.append(v)
        if vals:
            rows.append({"method": a, "runs": len(vals), **_stats(vals), "time_s": float(np.mean(times))})

    print(f"{spec}  criterion={config.kind} t={config.t} w={config.w}  seed={seed}")
    print(f"{'method':<10}{'runs':>8}{'min':>12}{'mean':>12}{'max':>12}{'sd':>12}{'time_s':>12}")
    for r in rows:
        print(f"{r['method']:<10}{r['runs']:>8}{r['min']:>12.4f}{r['mean']:>12.4f}{r['max']:>12.4f}"
              f"{r['sd']:>12.4f}{r['time_s']:>12.4g}")
    if args.json:
        Path(args.json).write_text(json.dumps({"spec": _spec_dict(spec), "config": _config_dict(config),
                                               "seed": seed, "rows": rows}, indent=2) + "\n")
    return EXIT_OK


_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _glyph(k: int, x: float, y: float, r: float, attrs: str) -> str:
    shape = k % 4
    if shape == 0:
        return f'<circle {attrs} cx="{x:.3f}" cy="{y:.3f}" r="{r:.3f}"/>'
    if shape == 1:
        return f'<rect {attrs} x="{x - r:.3f}" y="{y - r:.3f}" width="{2 * r:.3f}" height="{2 * r:.3f}"/>'
    if shape == 2:
        pts = f"{x:.3f},{y - r:.3f} {x - r:.3f},{y + r:.3f} {x + r:.3f},{y + r:.3f}"
    else:
        pts = f"{x:.3f},{y - r:.3f} {x + r:.3f},{y:.3f} {x:.3f},{y + r:.3f} {x - r:.3f},{y:.3f}"
    return f'<polygon {attrs} points="{pts}"/>'


def render_svg(D: DesignMatrix, dims=(0, 1), grid: int = 0, size: int = 400) -> str:
    """SVG scatter of columns ``dims`` (0-based) of ``D``.

    One glyph of class ``pt`` per point, shape and colour by slice, with the
    data coordinates kept in ``data-x``/``data-y``.  ``grid = g`` draws the
    ``g - 1`` interior lines of a ``g x g`` grid in each direction.
    """
    a, b = dims
    pad = 20
    span = size - 2 * pad

    def px(v):
        return pad + v * span

    def py(v):
        return pad + (1 - v) * span

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect class="frame" x="{pad}" y="{pad}" width="{span}" height="{span}" '
           f'fill="none" stroke="black"/>']
    for g in range(1, grid):
        c = g / grid
        out.append(f'<line class="grid" x1="{px(c):.3f}" y1="{pad}" x2="{px(c):.3f}" y2="{pad + span}" '
                   f'stroke="#bbb"/>')
        out.append(f'<line class="grid" x1="{pad}" y1="{py(c):.3f}" x2="{pad + span}" y2="{py(c):.3f}" '
                   f'stroke="#bbb"/>')
    for row, (x, y) in enumerate(D.points[:, [a, b]]):
        k = int(D.spec.row_slice[row])
        attrs = (f'class="pt slice-{k + 1}" data-x="{x:.12g}" data-y="{y:.12g}" '
                 f'fill="{_COLORS[k % len(_COLORS)]}"')
        out.append(_glyph(k, px(x), py(y), 4.0, attrs))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_plot(args) -> int:
    D = _load_points(args.file)
    dims = tuple(d - 1 for d in args.dims)
    if len(dims) != 2 or any(not 0 <= d < D.spec.factors for d in dims):
        raise UsageError(f"--dims must name two columns in 1..{D.spec.factors}")
    if args.grid < 0:
        raise UsageError("--grid must be non-negative")
    _emit(args.out, render_svg(D, dims, args.grid, args.size))
    return EXIT_OK


COMMANDS = {"construct": cmd_construct, "optimize": cmd_optimize, "eval": cmd_eval,
            "compare": cmd_compare, "plot": cmd_plot}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fslhd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"fslhd: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # invalid slice spec or criterion settings
        print(f"fslhd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
