"""``wardpop`` command line.

Subcommands read files and write into ``--out`` (a directory). Each run also
writes ``<command>.manifest.json`` holding the exact arguments; passing it
back with ``--manifest`` replays the run, with any flags given on the
command line taking precedence. Failures print one line,
``<Category>: <message>``, to stderr and exit with status 2.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend_name
from ._fmt import fmt_num
from .chart import render_bar_chart
from .errors import InvalidInput, IoFailure, SchemaError, WardpopError
from .popmodel import MapConfig, MHConfig, ModelParams, fit_map, fit_mh, predict_many, simulate_dataset
from .popmodel import io as pio
from .raster import clip_by_mask, load_grid, save_grid
from .services import STANDARDS, needs_manifest, needs_table
from .zonal import aggregate_total, export_zonal_csv, read_zonal_csv, zonal_stats
from .zones import load_zones

EXIT_FAILURE = 2


def _out_dir(args):
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create output directory {out}: {exc.strerror or exc}") from None
    return out


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) in (None, ""):
            raise InvalidInput(f"missing required option --{name.replace('_', '-')}")


def _write_manifest(out, args, extra=None):
    doc = {"command": args.command, "args": _recorded_args(args)}
    if extra:
        doc.update(extra)
    pio.write_text(out / f"{args.command}.manifest.json", pio.dump_json(doc))


def _recorded_args(args):
    skip = {"command", "manifest", "func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _check_threshold(args):
    if not (0.0 < args.threshold <= 1.0):
        raise InvalidInput(f"--threshold must be in (0, 1], got {args.threshold}")


def cmd_clip(args):
    _require(args, "raster", "zones")
    _check_threshold(args)
    grid = load_grid(args.raster)
    mask = load_zones(args.zones)
    clipped = clip_by_mask(grid, mask, args.mode, args.threshold)
    out = _out_dir(args)
    save_grid(clipped, out / "clipped.asc")
    _write_manifest(out, args, {
        "kept_cells": int(clipped.valid.sum()),
        "grid_total": clipped.total(),
    })


def cmd_zonal(args):
    _require(args, "raster", "zones")
    _check_threshold(args)
    grid = load_grid(args.raster)
    zones = load_zones(args.zones)
    if args.mask:
        grid = clip_by_mask(grid, load_zones(args.mask), args.mode, args.threshold)
    results = zonal_stats(grid, zones, args.mode)
    out = _out_dir(args)
    export_zonal_csv(results, out / "zonal.csv")
    _write_manifest(out, args, {
        "zones": len(results),
        "zone_total": aggregate_total(results),
        "grid_total": grid.total(),
    })


def cmd_needs(args):
    _require(args, "input")
    std = STANDARDS.get(args.standard)
    if std is None:
        raise InvalidInput(f"unknown standard {args.standard!r}; choose from {sorted(STANDARDS)}")
    text = pio.read_text(args.input)
    results = read_zonal_csv(text, required=["ward_name", "_sum"])
    rows, csv_text = needs_table(results, std, args.male_share)
    out = _out_dir(args)
    pio.write_text(out / "needs.csv", csv_text)
    pio.write_text(out / "needs_manifest.txt", needs_manifest(std, args.male_share))
    if args.chart:
        if not rows:
            raise InvalidInput("cannot chart an empty needs table")
        svg = render_bar_chart([r.ward_name for r in rows], [r.toilets_need for r in rows],
                               args.title or "Toilets needed per ward")
        pio.write_text(out / "needs_chart.svg", svg)
    _write_manifest(out, args, {"wards": len(rows), "toilets_total": sum(r.toilets_need for r in rows)})


def cmd_chart(args):
    _require(args, "input")
    import csv
    import io as _io

    reader = csv.DictReader(_io.StringIO(pio.read_text(args.input)))
    fields = reader.fieldnames or []
    for col in (args.label_column, args.value_column):
        if col not in fields:
            raise SchemaError(f"column {col!r} not in {args.input}")
    labels, values = [], []
    for i, row in enumerate(reader, start=2):
        labels.append(row[args.label_column])
        try:
            values.append(float(row[args.value_column]))
        except ValueError:
            raise SchemaError(f"line {i}: non-numeric {args.value_column}") from None
    svg = render_bar_chart(labels, values, args.title or args.value_column)
    out = _out_dir(args)
    pio.write_text(out / "chart.svg", svg)
    _write_manifest(out, args, {"bars": len(values)})


def cmd_simulate(args):
    levels = tuple(args.levels)
    K = len(args.beta)
    truth = ModelParams.zeros(levels, K, args.sigma)
    truth.alpha0 = args.alpha0
    rng = np.random.default_rng(args.seed)
    for f, lv in enumerate(levels):
        if lv > 1:
            truth.effects[f][:] = rng.normal(0.0, args.effect_sd, lv)
    truth.beta[:] = args.beta
    data, D = simulate_dataset(truth, args.n, rng, levels, (args.area_min, args.area_max))
    out = _out_dir(args)
    pio.write_text(out / "microcensus.csv", pio.dataset_csv(data))
    _write_manifest(out, args, {"true_params": dict(zip(truth.vector_names(), truth.to_vector().tolist()))})


def cmd_fit(args):
    _require(args, "data")
    data = pio.read_dataset_csv(pio.read_text(args.data))
    mp = fit_map(data, MapConfig(per_type_sigma=args.per_type_sigma))
    cfg = MHConfig(
        draws=args.draws,
        burn_in=args.burn_in,
        seed=args.seed,
        step_params=args.step_params,
        step_latent=args.step_latent,
        per_type_sigma=args.per_type_sigma,
    )
    chain = fit_mh(data, cfg, init=mp)
    out = _out_dir(args)
    pio.write_text(out / "chain.csv", pio.chain_csv(chain))
    map_vec = dict(zip(mp.params.vector_names(), mp.params.to_vector().tolist()))
    _write_manifest(out, args, pio.chain_manifest(chain, {
        "map_params": map_vec,
        "map_log_joint": mp.log_joint,
        "map_iterations": mp.iterations,
    }))


def cmd_predict(args):
    _require(args, "chain", "data")
    if not 0.0 < args.q < 1.0:
        raise InvalidInput(f"--q must be in (0, 1), got {args.q}")
    chain = pio.read_chain_csv(pio.read_text(args.chain))
    data = pio.read_dataset_csv(pio.read_text(args.data), levels=None)
    if data.K != chain.K:
        raise SchemaError(f"data has {data.K} covariates, chain expects {chain.K}")
    mean, lo, hi = predict_many(chain, data.keys, data.X, data.A, args.q, args.seed, args.n_samples)
    lines = ["loc_id,mean,lo,hi"]
    for i in range(len(data)):
        lines.append(f"{data.loc_ids[i]},{fmt_num(mean[i])},{fmt_num(lo[i])},{fmt_num(hi[i])}")
    out = _out_dir(args)
    pio.write_text(out / "predictions.csv", "\n".join(lines) + "\n")
    _write_manifest(out, args, {"locations": len(data)})


def _add_common(p):
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--manifest", help="replay the arguments recorded in a run manifest")


def _add_geo(p, mode_default):
    p.add_argument("--raster", help="ESRI ASCII grid of population per cell")
    p.add_argument("--zones", help="GeoJSON FeatureCollection of ward polygons")
    p.add_argument("--mode", choices=["center", "weighted"], default=mode_default)
    p.add_argument("--threshold", type=float, default=0.5,
                   help="minimum covered fraction kept by weighted clipping (default 0.5)")


def build_parser():
    parser = argparse.ArgumentParser(prog="wardpop", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wardpop {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clip", help="null raster cells outside a polygon mask")
    _add_geo(p, "center")
    _add_common(p)
    p.set_defaults(func=cmd_clip)

    p = sub.add_parser("zonal", help="per-ward count/sum/mean CSV")
    _add_geo(p, "weighted")
    p.add_argument("--mask", help="optional GeoJSON mask applied to the raster first")
    _add_common(p)
    p.set_defaults(func=cmd_zonal)

    p = sub.add_parser("needs", help="toilet needs from a zonal CSV")
    p.add_argument("--input", help="zonal CSV (needs ward_name and _sum)")
    p.add_argument("--standard", default="bs6465", choices=sorted(STANDARDS))
    p.add_argument("--male-share", type=float, default=None,
                   help="split the population by sex instead of applying both standards to all")
    p.add_argument("--chart", action="store_true", help="also write needs_chart.svg")
    p.add_argument("--title", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_needs)

    p = sub.add_parser("chart", help="SVG bar chart from a CSV column")
    p.add_argument("--input")
    p.add_argument("--label-column", default="ward_name")
    p.add_argument("--value-column", default="_sum")
    p.add_argument("--title", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("simulate", help="synthetic microcensus dataset")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--levels", type=int, nargs=4, default=[2, 2, 1, 1], metavar=("T", "R", "S", "L"))
    p.add_argument("--alpha0", type=float, default=math.log(100.0))
    p.add_argument("--beta", type=float, nargs="+", default=[0.5, -0.3, 0.1])
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--effect-sd", type=float, default=0.3)
    p.add_argument("--area-min", type=float, default=0.5)
    p.add_argument("--area-max", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="MAP + Metropolis fit of a microcensus CSV")
    p.add_argument("--data")
    p.add_argument("--draws", type=int, default=2000)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--step-params", type=float, default=None)
    p.add_argument("--step-latent", type=float, default=None)
    p.add_argument("--per-type-sigma", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predictive mean and interval per location")
    p.add_argument("--chain")
    p.add_argument("--data", help="microcensus-format CSV of target locations (N may be empty)")
    p.add_argument("--q", type=float, default=0.95)
    p.add_argument("--n-samples", type=int, default=4000)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_predict)
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.manifest:
        try:
            doc = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoFailure(f"cannot read manifest {args.manifest}: {exc.strerror or exc}") from None
        except json.JSONDecodeError as exc:
            raise SchemaError(f"manifest is not valid JSON: {exc.msg}") from None
        if doc.get("command") != args.command:
            raise InvalidInput(f"manifest was written by {doc.get('command')!r}, not {args.command!r}")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**doc.get("args", {}))
        args = parser.parse_args(argv)
    return args


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        args.func(args)
    except WardpopError as exc:
        print(f"{exc.category}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"{InvalidInput.category}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"{IoFailure.category}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return 0


if __name__ == "__main__":
    sys.exit(main())
