"""Command line entry point: ``d2dalloc {run,sweep,oracle-gap,validate}``.

Exit codes: 0 success, 1 infeasible allocation, 2 bad configuration or
usage, 3 file I/O failure, 4 exhaustive search refused.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from . import channel
from .allocation import Allocation, RateEvaluator, ValidationError, validate
from .harness import (SCHEMES, SweepSpec, cell_and_radio, emit_csv, load_config, oracle_gap,
                      run_scheme, run_sweep, spec_from_config, write_csv)
from .scenario import ConfigError, generate_scenario, load_scenario, save_scenario
from .solvers import DEFAULT_BUDGET, SearchSpaceError

EXIT_INFEASIBLE, EXIT_CONFIG, EXIT_IO, EXIT_REFUSED = 1, 2, 3, 4

ORACLE_GAP_DEFAULT = {
    "cell": {"n_cells": 2, "n_cellular_bands": 2, "max_d2d_per_cell": 4, "fixed_d2d_per_cell": 4},
    "sweep": {"parameter": "n_mmwave_bands", "values": [1, 2, 3], "n_seeds": 20},
}


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_sets(config: dict, sets: list[str]) -> dict:
    """Apply ``section.field=value`` overrides, e.g. ``radio.beta=0.05``."""
    for item in sets or []:
        key, sep, raw = item.partition("=")
        section, dot, name = key.partition(".")
        if not sep or not dot or section not in ("cell", "radio", "sweep"):
            raise ConfigError(f"bad --set {item!r}; expected section.field=value")
        config.setdefault(section, {})[name] = _parse_value(raw)
    return config


def _config(args, default: dict | None = None) -> dict:
    config = load_config(args.config) if args.config else json.loads(json.dumps(default or {}))
    config = _apply_sets(config, args.set)
    sweep = config.setdefault("sweep", {})
    if getattr(args, "param", None):
        sweep["parameter"] = args.param
    if getattr(args, "values", None):
        sweep["values"] = [_parse_value(v) for v in args.values.split(",")]
    if getattr(args, "seeds", None) is not None:
        sweep.pop("seeds", None)
        sweep["n_seeds"] = args.seeds
    return config


def _spec(args, default=None) -> SweepSpec:
    spec = spec_from_config(_config(args, default))
    if args.seed is not None:
        spec.seeds = list(range(args.seed, args.seed + len(spec.seeds)))
    if args.scheme:
        spec.schemes = args.scheme
    if args.budget is not None:
        spec.budget = args.budget
    return spec


def _schemes(text: str) -> list[str]:
    out = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in out if s not in SCHEMES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown scheme(s) {bad}; choose from {', '.join(SCHEMES)}")
    return out


def _link_rows(scn, alloc, params):
    """One row per link: kind, cell, index, band, budget fields, blockage, expected rate."""
    for i in range(scn.n_cells):
        for j in range(scn.config.n_cellular_bands):
            b = channel.cellular_user_budget(scn, alloc, i, j, params)
            yield ("cellular", i, j, f"c{j}", b, 0.0, b.rate_bps)
    for i, k in scn.d2d_labels:
        ref = alloc.band_of(i, k)
        if alloc.is_cellular(i, k):
            b = channel.d2d_cellular_budget(scn, alloc, i, k, params)
            p_out = 0.0
        else:
            b = channel.d2d_mmwave_budget(scn, alloc, i, k, params)
            p_out = channel.link_gains(scn, params).p_out[scn.label_index(i, k)]
        yield ("d2d", i, k, str(ref), b, float(p_out), (1.0 - p_out) * b.rate_bps)


def cmd_run(args) -> int:
    cell, radio = cell_and_radio(_config(args))
    seed = 0 if args.seed is None else args.seed
    scn = generate_scenario(cell, seed)
    out = csv.writer(sys.stdout, lineterminator="\n")
    last = None
    for scheme in args.scheme or ["heu"]:
        res = run_scheme(scheme, scn, radio, seed, DEFAULT_BUDGET if args.budget is None else args.budget)
        out.writerow(["scheme", "link", "cell", "index", "band", "signal_w", "interference_w",
                      "noise_w", "sinr", "p_out", "rate_bps"])
        for kind, i, idx, band, b, p_out, rate in _link_rows(scn, res.allocation, radio):
            out.writerow([scheme, kind, i, idx, band, repr(b.signal_w), repr(b.interference_w),
                          repr(b.noise_w), repr(b.sinr), repr(p_out), repr(rate)])
        print(f"# {scheme} system_rate_bps={res.rate_bps!r} iterations={res.iterations} "
              f"switches={res.switches}")
        last = res
    if args.out:
        save_scenario(scn, args.out, last.allocation)
    return 0


def cmd_sweep(args) -> int:
    result = run_sweep(_spec(args))
    if args.out:
        emit_csv(result, args.out)
    else:
        write_csv(result, sys.stdout)
    return 0


def cmd_oracle_gap(args) -> int:
    spec = _spec(args, ORACLE_GAP_DEFAULT)
    dev, result = oracle_gap(spec)
    print(f"{spec.parameter},oracle_mean_bps,heu_mean_bps")
    for v, o, h in zip(result.values(), result.curve("oracle"), result.curve("heu")):
        print(f"{v},{o!r},{h!r}")
    print(f"average_deviation={dev:.6f}")
    if args.out:
        emit_csv(result, args.out)
    return 0


def cmd_validate(args) -> int:
    _, radio = cell_and_radio(_config(args))
    scn = load_scenario(args.scenario)
    src = args.allocation or args.scenario
    with open(src) as fh:
        data = json.load(fh)
    rows = data.get("allocation") if isinstance(data, dict) else data
    if rows is None:
        raise ConfigError(f"{src} has no allocation")
    problems = validate(scn, Allocation.from_list(rows))
    if problems:
        for p in problems:
            print(f"violation: {p}")
        return EXIT_INFEASIBLE
    codes = Allocation.from_list(rows).codes(scn)
    print(f"ok: {scn.n_d2d} D2D pairs assigned, system_rate_bps="
          f"{RateEvaluator(scn, radio).system_rate(codes)!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (cell/radio/sweep sections)")
    common.add_argument("--seed", type=int, help="scenario seed (run) or first sweep seed")
    common.add_argument("--out", help="output path")
    common.add_argument("--scheme", type=_schemes, help=f"comma list from {','.join(SCHEMES)}")
    common.add_argument("--budget", type=int, help="exhaustive search budget (assignments)")
    common.add_argument("--set", action="append", metavar="SECTION.FIELD=VALUE",
                        help="override one config field; repeatable")
    common.add_argument("-v", "--verbose", action="store_true")

    sweep_opts = argparse.ArgumentParser(add_help=False)
    sweep_opts.add_argument("--param", help="parameter to sweep")
    sweep_opts.add_argument("--values", help="comma-separated sweep values")
    sweep_opts.add_argument("--seeds", type=int, help="number of seeds per point")

    p = argparse.ArgumentParser(prog="d2dalloc", description="Band allocation of D2D pairs over micro-wave and mm-wave bands.",
                                epilog="exit codes: 0 ok, 1 infeasible, 2 config, 3 I/O, 4 oracle refused")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="one drop: per-link budgets and system rate") \
        .set_defaults(func=cmd_run)
    sub.add_parser("sweep", parents=[common, sweep_opts], help="parameter sweep to CSV") \
        .set_defaults(func=cmd_sweep)
    sub.add_parser("oracle-gap", parents=[common, sweep_opts],
                   help="heuristic vs exhaustive search, average deviation") \
        .set_defaults(func=cmd_oracle_gap)
    v = sub.add_parser("validate", parents=[common], help="check an allocation against a scenario")
    v.add_argument("scenario", help="scenario JSON (may also hold the allocation)")
    v.add_argument("allocation", nargs="?", help="allocation JSON list")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TypeError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"error: infeasible allocation: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SearchSpaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
