"""Command-line front end.

Subcommands: table, bound, de, sim, search.  Configuration comes from a
flat key = value file, overridden by BMST_<KEY> environment variables,
overridden by flags (--seed, --workers, --engine, --mode, --set key=value).
Every CSV output is accompanied by a manifest JSON recording the resolved
configuration, seeds and table hashes, so a run can be reproduced from its
manifest alone.

Config keys
-----------
code_q, code_dmin, code_shorten   component code construction
b, m, d, l, imax                  system parameters
mode                              hdd | sdd
engine                            real | emulated (sim only)
ebn0_grid_db                      comma-separated grid, e.g. 3.0,3.5,4.0
target_ber                        de/search target, e.g. 1e-15
samples                           table samples per cell
table                             path of the mu/lambda table file
i_max                             cap on sampled error counts per cell row
min_bit_errors, max_info_bits, max_frames   sim stopping rule
de_layers, de_lo_db, de_hi_db, tail_bound   density evolution controls
d_sweep                           comma-separated d list for the de command
overhead, latency                 search constraints
seed, workers
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .bch import BchCode, construct_bch
from .bounds import channel_at, genie_lower_bound, ncg
from .de import DeConfig, ThresholdBracketError
from .harness import (
    BerPoint,
    ExperimentSpec,
    code_search,
    de_threshold_with_coverage,
    ensure_coverage,
    run_table_emulated,
    run_traditional,
)
from .tables import (
    MuLambdaTable,
    TableIntegrityError,
    build_table,
    load_table,
    save_table,
)


class UsageError(ValueError):
    pass


# -- configuration -----------------------------------------------------

def parse_config_file(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            cfg[key.strip()] = value.strip()
    return cfg


def resolve_config(args) -> dict[str, str]:
    """file < environment < flags."""
    cfg: dict[str, str] = {}
    if args.config:
        cfg.update(parse_config_file(args.config))
    for key in list(cfg) + [
        "code_q", "code_dmin", "code_shorten", "b", "m", "d", "l", "imax",
        "mode", "engine", "ebn0_grid_db", "target_ber", "samples", "table",
        "i_max", "min_bit_errors", "max_info_bits", "max_frames",
        "de_layers", "de_lo_db", "de_hi_db", "tail_bound", "d_sweep",
        "overhead", "latency", "seed", "workers",
    ]:
        env = os.environ.get(f"BMST_{key.upper()}")
        if env is not None:
            cfg[key] = env
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set needs key=value, got {item!r}")
        key, value = item.split("=", 1)
        cfg[key.strip()] = value.strip()
    for flag in ("seed", "workers", "engine", "mode"):
        val = getattr(args, flag, None)
        if val is not None:
            cfg[flag] = str(val)
    return cfg


def _get(cfg: dict, key: str, kind, default=None):
    if key not in cfg:
        if default is not None:
            return default
        raise UsageError(f"missing config key {key!r}")
    try:
        return kind(cfg[key])
    except (TypeError, ValueError):
        raise UsageError(f"config key {key!r} has invalid value {cfg[key]!r}")


def cfg_int(cfg, key, default=None) -> int:
    return _get(cfg, key, int, default)


def cfg_float(cfg, key, default=None) -> float:
    return _get(cfg, key, float, default)


def cfg_str(cfg, key, default=None) -> str:
    return _get(cfg, key, str, default)


def cfg_floats(cfg, key, default=None) -> list[float]:
    return _get(cfg, key, lambda s: [float(x) for x in s.split(",") if x.strip()],
                default)


def cfg_ints(cfg, key, default=None) -> list[int]:
    return _get(cfg, key, lambda s: [int(x) for x in s.split(",") if x.strip()],
                default)


def build_code_from(cfg: dict) -> BchCode:
    return construct_bch(
        cfg_int(cfg, "code_q"), cfg_int(cfg, "code_dmin"),
        cfg_int(cfg, "code_shorten", 0),
    )


def table_path_for(cfg: dict, code: BchCode) -> str:
    if "table" in cfg:
        return cfg["table"]
    cache = os.environ.get("BMST_TABLE_DIR", ".")
    name = f"mu_lambda_{code.n}_{code.k}_{code.dmin}_{code.construction_hash()}.json"
    return os.path.join(cache, name)


def resolve_table(cfg: dict, code: BchCode, build_if_missing: bool = True) -> MuLambdaTable:
    path = table_path_for(cfg, code)
    if os.path.exists(path):
        return load_table(path, code)
    if not build_if_missing:
        raise UsageError(f"table file {path} not found")
    table = build_table(
        code, cfg_int(cfg, "samples", 20000), seed=cfg_int(cfg, "seed", 0),
        i_max=cfg_int(cfg, "i_max", 0) or None,
    )
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    save_table(table, path)
    return table


# -- manifests ----------------------------------------------------------

@dataclass
class RunManifest:
    """Reproducibility record written next to every CSV output."""

    command: str
    resolved_config: dict
    outputs: list[str]
    tool_version: str = __version__
    seeds: dict = field(default_factory=dict)
    table_hashes: dict = field(default_factory=dict)
    started: str = ""
    finished: str = ""
    status: str = "running"
    points_completed: int = 0

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.__dict__, fh, indent=1, default=str)


def _manifest_path(out: str) -> str:
    return out + ".manifest.json"


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S")


# -- subcommands ---------------------------------------------------------

def cmd_table(args) -> int:
    cfg = resolve_config(args)
    code = build_code_from(cfg)
    path = args.out or table_path_for(cfg, code)
    samples = cfg_int(cfg, "samples", 100_000)
    seed = cfg_int(cfg, "seed", 0)
    i_max = cfg_int(cfg, "i_max", 0) or None
    base = None
    if os.path.exists(path):
        base = load_table(path, code)  # integrity-checked; re-runs merge
    table = build_table(code, samples, seed=seed, i_max=i_max, base=base)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    save_table(table, path)
    print(f"table: {len(table.cells)} cells at >= {samples} samples -> {path}")
    return 0


def _point_rows(out_path: str, manifest: RunManifest, rows_iter, header) -> int:
    """Stream rows to CSV; always flush what completed."""
    status = 0
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        try:
            for row in rows_iter:
                writer.writerow(row)
                fh.flush()
                manifest.points_completed += 1
        except Exception as err:  # partial results stay on disk
            manifest.status = f"failed: {err}"
            status = 1
    if status == 0:
        manifest.status = "complete"
    manifest.finished = _now()
    manifest.write(_manifest_path(out_path))
    return status


def cmd_bound(args) -> int:
    cfg = resolve_config(args)
    code = build_code_from(cfg)
    m = cfg_int(cfg, "m")
    mode = cfg_str(cfg, "mode", "hdd")
    grid = cfg_floats(cfg, "ebn0_grid_db")
    tail = cfg_float(cfg, "tail_bound", 1e-20)
    samples = cfg_int(cfg, "samples", 20000)
    seed = cfg_int(cfg, "seed", 0)
    rate = code.k / code.n
    table = resolve_table(cfg, code)
    manifest = RunManifest("bound", cfg, [args.out], started=_now(),
                           table_hashes={"mu_lambda": table.code_hash})

    def rows():
        from .bounds import genie_channel

        for ebn0 in grid:
            p = channel_at(ebn0, rate, mode)
            ensure_coverage(code, table, genie_channel(p, m), samples, tail, seed)
            est = genie_lower_bound(code, table, p, m, tail)
            yield [ebn0, f"{est.ber:.6e}", f"{est.truncated_mass:.3e}", mode, m, seed]

    rc = _point_rows(args.out, manifest,
                     rows(), ["ebn0_db", "ber_bound", "remainder", "mode", "m", "seed"])
    save_table(table, table_path_for(cfg, code))
    return rc


def cmd_de(args) -> int:
    cfg = resolve_config(args)
    code = build_code_from(cfg)
    m = cfg_int(cfg, "m")
    mode = cfg_str(cfg, "mode", "hdd")
    target = cfg_float(cfg, "target_ber", 1e-15)
    tail = cfg_float(cfg, "tail_bound", 1e-20)
    samples = cfg_int(cfg, "samples", 20000)
    seed = cfg_int(cfg, "seed", 0)
    d_list = cfg_ints(cfg, "d_sweep", [cfg_int(cfg, "d", 2 * m)])
    rate = code.k / code.n
    table = resolve_table(cfg, code)
    manifest = RunManifest("de", cfg, [args.out], started=_now(),
                           table_hashes={"mu_lambda": table.code_hash})

    def rows():
        for d in d_list:
            decfg = DeConfig(code, table, m, d, imax=cfg_int(cfg, "imax", 15),
                             n_layers=cfg_int(cfg, "de_layers", 200),
                             target_ber=target, tail_bound=tail)
            try:
                th = de_threshold_with_coverage(
                    decfg, rate, mode, samples, seed=seed,
                    ebn0_lo_db=cfg_float(cfg, "de_lo_db", 0.0),
                    ebn0_hi_db=cfg_float(cfg, "de_hi_db", 10.0),
                )
            except ThresholdBracketError as err:
                yield [d, "", "", "", f"{target:.1e}", mode, str(err)]
                continue
            cert = args.out + f".d{d}.threshold.json"
            with open(cert, "w") as fh:
                doc = th.to_json()
                doc["config"] = cfg
                json.dump(doc, fh, indent=1)
            manifest.outputs.append(cert)
            yield [d, f"{th.ebn0_db:.3f}", f"{th.bracket_fail_db:.3f}",
                   f"{th.bracket_success_db:.3f}", f"{target:.1e}", mode,
                   f"{ncg(th.ebn0_db, target):.3f}"]

    rc = _point_rows(
        args.out, manifest, rows(),
        ["d", "threshold_db", "bracket_fail_db", "bracket_success_db",
         "target_ber", "mode", "ncg_db"],
    )
    save_table(table, table_path_for(cfg, code))
    return rc


def cmd_sim(args) -> int:
    cfg = resolve_config(args)
    engine = cfg_str(cfg, "engine", "real")
    spec = ExperimentSpec(
        q=cfg_int(cfg, "code_q"), dmin=cfg_int(cfg, "code_dmin"),
        shorten_by=cfg_int(cfg, "code_shorten", 0),
        B=cfg_int(cfg, "b"), m=cfg_int(cfg, "m"), d=cfg_int(cfg, "d"),
        L=cfg_int(cfg, "l"), ebn0_grid_db=cfg_floats(cfg, "ebn0_grid_db"),
        imax=cfg_int(cfg, "imax", 15), mode=cfg_str(cfg, "mode", "hdd"),
        engine=engine,
        min_bit_errors=cfg_int(cfg, "min_bit_errors", 100),
        max_info_bits=cfg_int(cfg, "max_info_bits", 10_000_000),
        max_frames=cfg_int(cfg, "max_frames", 100_000),
        seed=cfg_int(cfg, "seed", 0),
    )
    workers = cfg_int(cfg, "workers", 1)
    manifest = RunManifest("sim", cfg, [args.out], started=_now(),
                           seeds={"master": spec.seed})
    table = None
    if engine == "emulated":
        code = spec.build_code()
        table = resolve_table(cfg, code)
        manifest.table_hashes["mu_lambda"] = table.code_hash

    def rows():
        if engine == "emulated":
            points = run_table_emulated(spec, table, workers=workers)
        else:
            points = run_traditional(spec, workers=workers)
        for pt in points:
            yield pt.csv_row()

    return _point_rows(args.out, manifest, rows(), BerPoint.csv_header())


def cmd_search(args) -> int:
    cfg = resolve_config(args)
    manifest = RunManifest("search", cfg, [args.out], started=_now())

    def rows():
        cands = code_search(
            overhead=cfg_float(cfg, "overhead"),
            latency_budget=cfg_int(cfg, "latency"),
            target_ber=cfg_float(cfg, "target_ber", 1e-15),
            mode=cfg_str(cfg, "mode", "hdd"),
            samples_per_cell=cfg_int(cfg, "samples", 10000),
            rank_by_de=cfg_str(cfg, "rank_by_de", "yes") not in ("no", "0", "false"),
            seed=cfg_int(cfg, "seed", 0),
        )
        if not cands:
            print("search: no candidate satisfies the constraints",
                  file=sys.stderr)
        for c in cands:
            yield [c.n, c.k, c.dmin, c.m, c.B, c.latency,
                   f"{c.overhead:.4f}", f"{c.genie_ber:.3e}",
                   "" if c.de_threshold_db is None else f"{c.de_threshold_db:.3f}",
                   "" if c.ncg_db is None else f"{c.ncg_db:.3f}"]

    return _point_rows(
        args.out, manifest, rows(),
        ["n", "k", "dmin", "m", "B", "latency", "overhead",
         "genie_ber_at_eval", "de_threshold_db", "ncg_db"],
    )


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="bmstbch",
        description="BMST-BCH workbench: decoder-statistics tables, "
                    "genie bounds, density evolution and Monte Carlo runs.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name, fn in [("table", cmd_table), ("bound", cmd_bound),
                     ("de", cmd_de), ("sim", cmd_sim), ("search", cmd_search)]:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--engine", choices=["real", "emulated"], default=None)
        sp.add_argument("--mode", choices=["hdd", "sdd"], default=None)
        sp.add_argument("--out", required=(name != "table"),
                        help="output CSV (or table JSON) path")
        sp.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, TableIntegrityError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
