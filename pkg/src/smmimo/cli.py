"""Command-line front end.

::

    smmimo run <config> [--workers n] [--seed s] [--out dir]
    smmimo validate <config>
    smmimo list-scenarios

``<config>`` is a path to an INI file or the name of a bundled scenario.
``run`` writes ``<out>/<scenario>.csv`` and ``<out>/<scenario>.meta.json``;
the output directory defaults to ``$SMMIMO_OUT`` or ``./results``.

CSV columns, one row per (system, detector, grid point):

    scenario, system, detector, K, N, alpha, snr_db, trials, bits, errors,
    erasures, ber, ci_halfwidth, mean_ops, mean_iters

Exit status: 0 on success, 2 for an invalid configuration, 3 when a
detector fails on more than 0.1% of trials.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import platform
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import (
    ConfigValidationError,
    ExperimentConfig,
    bundled_scenarios,
    load_config,
    resolve_config_path,
)
from .channel import snr_to_noise_variance
from .sim import BerRecord, ErasureError, complexity_records, run_alpha_sweep, run_ber_sweep

OUT_ENV = "SMMIMO_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_ERASURE = 0, 2, 3

CSV_COLUMNS = (
    "scenario", "system", "detector", "K", "N", "alpha", "snr_db", "trials",
    "bits", "errors", "erasures", "ber", "ci_halfwidth", "mean_ops", "mean_iters",
)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def record_row(r: BerRecord) -> list[str]:
    vals = dict(
        scenario=r.scenario, system=r.system, detector=r.detector, K=r.K, N=r.N,
        alpha=r.alpha, snr_db=r.snr_db, trials=r.trials, bits=r.bits,
        errors=r.errors, erasures=r.erasures, ber=r.ber,
        ci_halfwidth=r.ci_halfwidth, mean_ops=r.mean_ops, mean_iters=r.mean_iters,
    )
    return [_fmt(vals[c]) for c in CSV_COLUMNS]


def write_csv(records: list[BerRecord], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(record_row(r))


def execute(cfg: ExperimentConfig, workers: int = 1, seed: int | None = None) -> list[BerRecord]:
    """Run every plan of a parsed configuration and return the records."""
    records = []
    for plan in cfg.plans:
        if seed is not None:
            plan = replace(plan, seed=seed)
        if cfg.sweep == "snr":
            records.extend(run_ber_sweep(plan, workers))
        elif cfg.sweep == "alpha":
            records.extend(run_alpha_sweep(plan, workers))
        else:
            records.extend(complexity_records(plan, cfg.complexity_trials, workers))
    return records


def _load(arg: str) -> ExperimentConfig:
    return load_config(resolve_config_path(arg))


def _config_failure(exc) -> int:
    if isinstance(exc, ConfigValidationError):
        print(f"invalid configuration ({len(exc.problems)} problem(s)):", file=sys.stderr)
        for p in exc.problems:
            print(f"  {p}", file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_CONFIG


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config)
    except (ConfigValidationError, FileNotFoundError) as exc:
        return _config_failure(exc)
    for w in cfg.warnings:
        print(f"warning: {w}", file=sys.stderr)
    out = Path(args.out or os.environ.get(OUT_ENV) or "results")
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else cfg.plans[0].seed

    t0 = time.perf_counter()
    try:
        records = execute(cfg, args.workers, seed)
    except ErasureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERASURE
    wall = time.perf_counter() - t0

    csv_path = out / f"{cfg.name}.csv"
    write_csv(records, csv_path)
    meta = {
        "scenario": cfg.name,
        "description": cfg.description,
        "config": str(cfg.source),
        "sweep": cfg.sweep,
        "seed": seed,
        "workers": args.workers,
        "rows": len(records),
        "wall_time_s": round(wall, 3),
        "versions": {
            "smmimo": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "warnings": cfg.warnings,
    }
    (out / f"{cfg.name}.meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {csv_path} ({len(records)} rows, {wall:.1f} s)")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = _load(args.config)
    except (ConfigValidationError, FileNotFoundError) as exc:
        return _config_failure(exc)
    print(f"scenario {cfg.name}: {cfg.sweep} sweep, {len(cfg.plans)} plan(s), valid")
    for plan in cfg.plans:
        sysm = plan.system
        ks = [plan.users_for_alpha(a) for a in plan.alpha] if plan.alpha else [plan.K]
        for K in ks:
            sc = sysm.config(K, plan.N, plan.power_profile)
            sset = sc.sm_set
            print(
                f"  system {sysm.name}: n_t={sysm.n_t} qam={sysm.order} streams={sysm.streams} "
                f"bits_per_use={sysm.bits_per_user} E_s={sset.alphabet.average_energy:g} "
                f"K={K} N={plan.N} alpha={K / plan.N:g} "
                f"detectors={','.join(d.label for d in sysm.detectors)}"
            )
            for s in plan.snr_db:
                s2 = 0.0 if math.isinf(s) else snr_to_noise_variance(s, sc)
                print(f"    snr_db={s:g} sigma2={s2:.6g}")
    for w in cfg.warnings:
        print(f"warning: {w}")
    return EXIT_OK


def cmd_list(args) -> int:
    for name, path in sorted(bundled_scenarios().items()):
        try:
            desc = load_config(path).description
        except ConfigValidationError:
            desc = "(invalid)"
        print(f"{name:8s} {desc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smmimo", description="Multiuser SM-MIMO detection simulator")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress per grid point")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep and write CSV + metadata")
    run.add_argument("config", help="INI file or bundled scenario name")
    run.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./results)")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a config and print derived quantities")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)

    ls = sub.add_parser("list-scenarios", help="list bundled scenarios")
    ls.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
