"""Command-line workbench: simulate -> fit -> evaluate, plus self verification.

Subcommands (each takes ``--config <path>`` and ``--out <dir>``; ``--seed``
overrides the configured master seed):

    simulate   write train/cal splits and a manifest with the resolved config
    fit        fit the learned detectors on the train split, write model files
    evaluate   calibrate, verify Pfa and sweep the grid; write report CSVs
    verify     run the analytic/oracle self-check suite

Exit codes: 0 success, 1 validation error, 2 runtime failure. Files are the
only interchange between subcommands; identical config and seed reproduce
byte-identical artifacts.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import cfar, dsvdd, svdd
from .checks import run_all_checks
from .config import ConfigError, load_config
from .sim import cal_split, test_block, train_split, write_dataset, read_dataset

MANIFEST_NAME = "manifest.json"
TRAIN_NAME = "train.rds"
CAL_NAME = "cal.rds"
SVDD_MODEL_NAME = "svdd_model.csv"
DSVDD_MODEL_NAME = "dsvdd_model.npz"
DSVDD_LOG_NAME = "dsvdd_epochs.csv"


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    os.makedirs(args.out, exist_ok=True)
    return cfg


def cmd_simulate(args):
    cfg = _load(args)
    scn = cfg.scenario
    write_dataset(os.path.join(args.out, TRAIN_NAME), scn, train_split(scn))
    write_dataset(os.path.join(args.out, CAL_NAME), scn, cal_split(scn))
    if cfg.write_test:
        for d in scn.doppler_bins:
            for snr in scn.snr_grid_db:
                name = f"test_d{d}_snr{snr:g}.rds"
                write_dataset(os.path.join(args.out, name), scn,
                              test_block(scn, snr, d))
    manifest = {"format": 1, "config": cfg.resolved()}
    with open(os.path.join(args.out, MANIFEST_NAME), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {TRAIN_NAME}, {CAL_NAME} and {MANIFEST_NAME} to {args.out}")
    return 0


def cmd_fit(args):
    cfg = _load(args)
    train_path = os.path.join(args.out, TRAIN_NAME)
    if not os.path.exists(train_path):
        raise ConfigError(
            f"training split not found: {train_path} (run `simulate` first)")
    _, samples = read_dataset(train_path)
    cells = np.array([s.cell for s in samples])

    if "svdd" in cfg.detectors:
        model = svdd.fit(cells, nu=cfg.svdd_nu, tol=cfg.svdd_tol,
                         max_updates=cfg.svdd_max_updates)
        svdd.save_model(os.path.join(args.out, SVDD_MODEL_NAME), model)
        print(f"svdd: {len(model.alphas)} support points, gamma={model.gamma:.6g}")
    if "dsvdd" in cfg.detectors:
        model = dsvdd.train(cells, cfg.train_config)
        dsvdd.save_model(os.path.join(args.out, DSVDD_MODEL_NAME), model)
        dsvdd.write_loss_log(os.path.join(args.out, DSVDD_LOG_NAME), model)
        first, last = model.loss_log[0][1], model.loss_log[-1][1]
        print(f"dsvdd: loss {first:.4f} -> {last:.4f} over {len(model.loss_log)} epochs")
    return 0


def cmd_evaluate(args):
    cfg = _load(args)
    scn = cfg.scenario
    svdd_model = dsvdd_model = None
    if "svdd" in cfg.detectors:
        path = os.path.join(args.out, SVDD_MODEL_NAME)
        if not os.path.exists(path):
            raise ConfigError(f"model file not found: {path} (run `fit` first)")
        svdd_model = svdd.load_model(path)
    if "dsvdd" in cfg.detectors:
        path = os.path.join(args.out, DSVDD_MODEL_NAME)
        if not os.path.exists(path):
            raise ConfigError(f"model file not found: {path} (run `fit` first)")
        dsvdd_model = dsvdd.load_model(path)

    handles = cfar.make_handles(scn, tags=cfg.detectors,
                                svdd_model=svdd_model, dsvdd_model=dsvdd_model)
    rows = cfar.run_experiment(scn, handles)
    report_path = os.path.join(args.out, f"report_{scn.clutter_family}.csv")
    cfar.write_report(report_path, rows)
    print(f"wrote {report_path} ({len(rows)} rows)")
    if any(r.failed for r in rows):
        failed = sorted({r.detector for r in rows if r.failed})
        print(f"warning: detector(s) failed and were flagged: {', '.join(failed)}",
              file=sys.stderr)
    if cfg.plots:
        from .plots import plot_pd_curves, plot_pd_maps
        curves = os.path.join(args.out, f"pd_curves_{scn.clutter_family}.svg")
        plot_pd_curves(rows, curves)
        maps = plot_pd_maps(rows, args.out, scn.clutter_family)
        print(f"wrote {curves} and {len(maps)} Pd maps")
    if all(r.failed for r in rows):
        raise RuntimeError("all detectors failed")
    return 0


def cmd_verify(args):
    power = 1.02 if args.mutate == "tyler" else 1.0
    rows = run_all_checks(tyler_denominator_power=power)
    width = max(len(name) for name, *_ in rows)
    failures = 0
    for name, tol, value, ok in rows:
        status = "PASS" if ok else "FAIL"
        print(f"{name:<{width}}  {status}  value={value:.3e}  ({tol})")
        failures += not ok
    if failures:
        print(f"{failures} check(s) failed", file=sys.stderr)
        return 2
    print("all checks passed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cfardetect",
        description="CFAR radar detection workbench (classical + one-class detectors)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, needs_config in (
        ("simulate", cmd_simulate, True),
        ("fit", cmd_fit, True),
        ("evaluate", cmd_evaluate, True),
        ("verify", cmd_verify, False),
    ):
        p = sub.add_parser(name)
        if needs_config:
            p.add_argument("--config", required=True, help="config file or manifest.json")
            p.add_argument("--out", required=True, help="output directory")
            p.add_argument("--seed", type=int, default=None,
                           help="override the configured master seed")
        if name == "verify":
            p.add_argument("--mutate", choices=["tyler"], default=None,
                           help="inject a known fault to demonstrate check sensitivity")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
