"""Command line entry point.

Exit codes: 0 success, 1 validation error (bad config, bad input data),
2 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .data import DataError
from .report import emit_report, fmt, summary_markdown
from .runner import ExperimentError, run_experiment

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2

PRESETS = ("noisy-bisquare", "clean-bisquare", "noisy-leastsquares")

log = logging.getLogger("multihop")


def synthetic_preset(name: str, repeats: int = 10, seed: int = 0) -> dict:
    """JSON config for one of the polynomial-regression presets."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {PRESETS}")
    noise = 0.0 if name == "clean-bisquare" else 0.2
    simple = {"family": "linear_ls"} if name == "noisy-leastsquares" else {"family": "robust_linear"}
    return {
        "name": name,
        "data": {"source": "synthetic_poly", "noise_fraction": noise, "seed": 0},
        "complex": {"family": "polynomial", "degree": 5},
        "simple": simple,
        "anchors": {"k": 4},
        "perturbation": {"identity": True},
        "search": {"m": 2, "seed": seed, "reward": "neg_mse"},
        "methods": [{"type": "distill"}],
        "split": {"repeats": repeats},
        "baselines": ["direct", "one_hop", "chains", "mstm", "brute_force"],
        "chains": {"two_hop_cubic": [{"family": "polynomial", "degree": 3}]},
    }


def _build_parser():
    p = argparse.ArgumentParser(prog="multihop", description="Multi-hop model transfer experiments.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers (-1 for all cores)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common], help="run an experiment config")
    r.add_argument("config")

    s = sub.add_parser("synthetic", parents=[common], help="polynomial regression presets")
    s.add_argument("preset", choices=PRESETS)
    s.add_argument("--repeats", type=int, default=10)

    b = sub.add_parser("bruteforce", parents=[common],
                       help="exhaustive chain search next to the greedy search")
    b.add_argument("config")

    a = sub.add_parser("analyze", parents=[common], help="confidence analysis on saved models")
    a.add_argument("run_dir", help="output directory of a run with save_models enabled")
    a.add_argument("--before", default=None, help="model label before transfer (default one_hop[*])")
    a.add_argument("--after", default=None, help="model label after transfer (default mstm[*])")
    return p


def _out_dir(args, cfg: ExperimentConfig):
    if args.out:
        return Path(args.out)
    if cfg.output_dir:
        return Path(cfg.output_dir)
    return Path("runs") / cfg.name


def _run(cfg: ExperimentConfig, args):
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    bundle = run_experiment(cfg, n_jobs=args.jobs)
    out = _out_dir(args, cfg)
    emit_report(bundle, out)
    sys.stdout.write(summary_markdown(bundle))
    sys.stdout.write(f"\nreport written to {out}\n")
    return EXIT_OK


def _cmd_run(args):
    return _run(load_config(args.config), args)


def _cmd_synthetic(args):
    if args.repeats < 1:
        raise ConfigError("--repeats must be at least 1")
    raw = synthetic_preset(args.preset, args.repeats, args.seed or 0)
    return _run(parse_config(raw), args)


def _cmd_bruteforce(args):
    from dataclasses import replace
    cfg = load_config(args.config)
    cfg = replace(cfg, baselines=("mstm_np", "brute_force"))
    return _run(cfg, args)


def _analyze_pairs(labels, before, after):
    if before and after:
        return [(before, after)]
    pairs = []
    for lab in labels:
        if lab.startswith("mstm[") and after is None:
            b = before or "one_hop[" + lab[len("mstm["):]
            pairs.append((b, lab))
    return pairs


def _cmd_analyze(args):
    import joblib

    from ..metrics import confidence_analysis

    root = Path(args.run_dir) / "models"
    repeat_dirs = sorted(root.glob("repeat_*"), key=lambda p: int(p.name.split("_")[1]))
    if not repeat_dirs:
        raise ConfigError(f"no saved models under {root}; run with \"save_models\": true")
    rows = []
    for d in repeat_dirs:
        labels = sorted(p.stem for p in d.glob("*.joblib"))
        if "complex" not in labels:
            raise ConfigError(f"{d} has no complex model")
        test = np.load(d / "test.npz")
        pairs = _analyze_pairs(labels, args.before, args.after)
        if not pairs:
            raise ConfigError(f"{d}: no before/after model pair found among {labels}")
        C = joblib.load(d / "complex.joblib")
        for b, a in pairs:
            for lab in (b, a):
                if lab not in labels:
                    raise ConfigError(f"{d}: model {lab!r} not saved")
            summary = confidence_analysis(joblib.load(d / f"{b}.joblib"), joblib.load(d / f"{a}.joblib"),
                                          C, test["X"], test["y"])
            rows.append((d.name, b, a, summary.to_dict()))
    out = Path(args.out) if args.out else Path(args.run_dir)
    out.mkdir(parents=True, exist_ok=True)
    keys = ("SAC", "CAC", "SCC", "CCC", "n_corrected")
    with open(out / "confidence.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("repeat", "before", "after") + keys)
        for rep, b, a, s in rows:
            w.writerow((rep, b, a) + tuple("" if s[k] is None else fmt(s[k]) for k in keys))
    sys.stdout.write(json.dumps([{"repeat": r, "before": b, "after": a, **s} for r, b, a, s in rows],
                                indent=2) + "\n")
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "synthetic": _cmd_synthetic, "bruteforce": _cmd_bruteforce,
            "analyze": _cmd_analyze}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; usage errors are validation errors here
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs == 0:
        sys.stderr.write("error: --jobs must be nonzero\n")
        return EXIT_VALIDATION
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DataError) as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION
    except ExperimentError as exc:
        cause = exc.__cause__
        if isinstance(cause, (ConfigError, DataError)):
            sys.stderr.write(f"validation error: {exc}\n")
            return EXIT_VALIDATION
        sys.stderr.write(f"runtime failure: {exc}\n")
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - every other failure is a runtime failure
        log.debug("unhandled failure", exc_info=True)
        sys.stderr.write(f"runtime failure: {type(exc).__name__}: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
