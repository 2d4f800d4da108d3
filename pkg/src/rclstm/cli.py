"""Command-line entry point: preprocess, train, evaluate, sweep, bench.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.  With
``--freeze-timestamps`` output filenames use a fixed stamp and measured
wall-clock columns are written as zeros, so identical (config, seed) runs
produce byte-identical files.
"""

import argparse
import csv
import json
import os
import sys
from datetime import datetime

import numpy as np

from . import kernels, synth
from .benchmark import benchmark_forward, benchmark_kernel_paths
from .checkpoint import MAGIC, load_checkpoint_file, save_checkpoint_file
from .config import apply_overrides, load_config
from .data import (PreparedData, chronological_split, denormalize,
                   load_mobility_csv, load_prepared, load_traffic_csv,
                   prepare_mobility, prepare_traffic, save_prepared)
from .errors import (CheckpointError, ConfigError, DataFormatError,
                     DivergenceError, EncodingError, InsufficientDataError)
from .metrics import MetricsReport, rmse
from .network import build_model
from .sweeps import SweepSpec, run_sweep, summarize, write_report_csv
from .training import evaluate_model, fit, predict_batch

USAGE_ERRORS = (ConfigError, DataFormatError, InsufficientDataError,
                EncodingError, CheckpointError, FileNotFoundError)


def _stamp(frozen):
    return "frozen" if frozen else datetime.now().strftime("%Y%m%d-%H%M%S")


def _is_cache(path):
    try:
        with open(path, "rb") as fh:
            return fh.read(8) == MAGIC
    except OSError:
        return False


def _generate_synthetic(cfg):
    s = cfg.synthetic
    if s.kind == "sine":
        series = synth.sine_series(s.n, period=s.period, amplitude=s.amplitude,
                                   offset=s.offset, noise=s.noise, seed=s.seed)
    elif s.kind == "longrange":
        series = synth.long_range_series(s.n, lag=s.lag, growth=s.growth,
                                         noise=s.noise, mix=s.mix,
                                         mix_period=s.mix_period, seed=s.seed)
    else:
        series = synth.ar_process(s.n, s.ar_coeffs, intercept=s.ar_intercept,
                                  noise=s.ar_noise, seed=s.seed,
                                  integrate=s.ar_integrate)
    return PreparedData("regression", np.asarray(series.values, dtype=np.float64))


def _prepare(cfg):
    """PreparedData for the configured task; raw CSV, cache file or synthetic."""
    task = cfg.run.task
    if task == "synthetic":
        return _generate_synthetic(cfg)
    if not cfg.run.data:
        raise ConfigError(f"[run] data path is required for task {task!r}")
    if not os.path.exists(cfg.run.data):
        raise FileNotFoundError(f"data file not found: {cfg.run.data}")
    if _is_cache(cfg.run.data):
        prepared, _ = load_prepared(cfg.run.data)
        return prepared
    if task == "traffic":
        series = load_traffic_csv(cfg.run.data)
        return prepare_traffic(series, cfg.data.normalize_scope,
                               cfg.data.train_fraction)
    series = load_mobility_csv(cfg.run.data)
    return prepare_mobility(series, cfg.data.window, cfg.data.train_fraction)


def _build_from_config(cfg, prepared):
    feature_dim = 1 if prepared.task == "regression" else prepared.codebook.size
    out_dim = 1 if prepared.task == "regression" else prepared.codebook.size
    return build_model(feature_dim, list(cfg.model.hidden), task=prepared.task,
                       out_dim=out_dim, density=cfg.model.density,
                       mask_mode=cfg.model.mask_mode, seed=cfg.model.seed,
                       kernel_threshold=cfg.model.kernel_threshold)


def _outdir(cfg):
    os.makedirs(cfg.run.output_dir, exist_ok=True)
    return cfg.run.output_dir


def cmd_preprocess(cfg, args):
    prepared = _prepare(cfg)
    ds = prepared.windows(cfg.data.window)
    train, test = chronological_split(ds, cfg.data.train_fraction)
    path = os.path.join(_outdir(cfg), "dataset_cache.bin")
    save_prepared(prepared, ds, path)
    print(f"cache written: {path}")
    print(f"samples: {len(ds)} total, {len(train)} train, {len(test)} test "
          f"(window={cfg.data.window})")
    if prepared.norm is not None:
        print(f"normalization: min_log={prepared.norm.min_log:.6f} "
              f"max_log={prepared.norm.max_log:.6f}")
    else:
        print("normalization: none")
    if prepared.codebook is not None:
        print(f"codebook: {prepared.codebook.size} locations")
    return 0


def _write_history(history, path, frozen):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_metric", "seconds"])
        for e, loss in enumerate(history.train_loss):
            val = history.val_metric[e] if e < len(history.val_metric) else ""
            sec = 0.0 if frozen else history.epoch_seconds[e]
            writer.writerow([e, f"{loss:.12g}",
                             "" if val == "" else f"{val:.12g}", f"{sec:.6g}"])


def cmd_train(cfg, args):
    prepared = _prepare(cfg)
    ds = prepared.windows(cfg.data.window)
    train, test = chronological_split(ds, cfg.data.train_fraction)
    model = _build_from_config(cfg, prepared)
    try:
        model, history = fit(model, train, cfg.training, val_ds=test)
    except DivergenceError as err:
        print(f"training diverged at epoch {err.epoch}: {err}", file=sys.stderr)
        return 1
    out = _outdir(cfg)
    ckpt = os.path.join(out, "checkpoint.bin")
    save_checkpoint_file(model, ckpt)
    _write_history(history, os.path.join(out, "history.csv"), args.freeze_timestamps)
    metric_name = "val_rmse" if prepared.task == "regression" else "val_accuracy"
    last = history.val_metric[-1] if history.val_metric else float("nan")
    print(f"checkpoint written: {ckpt}")
    print(f"epochs: {len(history.train_loss)}, final train loss: "
          f"{history.train_loss[-1]:.6g}, {metric_name}: {last:.6g}"
          if history.train_loss else "no epochs run")
    return 0


def cmd_evaluate(cfg, args):
    prepared = _prepare(cfg)
    model = load_checkpoint_file(args.checkpoint)
    if model.task != prepared.task:
        raise CheckpointError(
            f"checkpoint task {model.task!r} does not match dataset task "
            f"{prepared.task!r}")
    ds = prepared.windows(cfg.data.window)
    _, test = chronological_split(ds, cfg.data.train_fraction)
    metric, preds = evaluate_model(model, test)
    if prepared.task == "regression":
        report = MetricsReport(n=len(test), rmse=metric)
        if prepared.norm is not None:
            raw_pred = denormalize(preds, prepared.norm)
            raw_true = denormalize(test.targets, prepared.norm)
            report.rmse_raw = rmse(raw_true, raw_pred)
    else:
        report = MetricsReport(n=len(test), accuracy=metric)
    payload = report.to_dict()
    payload["config_digest"] = cfg.digest()
    path = os.path.join(_outdir(cfg), "metrics.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"metrics written: {path}")
    for key, value in payload.items():
        print(f"  {key}: {value}")
    return 0


def cmd_sweep(cfg, args):
    prepared = _prepare(cfg)
    spec = SweepSpec(
        axis=cfg.sweep.axis,
        points=list(cfg.sweep.points),
        seeds=list(cfg.sweep.seeds),
        hidden=tuple(cfg.model.hidden),
        density=cfg.model.density,
        mask_mode=cfg.model.mask_mode,
        kernel_threshold=cfg.model.kernel_threshold,
        window=cfg.data.window,
        train_fraction=cfg.data.train_fraction,
        training=cfg.training,
        include_baselines=cfg.sweep.include_baselines,
        timing_reps=cfg.sweep.timing_reps,
    )
    report = run_sweep(spec, prepared, parallel=max(1, args.parallel))
    out = _outdir(cfg)
    stamp = _stamp(args.freeze_timestamps)
    csv_path = os.path.join(out, f"sweep_{spec.axis}_{stamp}.csv")
    write_report_csv(report, csv_path, freeze_timers=args.freeze_timestamps)
    text = summarize(report)
    txt_path = os.path.join(out, f"sweep_{spec.axis}_{stamp}.txt")
    with open(txt_path, "w") as fh:
        fh.write(text + "\n")
    print(f"report written: {csv_path}")
    print(text)
    return 0


def cmd_bench(cfg, args):
    if cfg.bench.reps < 30:
        raise ConfigError("[bench] reps must be >= 30 for reported numbers")
    window = np.clip(
        synth.sine_series(cfg.bench.window + 1, seed=1).values[:-1], 0.0, 1.0)
    windows = [window[:, None]]
    results = {"backend": kernels.backend_name(), "hidden": cfg.bench.hidden,
               "window": cfg.bench.window, "density": cfg.bench.density}
    for label, density in (("sparse", cfg.bench.density), ("dense", 1.0)):
        model = build_model(1, [cfg.bench.hidden], density=density,
                            seed=cfg.model.seed,
                            kernel_threshold=cfg.model.kernel_threshold)
        stats = benchmark_forward(model, windows, reps=cfg.bench.reps,
                                  warmup=cfg.bench.warmup)
        results[label] = {"median_s": stats.median, "mean_s": stats.mean,
                          "std_s": stats.std, "repetitions": stats.repetitions}
        print(f"{label} (density={density:g}): median "
              f"{stats.median * 1e3:.3f} ms over {stats.repetitions} reps")
    speedup = results["dense"]["median_s"] / results["sparse"]["median_s"]
    results["sparse_speedup"] = speedup
    print(f"sparse speedup over dense: {speedup:.2f}x")
    if cfg.bench.compare_kernels:
        paths = benchmark_kernel_paths(hidden=cfg.bench.hidden,
                                       density=cfg.bench.density,
                                       reps=max(cfg.bench.reps, 100))
        results["kernels"] = {}
        for name, stats in paths.items():
            results["kernels"][name] = {"median_s": stats.median, "mean_s": stats.mean}
            print(f"kernel {name}: median {stats.median * 1e6:.2f} us")
    path = os.path.join(_outdir(cfg), f"bench_{_stamp(args.freeze_timestamps)}.json")
    with open(path, "w") as fh:
        json.dump(results, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"timing report written: {path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rclstm",
        description="Sparse randomly-connected LSTM engine and experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("preprocess", cmd_preprocess), ("train", cmd_train),
                     ("evaluate", cmd_evaluate), ("sweep", cmd_sweep),
                     ("bench", cmd_bench)):
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override every configured seed")
        p.add_argument("--density", type=float, default=None)
        p.add_argument("--window", type=int, default=None)
        p.add_argument("--train-fraction", type=float, default=None)
        p.add_argument("--parallel", type=int, default=1,
                       help="concurrent sweep workers")
        p.add_argument("--freeze-timestamps", action="store_true",
                       help="fixed filenames and zeroed wall-clock columns")
        if name == "evaluate":
            p.add_argument("--checkpoint", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        apply_overrides(cfg, seed=args.seed, density=args.density,
                        window=args.window, train_fraction=args.train_fraction)
        return args.fn(cfg, args)
    except USAGE_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (DivergenceError, RuntimeError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
