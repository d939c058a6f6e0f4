"""Experiment runner: sweep points x equalizers x seeds, traced and aggregated.

Every (sweep point, equalizer, seed) job is self-contained: its random
streams derive only from the seed, the equalizer kind and the sweep index, so
jobs can run in any order or in parallel without changing a single output
value. Evaluation frames use a stream keyed without the kind, so at a given
estimate index all equalizers of a seed are scored on the same symbols.
"""
import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..equalizers import (
    Discriminator,
    GanTrainer,
    IdleTrainer,
    LmsTrainer,
    NonFiniteLoss,
    SupervisedTrainer,
    build_equalizer,
)
from ..evaluation import (
    SerTrace,
    aggregate_runs,
    count_modes,
    evaluate_equalizer,
    output_histogram,
    pmf_distance,
    wilson_interval,
)
from ..numerics import make_rng
from .config import ExperimentConfig, parse_config

MANIFEST_VERSION = 1
RESULT_COLUMNS = ("sweep_value", "equalizer_kind", "mean_ser", "min_ser", "n_failed", "n_runs", "seeds")


@dataclass
class RunResult:
    sweep_index: int
    sweep_value: float
    kind: str
    seed: int
    status: str  # "ok" or "nonfinite"
    ti: list
    estimates: list
    pmf_tv: list
    histograms: list = field(default_factory=list)  # (ti, Histogram)
    wall_time_s: float = 0.0
    message: str = ""

    @property
    def ok(self):
        return self.status == "ok"

    def trace(self, ma_length, n_symbols):
        if len(self.estimates) < ma_length:
            return None
        return SerTrace(np.asarray(self.estimates), np.asarray(self.ti), ma_length, n_symbols)


def eval_schedule(n_ti, n_estimates):
    """TI counts after which the SER is estimated (evenly spread, last one at ``n_ti``)."""
    if n_estimates > n_ti:
        raise ValueError(f"cannot take {n_estimates} estimates in {n_ti} TIs")
    return [((j + 1) * n_ti) // n_estimates for j in range(n_estimates)]


def _aligned(ev):
    """Outputs paired with the transmit index they estimate, after the best delay."""
    s = ev.shift
    n = min(len(ev.z), len(ev.indices))
    if s >= 0:
        return ev.z[s:n], ev.indices[:n - s]
    return ev.z[:n + s], ev.indices[-s:n]


def make_trainer(cfg, eq, spec, seed, sweep_index):
    """Model plus the trainer that updates it, with all random streams drawn from ``seed``."""
    model = build_equalizer(eq.kind, spec.n_os, make_rng(seed, "init", eq.kind), **eq.options)
    channel_rng = make_rng(seed, "channel", eq.kind, sweep_index)
    schedule = cfg.train_schedule(eq)
    if eq.is_gan:
        D = Discriminator(schedule.disc_window, make_rng(seed, "disc", eq.kind),
                          hidden=schedule.disc_hidden, stride=schedule.disc_stride)
        trainer = GanTrainer(model, D, spec, schedule, channel_rng,
                             make_rng(seed, "reference", eq.kind, sweep_index))
    elif eq.kind == "lms":
        model.mu = eq.lr
        trainer = LmsTrainer(model, spec, channel_rng, schedule.symbols_per_ti)
    elif eq.kind == "wo_eq":
        trainer = IdleTrainer(model)
    else:
        trainer = SupervisedTrainer(model, spec, eq.lr, channel_rng, schedule)
    return model, trainer, schedule


def run_single(cfg, sweep_index, eq_index, seed, keep_models=False):
    """Train and trace one equalizer for one seed at one sweep point."""
    t0 = time.perf_counter()
    value = cfg.sweep_points()[sweep_index]
    spec = cfg.channel_spec(value)
    eq = cfg.equalizers[eq_index]
    ev_cfg = cfg.evaluation
    model, trainer, schedule = make_trainer(cfg, eq, spec, seed, sweep_index)
    points = eval_schedule(schedule.n_ti, ev_cfg.n_estimates)
    hist_at = sorted({max(0, math.ceil(f * ev_cfg.n_estimates) - 1) for f in ev_cfg.histogram_at})
    eval_rng = make_rng(seed, "eval", sweep_index)
    M = spec.constellation.M
    res = RunResult(sweep_index, _axis_value(cfg, spec), eq.kind, seed, "ok", [], [], [])
    i = 0
    try:
        for j, stop in enumerate(points):
            while i < stop:
                trainer.step(i)
                i += 1
            ev = evaluate_equalizer(model, spec, ev_cfg.n_symbols, eval_rng, ev_cfg.max_shift)
            res.ti.append(stop)
            res.estimates.append(ev.ser)
            res.pmf_tv.append(pmf_distance(ev.mapped_decisions, M))
            if j in hist_at:
                z, t = _aligned(ev)
                res.histograms.append((stop, output_histogram(z, ev_cfg.histogram_bins, t, M)))
    except NonFiniteLoss as e:
        res.status = "nonfinite"
        res.message = str(e)
    res.wall_time_s = time.perf_counter() - t0
    if keep_models:
        res.model = model
    return res


def _axis_value(cfg, spec):
    return float(getattr(spec, cfg.sweep.axis))


def _job(args):
    cfg_dict, s, e, seed = args
    return run_single(parse_config(cfg_dict), s, e, seed)


def jobs_for(cfg):
    seeds = cfg.runs.resolved_seeds()
    return [(s, e, seed)
            for s in range(len(cfg.sweep_points()))
            for e in range(len(cfg.equalizers))
            for seed in seeds]


def run_jobs(cfg, workers=1):
    jobs = jobs_for(cfg)
    if workers <= 1 or len(jobs) == 1:
        return [run_single(cfg, *j) for j in jobs]
    d = cfg.to_dict()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps submission order, so collection order never depends on timing
        return list(pool.map(_job, [(d, *j) for j in jobs]))


@dataclass
class ResultRow:
    sweep_value: float
    equalizer_kind: str
    mean_ser: float
    min_ser: float
    n_failed: int
    n_runs: int
    seeds: list
    successful: list = field(default_factory=list)


def aggregate(cfg, runs):
    """One :class:`ResultRow` per (sweep point, equalizer), in config order."""
    ev = cfg.evaluation
    rows = []
    for s in range(len(cfg.sweep_points())):
        for eq in cfg.equalizers:
            group = [r for r in runs if r.sweep_index == s and r.kind == eq.kind]
            seeds = [r.seed for r in group]
            good = [r for r in group if r.ok and r.trace(ev.ma_length, ev.n_symbols) is not None]
            value = group[0].sweep_value
            if not good:
                rows.append(ResultRow(value, eq.kind, math.nan, math.nan, len(group), len(group), seeds))
                continue
            agg = aggregate_runs([r.trace(ev.ma_length, ev.n_symbols) for r in good], ev.ser_threshold)
            ok_seeds = [good[i].seed for i in agg.successful]
            rows.append(ResultRow(value, eq.kind, agg.mean_ser, agg.min_ser,
                                  len(group) - len(ok_seeds), len(group), seeds, ok_seeds))
    return rows


def _fmt(x):
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)  # RFC 4180: CRLF line ends, minimal quoting
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_results(cfg, runs, rows, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    ev = cfg.evaluation
    _write_csv(os.path.join(out_dir, "results.csv"), RESULT_COLUMNS, [
        (r.sweep_value, r.equalizer_kind, r.mean_ser, r.min_ser, r.n_failed, r.n_runs,
         ";".join(str(s) for s in r.seeds)) for r in rows
    ])

    trace_rows, run_rows, hist_rows, time_rows = [], [], [], []
    for r in runs:
        tr = r.trace(ev.ma_length, ev.n_symbols)
        ma = [""] * (ev.ma_length - 1) + (list(tr.ma) if tr is not None else [])
        for j, (ti, ser) in enumerate(zip(r.ti, r.estimates)):
            lo, hi = wilson_interval(ser, ev.n_symbols)
            trace_rows.append((r.sweep_value, r.kind, r.seed, j, ti, ser, float(lo), float(hi),
                               ma[j] if j < len(ma) else "", r.pmf_tv[j]))
        last_hist = r.histograms[-1][1] if r.histograms else None
        modes = max(count_modes(row) for row in last_hist.counts) if last_hist is not None else ""
        run_rows.append((
            r.sweep_value, r.kind, r.seed, r.status,
            tr.min_after_ma if tr is not None else math.nan,
            tr.raw_min if tr is not None else math.nan,
            r.estimates[-1] if r.estimates else math.nan,
            r.pmf_tv[int(np.argmin(r.estimates))] if r.estimates else math.nan,
            r.pmf_tv[-1] if r.pmf_tv else math.nan,
            modes,
        ))
        for ti, h in r.histograms:
            for sym, lo, hi, c in h.rows():
                hist_rows.append((r.sweep_value, r.kind, r.seed, ti, sym, lo, hi, c))
        time_rows.append((r.sweep_value, r.kind, r.seed, r.status, round(r.wall_time_s, 3)))

    _write_csv(os.path.join(out_dir, "traces.csv"),
               ("sweep_value", "equalizer_kind", "seed", "estimate_index", "ti", "ser",
                "ci_low", "ci_high", "ser_ma", "pmf_tv"), trace_rows)
    _write_csv(os.path.join(out_dir, "runs.csv"),
               ("sweep_value", "equalizer_kind", "seed", "status", "min_after_ma", "raw_min",
                "final_ser", "pmf_tv_at_best", "pmf_tv_final", "max_modes_final"), run_rows)
    _write_csv(os.path.join(out_dir, "histograms.csv"),
               ("sweep_value", "equalizer_kind", "seed", "ti", "symbol", "bin_low", "bin_high", "count"),
               hist_rows)
    # wall times differ between otherwise identical runs, so they live apart from results.csv
    _write_csv(os.path.join(out_dir, "timings.csv"),
               ("sweep_value", "equalizer_kind", "seed", "status", "wall_time_s"), time_rows)


def manifest(cfg):
    return {
        "manifest_version": MANIFEST_VERSION,
        "package": "ganeq",
        "version": __version__,
        "numpy_version": np.__version__,
        "seeds": cfg.runs.resolved_seeds(),
        "sweep_points": cfg.sweep_points(),
        "files": ["results.csv", "traces.csv", "runs.csv", "histograms.csv", "timings.csv"],
        "config": cfg.to_dict(),
    }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: list
    rows: list
    out_dir: str = None


def run_experiment(cfg, out_dir=None, workers=1):
    """Run every job of ``cfg``, aggregate, and (if ``out_dir``) write all result files."""
    if not cfg.equalizers:
        raise ValueError("config lists no equalizers")
    runs = run_jobs(cfg, workers)
    rows = aggregate(cfg, runs)
    if out_dir is not None:
        write_results(cfg, runs, rows, out_dir)
        with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest(cfg), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return ExperimentResult(cfg, runs, rows, out_dir)
