"""Command line: ``ganeq run <config>``, ``ganeq preset <name>``, ``ganeq plot <results_dir>``."""
import argparse
import logging
import os
import sys

from .experiment import (
    ConfigError,
    PRESETS,
    RunsConfig,
    apply_desk_scale,
    emit_plot_data,
    load_config,
    preset,
    run_experiment,
)

log = logging.getLogger("ganeq")


def _seeds(text):
    """``5`` means five seeds from the base seed; ``0,3,7`` lists them explicitly."""
    parts = [p for p in text.split(",") if p.strip()]
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty seed list")
    return values if len(values) > 1 or "," in text else values[0]


def build_parser():
    p = argparse.ArgumentParser(prog="ganeq", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config or replay a manifest")
    r.add_argument("config")
    r.add_argument("--seeds", type=_seeds, help="seed count or comma-separated seed list")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--desk-scale", type=int, default=1, help="divide TIs and evaluation symbols by this factor")
    r.add_argument("--out-dir", default=None, help="default: results/<config name>")

    s = sub.add_parser("preset", help="print (or save) a preset config")
    s.add_argument("name", choices=sorted(PRESETS))
    s.add_argument("--out", default=None)

    q = sub.add_parser("plot", help="write gnuplot data files for a results directory")
    q.add_argument("results_dir")
    q.add_argument("--out-dir", default=None)
    return p


def cmd_run(args):
    cfg = load_config(args.config)
    if args.seeds is not None:
        if isinstance(args.seeds, int):
            cfg.runs = RunsConfig(None, cfg.runs.base_seed, args.seeds)
        else:
            cfg.runs = RunsConfig(list(args.seeds), cfg.runs.base_seed, len(args.seeds))
    cfg = apply_desk_scale(cfg, args.desk_scale)
    out = args.out_dir or os.path.join("results", cfg.name)
    n_jobs = len(cfg.sweep_points()) * len(cfg.equalizers) * len(cfg.runs.resolved_seeds())
    log.info("running %s: %d jobs on %d worker(s) -> %s", cfg.name, n_jobs, args.workers, out)
    res = run_experiment(cfg, out, args.workers)
    for r in res.rows:
        print(f"{r.sweep_value:>12g}  {r.equalizer_kind:<9} mean {r.mean_ser:.3e}  min {r.min_ser:.3e}"
              f"  failed {r.n_failed}/{r.n_runs}")
    print(f"results written to {out}")
    return 0


def cmd_preset(args):
    text = preset(args.name).to_json() + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_plot(args):
    for path in emit_plot_data(args.results_dir, args.out_dir):
        print(path)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return {"run": cmd_run, "preset": cmd_preset, "plot": cmd_plot}[args.command](args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
