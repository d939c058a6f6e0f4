"""Gnuplot-ready columnar files derived from a results directory."""
import csv
import json
import math
import os


def read_results(results_dir):
    with open(os.path.join(results_dir, "results.csv"), newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def ser_floor(n_symbols):
    """Half a counted error: the value plotted in place of an SER of exactly zero."""
    return 1.0 / (2 * n_symbols)


def _floored(x, floor):
    if math.isnan(x):
        return x, 0
    return (floor, 1) if x <= 0 else (x, 0)


def emit_plot_data(results_dir, out_dir=None, n_symbols=None):
    """Write one ``series_<kind>.dat`` per equalizer; returns the written paths in order.

    Columns: sweep value, mean SER, minimum SER, number of failed runs, and a
    flag per SER column marking values raised to the log-scale floor.
    """
    rows = read_results(results_dir)
    if n_symbols is None:
        with open(os.path.join(results_dir, "manifest.json"), encoding="utf-8") as fh:
            n_symbols = json.load(fh)["config"]["evaluation"]["n_symbols"]
    floor = ser_floor(n_symbols)
    out_dir = out_dir or os.path.join(results_dir, "plot")
    os.makedirs(out_dir, exist_ok=True)
    series = {}
    for r in rows:
        series.setdefault(r["equalizer_kind"], []).append(r)
    paths = []
    for kind in sorted(series):
        pts = sorted(series[kind], key=lambda r: float(r["sweep_value"]))
        path = os.path.join(out_dir, f"series_{kind}.dat")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# {kind}: SER floor {floor!r} (1/(2*{n_symbols}))\n")
            fh.write("# sweep_value mean_ser min_ser n_failed n_runs mean_floored min_floored\n")
            for r in pts:
                mean, fm = _floored(float(r["mean_ser"]), floor)
                mn, fn = _floored(float(r["min_ser"]), floor)
                fh.write(f"{float(r['sweep_value'])!r} {mean!r} {mn!r} {r['n_failed']} {r['n_runs']} {fm} {fn}\n")
        paths.append(path)
    return paths
