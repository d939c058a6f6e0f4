##########################################################################
# from preset to plot data: the experiment runner at desk scale
##########################################################################
import csv
import os
import tempfile

from ganeq.experiment import apply_desk_scale, emit_plot_data, preset, run_experiment

## a cut-down fig5 preset: BPSK over Proakis-B, SNR sweep

cfg = preset("fig5")
cfg.equalizers = [e for e in cfg.equalizers if e.kind in ("sup_lin", "lms", "wo_eq")]
cfg.sweep.values = [10.0, 14.0, 18.0]
cfg.runs.n_runs = 2
# 20k TIs / 20 = 1000 TIs per run, 1000 symbols per estimate
cfg = apply_desk_scale(cfg, 20)
print(cfg.to_json()[:400], "...\n")

out = os.path.join(tempfile.mkdtemp(), "fig5-desk")
res = run_experiment(cfg, out)

## results.csv: one row per sweep point and equalizer

with open(os.path.join(out, "results.csv"), newline="") as fh:
    for row in csv.reader(fh):
        print("  ".join(f"{v:>14}" for v in row[:6]))

## gnuplot-ready series

for path in emit_plot_data(out):
    print("\n" + path)
    print(open(path).read().rstrip())

print(f"\nreplay with: ganeq run {os.path.join(out, 'manifest.json')} --out-dir <dir>")
