##########################################################################
# the non-blind references: Wiener filter, LMS, supervised CNN/linear, Volterra
##########################################################################
import math

import numpy as np

from ganeq import dsp
from ganeq.channel import ChannelSpec
from ganeq.equalizers import LmsTrainer, SupervisedTrainer, TrainSchedule, build_equalizer
from ganeq.evaluation import estimate_ser
from ganeq.numerics import make_rng

## Wiener filter for Proakis-B from the normal equations

spec = ChannelSpec(linear_response="proakis_b", snr_db=16.0)
h = spec.impulse_response()
c, taps = len(h) // 2, 21
ms = np.arange(-30, 31)
H = np.array([[h[c + i - 2 * m] if 0 <= c + i - 2 * m < len(h) else 0.0 for m in ms]
              for i in range(-(taps // 2), taps // 2 + 1)])
sigma2 = np.sum(h * h) / 2 / 10 ** (spec.snr_db / 10)
p = H[:, 30]
w = np.linalg.solve(H @ H.T + sigma2 * np.eye(taps), p)
mmse = 1 - p @ w
print(f"Wiener MMSE at 16 dB: {mmse:.4f} ({10 * math.log10(mmse):.2f} dB)")

## train the references for a few thousand iterations

n_ti = 3000
sched = TrainSchedule(n_ti=n_ti)
print(f"\nBPSK over Proakis-B at 16 dB, {n_ti} training iterations of 100 symbols")
for kind, lr in (("sup_lin", 1e-3), ("sup_cnn", 5e-3), ("lms", 1e-2), ("wo_eq", 0.0)):
    model = build_equalizer(kind, 2, make_rng(1, kind))
    rng = make_rng(1, "channel", kind)
    if kind == "lms":
        model.mu = lr
        trainer = LmsTrainer(model, spec, rng)
    elif kind == "wo_eq":
        trainer = None
    else:
        trainer = SupervisedTrainer(model, spec, lr, rng, sched)
    losses = [trainer.step(i)["loss"] for i in range(n_ti)] if trainer else [math.nan]
    ser = estimate_ser(model, spec, 10_000, make_rng(2))
    print(f"  {kind:8s} final loss {np.mean(losses[-100:]):.4f}  SER {ser:.2e}")

## IM/DD: square-law detection needs a nonlinear equalizer

fiber = ChannelSpec(alphabet="pam2", linear_response="fiber", nonlinearity="sld", snr_db=20.0,
                    fiber=dsp.FiberParams(length_m=30e3), symbol_rate=40e9)
print("\nPAM-2 over 30 km at 40 GBd, 20 dB")
for kind, lr in (("sup_lin", 5e-3), ("volterra", 7e-3), ("sup_cnn", 5e-4), ("wo_eq", 0.0)):
    model = build_equalizer(kind, 2, make_rng(3, kind))
    if kind != "wo_eq":
        trainer = SupervisedTrainer(model, fiber, lr, make_rng(3, "channel", kind), sched)
        for i in range(n_ti):
            trainer.step(i)
    print(f"  {kind:8s} {model.n_param:4d} parameters  SER {estimate_ser(model, fiber, 10_000, make_rng(4)):.2e}")
