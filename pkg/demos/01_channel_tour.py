##########################################################################
# a tour of the simulated links: Proakis-B and the IM/DD fiber channel
##########################################################################
import math

import numpy as np
from scipy.special import erfc

from ganeq import dsp
from ganeq.channel import ChannelSpec, draw_symbols, transmit
from ganeq.numerics import make_rng

## pulse shaping

h_ps = dsp.raised_cosine_taps(0.25, span=32, sps=2)
print(f"raised cosine: {len(h_ps)} taps, peak {h_ps[32]:.3f}, "
      f"largest symbol-spaced sidelobe {np.max(np.abs(np.delete(h_ps[::2], 16))):.1e}")

## dispersion grows with length and symbol rate

# the kept window never drops below the pulse length, so the RMS width of
# the composite response is the better measure of the spreading
for length_km in (15, 30):
    for rate in (20, 30, 40, 50):
        fiber = dsp.FiberParams(length_m=length_km * 1e3)
        h = dsp.composite_impulse_response(h_ps, fiber, rate * 1e9)
        e = np.abs(h) ** 2 / np.sum(np.abs(h) ** 2)
        t = (np.arange(len(h)) - len(h) // 2) / 2
        rms = math.sqrt(np.sum(e * t * t) - np.sum(e * t) ** 2)
        print(f"{length_km:2d} km {rate:2d} GBd: {len(h):3d} taps, RMS width {rms:.2f} symbols")
ref = math.sqrt(np.sum(((np.arange(65) - 32) / 2) ** 2 * h_ps ** 2) / np.sum(h_ps ** 2))
print(f"back-to-back RMS width {ref:.2f} symbols")

## error rate without equalization

print("\nSER of the raw symbol-instant samples (threshold at the level midpoints)")
rng = make_rng(0, "demo")
for snr_db in (10, 14, 18):
    row = []
    for name, spec in (
        ("identity", ChannelSpec(linear_response="identity", snr_db=snr_db)),
        ("proakis_b", ChannelSpec(linear_response="proakis_b", snr_db=snr_db)),
    ):
        idx = draw_symbols(100_000, spec.constellation, rng)
        y = transmit(idx, spec, rng).y[::2]
        row.append(f"{name} {np.mean((y > 0) != (idx == 1)):.2e}")
    # the noise variance follows the mean received power over both sample phases
    power = np.sum(ChannelSpec(linear_response="identity").impulse_response() ** 2) / 2
    theory = 0.5 * erfc(math.sqrt(10 ** (snr_db / 10) / power / 2))
    print(f"{snr_db} dB: " + ", ".join(row) + f", identity theory {theory:.2e}")

## square-law detection folds the field

spec = ChannelSpec(alphabet="pam4", linear_response="fiber", nonlinearity="sld", snr_db=26.0,
                   fiber=dsp.FiberParams(length_m=15e3), symbol_rate=30e9)
idx = draw_symbols(20_000, spec.constellation, rng)
y = transmit(idx, spec, rng).y[::2]
print("\nPAM-4 over 15 km at 30 GBd, received intensity per transmitted level:")
for m, level in enumerate(spec.constellation.levels):
    s = y[idx == m]
    print(f"  level {level:.3f} (field) -> intensity mean {s.mean():.3f}, spread {s.std():.3f}")
