"""Closed-form references that do not touch the training code."""
import math

import numpy as np
from scipy.special import erfc


def q_function(x):
    return 0.5 * erfc(x / math.sqrt(2.0))


def wiener_mmse(h, n_os, taps, snr_db, symbol_power=1.0):
    """MMSE of the best fractionally spaced FIR filter for zero-mean i.i.d. symbols.

    The filter sees ``taps`` samples centred on symbol instant ``n_os * n`` of
    ``y = sum_k x_k h[. - n_os k] + w``; the noise variance follows the mean
    received power over all sample phases. Returns ``(mmse, weights)``.
    """
    h = np.asarray(h, dtype=np.float64)
    c = len(h) // 2
    half = taps // 2

    def tap(t):
        return h[c + t] if 0 <= c + t < len(h) else 0.0

    # rows: window offset i, columns: symbol offset m (sample index n_os*m)
    reach = (c + half) // n_os + 1
    ms = np.arange(-reach, reach + 1)
    H = np.array([[tap(i - n_os * m) for m in ms] for i in range(-half, half + 1)])
    power = symbol_power * float(np.sum(h * h)) / n_os
    sigma2 = power / 10 ** (snr_db / 10)
    R = symbol_power * H @ H.T + sigma2 * np.eye(taps)
    p = symbol_power * H[:, reach]
    w = np.linalg.solve(R, p)
    return float(symbol_power - p @ w), w
