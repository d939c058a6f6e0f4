"""Pulse shaping, convolution and the chromatic-dispersion response of a fiber link.

Signals are plain numpy arrays; the sample rate travels alongside as an
argument where it matters (``fs = sps * symbol_rate``).
"""
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
PS_PER_NM_KM = 1e-6  # 1 ps/(nm km) in s/m^2


@dataclass(frozen=True)
class FiberParams:
    """Standard single-mode fiber section.

    Parameters
    ----------
    length_m : float
        Fiber length in meters.
    dispersion_ps_nm_km : float
        Dispersion coefficient D in ps/(nm km).
    wavelength_m : float
        Carrier wavelength in meters.
    attenuation_db_km : float
        Power attenuation in dB/km.
    """

    length_m: float = 30e3
    dispersion_ps_nm_km: float = 17.0
    wavelength_m: float = 1550e-9
    attenuation_db_km: float = 0.2

    def __post_init__(self):
        if self.length_m < 0:
            raise ValueError("fiber length must be non-negative")
        if self.wavelength_m <= 0:
            raise ValueError("wavelength must be positive")

    @property
    def dispersion_s_m2(self):
        return self.dispersion_ps_nm_km * PS_PER_NM_KM

    @property
    def beta2(self):
        """Group-velocity dispersion in s^2/m."""
        return -self.wavelength_m**2 * self.dispersion_s_m2 / (2 * np.pi * SPEED_OF_LIGHT)

    @property
    def alpha_np_m(self):
        """Attenuation converted from dB/km to nepers per meter."""
        return self.attenuation_db_km * np.log(10) / (10 * 1000)


def upsample_zero_interleave(x, factor, trailing=False):
    """Insert ``factor - 1`` zeros between consecutive samples.

    By default no zeros follow the last sample (tap vectors); with
    ``trailing=True`` the output has exactly ``factor * len(x)`` samples, which
    is what a symbol stream needs.
    """
    if factor < 1:
        raise ValueError("upsampling factor must be >= 1")
    x = np.asarray(x)
    n = len(x)
    length = factor * n if trailing else factor * n - (factor - 1)
    out = np.zeros(max(length, 0), dtype=x.dtype)
    out[::factor] = x
    return out


def raised_cosine_taps(rolloff, span=32, sps=2):
    """Time-domain raised-cosine pulse sampled at ``sps`` samples per symbol.

    Returns ``span * sps + 1`` taps centred on the peak, which equals 1.
    """
    if span % 2:
        raise ValueError("span must be even")
    if sps < 1:
        raise ValueError("sps must be >= 1")
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError("rolloff must lie in [0, 1]")
    half = span * sps // 2
    t = np.arange(-half, half + 1) / sps
    h = rc_pulse(t, rolloff)
    return h / h[half]


def rc_pulse(t, rolloff):
    """Raised-cosine pulse at times ``t`` (in symbol periods), singular points filled by their limit."""
    t = np.asarray(t, dtype=np.float64)
    if rolloff == 0.0:
        return np.sinc(t)
    denom = 1.0 - (2.0 * rolloff * t) ** 2
    singular = np.isclose(np.abs(t), 1.0 / (2.0 * rolloff), rtol=0.0, atol=1e-12)
    safe = np.where(singular, 1.0, denom)
    h = np.sinc(t) * np.cos(np.pi * rolloff * t) / safe
    return np.where(singular, np.pi / 4 * np.sinc(1.0 / (2.0 * rolloff)), h)


def convolve(a, b, mode="full"):
    """Linear convolution; ``"same"`` keeps the centred ``len(a)`` window of the full result."""
    a, b = np.asarray(a), np.asarray(b)
    if a.size == 0 or b.size == 0:
        raise ValueError("convolve needs non-empty inputs")
    full = np.convolve(a, b)
    if mode == "full":
        return full
    if mode == "same":
        start = (len(b) - 1) // 2
        return full[start:start + len(a)]
    raise ValueError(f"unknown mode {mode!r}")


def cd_frequency_response(fiber, freqs):
    """Complex field gain of the fiber at baseband frequencies ``freqs`` (Hz)."""
    f = np.asarray(freqs, dtype=np.float64)
    L = fiber.length_m
    phase = 2.0 * np.pi**2 * fiber.beta2 * f * f * L
    return np.exp(-0.5 * fiber.alpha_np_m * L) * np.exp(1j * phase)


class TruncationError(ValueError):
    """The requested tap budget cannot hold the required share of the response energy."""

    def __init__(self, needed, budget, retained):
        super().__init__(
            f"impulse response needs {needed} taps to keep the energy criterion, "
            f"budget is {budget} (would retain {retained:.9f} of the energy)"
        )
        self.needed = needed
        self.budget = budget
        self.retained = retained


def composite_impulse_response(h_ps, fiber, symbol_rate, sps=2, n_fft=4096, max_taps=None, energy=1 - 1e-6):
    """Pulse shaping followed by chromatic dispersion, as one complex FIR filter.

    The pulse is spread over an ``n_fft`` grid with its peak at time zero,
    multiplied by the CD response in frequency and transformed back. The
    result is cut to the shortest window, symmetric about the pulse peak and
    at least as long as ``h_ps``, that keeps ``energy`` of the total.

    Raises
    ------
    TruncationError
        If ``max_taps`` is smaller than that window.
    """
    h_ps = np.asarray(h_ps, dtype=np.float64)
    n = len(h_ps)
    if n_fft < 4 * n or n_fft & (n_fft - 1):
        raise ValueError("n_fft must be a power of two and at least 4 * len(h_ps)")
    if n % 2 == 0:
        raise ValueError("pulse must have odd length so its peak sits on a sample")
    centre = n // 2
    fs = sps * symbol_rate

    buf = np.zeros(n_fft)
    buf[:n] = h_ps
    buf = np.roll(buf, -centre)
    freqs = np.fft.fftfreq(n_fft, d=1.0 / fs)
    h = np.fft.ifft(np.fft.fft(buf) * cd_frequency_response(fiber, freqs))
    h = np.fft.fftshift(h)
    mid = n_fft // 2

    e = np.abs(h) ** 2
    total = e.sum()
    # energy inside [mid - w, mid + w] for every half-width w
    cum = np.cumsum(e)
    w = np.arange(mid)
    inside = cum[mid + w] - np.concatenate(([0.0], cum[mid - w[1:] - 1]))
    half = int(np.argmax(inside >= energy * total)) if np.any(inside >= energy * total) else mid - 1
    half = max(half, centre)
    taps = 2 * half + 1
    if max_taps is not None and taps > max_taps:
        b = (max_taps - 1) // 2
        raise TruncationError(taps, max_taps, inside[b] / total)
    return h[mid - half:mid + half + 1]


def energy(x):
    return float(np.sum(np.abs(x) ** 2))
