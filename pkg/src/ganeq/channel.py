"""The generalized transmission channel: modulation, linear filtering, receiver nonlinearity, AWGN."""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import dsp

PROAKIS_B = (0.407, 0.815, 0.407)


@dataclass(frozen=True)
class Alphabet:
    """Real amplitude levels, strictly increasing, unit mean power under uniform symbols."""

    name: str
    levels: tuple

    @property
    def M(self):
        return len(self.levels)

    @property
    def array(self):
        return np.asarray(self.levels, dtype=np.float64)

    @classmethod
    def from_name(cls, name):
        name = name.lower()
        if name == "bpsk":
            return cls("bpsk", (-1.0, 1.0))
        if name.startswith("pam"):
            m = int(name[3:])
            if m < 2:
                raise ValueError(f"bad alphabet {name!r}")
            # intensity modulation: non-negative, equidistant
            k = np.arange(m, dtype=np.float64)
            return cls(name, tuple(k / np.sqrt(np.mean(k * k))))
        raise ValueError(f"unknown alphabet {name!r}; expected bpsk or pamM")


@dataclass(frozen=True)
class ChannelSpec:
    """Everything needed to reproduce one transmission link.

    ``linear_response`` is ``"identity"``, ``"proakis_b"`` or ``"fiber"``;
    ``nonlinearity`` is ``"identity"`` or ``"sld"`` (square-law detector).
    ``symbol_rate`` (Bd) only matters for the fiber response.
    """

    alphabet: str = "bpsk"
    n_os: int = 2
    rolloff: float = 0.25
    span: int = 32
    linear_response: str = "proakis_b"
    fiber: dsp.FiberParams = field(default_factory=dsp.FiberParams)
    symbol_rate: float = 25e9
    nonlinearity: str = "identity"
    snr_db: float = 20.0
    n_fft: int = 4096
    max_taps: int = None

    def __post_init__(self):
        if self.n_os < 1:
            raise ValueError("n_os must be >= 1")
        if np.isnan(self.snr_db) or self.snr_db == -np.inf:
            raise ValueError("snr_db must be finite or +inf")
        if self.linear_response not in ("identity", "proakis_b", "fiber"):
            raise ValueError(f"unknown linear response {self.linear_response!r}")
        if self.nonlinearity not in ("identity", "sld"):
            raise ValueError(f"unknown nonlinearity {self.nonlinearity!r}")
        if self.linear_response == "fiber" and self.nonlinearity != "sld":
            raise ValueError("the fiber response yields a complex field; use nonlinearity='sld'")
        Alphabet.from_name(self.alphabet)

    @property
    def constellation(self):
        return Alphabet.from_name(self.alphabet)

    def impulse_response(self):
        return _impulse_response(self)


@lru_cache(maxsize=64)
def _impulse_response(spec):
    h_ps = dsp.raised_cosine_taps(spec.rolloff, spec.span, spec.n_os)
    if spec.linear_response == "identity":
        h = h_ps
    elif spec.linear_response == "proakis_b":
        h = dsp.convolve(h_ps, dsp.upsample_zero_interleave(PROAKIS_B, spec.n_os))
    else:
        h = dsp.composite_impulse_response(
            h_ps, spec.fiber, spec.symbol_rate, spec.n_os, spec.n_fft, spec.max_taps
        )
    h = np.array(h)
    h.setflags(write=False)
    return h


@dataclass
class SymbolFrame:
    indices: np.ndarray
    x: np.ndarray
    y: np.ndarray
    noise_var: float
    delay: int  # group delay of the composite filter in samples, removed by centred cropping


def draw_symbols(n, alphabet, rng):
    if n < 1:
        raise ValueError("need at least one symbol")
    return rng.integers(0, alphabet.M, size=n)


def modulate(indices, alphabet):
    return alphabet.array[np.asarray(indices)]


def noise_variance_for_snr(signal, snr_db):
    """AWGN variance giving ``snr_db`` relative to the mean power of ``signal``."""
    signal = np.asarray(signal)
    if signal.size == 0:
        raise ValueError("empty signal")
    power = np.mean(np.abs(signal) ** 2)
    if power == 0:
        raise ValueError("cannot set an SNR on an all-zero signal")
    return float(power / 10 ** (snr_db / 10))


def sld(x):
    """Square-law detection: element-wise squared magnitude."""
    x = np.asarray(x)
    return x.real**2 + x.imag**2 if np.iscomplexobj(x) else x * x


def transmit(indices, spec, rng, noiseless=False):
    """Send symbol ``indices`` through the channel described by ``spec``.

    Random guard symbols are simulated on both sides of the frame so the
    cropped waveform carries no start-up transients; ``y`` has
    ``n_os * len(indices)`` samples, sample ``n_os * k`` aligned with symbol k.
    """
    indices = np.asarray(indices)
    n = len(indices)
    if n < 1:
        raise ValueError("need at least one symbol")
    alphabet = spec.constellation
    h = spec.impulse_response()
    centre = len(h) // 2
    guard = -(-centre // spec.n_os) + 1
    all_idx = np.concatenate([
        rng.integers(0, alphabet.M, size=guard), indices, rng.integers(0, alphabet.M, size=guard)
    ])
    x_all = modulate(all_idx, alphabet)
    up = dsp.upsample_zero_interleave(x_all, spec.n_os, trailing=True)
    start = guard * spec.n_os + centre
    xt = dsp.convolve(up, h)[start:start + n * spec.n_os]
    yt = sld(xt) if spec.nonlinearity == "sld" else xt.real
    if noiseless or spec.snr_db == np.inf:
        var = 0.0
        y = yt
    else:
        var = noise_variance_for_snr(yt, spec.snr_db)
        y = yt + rng.normal(0.0, np.sqrt(var), size=yt.shape)
    return SymbolFrame(indices, modulate(indices, alphabet), y, var, centre)
