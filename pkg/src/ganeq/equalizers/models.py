"""Equalizer and discriminator topologies.

All equalizers map a received waveform at ``n_os`` samples per symbol to one
output per symbol. Parameters are leaf :class:`~ganeq.numerics.Tensor` objects
exposed through ``named_parameters()`` so optimizers, weight averaging and
checkpoints can treat every model alike.
"""
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from ..numerics import (
    RunningStats,
    Tensor,
    as_tensor,
    batchnorm1d,
    conv1d,
    conv_fans,
    dirac_,
    elu,
    glorot_uniform_,
    linear,
    reshape,
    sigmoid,
    windows,
)

KERNEL_SIZE = 21
CNN_CHANNELS = 3


class Model:
    kind = "model"

    def __init__(self):
        self._params = {}
        self.training = True

    def param(self, name, shape):
        t = Tensor(np.zeros(shape), requires_grad=True, name=name)
        self._params[name] = t
        return t

    def named_parameters(self):
        return list(self._params.items())

    def parameters(self):
        return list(self._params.values())

    @property
    def n_param(self):
        return sum(p.size for p in self._params.values())

    def zero_grad(self):
        for p in self._params.values():
            p.zero_grad()

    def train(self, mode=True):
        self.training = mode
        return self

    def eval(self):
        return self.train(False)

    def flat_parameters(self):
        return np.concatenate([p.data.ravel() for p in self._params.values()])

    def load_flat(self, flat):
        i = 0
        for p in self._params.values():
            p.data[...] = flat[i:i + p.size].reshape(p.shape)
            i += p.size

    def __call__(self, x):
        return self.forward(x)

    @property
    def margin(self):
        """Symbols at each frame edge whose output depends on zero padding."""
        return 0


class GeneratorCNN(Model):
    """Three conv1D layers; the first two expand to three channels with batchnorm + ELU.

    Layer 1 is Glorot-uniform initialized, layers 2 and 3 are Dirac, and the
    last layer downsamples by ``n_os``. 333 trainable scalars for K = 21.
    """

    kind = "gan_cnn"

    def __init__(self, n_os, rng, k=KERNEL_SIZE, channels=CNN_CHANNELS):
        super().__init__()
        if n_os < 1:
            raise ValueError("n_os must be >= 1")
        self.n_os = n_os
        self.w1 = self.param("conv1.weight", (channels, 1, k))
        self.b1 = self.param("conv1.bias", (channels,))
        self.g1 = self.param("bn1.weight", (channels,))
        self.be1 = self.param("bn1.bias", (channels,))
        self.w2 = self.param("conv2.weight", (channels, channels, k))
        self.b2 = self.param("conv2.bias", (channels,))
        self.g2 = self.param("bn2.weight", (channels,))
        self.be2 = self.param("bn2.bias", (channels,))
        self.w3 = self.param("conv3.weight", (1, channels, k))
        glorot_uniform_(self.w1, *conv_fans(self.w1.shape), rng)
        dirac_(self.w2)
        dirac_(self.w3)
        self.g1.data[:] = 1.0
        self.g2.data[:] = 1.0
        self.bn1 = RunningStats(channels)
        self.bn2 = RunningStats(channels)

    def forward(self, y):
        h = conv1d(as_tensor(y), self.w1, self.b1)
        h = elu(batchnorm1d(h, self.g1, self.be1, self.bn1, self.training))
        h = conv1d(h, self.w2, self.b2)
        h = elu(batchnorm1d(h, self.g2, self.be2, self.bn2, self.training))
        out = conv1d(h, self.w3, None, stride=self.n_os)
        return _flatten(out)

    @property
    def margin(self):
        k = self.w1.shape[-1]
        return -(-3 * (k // 2) // self.n_os)


class GeneratorLinear(Model):
    """Single 1 -> 1 channel strided FIR layer, Dirac initialized, no bias."""

    kind = "gan_lin"

    def __init__(self, n_os, k=KERNEL_SIZE):
        super().__init__()
        self.n_os = n_os
        self.w = self.param("conv.weight", (1, 1, k))
        dirac_(self.w)

    def forward(self, y):
        return _flatten(conv1d(as_tensor(y), self.w, None, stride=self.n_os))

    @property
    def taps(self):
        return self.w.data[0, 0]

    @property
    def margin(self):
        return -(-(self.w.shape[-1] // 2) // self.n_os)


def _flatten(t):
    return reshape(t, (t.size,))


class Discriminator(Model):
    """Two fully connected layers, ``L_D -> L_D/2`` with ELU, then ``-> 1`` with sigmoid.

    Sequences longer than ``L_D`` are judged window by window (stride
    ``L_D/2`` unless ``stride`` is given); the output holds one probability
    per window.
    """

    kind = "discriminator"

    def __init__(self, window=20, rng=None, hidden=None, stride=None):
        super().__init__()
        if window % 2:
            raise ValueError("discriminator window must be even")
        self.window = window
        self.stride = stride or window // 2
        hidden = hidden or window // 2
        self.w1 = self.param("fc1.weight", (hidden, window))
        self.b1 = self.param("fc1.bias", (hidden,))
        self.w2 = self.param("fc2.weight", (1, hidden))
        self.b2 = self.param("fc2.bias", (1,))
        if rng is not None:
            glorot_uniform_(self.w1, window, hidden, rng)
            glorot_uniform_(self.w2, hidden, 1, rng)

    def forward(self, seq):
        seq = as_tensor(seq)
        if seq.data.ndim == 1:
            seq = windows(seq, self.window, self.stride)
        h = elu(linear(seq, self.w1, self.b1))
        return sigmoid(linear(h, self.w2, self.b2))


def volterra_feature_count(memory):
    """Trainable scalars of a Volterra kernel with per-order memory ``memory`` plus one bias."""
    return 1 + sum(comb(f + order - 1, order) for order, f in enumerate(memory, start=1))


_volterra_index_cache = {}


def _volterra_terms(memory):
    memory = tuple(memory)
    terms = _volterra_index_cache.get(memory)
    if terms is None:
        reach = max(memory) // 2
        terms = []
        for order, f in enumerate(memory, start=1):
            offsets = np.arange(f) - f // 2 + reach
            terms.append(np.array(list(combinations_with_replacement(offsets, order)), dtype=np.intp))
        _volterra_index_cache[memory] = terms
    return terms


def volterra_features(y, memory, n_os=2):
    """Monomials of the centred windows around every ``n_os``-th sample of ``y``.

    Row k collects, for each order, the products ``y[i] y[j] ...`` over index
    combinations with repetition inside a window of that order's memory,
    centred on sample ``n_os * k``. Samples beyond the edges count as zero.
    """
    y = np.asarray(y, dtype=np.float64)
    reach = max(memory) // 2
    ypad = np.pad(y, (reach, reach))
    centres = np.arange(0, len(y), n_os)
    # win[k, i] = y[n_os*k - reach + i]
    win = ypad[centres[:, None] + np.arange(2 * reach + 1)[None, :]]
    feats = []
    for idx in _volterra_terms(memory):
        f = win[:, idx[:, 0]]
        for col in range(1, idx.shape[1]):
            f = f * win[:, idx[:, col]]
        feats.append(f)
    return np.concatenate(feats, axis=1)


def volterra_forward(y_window, kernels, bias, memory=(35, 17, 9)):
    """Output of a third-order Volterra kernel for one centred window.

    ``kernels`` lists the upper-triangular (combinations-with-repetition)
    coefficients per order, in the order produced by :func:`volterra_features`.
    """
    y_window = np.asarray(y_window, dtype=np.float64)
    need = 2 * (max(memory) // 2) + 1
    if len(y_window) < need:
        raise ValueError(f"Volterra window needs {need} samples, got {len(y_window)}")
    mid = len(y_window) // 2
    reach = max(memory) // 2
    win = y_window[mid - reach:mid + reach + 1]
    z = float(bias)
    for idx, w in zip(_volterra_terms(memory), kernels):
        z += float(np.prod(win[idx], axis=1) @ np.asarray(w))
    return z


class Volterra(Model):
    """Third-order Volterra equalizer (memory 35/17/9 -> 354 trainable scalars).

    Initialized as a pass-through: unit centre tap in the linear kernel, all
    other coefficients zero.
    """

    kind = "volterra"

    def __init__(self, n_os, memory=(35, 17, 9)):
        super().__init__()
        self.n_os = n_os
        self.memory = tuple(memory)
        n_feat = volterra_feature_count(self.memory) - 1
        self.w = self.param("kernel", (1, n_feat))
        self.b = self.param("bias", (1,))
        self.w.data[0, self.memory[0] // 2] = 1.0

    def forward(self, y):
        feats = volterra_features(as_tensor(y).data, self.memory, self.n_os)
        return _flatten(linear(Tensor(feats), self.w, self.b))

    @property
    def margin(self):
        return -(-(max(self.memory) // 2) // self.n_os)

    def kernels(self):
        out, i = [], 0
        for order, f in enumerate(self.memory, start=1):
            n = comb(f + order - 1, order)
            out.append(self.w.data[0, i:i + n])
            i += n
        return out


class LMSEqualizer(Model):
    """Fractionally spaced FIR filter adapted symbol by symbol with data-aided LMS."""

    kind = "lms"

    def __init__(self, n_os, taps=KERNEL_SIZE, mu=0.01):
        super().__init__()
        self.n_os = n_os
        self.mu = mu
        self.w = np.zeros(taps)
        self.w[taps // 2] = 1.0

    @property
    def n_param(self):
        return self.w.size

    def forward(self, y):
        y = as_tensor(y).data
        k = len(self.w)
        ypad = np.pad(y, (k // 2, k // 2))
        idx = np.arange(0, len(y), self.n_os)[:, None] + np.arange(k)[None, :]
        return Tensor(ypad[idx] @ self.w)

    @property
    def margin(self):
        return -(-(len(self.w) // 2) // self.n_os)

    def adapt(self, y, desired, start=0):
        """Run one LMS pass over a frame; returns the per-symbol errors.

        ``desired[n]`` is the target for symbol ``start + n`` of ``y``.
        """
        y = np.asarray(y, dtype=np.float64)
        k = len(self.w)
        ypad = np.pad(y, (k // 2, k // 2))
        errs = np.empty(len(desired))
        w = self.w
        for n, d in enumerate(desired):
            i = (start + n) * self.n_os
            w, errs[n] = lms_step(w, ypad[i:i + k], d, self.mu)
        self.w = w
        return errs


def lms_step(w, y_window, d, mu):
    """One LMS update ``w + mu * e * y`` with ``e = d - w.y``; returns ``(w_new, e)``."""
    y_window = np.asarray(y_window, dtype=np.float64)
    if len(y_window) != len(w):
        raise ValueError(f"window has {len(y_window)} samples, filter has {len(w)} taps")
    e = d - w @ y_window
    return w + mu * e * y_window, e


class NoEqualizer(Model):
    """Symbol-instant samples of the received waveform, untouched."""

    kind = "wo_eq"

    def __init__(self, n_os):
        super().__init__()
        self.n_os = n_os

    def forward(self, y):
        return Tensor(as_tensor(y).data[::self.n_os])


def build_g_cnn(n_os, rng, k=KERNEL_SIZE):
    return GeneratorCNN(n_os, rng, k)


def build_g_lin(n_os, k=KERNEL_SIZE):
    return GeneratorLinear(n_os, k)


def build_discriminator(window=20, rng=None, hidden=None, stride=None):
    return Discriminator(window, rng, hidden, stride)


EQUALIZER_KINDS = ("gan_cnn", "gan_lin", "sup_cnn", "sup_lin", "lms", "volterra", "wo_eq")


def build_equalizer(kind, n_os, rng=None, **options):
    """Fresh equalizer of the given kind.

    ``sup_cnn``/``sup_lin`` share the generator topologies; only the training
    differs. ``options`` are forwarded to the model constructor (e.g. ``k``,
    ``memory``, ``taps``, ``mu``).
    """
    if kind in ("gan_cnn", "sup_cnn"):
        if rng is None:
            raise ValueError(f"{kind} needs an rng for its Glorot layer")
        m = GeneratorCNN(n_os, rng, **options)
    elif kind in ("gan_lin", "sup_lin"):
        m = GeneratorLinear(n_os, **options)
    elif kind == "lms":
        m = LMSEqualizer(n_os, **options)
    elif kind == "volterra":
        m = Volterra(n_os, **options)
    elif kind == "wo_eq":
        m = NoEqualizer(n_os)
    else:
        raise ValueError(f"unknown equalizer kind {kind!r}; expected one of {', '.join(EQUALIZER_KINDS)}")
    m.kind = kind
    return m
