"""Differentiable layers and losses used by the equalizer and discriminator networks."""
import numpy as np

from .tensor import _accumulate, _result, as_tensor, take

BN_EPS = 1e-5
BN_MOMENTUM = 0.1
BCE_CLAMP = 1e-7

_conv_index_cache = {}


def _conv_index(length, k, stride, padding):
    key = (length, k, stride, padding)
    idx = _conv_index_cache.get(key)
    if idx is None:
        l_out = (length + 2 * padding - k) // stride + 1
        idx = np.arange(l_out)[:, None] * stride + np.arange(k)[None, :]
        if len(_conv_index_cache) > 256:
            _conv_index_cache.clear()
        _conv_index_cache[key] = idx
    return idx


def conv1d(x, kernel, bias=None, stride=1, padding=None):
    """1-D cross-correlation of a ``C_in x L`` input with a ``C_out x C_in x K`` kernel.

    ``padding=None`` selects "same"-style zero padding of ``K // 2`` samples on
    each side, so the output length is ``ceil(L / stride)`` for odd ``K``.
    """
    x, kernel = as_tensor(x), as_tensor(kernel)
    if x.data.ndim == 1:
        x = _as_row(x)
    c_in, length = x.shape
    c_out, kc_in, k = kernel.shape
    if kc_in != c_in:
        raise ValueError(f"kernel expects {kc_in} input channels, input has {c_in}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if padding is None:
        padding = k // 2
    if padding < 0 or k > length + 2 * padding:
        raise ValueError(f"kernel size {k} exceeds padded length {length + 2 * padding}")

    idx = _conv_index(length, k, stride, padding)
    l_out = idx.shape[0]
    xpad = np.pad(x.data, ((0, 0), (padding, padding))) if padding else x.data
    # cols[l, c, k] = xpad[c, l*stride + k]
    cols = xpad[:, idx].transpose(1, 0, 2).reshape(l_out, c_in * k)
    w2 = kernel.data.reshape(c_out, c_in * k)
    out = w2 @ cols.T
    if bias is not None:
        bias = as_tensor(bias)
        out = out + bias.data[:, None]

    def bw(g):
        if kernel.requires_grad:
            _accumulate(kernel, (g @ cols).reshape(kernel.shape))
        if bias is not None and bias.requires_grad:
            _accumulate(bias, g.sum(axis=1))
        if x.requires_grad:
            gcols = (g.T @ w2).reshape(l_out, c_in, k)
            gpad = np.zeros((c_in, xpad.shape[1]))
            flat_idx = idx.ravel()
            for c in range(c_in):
                gpad[c] = np.bincount(flat_idx, weights=gcols[:, c, :].ravel(), minlength=xpad.shape[1])
            _accumulate(x, gpad[:, padding:padding + length] if padding else gpad)

    parents = (x, kernel) if bias is None else (x, kernel, bias)
    return _result(out, parents, bw)


def _as_row(x):
    def bw(g):
        _accumulate(x, g.reshape(x.shape))

    return _result(x.data.reshape(1, -1), (x,), bw)


class RunningStats:
    """Per-channel running mean/variance for batch normalization."""

    def __init__(self, channels):
        self.mean = np.zeros(channels)
        self.var = np.ones(channels)

    def copy(self):
        other = RunningStats(len(self.mean))
        other.mean[:] = self.mean
        other.var[:] = self.var
        return other


def batchnorm1d(x, gamma, beta, running=None, training=True, eps=BN_EPS, momentum=BN_MOMENTUM):
    """Normalize each channel of a ``C x L`` input over its length.

    Training mode uses the biased batch variance and, when ``running`` is
    given, updates its statistics (unbiased variance, like most frameworks).
    Evaluation mode normalizes with ``running`` instead.
    """
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    c, length = x.shape
    if training:
        if length < 2:
            raise ValueError("batchnorm1d in training mode needs at least 2 samples per channel")
        mu = x.data.mean(axis=1)
        xc = x.data - mu[:, None]
        var = (xc * xc).mean(axis=1)
        if running is not None:
            running.mean = (1 - momentum) * running.mean + momentum * mu
            running.var = (1 - momentum) * running.var + momentum * var * length / (length - 1)
    else:
        if running is None:
            raise ValueError("evaluation mode needs running statistics")
        mu, var = running.mean, running.var
        xc = x.data - mu[:, None]
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv_std[:, None]
    out = gamma.data[:, None] * xhat + beta.data[:, None]

    def bw(g):
        if gamma.requires_grad:
            _accumulate(gamma, (g * xhat).sum(axis=1))
        if beta.requires_grad:
            _accumulate(beta, g.sum(axis=1))
        if x.requires_grad:
            gx = g * gamma.data[:, None]
            if training:
                gx = inv_std[:, None] * (
                    gx - gx.mean(axis=1, keepdims=True) - xhat * (gx * xhat).mean(axis=1, keepdims=True)
                )
            else:
                gx = gx * inv_std[:, None]
            _accumulate(x, gx)

    return _result(out, (x, gamma, beta), bw)


def elu(x):
    x = as_tensor(x)
    neg = x.data < 0
    em1 = np.expm1(np.minimum(x.data, 0.0))
    out = np.where(neg, em1, x.data)

    def bw(g):
        _accumulate(x, g * np.where(neg, em1 + 1.0, 1.0))

    return _result(out, (x,), bw)


def sigmoid(x):
    x = as_tensor(x)
    # split by sign so exp never overflows
    e = np.exp(-np.abs(x.data))
    out = np.where(x.data >= 0, 1.0 / (1.0 + e), e / (1.0 + e))

    def bw(g):
        _accumulate(x, g * out * (1.0 - out))

    return _result(out, (x,), bw)


def linear(x, weight, bias=None):
    """Affine map ``weight @ x + bias``; ``x`` may be a vector or a batch of rows."""
    x, weight = as_tensor(x), as_tensor(weight)
    f_out, f_in = weight.shape
    if x.shape[-1] != f_in:
        raise ValueError(f"linear expects {f_in} input features, got {x.shape[-1]}")
    out = x.data @ weight.data.T
    if bias is not None:
        bias = as_tensor(bias)
        if bias.shape != (f_out,):
            raise ValueError(f"bias shape {bias.shape} does not match {f_out} outputs")
        out = out + bias.data

    def bw(g):
        if weight.requires_grad:
            gw = np.multiply.outer(g, x.data) if x.data.ndim == 1 else g.T @ x.data
            _accumulate(weight, gw)
        if bias is not None and bias.requires_grad:
            _accumulate(bias, g if g.ndim == 1 else g.sum(axis=0))
        if x.requires_grad:
            _accumulate(x, g @ weight.data)

    parents = (x, weight) if bias is None else (x, weight, bias)
    return _result(out, parents, bw)


def bce_loss(p, label):
    """Mean binary cross-entropy of probabilities ``p`` against ``label`` (0/1)."""
    p = as_tensor(p)
    y = np.broadcast_to(np.asarray(label, dtype=np.float64), p.shape)
    pc = np.clip(p.data, BCE_CLAMP, 1.0 - BCE_CLAMP)
    n = p.data.size
    val = -(y * np.log(pc) + (1.0 - y) * np.log1p(-pc)).mean()
    inside = (p.data > BCE_CLAMP) & (p.data < 1.0 - BCE_CLAMP)

    def bw(g):
        gp = (-y / pc + (1.0 - y) / (1.0 - pc)) / n
        _accumulate(p, g * gp * inside)

    return _result(np.asarray(val), (p,), bw)


def mse_loss(pred, target):
    pred, target = as_tensor(pred), as_tensor(target)
    if pred.shape != target.shape:
        raise ValueError(f"mse_loss shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred.data - target.data
    n = diff.size

    def bw(g):
        gd = 2.0 * diff / n * g
        _accumulate(pred, gd)
        _accumulate(target, -gd)

    return _result(np.asarray((diff * diff).mean()), (pred, target), bw)


def windows(x, width, stride):
    """Stack sliding windows of a 1-D tensor into rows (gradient scatters back)."""
    x = as_tensor(x)
    n = x.data.size
    if n < width:
        raise ValueError(f"sequence of length {n} shorter than window {width}")
    starts = np.arange(0, n - width + 1, stride)
    return take(x, starts[:, None] + np.arange(width)[None, :])
