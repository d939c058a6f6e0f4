"""Central finite-difference checks of tape gradients."""
import numpy as np

from .tensor import backward


def numerical_grad(fn, tensor, h=1e-6):
    """d fn() / d tensor.data by central differences; ``fn`` returns a scalar Tensor."""
    g = np.zeros_like(tensor.data)
    flat, gflat = tensor.data.reshape(-1), g.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        up = float(fn().data)
        flat[i] = old - h
        down = float(fn().data)
        flat[i] = old
        gflat[i] = (up - down) / (2 * h)
    return g


def max_relative_error(fn, tensors, h=1e-6, floor=1e-8):
    """Largest elementwise ``|analytic - numeric| / max(|analytic|, |numeric|)``.

    Entries where both gradients are below ``floor`` in magnitude are skipped.
    """
    for t in tensors:
        t.zero_grad()
    backward(fn())
    worst = 0.0
    for t in tensors:
        num = numerical_grad(fn, t, h)
        ana = t.grad
        scale = np.maximum(np.abs(ana), np.abs(num))
        mask = scale > floor
        if np.any(mask):
            worst = max(worst, float(np.max(np.abs(ana - num)[mask] / scale[mask])))
    return worst
