"""Weight initializers."""
import numpy as np


def glorot_bound(fan_in, fan_out):
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def glorot_uniform_(tensor, fan_in, fan_out, rng):
    """Fill ``tensor`` in place with i.i.d. draws from U(-b, b), b = sqrt(6 / (fan_in + fan_out))."""
    b = glorot_bound(fan_in, fan_out)
    tensor.data[...] = rng.uniform(-b, b, size=tensor.shape)
    return tensor


def conv_fans(kernel_shape):
    c_out, c_in, k = kernel_shape
    return c_in * k, c_out * k


def dirac_(tensor):
    """Identity-preserving conv kernel: centre tap ``K // 2`` of channel pair (o, o mod C_in) is 1."""
    c_out, c_in, k = tensor.shape
    tensor.data[...] = 0.0
    for o in range(c_out):
        tensor.data[o, o % c_in, k // 2] = 1.0
    return tensor
