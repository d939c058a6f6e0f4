"""Small reverse-mode autodiff core: tensors, layers, losses, Adam."""
from .functional import (
    RunningStats,
    batchnorm1d,
    bce_loss,
    conv1d,
    elu,
    linear,
    mse_loss,
    sigmoid,
    windows,
)
from .gradcheck import max_relative_error, numerical_grad
from .init import conv_fans, dirac_, glorot_bound, glorot_uniform_
from .optim import SGD, Adam, MultiStepLR
from .rng import make_rng
from .tensor import Tensor, add, as_tensor, backward, matmul, mean, mul, no_grad, reshape, square, take, tsum

__all__ = [
    "Tensor", "add", "as_tensor", "backward", "matmul", "mean", "mul", "no_grad", "reshape", "square", "take", "tsum",
    "RunningStats", "batchnorm1d", "bce_loss", "conv1d", "elu", "linear", "mse_loss", "sigmoid", "windows",
    "conv_fans", "dirac_", "glorot_bound", "glorot_uniform_",
    "max_relative_error", "numerical_grad",
    "SGD", "Adam", "MultiStepLR", "make_rng",
]
