"""Minimal dense-tensor engine: autodiff, Adam, Xavier init, gradient checks."""
from ._backend import BACKEND
from .gradcheck import GradCheckReport, OracleInvalidError, finite_diff_check
from .init import xavier_bound, xavier_init
from .optim import AdamState, PoisonedStepError, adam_step
from .params import ParameterSet, param_seed
from .serialize import (TensorFormatError, load_checkpoint, load_tensor, read_tensor,
                        save_checkpoint, save_tensor, write_tensor)
from .tensor import (ContractError, DegenerateRowError, DimensionError, NumericalError, Tensor,
                     add, as_tensor, backward, concat, gelu, layer_norm, logsumexp, matmul, mean,
                     mean_cols, mul, no_grad, reshape, scale, softmax_rows, softplus, sub, sum, sum_rows, take,
                     transpose)

__all__ = [
    "BACKEND", "Tensor", "no_grad", "as_tensor", "backward", "add", "sub", "mul", "scale", "matmul",
    "transpose", "softmax_rows", "layer_norm", "gelu", "softplus", "sum", "mean", "sum_rows",
    "mean_cols", "reshape", "take", "concat", "logsumexp", "DimensionError", "NumericalError",
    "DegenerateRowError", "ContractError", "ParameterSet", "param_seed", "AdamState", "adam_step",
    "PoisonedStepError", "xavier_init", "xavier_bound", "finite_diff_check", "GradCheckReport",
    "OracleInvalidError", "save_tensor", "load_tensor", "read_tensor", "write_tensor",
    "save_checkpoint", "load_checkpoint", "TensorFormatError",
]
