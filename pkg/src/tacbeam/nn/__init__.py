from tacbeam.nn.core import Module, Param
from tacbeam.nn.layers import LSTM, BiLSTM, LayerNorm, Linear, PReLU, Tanh
from tacbeam.nn.gradcheck import GradCheckReport, grad_check

__all__ = [
    "Module",
    "Param",
    "Linear",
    "PReLU",
    "LayerNorm",
    "Tanh",
    "LSTM",
    "BiLSTM",
    "grad_check",
    "GradCheckReport",
]
