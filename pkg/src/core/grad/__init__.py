# minimal reverse-mode differentiation core
from .tensor import Tensor, backward
from .params import ParamSet
from .layers import Mode, linear, softmax, log_softmax, lstm_step, dropout, LstmWeights
from .optim import AdamOptimizer, AdamState, clip_by_global_norm
from .gradcheck import grad_check

__all__ = [
    'Tensor', 'backward', 'ParamSet', 'Mode', 'linear', 'softmax', 'log_softmax',
    'lstm_step', 'dropout', 'LstmWeights', 'AdamOptimizer', 'AdamState',
    'clip_by_global_norm', 'grad_check',
]
