from .tensor import (
    Tensor,
    avg_pool2,
    concat,
    conv2d,
    embedding,
    layer_norm,
    softmax,
    upsample2,
)
from .modules import Conv2d, LayerNorm, Linear, Module, Parameter
from .attention import AttentionController, AttentionReplaceError, attention
from .gradcheck import grad_check
from .encoding import sinusoidal_encode

__all__ = [
    "Tensor", "concat", "conv2d", "avg_pool2", "upsample2", "softmax",
    "embedding", "layer_norm", "Module", "Parameter", "Linear", "Conv2d",
    "LayerNorm", "AttentionController", "AttentionReplaceError", "attention",
    "grad_check", "sinusoidal_encode",
]
