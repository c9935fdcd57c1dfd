import logging
from typing import Dict, Mapping, Sequence, Union

import numpy as np
import torch
from torch import nn

from .errors import ContractError, DimensionError

logger = logging.getLogger(__name__)

_ACTIVATIONS = {"relu": nn.ReLU, "tanh": nn.Tanh}

ArrayLike = Union[np.ndarray, torch.Tensor, Sequence[float]]


class Mlp(nn.Module):
    """Fully connected network with a fixed activation between layers and a
    linear output layer.

    `layer_sizes` lists every width including input and output, so
    [in, 256, 256, out] is a two-hidden-layer net. Parameters are named
    "body.<k>.weight" / "body.<k>.bias" in torch's usual way.
    """

    def __init__(
        self,
        layer_sizes: Sequence[int],
        activation: str = "relu",
        dtype: torch.dtype = torch.float32,
    ):
        super().__init__()
        if len(layer_sizes) < 2:
            raise DimensionError(f"Mlp needs at least input and output sizes, got {list(layer_sizes)}")
        if any(int(size) <= 0 for size in layer_sizes):
            raise DimensionError(f"layer sizes must be positive, got {list(layer_sizes)}")
        if activation not in _ACTIVATIONS:
            raise ValueError(f"Unknown activation {activation!r}; expected one of {sorted(_ACTIVATIONS)}")

        self.layer_sizes = [int(size) for size in layer_sizes]
        self.activation = activation

        layers = []
        n_linear = len(self.layer_sizes) - 1
        for k, (fan_in, fan_out) in enumerate(zip(self.layer_sizes[:-1], self.layer_sizes[1:])):
            layers.append(nn.Linear(fan_in, fan_out, dtype=dtype))
            if k < n_linear - 1:
                layers.append(_ACTIVATIONS[activation]())
        self.body = nn.Sequential(*layers)

    @property
    def in_features(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_features(self) -> int:
        return self.layer_sizes[-1]

    @property
    def dtype(self) -> torch.dtype:
        return next(self.parameters()).dtype

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.in_features:
            raise DimensionError(
                f"Mlp expects last dimension {self.in_features}, got input of shape {tuple(x.shape)}"
            )
        return self.body(x)


def hidden_layout(in_features: int, out_features: int, hidden: int, hidden_layers: int) -> list:
    return [in_features] + [hidden] * hidden_layers + [out_features]


def as_tensor(values: ArrayLike, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    if isinstance(values, torch.Tensor):
        return values.to(dtype)
    return torch.as_tensor(np.asarray(values), dtype=dtype)


def forward(net: Mlp, values: ArrayLike) -> torch.Tensor:
    """Run `net` on `values`, converting arrays to the net's dtype. The result
    stays attached to the autograd graph."""
    return net(as_tensor(values, dtype=net.dtype))


def backward(
    loss: torch.Tensor, params: Union[nn.Module, Mapping[str, torch.Tensor]]
) -> Dict[str, torch.Tensor]:
    """Gradients of a scalar `loss` keyed by parameter name.

    Parameters the loss does not depend on get an all-zero gradient instead
    of being omitted.
    """
    if loss.numel() != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {tuple(loss.shape)}")
    named = dict(params.named_parameters()) if isinstance(params, nn.Module) else dict(params)
    if not named:
        return {}
    if not loss.requires_grad:
        return {name: torch.zeros_like(p) for name, p in named.items()}

    grads = torch.autograd.grad(
        loss.reshape(()), list(named.values()), allow_unused=True, retain_graph=False
    )
    return {
        name: torch.zeros_like(p) if g is None else g
        for (name, p), g in zip(named.items(), grads)
    }
