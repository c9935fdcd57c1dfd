from typing import Dict, Mapping, Union

import torch
from torch import nn

from .errors import ContractError, TrainingDivergenceError
from .nets import backward

NamedParams = Union[nn.Module, Mapping[str, torch.Tensor]]


def _named(params: NamedParams) -> Dict[str, torch.Tensor]:
    return dict(params.named_parameters()) if isinstance(params, nn.Module) else dict(params)


class AdamState:
    """Adam over a fixed, named set of parameters.

    The moment estimates live inside a torch.optim.Adam; this wrapper keeps
    the parameter names so a non-finite gradient can be reported against
    the parameter that produced it.
    """

    def __init__(
        self,
        params: NamedParams,
        learning_rate: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps_num: float = 1e-8,
    ):
        self.params = _named(params)
        if not self.params:
            raise ContractError("AdamState needs at least one parameter")
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps_num = eps_num
        self.step_count = 0
        self._optimizer = torch.optim.Adam(
            list(self.params.values()), lr=learning_rate, betas=(beta1, beta2), eps=eps_num
        )

    def first_moment(self, name: str) -> torch.Tensor:
        state = self._optimizer.state.get(self.params[name], {})
        return state.get("exp_avg", torch.zeros_like(self.params[name]))

    def second_moment(self, name: str) -> torch.Tensor:
        state = self._optimizer.state.get(self.params[name], {})
        return state.get("exp_avg_sq", torch.zeros_like(self.params[name]))


def adam_step(
    state: AdamState, params: NamedParams, grads: Mapping[str, torch.Tensor]
) -> Dict[str, torch.Tensor]:
    """Apply one bias-corrected Adam update and return the updated params."""
    named = _named(params)
    if set(named) != set(state.params):
        raise ContractError("adam_step called with parameters the state was not built for")
    for name, grad in grads.items():
        if name not in named:
            raise ContractError(f"gradient for unknown parameter {name!r}")
        if grad.shape != named[name].shape:
            raise ContractError(
                f"gradient for {name!r} has shape {tuple(grad.shape)}, "
                f"parameter has {tuple(named[name].shape)}"
            )
        if not torch.isfinite(grad).all():
            raise TrainingDivergenceError(
                f"non-finite gradient for parameter {name!r} at Adam step {state.step_count + 1}",
                parameter=name,
                step=state.step_count + 1,
            )

    for name, param in named.items():
        grad = grads.get(name)
        param.grad = torch.zeros_like(param) if grad is None else grad.detach().clone()
    state._optimizer.step()
    state._optimizer.zero_grad(set_to_none=True)
    state.step_count += 1
    return named


def minimize(state: AdamState, loss: torch.Tensor) -> float:
    """backward + adam_step on `loss`; returns the loss value."""
    value = float(loss.detach())
    if value != value or value in (float("inf"), float("-inf")):
        raise TrainingDivergenceError(
            f"non-finite loss {value} at Adam step {state.step_count + 1}", step=state.step_count + 1
        )
    grads = backward(loss, state.params)
    adam_step(state, state.params, grads)
    return value
