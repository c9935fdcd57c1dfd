"""Central finite differences against named parameters.

torch.autograd.gradcheck wants the differentiated tensors as explicit
function inputs; the objectives in skills/, density/ and agents/ close over
module parameters instead, so the check perturbs those parameters in place.
"""

from typing import Callable, Dict, Mapping

import torch

from .nets import backward

LossFn = Callable[[], torch.Tensor]


def central_differences(
    loss_fn: LossFn, params: Mapping[str, torch.Tensor], h: float = 1e-5
) -> Dict[str, torch.Tensor]:
    numeric: Dict[str, torch.Tensor] = {}
    with torch.no_grad():
        for name, param in params.items():
            grad = torch.zeros_like(param)
            flat = param.view(-1)
            grad_flat = grad.view(-1)
            for idx in range(flat.numel()):
                original = flat[idx].item()
                flat[idx] = original + h
                upper = float(loss_fn())
                flat[idx] = original - h
                lower = float(loss_fn())
                flat[idx] = original
                grad_flat[idx] = (upper - lower) / (2.0 * h)
            numeric[name] = grad
    return numeric


def relative_error(analytic: torch.Tensor, numeric: torch.Tensor) -> float:
    scale = max(float(analytic.norm()), float(numeric.norm()), 1e-12)
    return float((analytic - numeric).norm()) / scale


def max_gradient_error(
    loss_fn: LossFn, params: Mapping[str, torch.Tensor], h: float = 1e-5
) -> float:
    """Largest per-parameter relative error between reverse-mode and
    finite-difference gradients of `loss_fn`."""
    analytic = backward(loss_fn(), params)
    numeric = central_differences(loss_fn, params, h=h)
    return max(relative_error(analytic[name], numeric[name]) for name in params)
