from .gaussian import (
    GaussianCondModel,
    curiosity_weights,
    factor_nll,
    fit,
    gaussian_nll,
    marginal_nll,
)

__all__ = ["GaussianCondModel", "curiosity_weights", "factor_nll", "fit", "gaussian_nll", "marginal_nll"]
