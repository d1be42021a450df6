"""
Relative error from quantities the iteration already has.

    ||A - M||^2 = ||A||^2 - 2 <A, M> + ||M||^2

with <A, M> = <M(N), H_hat(N)> and ||M||^2 = lambda^T (S(N) * G(N)) lambda,
so the model is never materialized.
"""

import numpy as np

from parnncp.models.trace import ErrorAccumulators
from parnncp.modules.driver.errors import ZeroTensorError

# Smallest eps the identity resolves; cancellation in the radicand leaves
# about sqrt(machine epsilon) of noise when the fit is exact
CHEAP_EPS_FLOOR = 1e-7


def inner_product(M: np.ndarray, H_hat: np.ndarray) -> float:
    """<M, H_hat> over the (local) rows given."""
    return float(np.vdot(M, H_hat))


def model_norm_sq(lam: np.ndarray, S: np.ndarray, G: np.ndarray) -> float:
    return float(lam @ (S * G) @ lam)


def relative_error(acc: ErrorAccumulators) -> float:
    """
    eps = sqrt((aSq - 2 innerProd + modelSq) / aSq), radicand clamped at 0.

    Values below CHEAP_EPS_FLOOR are rounding noise; use
    KruskalModel.fit_error to resolve smaller errors.

    Raises:
        ZeroTensorError: If aSq is zero
    """
    if acc.a_sq <= 0.0:
        raise ZeroTensorError("relative error is undefined for an all-zero tensor")
    return acc.eps
