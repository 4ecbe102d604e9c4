"""Online Newton estimation of rescaled cosine-mode parameters from quantized samples.

Each measurement contributes a per-stage cost that is small exactly when the
modeled field value ``a = beta @ k_vec`` falls in the observed quantizer cell:
a softplus penalty pushes ``a`` below the cell's upper threshold and another
pushes it above the lower one (extreme cells carry a single penalty). Cost,
gradient, and Hessian are closed-form in ``a``, with the gradient a scalar
multiple of ``k_vec`` and the Hessian a non-negative multiple of its outer
product.

The update step damps the accumulated curvature with a ridge term at every
iteration and discounts past curvature with a forgetting factor ``delta``;
with ``delta = 1`` the recursion accumulates all past Hessians undiscounted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .dct import ModeSet, basis_vector
from .grid import GridSpec
from .sensing import Quantizer


class EstimatorError(RuntimeError):
    """Raised when the damped curvature matrix fails to factorize."""


@dataclass(frozen=True)
class EstimatorConfig:
    """Logistic sharpness ``eta``, ridge damping ``sigma_lm``, forgetting ``delta``."""

    eta: float = 5.0
    sigma_lm: float = 5.0e-5
    delta: float = 1.0

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.sigma_lm <= 0:
            raise ValueError("sigma_lm must be positive")
        if not (0.0 < self.delta <= 1.0):
            raise ValueError("delta must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class EstimatorState:
    """Current parameter estimate and accumulated (discounted) curvature.

    The measurement history is not retained; ``beta_hat`` and ``h_tilde`` are
    sufficient statistics for the recursion.
    """

    modes: ModeSet
    beta_hat: np.ndarray
    h_tilde: np.ndarray
    k: int = 0

    def __post_init__(self):
        m = len(self.modes)
        beta = np.asarray(self.beta_hat, dtype=float)
        h = np.asarray(self.h_tilde, dtype=float)
        if beta.shape != (m,):
            raise ValueError(f"beta_hat must have shape ({m},)")
        if h.shape != (m, m):
            raise ValueError(f"h_tilde must have shape ({m}, {m})")
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta_hat must be finite")
        if np.max(np.abs(h - h.T), initial=0.0) > 1e-12:
            raise ValueError("h_tilde must be symmetric")
        object.__setattr__(self, "beta_hat", beta)
        object.__setattr__(self, "h_tilde", h)


def initial_state(modes: ModeSet) -> EstimatorState:
    """Zero estimate and zero accumulated curvature."""
    m = len(modes)
    return EstimatorState(modes, np.zeros(m), np.zeros((m, m)), k=0)


def _softplus(t: float) -> float:
    # log(1 + exp(t)) without overflow
    return max(t, 0.0) + np.log1p(np.exp(-abs(t)))


def _sigmoid(t: float) -> float:
    if t >= 0:
        return 1.0 / (1.0 + np.exp(-t))
    e = np.exp(t)
    return e / (1.0 + e)


def _sigmoid_deriv(t: float) -> float:
    # exp(t) / (1 + exp(t))^2, symmetric in t
    s = _sigmoid(-abs(t))
    return s * (1.0 - s)


def _check_level(z: int, q: Quantizer) -> None:
    if not (0 <= z <= q.levels - 1):
        raise ValueError(f"measurement level {z} outside 0..{q.levels - 1}")


def per_stage_cost(beta: np.ndarray, k_vec: np.ndarray, z: int, q: Quantizer,
                   eta: float) -> float:
    """Penalty for one quantized observation at the current parameters.

    Level 0 penalizes the modeled value above the first threshold, the top
    level penalizes it below the last, and interior levels add both one-sided
    penalties for their cell.
    """
    _check_level(z, q)
    a = float(np.dot(beta, k_vec))
    taus = q.thresholds
    cost = 0.0
    if z <= q.levels - 2:
        cost += _softplus(eta * (a - taus[z]))
    if z >= 1:
        cost += _softplus(-eta * (a - taus[z - 1]))
    return cost


def gradient_scalar(a: float, z: int, q: Quantizer, eta: float) -> float:
    """Derivative of the per-stage cost with respect to the modeled value."""
    _check_level(z, q)
    taus = q.thresholds
    s = 0.0
    if z <= q.levels - 2:
        s += eta * _sigmoid(eta * (a - taus[z]))
    if z >= 1:
        s -= eta * _sigmoid(-eta * (a - taus[z - 1]))
    return s


def hessian_scalar(a: float, z: int, q: Quantizer, eta: float) -> float:
    """Second derivative of the per-stage cost; always non-negative."""
    _check_level(z, q)
    taus = q.thresholds
    h = 0.0
    if z <= q.levels - 2:
        h += eta**2 * _sigmoid_deriv(eta * (a - taus[z]))
    if z >= 1:
        h += eta**2 * _sigmoid_deriv(eta * (a - taus[z - 1]))
    return h


def per_stage_gradient(beta: np.ndarray, k_vec: np.ndarray, z: int, q: Quantizer,
                       eta: float) -> np.ndarray:
    """Gradient of the per-stage cost; a scalar multiple of ``k_vec``."""
    a = float(np.dot(beta, k_vec))
    return gradient_scalar(a, z, q, eta) * np.asarray(k_vec, dtype=float)


def per_stage_hessian(beta: np.ndarray, k_vec: np.ndarray, z: int, q: Quantizer,
                      eta: float) -> np.ndarray:
    """Hessian of the per-stage cost; a PSD multiple of the regressor outer product."""
    k_vec = np.asarray(k_vec, dtype=float)
    a = float(np.dot(beta, k_vec))
    return hessian_scalar(a, z, q, eta) * np.outer(k_vec, k_vec)


def regularized_hessian(state: EstimatorState, cfg: EstimatorConfig) -> np.ndarray:
    """Accumulated curvature plus the per-step ridge; always positive definite."""
    h = state.h_tilde + cfg.sigma_lm * np.eye(len(state.modes))
    return h


def newton_update(state: EstimatorState, cfg: EstimatorConfig, index: tuple[int, int],
                  z: int, q: Quantizer, spec: GridSpec) -> EstimatorState:
    """One damped Newton step from a quantized measurement at a grid index.

    The curvature recursion is ``h_tilde <- delta * h_tilde + hess`` with the
    ridge ``sigma_lm * I`` re-added before every solve, which keeps the system
    positive definite even when old curvature has been discounted away. The
    step solves the SPD system by Cholesky factorization; no inverse is formed.
    """
    kv = basis_vector(index, state.modes, spec)
    a = float(np.dot(state.beta_hat, kv))
    grad = gradient_scalar(a, z, q, cfg.eta) * kv
    h_tilde = cfg.delta * state.h_tilde + hessian_scalar(a, z, q, cfg.eta) * np.outer(kv, kv)
    h = h_tilde + cfg.sigma_lm * np.eye(len(state.modes))
    try:
        step = cho_solve(cho_factor(h, lower=True), grad)
    except LinAlgError as exc:
        raise EstimatorError(
            "damped curvature matrix is not positive definite; "
            "check sigma_lm > 0 and the state for corruption"
        ) from exc
    return EstimatorState(state.modes, state.beta_hat - step, h_tilde, state.k + 1)


def refine_modes(state: EstimatorState, new_modes: ModeSet) -> EstimatorState:
    """Re-key the state onto an enlarged or shrunken mode set.

    Pure expansion copies every surviving parameter and curvature entry to its
    new position and zero-initializes the rest; pure deletion keeps the
    surviving rows and columns. A call that both adds and removes modes is
    rejected; compose two calls instead. The iteration counter carries over.
    """
    if (new_modes.n_x, new_modes.n_y) != (state.modes.n_x, state.modes.n_y):
        raise ValueError("refined mode set must share grid bounds")
    old = set(state.modes.modes)
    new = set(new_modes.modes)
    if old <= new:
        pos = new_modes.index_of()
        mapping = np.array([pos[m] for m in state.modes.modes], dtype=np.intp)
        m_new = len(new_modes)
        beta = np.zeros(m_new)
        beta[mapping] = state.beta_hat
        h = np.zeros((m_new, m_new))
        h[np.ix_(mapping, mapping)] = state.h_tilde
    elif new <= old:
        pos = state.modes.index_of()
        keep = np.array([pos[m] for m in new_modes.modes], dtype=np.intp)
        beta = state.beta_hat[keep].copy()
        h = state.h_tilde[np.ix_(keep, keep)].copy()
    else:
        raise ValueError("mixed add-and-remove refinement; compose an expansion and a deletion")
    return EstimatorState(new_modes, beta, h, state.k)
