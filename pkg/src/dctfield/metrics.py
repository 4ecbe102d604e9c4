"""Field-comparison metrics: grid mean squared error and structural similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import FieldGrid


@dataclass(frozen=True)
class SsimParams:
    """Windowed-similarity parameters.

    ``dynamic_range="auto"`` takes the value range of the first (reference)
    field, so the metric stays on one scale across the iterations of a run.
    """

    window: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float | str = "auto"

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be an odd integer >= 3")
        if self.window_sigma <= 0:
            raise ValueError("window_sigma must be positive")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")
        if isinstance(self.dynamic_range, str):
            if self.dynamic_range != "auto":
                raise ValueError("dynamic_range must be a positive number or 'auto'")
        elif self.dynamic_range <= 0:
            raise ValueError("dynamic_range must be a positive number or 'auto'")

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "window_sigma": self.window_sigma,
            "k1": self.k1,
            "k2": self.k2,
            "dynamic_range": self.dynamic_range,
        }


def mse(truth: FieldGrid, estimate: FieldGrid) -> float:
    """Mean of squared pointwise differences over the grid."""
    if truth.spec.shape != estimate.spec.shape:
        raise ValueError("fields live on different grids")
    diff = truth.values - estimate.values
    return float(np.mean(diff * diff))


def _gaussian_kernel_1d(window: int, sigma: float) -> np.ndarray:
    half = (window - 1) / 2.0
    x = np.arange(window) - half
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()


def ssim(truth: FieldGrid, estimate: FieldGrid, params: SsimParams = SsimParams()) -> float:
    """Mean local structural similarity between two fields viewed as images.

    Local means, variances, and covariance are taken over a sliding Gaussian
    window (valid region only, no padding) and combined into the standard
    luminance-contrast-structure score per window; the result is the average
    over windows. Identical inputs score exactly 1. Real-valued fields are
    compared directly, without quantization to integer gray levels.
    """
    if truth.spec.shape != estimate.spec.shape:
        raise ValueError("fields live on different grids")
    if min(truth.spec.shape) < params.window:
        raise ValueError(
            f"grid {truth.spec.shape} smaller than {params.window}x{params.window} window"
        )
    a = truth.values
    b = estimate.values
    if params.dynamic_range == "auto":
        rng = float(a.max() - a.min())
        if rng == 0.0:
            rng = 1.0
    else:
        rng = float(params.dynamic_range)
    c1 = (params.k1 * rng) ** 2
    c2 = (params.k2 * rng) ** 2

    k1d = _gaussian_kernel_1d(params.window, params.window_sigma)
    mu_a = _kernels.filter_valid(a, k1d)
    mu_b = _kernels.filter_valid(b, k1d)
    s_aa = _kernels.filter_valid(a * a, k1d) - mu_a * mu_a
    s_bb = _kernels.filter_valid(b * b, k1d) - mu_b * mu_b
    s_ab = _kernels.filter_valid(a * b, k1d) - mu_a * mu_b

    num = (2.0 * mu_a * mu_b + c1) * (2.0 * s_ab + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (s_aa + s_bb + c2)
    return float(np.mean(num / den))
