"""Multi-level quantizer and the simulated noisy measurement channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import FieldGrid


@dataclass(frozen=True)
class Quantizer:
    """Threshold quantizer mapping a real sample to a level in ``0 .. L-1``.

    ``thresholds`` holds ``tau_0 <= ... <= tau_{L-2}``; a sample lands in
    level ``l`` when ``tau_{l-1} <= x < tau_l``, with the extreme levels
    open-ended. Each comparison against a threshold is lower-inclusive.
    """

    thresholds: tuple[float, ...]

    def __post_init__(self):
        if len(self.thresholds) < 1:
            raise ValueError("need at least one threshold (two levels)")
        taus = tuple(float(t) for t in self.thresholds)
        if any(a > b for a, b in zip(taus, taus[1:])):
            raise ValueError("thresholds must be non-decreasing")
        object.__setattr__(self, "thresholds", taus)

    @property
    def levels(self) -> int:
        return len(self.thresholds) + 1

    def threshold_array(self) -> np.ndarray:
        return np.asarray(self.thresholds, dtype=float)


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean measurement noise; ``kind`` is ``"gaussian"`` or ``"none"``."""

    kind: str = "gaussian"
    variance: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("gaussian", "none"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.variance < 0:
            raise ValueError("variance must be non-negative")

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "none":
            return 0.0
        return float(rng.normal(0.0, np.sqrt(self.variance)))


def quantize(x: float, q: Quantizer) -> int:
    """Level of a real sample: the number of thresholds at or below it."""
    if not np.isfinite(x):
        raise ValueError("sample must be finite")
    return int(np.searchsorted(q.threshold_array(), x, side="right"))


def measure(field: FieldGrid, index: tuple[int, int], noise: NoiseModel,
            q: Quantizer, rng: np.random.Generator) -> int:
    """Quantized field sample at a position index with a fresh noise draw.

    Noise is drawn independently on every call, including revisits of the
    same index; the caller owns one generator per simulation stream.
    """
    if not field.spec.index_in_grid(index):
        raise IndexError(f"position index {index} outside grid")
    return quantize(field.values[index] + noise.sample(rng), q)
