"""Gaussian radial-basis-function field model and its optimal least-squares fit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import FieldGrid, GridSpec


class RbfFitError(RuntimeError):
    """Raised when the RBF design matrix is rank deficient or ill conditioned."""


@dataclass(frozen=True, eq=False)
class RbfModel:
    """Gaussian bump model: ``sum_j weights[j] * exp(-|centers[j] - x|^2 / widths[j]^2)``."""

    centers: np.ndarray
    widths: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        widths = np.atleast_1d(np.asarray(self.widths, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        j = centers.shape[0]
        if j < 1 or centers.shape[1] != 2:
            raise ValueError("centers must be a (J, 2) array with J >= 1")
        if widths.shape != (j,) or weights.shape != (j,):
            raise ValueError("widths and weights must have one entry per center")
        if np.any(widths <= 0):
            raise ValueError("widths must be strictly positive")
        if not (np.all(np.isfinite(centers)) and np.all(np.isfinite(widths))
                and np.all(np.isfinite(weights))):
            raise ValueError("model parameters must be finite")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "weights", weights)

    @property
    def n_basis(self) -> int:
        return self.centers.shape[0]


def rbf_grid_layout(j_x: int, j_y: int, spec: GridSpec) -> RbfModel:
    """Centers on a ``j_x`` x ``j_y`` midpoint lattice over the search region.

    Every width equals the larger lattice cell size; weights start at zero.
    """
    if j_x < 1 or j_y < 1:
        raise ValueError("layout counts must be >= 1")
    dx = (spec.x_max - spec.x_min) / j_x
    dy = (spec.y_max - spec.y_min) / j_y
    cx = spec.x_min + (0.5 + np.arange(j_x)) * dx
    cy = spec.y_min + (0.5 + np.arange(j_y)) * dy
    centers = np.array([(x, y) for x in cx for y in cy])
    j = j_x * j_y
    return RbfModel(centers, np.full(j, max(dx, dy)), np.zeros(j))


def _design_matrix(model: RbfModel, points: np.ndarray) -> np.ndarray:
    d2 = np.sum((points[:, None, :] - model.centers[None, :, :]) ** 2, axis=2)
    return np.exp(-d2 / model.widths[None, :] ** 2)


def rbf_eval(model: RbfModel, point: tuple[float, float]) -> float:
    """Model value at one continuous coordinate."""
    row = _design_matrix(model, np.asarray(point, dtype=float)[None, :])
    return float((row @ model.weights)[0])


def rbf_eval_grid(model: RbfModel, spec: GridSpec) -> FieldGrid:
    """Model evaluated at every grid midpoint."""
    pts = _grid_points(spec)
    values = (_design_matrix(model, pts) @ model.weights).reshape(spec.shape)
    return FieldGrid(spec, values)


def _grid_points(spec: GridSpec) -> np.ndarray:
    xs = spec.x_centers()
    ys = spec.y_centers()
    return np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)


def fit_rbf(model: RbfModel, field: FieldGrid) -> RbfModel:
    """Weights minimizing the mean squared error against the field on its grid.

    The least-squares problem is solved through an orthogonal (SVD-based)
    factorization of the design matrix rather than by forming the normal
    equations, which keeps dense layouts numerically workable. At the
    solution the residual is orthogonal to the span of the basis columns.
    """
    pts = _grid_points(field.spec)
    design = _design_matrix(model, pts)
    phi = field.values.reshape(-1)
    weights, _, rank, svals = np.linalg.lstsq(design, phi, rcond=None)
    if rank < model.n_basis:
        cond = float(svals[0] / svals[-1]) if svals[-1] > 0 else float("inf")
        raise RbfFitError(
            f"design matrix rank {rank} < {model.n_basis} basis functions "
            f"(condition estimate {cond:.3e})"
        )
    return RbfModel(model.centers, model.widths, weights)
