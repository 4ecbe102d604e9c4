"""Orthonormal Type-II cosine transform, mode selection, and truncated field models.

The field on an ``n_x`` x ``n_y`` grid is expanded in the orthonormal cosine
basis

    C(u, v) = sum_{ix, iy} a_x(u) a_y(v) phi[ix, iy]
              * cos((2 ix + 1) pi u / (2 n_x)) * cos((2 iy + 1) pi v / (2 n_y))

with a_x(0) = sqrt(1/n_x) and a_x(u != 0) = sqrt(2/n_x) (same along y).
Keeping a subset of modes gives a truncated reconstruction whose best
coefficients are the transform coefficients themselves; the residual mean
square is the energy of the dropped coefficients divided by the number of
grid points.

Estimation works on rescaled coefficients ``beta_j = ((u_j+1)^2 + (v_j+1)^2) C_j``,
which evens out coefficient magnitudes across mode orders. The matching
regressor vector ``basis_vector`` absorbs the reciprocal of that factor, so
``beta @ basis_vector(index) == truncated field value at index``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .grid import FieldGrid, GridSpec


@dataclass(frozen=True, eq=False)
class DctCoefficients:
    """Full transform coefficient table; ``values[u, v]``."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != self.spec.shape:
            raise ValueError(f"coefficient shape {arr.shape} != grid shape {self.spec.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class ModeSet:
    """Ordered set of retained mode indices ``(u_j, v_j)`` with grid bounds.

    The ordering is part of the value: estimator state vectors and refinement
    index maps are laid out along it.
    """

    modes: tuple[tuple[int, int], ...]
    n_x: int
    n_y: int

    def __post_init__(self):
        if len(set(self.modes)) != len(self.modes):
            raise ValueError("mode pairs must be distinct")
        for u, v in self.modes:
            if not (0 <= u < self.n_x and 0 <= v < self.n_y):
                raise ValueError(f"mode ({u}, {v}) outside {self.n_x}x{self.n_y} bounds")

    def __len__(self) -> int:
        return len(self.modes)

    def u_array(self) -> np.ndarray:
        return np.array([u for u, _ in self.modes], dtype=np.intp)

    def v_array(self) -> np.ndarray:
        return np.array([v for _, v in self.modes], dtype=np.intp)

    def scale_factors(self) -> np.ndarray:
        """Per-mode factor ``(u_j + 1)^2 + (v_j + 1)^2``."""
        u = self.u_array()
        v = self.v_array()
        return ((u + 1) ** 2 + (v + 1) ** 2).astype(float)

    def index_of(self) -> dict[tuple[int, int], int]:
        return {mode: j for j, mode in enumerate(self.modes)}


@lru_cache(maxsize=16)
def _cosine_basis(n: int) -> np.ndarray:
    """Orthonormal cosine table ``B[u, i] = a(u) cos((2 i + 1) pi u / (2 n))``."""
    u = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    table = np.cos((2 * i + 1) * np.pi * u / (2 * n))
    alpha = np.full(n, np.sqrt(2.0 / n))
    alpha[0] = np.sqrt(1.0 / n)
    table *= alpha[:, None]
    table.setflags(write=False)
    return table


def forward_dct(field: FieldGrid) -> DctCoefficients:
    """Transform a gridded field into its full coefficient table."""
    bx = _cosine_basis(field.spec.n_x)
    by = _cosine_basis(field.spec.n_y)
    values = _kernels.dct2_direct(np.ascontiguousarray(field.values), bx, by)
    return DctCoefficients(field.spec, values)


def inverse_dct(coeffs: DctCoefficients) -> FieldGrid:
    """Reconstruct the gridded field from a full coefficient table."""
    bx = _cosine_basis(coeffs.spec.n_x)
    by = _cosine_basis(coeffs.spec.n_y)
    values = _kernels.idct2_direct(np.ascontiguousarray(coeffs.values), bx, by)
    return FieldGrid(coeffs.spec, values)


def select_modes_rect(n_keep_x: int, n_keep_y: int, spec: GridSpec) -> ModeSet:
    """Retain the leading ``n_keep_x`` x ``n_keep_y`` block of modes, in
    lexicographic ``(u, v)`` order."""
    if not (1 <= n_keep_x <= spec.n_x and 1 <= n_keep_y <= spec.n_y):
        raise ValueError("kept-mode counts must be within grid bounds")
    modes = tuple((u, v) for u in range(n_keep_x) for v in range(n_keep_y))
    return ModeSet(modes, spec.n_x, spec.n_y)


def select_modes_largest(n_keep: int, spec: GridSpec) -> ModeSet:
    """Retain the ``n_keep`` modes with smallest ``(u+1)^2 + (v+1)^2``.

    Low scores flag the modes that typically carry the most energy. Ties
    break lexicographically, so the ordering is deterministic and the result
    for ``n`` is a prefix of the result for ``n + 1``.
    """
    if not (1 <= n_keep <= spec.n_x * spec.n_y):
        raise ValueError("n_keep must be in [1, n_x * n_y]")
    scored = sorted(
        ((u + 1) ** 2 + (v + 1) ** 2, u, v)
        for u in range(spec.n_x)
        for v in range(spec.n_y)
    )
    modes = tuple((u, v) for _, u, v in scored[:n_keep])
    return ModeSet(modes, spec.n_x, spec.n_y)


def truncated_field(coeffs: DctCoefficients, modes: ModeSet) -> FieldGrid:
    """Reconstrustruct using only the retained modes (others treated as zero)."""
    spec = coeffs.spec
    if (modes.n_x, modes.n_y) != spec.shape:
        raise ValueError("mode set bounds do not match coefficient grid")
    kept = np.zeros(spec.shape)
    u = modes.u_array()
    v = modes.v_array()
    kept[u, v] = coeffs.values[u, v]
    return inverse_dct(DctCoefficients(spec, kept))


def truncation_mse(coeffs: DctCoefficients, modes: ModeSet) -> float:
    """Mean squared error of the best truncated reconstruction.

    By basis orthonormality this is the summed squared energy of the dropped
    coefficients over the number of grid points, and it is attained exactly
    when the retained coefficients are kept unchanged.
    """
    spec = coeffs.spec
    if (modes.n_x, modes.n_y) != spec.shape:
        raise ValueError("mode set bounds do not match coefficient grid")
    total = float(np.sum(coeffs.values**2))
    u = modes.u_array()
    v = modes.v_array()
    kept = float(np.sum(coeffs.values[u, v] ** 2))
    return (total - kept) / spec.n_points


def coeffs_on_modes(coeffs: DctCoefficients, modes: ModeSet) -> np.ndarray:
    """Coefficients ``C_j`` restricted to the mode set, in mode order."""
    return coeffs.values[modes.u_array(), modes.v_array()].copy()


def scale_coeffs(c: np.ndarray, modes: ModeSet) -> np.ndarray:
    """Map per-mode coefficients to the rescaled parameters ``beta``."""
    c = np.asarray(c, dtype=float)
    if c.shape != (len(modes),):
        raise ValueError(f"expected {len(modes)} coefficients, got shape {c.shape}")
    return c * modes.scale_factors()


def unscale_coeffs(beta: np.ndarray, modes: ModeSet) -> np.ndarray:
    """Exact inverse of :func:`scale_coeffs`."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (len(modes),):
        raise ValueError(f"expected {len(modes)} parameters, got shape {beta.shape}")
    return beta / modes.scale_factors()


def basis_vector(index: tuple[int, int], modes: ModeSet, spec: GridSpec) -> np.ndarray:
    """Regressor vector at a position index for the rescaled parameters.

    Component ``j`` is the orthonormal basis product at the index divided by
    the mode's scale factor, so the truncated field value there is the plain
    inner product with ``beta``.
    """
    if not spec.index_in_grid(index):
        raise IndexError(f"position index {index} outside {spec.n_x}x{spec.n_y} grid")
    ix, iy = index
    bx = _cosine_basis(spec.n_x)
    by = _cosine_basis(spec.n_y)
    u = modes.u_array()
    v = modes.v_array()
    return bx[u, ix] * by[v, iy] / modes.scale_factors()


def basis_table(modes: ModeSet, spec: GridSpec) -> np.ndarray:
    """Stacked regressor vectors for every grid index.

    Row ``ix * n_y + iy`` equals ``basis_vector((ix, iy), ...)``; the product
    ``table @ beta`` reshaped to the grid is the modeled field.
    """
    bx = _cosine_basis(spec.n_x)
    by = _cosine_basis(spec.n_y)
    u = modes.u_array()
    v = modes.v_array()
    # (n_x, n_y, m) -> (n_x * n_y, m)
    prod = bx[u, :].T[:, None, :] * by[v, :].T[None, :, :]
    return (prod / modes.scale_factors()).reshape(spec.n_points, len(modes))


def modeled_field(beta: np.ndarray, modes: ModeSet, spec: GridSpec,
                  table: np.ndarray | None = None) -> FieldGrid:
    """Field reconstructed from rescaled parameters on the retained modes."""
    if table is None:
        table = basis_table(modes, spec)
    return FieldGrid(spec, (table @ np.asarray(beta, dtype=float)).reshape(spec.shape))
