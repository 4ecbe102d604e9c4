"""Measurement-location planning: predicted-curvature targets and vehicle motion.

The next location target is the candidate index whose predicted curvature
matrix (current damped curvature plus the Hessian increment the candidate's
own predicted measurement would contribute) has the largest minimum
eigenvalue, i.e. the candidate that most lifts the least-informed parameter
direction. A small exploration probability substitutes a uniformly random
grid index. Between targets the vehicle moves in straight-line steps of fixed
length and measures at the nearest grid index after each step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dct import ModeSet, basis_vector
from .estimator import hessian_scalar
from .grid import GridSpec
from .sensing import Quantizer, quantize


@dataclass(frozen=True)
class PlannerConfig:
    """Step length, candidate target indices, and exploration probability."""

    rho0: float
    candidates: tuple[tuple[int, int], ...]
    epsilon: float = 0.1

    def __post_init__(self):
        if self.rho0 <= 0:
            raise ValueError("rho0 must be positive")
        if len(self.candidates) == 0:
            raise ValueError("need at least one candidate index")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError("epsilon must lie in [0, 1]")


@dataclass(frozen=True)
class VehicleState:
    """Continuous vehicle position and the current location target."""

    position: tuple[float, float]
    target_index: tuple[int, int]
    target_anchor: tuple[float, float]


def initial_vehicle(start_index: tuple[int, int], spec: GridSpec) -> VehicleState:
    """Vehicle parked at a grid midpoint with itself as the initial target."""
    anchor = spec.coords(start_index)
    return VehicleState(anchor, start_index, anchor)


def candidate_lattice(j_x: int, j_y: int, spec: GridSpec) -> tuple[tuple[int, int], ...]:
    """Candidate indices nearest the midpoints of a ``j_x`` x ``j_y`` partition
    of the search region."""
    if j_x < 1 or j_y < 1:
        raise ValueError("lattice counts must be >= 1")
    dx = (spec.x_max - spec.x_min) / j_x
    dy = (spec.y_max - spec.y_min) / j_y
    out = []
    for i in range(j_x):
        for j in range(j_y):
            point = (spec.x_min + (0.5 + i) * dx, spec.y_min + (0.5 + j) * dy)
            out.append(spec.closest_index(point))
    return tuple(out)


def predicted_hessian(h_k: np.ndarray, beta_next: np.ndarray, candidate: tuple[int, int],
                      q: Quantizer, eta: float, modes: ModeSet,
                      spec: GridSpec) -> np.ndarray:
    """Curvature anticipated after measuring at a candidate index.

    The candidate's measurement is predicted by quantizing the modeled field
    value there; the corresponding per-stage Hessian (a PSD rank-one term) is
    added to ``h_k``, so no noise distribution is needed.
    """
    kv = basis_vector(candidate, modes, spec)
    a = float(np.dot(beta_next, kv))
    z_hat = quantize(a, q)
    return h_k + hessian_scalar(a, z_hat, q, eta) * np.outer(kv, kv)


def select_target(h_k: np.ndarray, beta_next: np.ndarray, cfg: PlannerConfig,
                  q: Quantizer, eta: float, modes: ModeSet, spec: GridSpec,
                  rng: np.random.Generator) -> tuple[int, int]:
    """Next location target: exploration or the max-min-eigenvalue candidate.

    With probability ``epsilon`` a uniformly random grid index is returned.
    Otherwise every candidate's predicted curvature is formed and the one
    maximizing the minimum eigenvalue wins, ties going to the earliest
    candidate in the configured order.
    """
    if rng.random() < cfg.epsilon:
        return (int(rng.integers(spec.n_x)), int(rng.integers(spec.n_y)))
    kvs = np.stack([basis_vector(c, modes, spec) for c in cfg.candidates])
    a = kvs @ np.asarray(beta_next, dtype=float)
    scalars = np.array([
        hessian_scalar(float(ai), quantize(float(ai), q), q, eta) for ai in a
    ])
    stack = h_k[None, :, :] + scalars[:, None, None] * (kvs[:, :, None] * kvs[:, None, :])
    lam_min = np.linalg.eigvalsh(stack)[:, 0]
    return cfg.candidates[int(np.argmax(lam_min))]


def _step_toward(position: tuple[float, float], anchor: tuple[float, float],
                 rho0: float) -> tuple[tuple[float, float], bool]:
    """Move up to ``rho0`` along the segment toward ``anchor``; never past it."""
    dx = anchor[0] - position[0]
    dy = anchor[1] - position[1]
    dist = float(np.hypot(dx, dy))
    if dist <= rho0:
        return anchor, True
    f = rho0 / dist
    return (position[0] + f * dx, position[1] + f * dy), False


def advance(vehicle: VehicleState, beta_next: np.ndarray, cfg: PlannerConfig,
            h_k: np.ndarray, q: Quantizer, eta: float, modes: ModeSet,
            spec: GridSpec, rng: np.random.Generator) -> tuple[VehicleState, tuple[int, int]]:
    """Advance the vehicle one step and return the next measurement index.

    At the target a fresh target is selected and the vehicle sets out toward
    it; within one step of the target it lands there exactly; otherwise it
    continues along the straight line. Steps are capped at the target anchor
    so the position never leaves the search region.
    """
    current_index = spec.closest_index(vehicle.position)
    if current_index == vehicle.target_index:
        target = select_target(h_k, beta_next, cfg, q, eta, modes, spec, rng)
        anchor = spec.coords(target)
        new_pos, landed = _step_toward(vehicle.position, anchor, cfg.rho0)
        next_index = target if landed else spec.closest_index(new_pos)
        return VehicleState(new_pos, target, anchor), next_index
    new_pos, landed = _step_toward(vehicle.position, vehicle.target_anchor, cfg.rho0)
    next_index = vehicle.target_index if landed else spec.closest_index(new_pos)
    return VehicleState(new_pos, vehicle.target_index, vehicle.target_anchor), next_index
