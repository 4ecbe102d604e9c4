"""Scenario orchestration: synthetic fields, seeded runs, model comparison, persistence.

A scenario fixes the grid, the true field (a seeded sum of Gaussian bumps or
a CSV file), the retained-mode rule, the quantizer, noise, estimator and
planner parameters, and a switch schedule that can replace the true field
and/or change the retained-mode count mid-run. ``run_scenario`` executes R
independent seeded runs of the measure / update / advance loop and records
per-iteration metrics against whichever true field is active.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field as dataclass_field
from pathlib import Path

import numpy as np

from ._kernels import NUMBA_ENABLED
from ._version import __version__
from .dct import (
    ModeSet,
    basis_table,
    forward_dct,
    modeled_field,
    select_modes_largest,
    select_modes_rect,
    truncated_field,
)
from .estimator import (
    EstimatorConfig,
    EstimatorState,
    initial_state,
    newton_update,
    refine_modes,
    regularized_hessian,
)
from .grid import FieldGrid, GridSpec
from .metrics import SsimParams, mse, ssim
from .planner import PlannerConfig, advance, candidate_lattice, initial_vehicle
from .rbf import fit_rbf, rbf_eval_grid, rbf_grid_layout
from .sensing import NoiseModel, Quantizer, measure


@dataclass(frozen=True)
class FieldRecipe:
    """Seeded sum of Gaussian bumps, clamped non-negative."""

    seed: int = 0
    bumps: int = 6
    amplitude: tuple[float, float] = (1.0, 2.5)
    width: tuple[float, float] = (12.0, 28.0)

    def __post_init__(self):
        if self.bumps < 0:
            raise ValueError("bump count must be non-negative")
        if self.amplitude[0] > self.amplitude[1] or self.width[0] > self.width[1]:
            raise ValueError("amplitude and width ranges must be (lo, hi) with lo <= hi")
        if self.width[0] <= 0:
            raise ValueError("widths must be positive")


@dataclass(frozen=True)
class SwitchEvent:
    """Mid-run change: new true field and/or new retained-mode count at iteration ``at``."""

    at: int
    field: FieldRecipe | str | None = None
    mode_count: object = None


@dataclass(frozen=True)
class ScenarioConfig:
    grid: GridSpec
    field: FieldRecipe | str = FieldRecipe()
    mode_rule: str = "largest"
    mode_count: object = 60
    quantizer: Quantizer = Quantizer((1.0, 2.0, 3.0))
    noise: NoiseModel = NoiseModel()
    estimator: EstimatorConfig = EstimatorConfig()
    rho0: float = 10.0
    candidate_grid: tuple[int, int] = (6, 6)
    epsilon: float = 0.1
    start_index: tuple[int, int] | None = None
    iterations: int = 2000
    runs: int = 10
    seed: int = 7
    switches: tuple[SwitchEvent, ...] = ()
    ssim_params: SsimParams = SsimParams()

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.mode_rule not in ("largest", "rect"):
            raise ValueError(f"unknown mode rule {self.mode_rule!r}")
        ats = [ev.at for ev in self.switches]
        if any(b <= a for a, b in zip(ats, ats[1:])):
            raise ValueError("switch iterations must be strictly increasing")
        if any(not (0 <= at < self.iterations) for at in ats):
            raise ValueError("switch iterations must lie in [0, iterations)")
        start = self.resolved_start_index()
        if not self.grid.index_in_grid(start):
            raise ValueError(f"start index {start} outside grid")
        # fail fast on bad mode counts, including scheduled ones
        self.modes_for(self.mode_count)
        for ev in self.switches:
            if ev.mode_count is not None:
                self.modes_for(ev.mode_count)

    def resolved_start_index(self) -> tuple[int, int]:
        if self.start_index is None:
            return (self.grid.n_x // 2, self.grid.n_y // 2)
        return self.start_index

    def modes_for(self, count) -> ModeSet:
        if self.mode_rule == "largest":
            return select_modes_largest(int(count), self.grid)
        kx, ky = count
        return select_modes_rect(int(kx), int(ky), self.grid)


@dataclass
class RunRecord:
    """Per-iteration trace of one run plus the final estimator snapshot.

    Arrays have ``iterations + 1`` entries; row 0 is the zero-estimate
    baseline before any measurement (``z`` is NaN there).
    """

    run_index: int
    k: np.ndarray
    x: np.ndarray
    y: np.ndarray
    ix: np.ndarray
    iy: np.ndarray
    z: np.ndarray
    mse: np.ndarray
    ssim: np.ndarray
    final_state: EstimatorState
    config_echo: dict = dataclass_field(default_factory=dict)
    seeds: dict = dataclass_field(default_factory=dict)
    elapsed: float = 0.0
    # (iteration, state before, state after) for each mid-run mode change
    refinements: list = dataclass_field(default_factory=list)


def generate_field(recipe: FieldRecipe, spec: GridSpec) -> FieldGrid:
    """Deterministic synthetic field: seeded Gaussian bumps, clamped at zero.

    Bump centers are uniform over the region, amplitudes and widths uniform
    over the recipe ranges; all draws come from one generator seeded by the
    recipe, so equal recipes give bitwise-equal fields.
    """
    rng = np.random.default_rng(recipe.seed)
    xs = spec.x_centers()[:, None]
    ys = spec.y_centers()[None, :]
    values = np.zeros(spec.shape)
    n = recipe.bumps
    cx = rng.uniform(spec.x_min, spec.x_max, n)
    cy = rng.uniform(spec.y_min, spec.y_max, n)
    amp = rng.uniform(recipe.amplitude[0], recipe.amplitude[1], n)
    wid = rng.uniform(recipe.width[0], recipe.width[1], n)
    for i in range(n):
        values += amp[i] * np.exp(-((xs - cx[i]) ** 2 + (ys - cy[i]) ** 2) / wid[i] ** 2)
    return FieldGrid(spec, np.maximum(values, 0.0))


def resolve_field(source: FieldRecipe | str, spec: GridSpec) -> FieldGrid:
    if isinstance(source, FieldRecipe):
        return generate_field(source, spec)
    return load_field_csv(Path(source), spec)


def _stream_rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(tuple(int(k) for k in key)))


def scenario_echo(cfg: ScenarioConfig) -> dict:
    """JSON-ready dump of every scenario parameter, for run records."""
    return asdict(cfg)


def run_single(cfg: ScenarioConfig, run_index: int) -> RunRecord:
    """One seeded run of the measure / update / advance loop."""
    t0 = time.perf_counter()
    spec = cfg.grid
    field = resolve_field(cfg.field, spec)
    modes = cfg.modes_for(cfg.mode_count)
    table = basis_table(modes, spec)
    state = initial_state(modes)
    start = cfg.resolved_start_index()
    vehicle = initial_vehicle(start, spec)
    planner_cfg = PlannerConfig(cfg.rho0, candidate_lattice(*cfg.candidate_grid, spec),
                                cfg.epsilon)
    # independent substreams so changing exploration never perturbs noise draws
    noise_rng = _stream_rng(cfg.seed, cfg.noise.seed, run_index, 0)
    explore_rng = _stream_rng(cfg.seed, cfg.noise.seed, run_index, 1)
    switch_at = {ev.at: ev for ev in cfg.switches}

    n_rows = cfg.iterations + 1
    rec = RunRecord(
        run_index=run_index,
        k=np.arange(n_rows),
        x=np.zeros(n_rows),
        y=np.zeros(n_rows),
        ix=np.zeros(n_rows, dtype=int),
        iy=np.zeros(n_rows, dtype=int),
        z=np.full(n_rows, np.nan),
        mse=np.zeros(n_rows),
        ssim=np.zeros(n_rows),
        final_state=state,
        config_echo=scenario_echo(cfg),
        seeds={"master": cfg.seed, "noise": cfg.noise.seed, "run": run_index},
    )

    def record(row: int, pos, index, z_val, est: FieldGrid):
        rec.x[row], rec.y[row] = pos
        rec.ix[row], rec.iy[row] = index
        if z_val is not None:
            rec.z[row] = z_val
        rec.mse[row] = mse(field, est)
        rec.ssim[row] = ssim(field, est, cfg.ssim_params)

    record(0, vehicle.position, start, None, modeled_field(state.beta_hat, modes, spec, table))

    current_index = start
    for step in range(cfg.iterations):
        ev = switch_at.get(step)
        if ev is not None:
            if ev.field is not None:
                field = resolve_field(ev.field, spec)
            if ev.mode_count is not None:
                modes = cfg.modes_for(ev.mode_count)
                before = state
                state = refine_modes(state, modes)
                rec.refinements.append((step, before, state))
                table = basis_table(modes, spec)
        pos_measured = vehicle.position
        z = measure(field, current_index, cfg.noise, cfg.quantizer, noise_rng)
        state = newton_update(state, cfg.estimator, current_index, z, cfg.quantizer, spec)
        h_k = regularized_hessian(state, cfg.estimator)
        vehicle, next_index = advance(vehicle, state.beta_hat, planner_cfg, h_k,
                                      cfg.quantizer, cfg.estimator.eta, modes, spec,
                                      explore_rng)
        est = modeled_field(state.beta_hat, modes, spec, table)
        record(step + 1, pos_measured, current_index, z, est)
        current_index = next_index

    rec.final_state = state
    rec.elapsed = time.perf_counter() - t0
    return rec


def run_scenario(cfg: ScenarioConfig, jobs: int = 1) -> list[RunRecord]:
    """All runs of a scenario; ``jobs > 1`` spreads runs across processes."""
    if jobs <= 1 or cfg.runs == 1:
        return [run_single(cfg, r) for r in range(cfg.runs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_single, [cfg] * cfg.runs, range(cfg.runs)))


def compare_models(field: FieldGrid, mode_counts: list[int],
                   rbf_layouts: list[tuple[int, int]],
                   ssim_params: SsimParams = SsimParams()) -> list[dict]:
    """Best-case approximation quality of both field models on one field.

    For each retained-mode count the truncation keeps the transform
    coefficients unchanged (the optimal choice); for each RBF layout the
    weights are the least-squares optimum. Both are scored against the same
    full grid.
    """
    rows = []
    coeffs = forward_dct(field)
    for count in mode_counts:
        modes = select_modes_largest(count, field.spec)
        approx = truncated_field(coeffs, modes)
        rows.append({
            "model": "dct",
            "count": count,
            "mse": mse(field, approx),
            "ssim": ssim(field, approx, ssim_params),
        })
    for j_x, j_y in rbf_layouts:
        fitted = fit_rbf(rbf_grid_layout(j_x, j_y, field.spec), field)
        approx = rbf_eval_grid(fitted, field.spec)
        rows.append({
            "model": "rbf",
            "count": j_x * j_y,
            "layout": f"{j_x}x{j_y}",
            "mse": mse(field, approx),
            "ssim": ssim(field, approx, ssim_params),
        })
    return rows


# ---------------------------------------------------------------------------
# persistence

def save_field_csv(field: FieldGrid, path: Path) -> None:
    """Dense grid values as CSV: one row per ix, one column per iy."""
    np.savetxt(path, field.values, delimiter=",")


def load_field_csv(path: Path, spec: GridSpec) -> FieldGrid:
    values = np.loadtxt(path, delimiter=",", ndmin=2)
    return FieldGrid(spec, values)


def write_run_csv(rec: RunRecord, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "x", "y", "Ix", "Iy", "z", "mse", "ssim"])
        for i in range(rec.k.size):
            z = "" if np.isnan(rec.z[i]) else int(rec.z[i])
            writer.writerow([int(rec.k[i]), repr(float(rec.x[i])), repr(float(rec.y[i])),
                             int(rec.ix[i]), int(rec.iy[i]), z,
                             repr(float(rec.mse[i])), repr(float(rec.ssim[i]))])


def write_aggregate_csv(records: list[RunRecord], path: Path) -> None:
    """Per-iteration means of MSE and SSIM across runs."""
    mses = np.mean([r.mse for r in records], axis=0)
    ssims = np.mean([r.ssim for r in records], axis=0)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "mse_mean", "ssim_mean"])
        for i in range(mses.size):
            writer.writerow([i, repr(float(mses[i])), repr(float(ssims[i]))])


def state_to_dict(state: EstimatorState) -> dict:
    return {
        "k": state.k,
        "modes": [list(m) for m in state.modes.modes],
        "n_x": state.modes.n_x,
        "n_y": state.modes.n_y,
        "beta_hat": state.beta_hat.tolist(),
        "h_tilde": state.h_tilde.tolist(),
    }


def state_from_dict(data: dict) -> EstimatorState:
    modes = ModeSet(tuple((int(u), int(v)) for u, v in data["modes"]),
                    int(data["n_x"]), int(data["n_y"]))
    return EstimatorState(modes, np.array(data["beta_hat"], dtype=float),
                          np.array(data["h_tilde"], dtype=float), int(data["k"]))


def write_metadata(cfg_echo: dict, records: list[RunRecord], path: Path) -> None:
    meta = {
        "version": __version__,
        "numba_enabled": NUMBA_ENABLED,
        "config": cfg_echo,
        "runs": [
            {"run": r.run_index, "seeds": r.seeds, "elapsed_s": r.elapsed}
            for r in records
        ],
    }
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2)


def write_outputs(cfg: ScenarioConfig, cfg_echo: dict, records: list[RunRecord],
                  outdir: Path) -> list[Path]:
    """Standard output bundle: per-run CSVs, aggregate, metadata, field snapshots."""
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for rec in records:
        p = outdir / f"run_{rec.run_index:02d}.csv"
        write_run_csv(rec, p)
        written.append(p)
        sp = outdir / f"state_{rec.run_index:02d}.json"
        with open(sp, "w") as fh:
            json.dump(state_to_dict(rec.final_state), fh)
        written.append(sp)
        st = rec.final_state
        ep = outdir / f"estimated_field_{rec.run_index:02d}.csv"
        save_field_csv(modeled_field(st.beta_hat, st.modes, cfg.grid), ep)
        written.append(ep)
    agg = outdir / "aggregate.csv"
    write_aggregate_csv(records, agg)
    written.append(agg)
    tf = outdir / "true_field.csv"
    save_field_csv(resolve_field(cfg.field, cfg.grid), tf)
    written.append(tf)
    meta = outdir / "metadata.json"
    write_metadata(cfg_echo, records, meta)
    written.append(meta)
    return written
