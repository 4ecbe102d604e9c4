"""Scenario configuration files: TOML parsing, defaults, overrides, validation.

A config file carries one table per concern; every key below has a default,
so a file only states what differs. ``key=value`` overrides use the same
dotted vocabulary (e.g. ``estimator.eta=7.5``) and are applied after parsing.
"""

from __future__ import annotations

import copy
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .grid import GridSpec
from .estimator import EstimatorConfig
from .harness import FieldRecipe, ScenarioConfig, SwitchEvent
from .metrics import SsimParams
from .sensing import NoiseModel, Quantizer


class ConfigReadError(RuntimeError):
    """Config file missing or not parseable."""


class OverrideError(ValueError):
    """A key=value override is malformed or targets an unknown key."""


class ConfigError(ValueError):
    """Config values fail validation."""


DEFAULTS: dict = {
    "grid": {"x_min": 0.0, "x_max": 100.0, "y_min": 0.0, "y_max": 100.0,
             "n_x": 100, "n_y": 100},
    "field": {"seed": 0, "bumps": 6, "amplitude": [1.0, 2.5], "width": [12.0, 28.0]},
    "modes": {"rule": "largest", "count": 60},
    "quantizer": {"thresholds": [1.0, 2.0, 3.0]},
    "noise": {"kind": "gaussian", "variance": 0.1, "seed": 0},
    "estimator": {"eta": 5.0, "sigma_lm": 5.0e-05, "delta": 1.0},
    "planner": {"rho0": 10.0, "epsilon": 0.1, "candidate_grid": [6, 6]},
    "run": {"iterations": 2000, "runs": 10, "seed": 7},
    "ssim": {"window": 11, "window_sigma": 1.5, "k1": 0.01, "k2": 0.03,
             "dynamic_range": "auto"},
    "compare": {"mode_counts": [10, 60, 200], "rbf_layouts": [[3, 3], [6, 6], [10, 10]]},
}


def read_config(path: Path | str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigReadError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigReadError(f"cannot parse config {path}: {exc}") from exc


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve(raw: dict) -> dict:
    """Raw file contents merged over the defaults; the echoable form."""
    return _merge(DEFAULTS, raw)


def _parse_override_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text  # bare string


def apply_overrides(raw: dict, assignments: list[str]) -> dict:
    """Apply dotted ``section.key=value`` assignments on top of file contents."""
    out = copy.deepcopy(raw)
    for item in assignments:
        if "=" not in item:
            raise OverrideError(f"override {item!r} is not of the form key=value")
        dotted, text = item.split("=", 1)
        parts = [p for p in dotted.strip().split(".") if p]
        if not parts:
            raise OverrideError(f"override {item!r} has an empty key")
        node = out
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise OverrideError(f"override {item!r} descends through a non-table key")
        node[parts[-1]] = _parse_override_value(text.strip())
    return out


def _field_source(section: dict):
    if "path" in section:
        return str(section["path"])
    return FieldRecipe(
        seed=int(section["seed"]),
        bumps=int(section["bumps"]),
        amplitude=tuple(float(v) for v in section["amplitude"]),
        width=tuple(float(v) for v in section["width"]),
    )


def _mode_count(section: dict):
    count = section["count"]
    if section["rule"] == "rect":
        if not (isinstance(count, (list, tuple)) and len(count) == 2):
            raise ConfigError("modes.count must be [kx, ky] when modes.rule = 'rect'")
        return (int(count[0]), int(count[1]))
    return int(count)


def scenario_from_dict(resolved: dict) -> ScenarioConfig:
    """Build and validate a scenario from a resolved config dict."""
    try:
        g = resolved["grid"]
        grid = GridSpec(float(g["x_min"]), float(g["x_max"]), float(g["y_min"]),
                        float(g["y_max"]), int(g["n_x"]), int(g["n_y"]))
        modes = resolved["modes"]
        est = resolved["estimator"]
        noise = resolved["noise"]
        planner = resolved["planner"]
        run = resolved["run"]
        ssim_cfg = resolved["ssim"]
        switches = []
        for entry in resolved.get("switch", []):
            switches.append(SwitchEvent(
                at=int(entry["at"]),
                field=_field_source(_merge(resolved["field"], entry["field"]))
                if "field" in entry else None,
                mode_count=_mode_count(_merge(modes, {"count": entry["mode_count"]}))
                if "mode_count" in entry else None,
            ))
        start = run.get("start_index")
        return ScenarioConfig(
            grid=grid,
            field=_field_source(resolved["field"]),
            mode_rule=str(modes["rule"]),
            mode_count=_mode_count(modes),
            quantizer=Quantizer(tuple(float(t) for t in resolved["quantizer"]["thresholds"])),
            noise=NoiseModel(str(noise["kind"]), float(noise["variance"]), int(noise["seed"])),
            estimator=EstimatorConfig(float(est["eta"]), float(est["sigma_lm"]),
                                      float(est["delta"])),
            rho0=float(planner["rho0"]),
            candidate_grid=tuple(int(v) for v in planner["candidate_grid"]),
            epsilon=float(planner["epsilon"]),
            start_index=tuple(int(v) for v in start) if start is not None else None,
            iterations=int(run["iterations"]),
            runs=int(run["runs"]),
            seed=int(run["seed"]),
            switches=tuple(switches),
            ssim_params=SsimParams(int(ssim_cfg["window"]), float(ssim_cfg["window_sigma"]),
                                   float(ssim_cfg["k1"]), float(ssim_cfg["k2"]),
                                   ssim_cfg["dynamic_range"]
                                   if ssim_cfg["dynamic_range"] == "auto"
                                   else float(ssim_cfg["dynamic_range"])),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def compare_from_dict(resolved: dict):
    """Grid, field source, mode counts, and RBF layouts for model comparison."""
    scenario = scenario_from_dict(resolved)
    section = resolved["compare"]
    try:
        mode_counts = [int(c) for c in section["mode_counts"]]
        layouts = [(int(a), int(b)) for a, b in section["rbf_layouts"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid compare section: {exc}") from exc
    return scenario, mode_counts, layouts
