"""Read and write scene description files.

A scenario file is YAML with five optional sections beside ``name``:
``radar`` (element counts and spacings), ``grid`` (min/max/step degrees),
``snr_db``, ``emitters`` (magnitude, optional phase_deg, doa_deg, dod_deg),
and ``solver`` (parameter overrides).  Unknown keys are rejected so typos
cannot silently fall back to defaults.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import yaml

from .bench import Scenario
from .model import AngleGrid, Emitter, RadarConfig, Scene
from .solver import SolverParams

__all__ = [
    "ScenarioError",
    "load_scenario",
    "parse_scenario_dict",
    "scenario_to_dict",
    "save_scenario",
    "scenario_fingerprint",
]


class ScenarioError(ValueError):
    """Raised for malformed scenario files or values."""


_TOP_KEYS = {"name", "radar", "grid", "snr_db", "emitters", "solver"}
_RADAR_KEYS = {"n_tx", "n_rx", "tx_spacing", "rx_spacing"}
_GRID_KEYS = {"min_deg", "max_deg", "step_deg"}
_EMITTER_KEYS = {"magnitude", "phase_deg", "doa_deg", "dod_deg"}
_SOLVER_KEYS = {"lambda_diag", "lambda_offdiag", "eps0", "eps_x", "max_iters",
                "diag_loading", "method", "init"}


def _require_mapping(value, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ScenarioError(f"{where} must be a mapping, got {type(value).__name__}")
    return value


def _reject_unknown(mapping: dict, allowed: set, where: str):
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ScenarioError(f"unknown key(s) in {where}: {', '.join(map(str, unknown))}")


def _number(mapping: dict, key: str, default, where: str, cast=float):
    value = mapping.get(key, default)
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{where}.{key} must be a number, got {value!r}") from None


def parse_scenario_dict(data, fallback_name: str = "scenario") -> tuple[Scenario, SolverParams]:
    """Build a Scenario and SolverParams from a parsed scenario mapping."""
    data = _require_mapping(data, "scenario")
    _reject_unknown(data, _TOP_KEYS, "scenario")

    radar_map = _require_mapping(data.get("radar"), "radar")
    _reject_unknown(radar_map, _RADAR_KEYS, "radar")
    try:
        radar = RadarConfig(
            n_tx=_number(radar_map, "n_tx", 8, "radar", int),
            n_rx=_number(radar_map, "n_rx", 8, "radar", int),
            tx_spacing=_number(radar_map, "tx_spacing", 0.5, "radar"),
            rx_spacing=_number(radar_map, "rx_spacing", 0.5, "radar"),
        )
    except ValueError as exc:
        raise ScenarioError(f"radar: {exc}") from None

    grid_map = _require_mapping(data.get("grid"), "grid")
    _reject_unknown(grid_map, _GRID_KEYS, "grid")
    try:
        grid = AngleGrid.from_range(
            min_deg=_number(grid_map, "min_deg", -90.0, "grid"),
            max_deg=_number(grid_map, "max_deg", 90.0, "grid"),
            step_deg=_number(grid_map, "step_deg", 5.0, "grid"),
        )
    except ValueError as exc:
        raise ScenarioError(f"grid: {exc}") from None

    snr_db = _number(data, "snr_db", 10.0, "scenario")

    emitters = []
    raw_emitters = data.get("emitters", [])
    if raw_emitters is None:
        raw_emitters = []
    if not isinstance(raw_emitters, list):
        raise ScenarioError("emitters must be a list")
    for k, raw in enumerate(raw_emitters):
        where = f"emitters[{k}]"
        emap = _require_mapping(raw, where)
        _reject_unknown(emap, _EMITTER_KEYS, where)
        for key in ("magnitude", "doa_deg", "dod_deg"):
            if key not in emap:
                raise ScenarioError(f"{where} is missing {key}")
        try:
            emitters.append(Emitter(
                magnitude=_number(emap, "magnitude", None, where),
                doa_deg=_number(emap, "doa_deg", None, where),
                dod_deg=_number(emap, "dod_deg", None, where),
                phase_deg=_number(emap, "phase_deg", 0.0, where),
            ))
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from None

    solver_map = _require_mapping(data.get("solver"), "solver")
    _reject_unknown(solver_map, _SOLVER_KEYS, "solver")
    try:
        params = SolverParams(
            lambda_diag=_number(solver_map, "lambda_diag", 1.0, "solver"),
            lambda_offdiag=_number(solver_map, "lambda_offdiag", 10.0, "solver"),
            eps0=_number(solver_map, "eps0", 1e-6, "solver"),
            eps_x=_number(solver_map, "eps_x", 1e-2, "solver"),
            max_iters=_number(solver_map, "max_iters", 100, "solver", int),
            diag_loading=_number(solver_map, "diag_loading", 1e-8, "solver"),
            method=str(solver_map.get("method", "tigre")),
            init=solver_map.get("init"),
        )
    except ValueError as exc:
        raise ScenarioError(f"solver: {exc}") from None

    name = str(data.get("name", fallback_name))
    try:
        scenario = Scenario(name=name, scene=Scene(tuple(emitters)),
                            snr_db=snr_db, grid=grid, radar=radar)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    return scenario, params


def load_scenario(path) -> tuple[Scenario, SolverParams]:
    """Parse a scenario file into a Scenario and its SolverParams."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"invalid scenario file {path}: {exc}") from None
    return parse_scenario_dict(data, fallback_name=path.stem)


def _grid_spec(grid: AngleGrid) -> dict:
    angles = grid.angles_deg
    if len(angles) == 1:
        spec = {"min_deg": angles[0], "max_deg": angles[0], "step_deg": 1.0}
    else:
        step = (angles[-1] - angles[0]) / (len(angles) - 1)
        spec = {"min_deg": angles[0], "max_deg": angles[-1], "step_deg": step}
    rebuilt = AngleGrid.from_range(**spec)
    if rebuilt != grid:
        raise ScenarioError("grid is not uniform and cannot be written to a scenario file")
    return spec


def scenario_to_dict(scenario: Scenario, params: SolverParams | None = None) -> dict:
    """Serializable mapping for a Scenario (uniform grids only)."""
    data = {
        "name": scenario.name,
        "radar": {
            "n_tx": scenario.radar.n_tx,
            "n_rx": scenario.radar.n_rx,
            "tx_spacing": scenario.radar.tx_spacing,
            "rx_spacing": scenario.radar.rx_spacing,
        },
        "grid": _grid_spec(scenario.grid),
        "snr_db": scenario.snr_db,
        "emitters": [
            {
                "magnitude": e.magnitude,
                "phase_deg": e.phase_deg,
                "doa_deg": e.doa_deg,
                "dod_deg": e.dod_deg,
            }
            for e in scenario.scene.emitters
        ],
    }
    if params is not None:
        data["solver"] = {
            "lambda_diag": params.lambda_diag,
            "lambda_offdiag": params.lambda_offdiag,
            "eps0": params.eps0,
            "eps_x": params.eps_x,
            "max_iters": params.max_iters,
            "diag_loading": params.diag_loading,
            "method": params.method,
        }
        if params.init is not None:
            data["solver"]["init"] = params.init
    return data


def save_scenario(path, scenario: Scenario, params: SolverParams | None = None):
    """Write a scenario (and optional solver overrides) to a YAML file."""
    data = scenario_to_dict(scenario, params)
    Path(path).write_text(yaml.safe_dump(data, sort_keys=False))


def scenario_fingerprint(scenario: Scenario) -> str:
    """Stable hash of the measurement-defining parts of a scenario."""
    data = scenario_to_dict(scenario)
    payload = json.dumps(data, sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()
