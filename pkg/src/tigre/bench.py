"""Seeded Monte Carlo comparison of estimation methods on fixed scenes.

Each trial draws one noisy measurement that every method then consumes
(paired comparison), solves, and scores against the ground-truth spectrum.
Trials are seeded independently from the base seed, so they can run in any
order, and aggregation is a plain ordered reduction.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from . import solver
from .detect import EvalMetrics, frobenius_sq_error, score_detections, threshold_detect
from .model import (AngleGrid, Emitter, ForwardModel, Measurement, RadarConfig,
                    Scene, add_noise, forward, spectrum_from_scene)
from .solver import MPIAA, RANDOM, TIGRE, SolverParams

__all__ = [
    "BenchError",
    "Scenario",
    "MethodSpec",
    "TrialResult",
    "AggregateResult",
    "METHOD_NAMES",
    "DEFAULT_THRESHOLD",
    "method_spec",
    "builtin_scenarios",
    "builtin_scenario",
    "trial_measurement",
    "run_single_trial",
    "run_trials_detailed",
    "aggregate_trials",
    "run_trials",
]

DEFAULT_THRESHOLD = 0.4

METHOD_NAMES = ("mpiaa", "tigre", "tigre-random-init")


class BenchError(RuntimeError):
    """Raised when a benchmark trial fails; the message names the trial seed."""


@dataclass(frozen=True)
class Scenario:
    """A fixed scene, SNR, grid, and array for repeated trials."""

    name: str
    scene: Scene
    snr_db: float
    grid: AngleGrid = field(default_factory=AngleGrid.default)
    radar: RadarConfig = field(default_factory=RadarConfig)

    def __post_init__(self):
        for emitter in self.scene.emitters:
            self.grid.index_of(emitter.doa_deg)
            self.grid.index_of(emitter.dod_deg)

    def model(self) -> ForwardModel:
        return ForwardModel(self.radar, self.grid)

    def with_grid_step(self, step_deg: float) -> "Scenario":
        angles = self.grid.angles_deg
        return replace(self, grid=AngleGrid.from_range(angles[0], angles[-1], step_deg))

    @property
    def noise_reference_power(self) -> float | None:
        """SNR reference: squared magnitude of the strongest emitter.

        Referencing the noise to the strongest (actual) target keeps the
        noise level fixed as ghosts and further targets are added, so error
        metrics stay comparable across the bundled scenes.
        """
        magnitudes = [e.magnitude for e in self.scene.emitters]
        if not magnitudes:
            return None
        return max(magnitudes) ** 2


@dataclass(frozen=True)
class MethodSpec:
    """A named solver configuration entering the comparison."""

    name: str
    params: SolverParams


@dataclass(frozen=True)
class TrialResult:
    seed: int
    method: str
    error: float
    iterations: int
    wall_time_s: float
    converged: bool
    metrics: EvalMetrics


@dataclass(frozen=True)
class AggregateResult:
    method: str
    mean_error: float
    mean_iterations: float
    mean_time_s: float
    trial_count: int
    std_error: float
    std_iterations: float
    std_time_s: float


def method_spec(name, base: SolverParams | None = None) -> MethodSpec:
    """Resolve a method name (or pass a MethodSpec through) onto solver params.

    Known names: ``mpiaa`` (alias ``mp-iaa``), ``tigre``, and
    ``tigre-random-init``.  ``base`` supplies shared overrides such as
    penalty weights or iteration caps.
    """
    if isinstance(name, MethodSpec):
        return name
    base = base if base is not None else SolverParams()
    canon = str(name).strip().lower().replace("_", "-")
    if canon == "mp-iaa":
        canon = "mpiaa"
    if canon == "mpiaa":
        return MethodSpec("mpiaa", base.with_method(MPIAA))
    if canon == "tigre":
        return MethodSpec("tigre", base.with_method(TIGRE))
    if canon == "tigre-random-init":
        return MethodSpec("tigre-random-init", base.with_method(TIGRE, init=RANDOM))
    raise ValueError(f"unknown method {name!r}; expected one of {METHOD_NAMES}")


def _reference_scene(n_targets: int) -> Scene:
    # Bundled scenes: unit actual target plus a 0.7 ghost (shared DOA) and a
    # 0.5 ghost (shared DOD) per target, all on the default 5 degree grid.
    triplets = (
        ((1.0, -20.0, -20.0), (0.7, -20.0, 40.0), (0.5, 40.0, -20.0)),
        ((1.0, -60.0, -60.0), (0.7, -60.0, 60.0), (0.5, 60.0, -60.0)),
        ((1.0, -40.0, -40.0), (0.7, -40.0, 50.0), (0.5, 50.0, -40.0)),
    )
    emitters = [
        Emitter(mag, doa, dod)
        for group in triplets[:n_targets]
        for mag, doa, dod in group
    ]
    return Scene(tuple(emitters))


def builtin_scenarios() -> list[Scenario]:
    """The bundled one/two/three-target multipath scenes at 10 dB SNR."""
    names = ("one-target", "two-target", "three-target")
    return [
        Scenario(name, _reference_scene(k + 1), snr_db=10.0)
        for k, name in enumerate(names)
    ]


def builtin_scenario(name: str) -> Scenario:
    for scenario in builtin_scenarios():
        if scenario.name == name:
            return scenario
    raise ValueError(f"unknown builtin scenario {name!r}")


def _noise_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _init_rng(seed: int, method_name: str) -> np.random.Generator:
    # Keyed by method name so reordering the method list cannot change results.
    return np.random.default_rng([seed, zlib.crc32(method_name.encode())])


def trial_measurement(scenario: Scenario, base_seed: int, trial: int,
                      model: ForwardModel | None = None) -> Measurement:
    """The measurement that every method sees in the given trial."""
    model = model if model is not None else scenario.model()
    y_clean = forward(spectrum_from_scene(scenario.scene, scenario.grid), model)
    return add_noise(y_clean, scenario.snr_db, _noise_rng(base_seed + trial),
                     reference_power=scenario.noise_reference_power)


def run_single_trial(scenario: Scenario, methods, base_seed: int, trial: int,
                     model: ForwardModel | None = None,
                     threshold: float = DEFAULT_THRESHOLD) -> list[TrialResult]:
    """Run every method on the trial's shared measurement and score it."""
    model = model if model is not None else scenario.model()
    specs = [method_spec(m) for m in methods]
    seed = base_seed + trial
    x_true = spectrum_from_scene(scenario.scene, scenario.grid)
    measurement = trial_measurement(scenario, base_seed, trial, model)
    results = []
    for spec in specs:
        try:
            report = solver.run(measurement, model, spec.params,
                                rng=_init_rng(seed, spec.name))
        except Exception as exc:
            raise BenchError(
                f"trial with seed {seed} failed for method {spec.name}: {exc}") from exc
        error = frobenius_sq_error(report.spectrum, x_true)
        detections = threshold_detect(report.spectrum, threshold)
        metrics = score_detections(detections, scenario.scene, scenario.grid,
                                   frobenius_sq_error=error)
        results.append(TrialResult(
            seed=seed,
            method=spec.name,
            error=error,
            iterations=report.iterations,
            wall_time_s=report.wall_time_seconds,
            converged=report.converged,
            metrics=metrics,
        ))
    return results


def run_trials_detailed(scenario: Scenario, methods, n_trials: int,
                        base_seed: int = 0,
                        threshold: float = DEFAULT_THRESHOLD) -> dict[str, list[TrialResult]]:
    """Per-trial results for each method; trial t uses seed base_seed + t."""
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    specs = [method_spec(m) for m in methods]
    model = scenario.model()
    per_method: dict[str, list[TrialResult]] = {spec.name: [] for spec in specs}
    for trial in range(n_trials):
        for result in run_single_trial(scenario, specs, base_seed, trial,
                                       model=model, threshold=threshold):
            per_method[result.method].append(result)
    return per_method


def aggregate_trials(method: str, trials: list[TrialResult]) -> AggregateResult:
    """Means and population standard deviations over the recorded trials."""
    errors = np.array([t.error for t in trials])
    iters = np.array([t.iterations for t in trials], dtype=float)
    times = np.array([t.wall_time_s for t in trials])
    return AggregateResult(
        method=method,
        mean_error=float(errors.mean()),
        mean_iterations=float(iters.mean()),
        mean_time_s=float(times.mean()),
        trial_count=len(trials),
        std_error=float(errors.std()),
        std_iterations=float(iters.std()),
        std_time_s=float(times.std()),
    )


def run_trials(scenario: Scenario, methods, n_trials: int,
               base_seed: int = 0,
               threshold: float = DEFAULT_THRESHOLD) -> list[AggregateResult]:
    """Aggregate error / iterations / time per method over paired trials."""
    detailed = run_trials_detailed(scenario, methods, n_trials, base_seed, threshold)
    return [aggregate_trials(name, trials) for name, trials in detailed.items()]
