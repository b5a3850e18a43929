"""Angle-grid estimation toolkit for multipath radar scenes.

The library models a colocated MIMO radar whose measurement is explained by
complex amplitudes on a DOA x DOD angle grid, estimates that grid with either
a per-cell weighted-least-squares iteration (``mpiaa``) or its target-induced
regularized variant (``tigre``), flags off-diagonal detections as multipath
ghosts, and benchmarks the methods over seeded Monte Carlo trials.
"""

from .bench import (AggregateResult, BenchError, MethodSpec, Scenario, TrialResult,
                    aggregate_trials, builtin_scenario, builtin_scenarios, method_spec,
                    run_single_trial, run_trials, run_trials_detailed, trial_measurement)
from .detect import Detection, EvalMetrics, frobenius_sq_error, score_detections, threshold_detect
from .model import (ACTUAL, GHOST, AngleGrid, AngleSpectrum, Emitter, ForwardModel,
                    Measurement, RadarConfig, Scene, add_noise, dictionary_column,
                    forward, spectrum_from_scene, steering_matrix, steering_vector)
from .scenario_io import (ScenarioError, load_scenario, parse_scenario_dict,
                          save_scenario, scenario_fingerprint, scenario_to_dict)
from .solver import (DIAGONAL_LS, MATCHED_FILTER, MPIAA, RANDOM, TIGRE, CovarianceState,
                     IterationRecord, SolverError, SolverParams, SolverReport,
                     build_covariance, diag_regularizer_value, init_diagonal,
                     init_matched_filter, init_random, loss_value, mpiaa_step,
                     per_cell_statistics, regularizer_value, run, tigre_step)

__version__ = "0.1.0"

__all__ = [
    "ACTUAL",
    "GHOST",
    "AngleGrid",
    "AngleSpectrum",
    "Emitter",
    "ForwardModel",
    "Measurement",
    "RadarConfig",
    "Scene",
    "add_noise",
    "dictionary_column",
    "forward",
    "spectrum_from_scene",
    "steering_matrix",
    "steering_vector",
    "TIGRE",
    "MPIAA",
    "DIAGONAL_LS",
    "MATCHED_FILTER",
    "RANDOM",
    "CovarianceState",
    "IterationRecord",
    "SolverError",
    "SolverParams",
    "SolverReport",
    "build_covariance",
    "diag_regularizer_value",
    "init_diagonal",
    "init_matched_filter",
    "init_random",
    "loss_value",
    "mpiaa_step",
    "per_cell_statistics",
    "regularizer_value",
    "run",
    "tigre_step",
    "Detection",
    "EvalMetrics",
    "frobenius_sq_error",
    "score_detections",
    "threshold_detect",
    "AggregateResult",
    "BenchError",
    "MethodSpec",
    "Scenario",
    "TrialResult",
    "aggregate_trials",
    "builtin_scenario",
    "builtin_scenarios",
    "method_spec",
    "run_single_trial",
    "run_trials",
    "run_trials_detailed",
    "trial_measurement",
    "ScenarioError",
    "load_scenario",
    "parse_scenario_dict",
    "save_scenario",
    "scenario_fingerprint",
    "scenario_to_dict",
]
