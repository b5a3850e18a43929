"""Turn a converged angle spectrum into detections and score them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ACTUAL, GHOST, AngleGrid, AngleSpectrum, Scene

__all__ = [
    "Detection",
    "EvalMetrics",
    "threshold_detect",
    "frobenius_sq_error",
    "score_detections",
]


@dataclass(frozen=True)
class Detection:
    """One above-threshold grid cell; ghosts are the DOA != DOD cells."""

    doa_index: int
    dod_index: int
    amplitude: complex
    kind: str = ""

    def __post_init__(self):
        derived = ACTUAL if self.doa_index == self.dod_index else GHOST
        if self.kind == "":
            object.__setattr__(self, "kind", derived)
        elif self.kind != derived:
            raise ValueError(
                f"detection kind {self.kind!r} contradicts cell "
                f"({self.doa_index}, {self.dod_index})")


@dataclass(frozen=True)
class EvalMetrics:
    """Detection quality against a ground-truth scene."""

    frobenius_sq_error: float
    precision: float
    recall: float
    f1: float
    actual_recall: float
    ghost_recall: float


def threshold_detect(x: AngleSpectrum, tau: float) -> list[Detection]:
    """All cells with magnitude strictly above ``tau``, strongest first."""
    if tau <= 0:
        raise ValueError("detection threshold must be positive")
    mags = np.abs(x.entries)
    cells = np.argwhere(mags > tau)
    detections = [
        Detection(int(g), int(q), complex(x.entries[g, q]))
        for g, q in cells
    ]
    detections.sort(key=lambda d: (-abs(d.amplitude), d.doa_index, d.dod_index))
    return detections


def _entries(x) -> np.ndarray:
    if isinstance(x, AngleSpectrum):
        return x.entries
    return np.asarray(x, dtype=complex)


def frobenius_sq_error(x_est, x_true) -> float:
    """Squared Frobenius norm of the estimation error."""
    a = _entries(x_est)
    b = _entries(x_true)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sum(np.abs(a - b) ** 2))


def _within(cell, targets, tol: int) -> bool:
    g, q = cell
    return any(abs(g - tg) <= tol and abs(q - tq) <= tol for tg, tq in targets)


def score_detections(detections, scene: Scene, grid: AngleGrid,
                     frobenius_sq_error: float = 0.0,
                     cell_tolerance: int = 0) -> EvalMetrics:
    """Precision/recall of the detection list against the scene's grid cells.

    A detection is a true positive iff a scene emitter occupies its cell
    (optionally within ``cell_tolerance`` cells per axis; exact by default).
    Recall is counted per emitter, with per-kind recalls for actual targets
    and ghosts.  An absent kind recalls vacuously at 1.
    """
    emitter_cells = [
        (grid.index_of(e.doa_deg), grid.index_of(e.dod_deg), e.kind)
        for e in scene.emitters
    ]
    scene_cells = {(g, q) for g, q, _ in emitter_cells}
    detected_cells = {(d.doa_index, d.dod_index) for d in detections}

    true_positives = sum(
        _within((d.doa_index, d.dod_index), scene_cells, cell_tolerance)
        for d in detections)
    precision = true_positives / len(detections) if detections else 0.0

    recalled = [_within((g, q), detected_cells, cell_tolerance) for g, q, _ in emitter_cells]
    recall = sum(recalled) / len(emitter_cells) if emitter_cells else 1.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0

    def kind_recall(kind):
        flags = [hit for hit, (_, _, k) in zip(recalled, emitter_cells) if k == kind]
        return sum(flags) / len(flags) if flags else 1.0

    return EvalMetrics(
        frobenius_sq_error=frobenius_sq_error,
        precision=precision,
        recall=recall,
        f1=f1,
        actual_recall=kind_recall(ACTUAL),
        ghost_recall=kind_recall(GHOST),
    )
