"""Colocated MIMO radar measurement model on a discretized DOA/DOD angle grid.

Scenes place complex point emitters on a two-dimensional angle grid whose
rows index direction of arrival (DOA) and whose columns index direction of
departure (DOD).  Actual targets sit on the diagonal (DOA = DOD); first-order
multipath ghosts sit off it, sharing one angle with the target that produces
them.  The forward operator maps the grid amplitudes through the transmit and
receive uniform-linear-array responses to a single snapshot of the virtual
array, ``y = vec(A_rx @ X @ A_tx.T)`` with column-stacking ``vec``, and
measurement noise is circularly-symmetric complex Gaussian calibrated to a
per-component SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "ACTUAL",
    "GHOST",
    "ON_GRID_TOL_DEG",
    "RadarConfig",
    "AngleGrid",
    "AngleSpectrum",
    "Emitter",
    "Scene",
    "Measurement",
    "ForwardModel",
    "steering_vector",
    "steering_matrix",
    "dictionary_column",
    "spectrum_from_scene",
    "forward",
    "add_noise",
]

ACTUAL = "actual"
GHOST = "ghost"

# Emitters must coincide with a grid point to within this many degrees;
# anything farther is rejected rather than snapped.
ON_GRID_TOL_DEG = 1e-9


@dataclass(frozen=True)
class RadarConfig:
    """Colocated MIMO array geometry.

    Element spacings are expressed in wavelengths (d/lambda), which is the
    only way the carrier enters the model.
    """

    n_tx: int = 8
    n_rx: int = 8
    tx_spacing: float = 0.5
    rx_spacing: float = 0.5

    def __post_init__(self):
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("element counts must be at least 1")
        if self.tx_spacing <= 0 or self.rx_spacing <= 0:
            raise ValueError("element spacings must be positive")

    @property
    def n_meas(self) -> int:
        """Length of one measurement snapshot (virtual array size)."""
        return self.n_tx * self.n_rx


@dataclass(frozen=True)
class AngleGrid:
    """Strictly increasing angle grid in degrees, shared by DOA and DOD axes."""

    angles_deg: tuple[float, ...]

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles_deg)
        object.__setattr__(self, "angles_deg", angles)
        if len(angles) == 0:
            raise ValueError("grid must contain at least one angle")
        arr = np.asarray(angles)
        if arr.min() < -90.0 or arr.max() > 90.0:
            raise ValueError("grid angles must lie in [-90, 90] degrees")
        if len(angles) > 1 and np.any(np.diff(arr) <= 0):
            raise ValueError("grid angles must be strictly increasing")

    @classmethod
    def from_range(cls, min_deg: float = -90.0, max_deg: float = 90.0,
                   step_deg: float = 5.0) -> "AngleGrid":
        """Uniform grid min, min+step, ... capped at max (inclusive)."""
        if step_deg <= 0:
            raise ValueError("grid step must be positive")
        if max_deg < min_deg:
            raise ValueError("grid max must not be below min")
        n = int(math.floor((max_deg - min_deg) / step_deg + 1e-9)) + 1
        angles = np.round(min_deg + step_deg * np.arange(n), 9)
        return cls(tuple(angles))

    @classmethod
    def default(cls) -> "AngleGrid":
        """-90..90 at 5 degree spacing (37 points)."""
        return cls.from_range()

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.angles_deg)

    def __len__(self) -> int:
        return len(self.angles_deg)

    @property
    def size(self) -> int:
        return len(self.angles_deg)

    def index_of(self, angle_deg: float, tol: float = ON_GRID_TOL_DEG) -> int:
        """Index of the grid point matching ``angle_deg`` to within ``tol``."""
        arr = self.degrees
        i = int(np.argmin(np.abs(arr - angle_deg)))
        if abs(arr[i] - angle_deg) > tol:
            raise ValueError(f"{angle_deg} deg is not a grid point")
        return i


@dataclass(eq=False)
class AngleSpectrum:
    """Complex amplitude over every (DOA, DOD) grid cell.

    ``entries[g, q]`` is the amplitude received from DOA ``grid[g]`` and
    transmitted toward DOD ``grid[q]``.  The vector form stacks columns, so
    cell (g, q) maps to vector index ``g + q * G``.
    """

    entries: np.ndarray
    grid: AngleGrid

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        expected = (len(self.grid), len(self.grid))
        if entries.shape != expected:
            raise ValueError(f"spectrum shape {entries.shape} does not match grid {expected}")
        self.entries = entries

    @classmethod
    def zeros(cls, grid: AngleGrid) -> "AngleSpectrum":
        g = len(grid)
        return cls(np.zeros((g, g), dtype=complex), grid)

    @classmethod
    def from_vec(cls, x: np.ndarray, grid: AngleGrid) -> "AngleSpectrum":
        g = len(grid)
        x = np.asarray(x, dtype=complex)
        if x.shape != (g * g,):
            raise ValueError(f"vector length {x.shape} does not match grid size {g}")
        return cls(x.reshape((g, g), order="F"), grid)

    def vec(self) -> np.ndarray:
        """Column-stacked vector form (cell (g, q) at index g + q*G)."""
        return self.entries.ravel(order="F")

    def diagonal(self) -> np.ndarray:
        """Amplitudes of the DOA = DOD cells."""
        return np.diagonal(self.entries).copy()


@dataclass(frozen=True)
class Emitter:
    """One point emitter; ``kind`` is derived from the angle pair."""

    magnitude: float
    doa_deg: float
    dod_deg: float
    phase_deg: float = 0.0
    kind: str = ""

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("emitter magnitude must be nonnegative")
        derived = ACTUAL if self.doa_deg == self.dod_deg else GHOST
        if self.kind == "":
            object.__setattr__(self, "kind", derived)
        elif self.kind != derived:
            raise ValueError(
                f"emitter kind {self.kind!r} contradicts angles "
                f"(doa={self.doa_deg}, dod={self.dod_deg})")

    @property
    def amplitude(self) -> complex:
        return self.magnitude * np.exp(1j * np.deg2rad(self.phase_deg))


@dataclass(frozen=True)
class Scene:
    """Ground truth: the emitters (actual targets and ghosts) in view."""

    emitters: tuple[Emitter, ...]

    def __post_init__(self):
        object.__setattr__(self, "emitters", tuple(self.emitters))

    @property
    def actual_emitters(self) -> tuple[Emitter, ...]:
        return tuple(e for e in self.emitters if e.kind == ACTUAL)

    @property
    def ghost_emitters(self) -> tuple[Emitter, ...]:
        return tuple(e for e in self.emitters if e.kind == GHOST)


@dataclass(eq=False)
class Measurement:
    """One noisy snapshot plus the noise bookkeeping used to create it."""

    y: np.ndarray
    noise_sigma: float
    snr_db: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=complex)
        if y.ndim != 1:
            raise ValueError("measurement must be a vector")
        if self.noise_sigma < 0:
            raise ValueError("noise sigma must be nonnegative")
        self.y = y


@dataclass(eq=False)
class ForwardModel:
    """Array geometry and angle grid with cached steering operators."""

    radar: RadarConfig = field(default_factory=RadarConfig)
    grid: AngleGrid = field(default_factory=AngleGrid.default)

    @cached_property
    def tx_steering(self) -> np.ndarray:
        """n_tx x G transmit steering matrix over the grid."""
        return steering_matrix(self.grid, self.radar.n_tx, self.radar.tx_spacing)

    @cached_property
    def rx_steering(self) -> np.ndarray:
        """n_rx x G receive steering matrix over the grid."""
        return steering_matrix(self.grid, self.radar.n_rx, self.radar.rx_spacing)

    @cached_property
    def dictionary(self) -> np.ndarray:
        """n_meas x G^2 dictionary; column g + q*G responds to cell (g, q).

        Built so that ``dictionary @ X.vec()`` equals ``forward(X, model)``
        exactly: the cell column is kron(tx column q, rx column g).
        """
        return np.kron(self.tx_steering, self.rx_steering)

    @cached_property
    def diag_dictionary(self) -> np.ndarray:
        """n_meas x G matrix whose column g responds to the diagonal cell (g, g)."""
        cols = self.tx_steering[:, None, :] * self.rx_steering[None, :, :]
        return cols.reshape(self.radar.n_meas, len(self.grid))

    @property
    def n_meas(self) -> int:
        return self.radar.n_meas

    @property
    def n_cells(self) -> int:
        return len(self.grid) ** 2


def steering_vector(theta_deg: float, n: int, spacing_wl: float) -> np.ndarray:
    """Uniform-linear-array response ``a(theta)[k] = exp(j 2 pi d k sin(theta))``.

    ``spacing_wl`` is the element spacing in wavelengths; entry 0 is always 1
    and every entry has unit modulus.
    """
    if not -90.0 <= theta_deg <= 90.0:
        raise ValueError(f"angle {theta_deg} deg outside [-90, 90]")
    phase = 2.0 * np.pi * spacing_wl * math.sin(math.radians(theta_deg))
    return np.exp(1j * phase * np.arange(n))


def steering_matrix(grid: AngleGrid, n: int, spacing_wl: float) -> np.ndarray:
    """n x G matrix whose column g is the steering vector toward grid angle g."""
    return np.column_stack([steering_vector(a, n, spacing_wl) for a in grid.angles_deg])


def dictionary_column(g: int, q: int, model: ForwardModel) -> np.ndarray:
    """Virtual-array response of cell (DOA index g, DOD index q)."""
    G = len(model.grid)
    if not (0 <= g < G and 0 <= q < G):
        raise IndexError(f"cell ({g}, {q}) outside {G}x{G} grid")
    return np.kron(model.tx_steering[:, q], model.rx_steering[:, g])


def spectrum_from_scene(scene: Scene, grid: AngleGrid) -> AngleSpectrum:
    """Ground-truth spectrum with each emitter's amplitude at its grid cell.

    Emitters sharing a cell add up.  Off-grid emitters are rejected, never
    snapped, so error metrics against the returned spectrum stay exact.
    """
    spectrum = AngleSpectrum.zeros(grid)
    for emitter in scene.emitters:
        try:
            g = grid.index_of(emitter.doa_deg)
            q = grid.index_of(emitter.dod_deg)
        except ValueError:
            raise ValueError(
                f"emitter (magnitude={emitter.magnitude}, doa={emitter.doa_deg}, "
                f"dod={emitter.dod_deg}) is not on the grid") from None
        spectrum.entries[g, q] += emitter.amplitude
    return spectrum


def forward(x_spectrum: AngleSpectrum, model: ForwardModel) -> np.ndarray:
    """Noise-free snapshot ``vec(A_rx @ X @ A_tx.T)`` of length n_meas."""
    if x_spectrum.grid != model.grid:
        raise ValueError("spectrum grid does not match model grid")
    snapshot = model.rx_steering @ x_spectrum.entries @ model.tx_steering.T
    return snapshot.ravel(order="F")


def add_noise(y_clean: np.ndarray, snr_db: float, rng: np.random.Generator,
              reference_power: float | None = None) -> Measurement:
    """Add i.i.d. circularly-symmetric complex Gaussian noise at the given SNR.

    By default the per-component noise variance is
    ``sigma^2 = ||y||^2 / (n * 10^(snr/10))``, i.e. SNR is the mean
    per-component signal power over the per-component noise power.  Passing
    ``reference_power`` pins the numerator instead
    (``sigma^2 = reference_power * 10^(-snr/10)``), which keeps the noise
    level independent of how many emitters the scene contains.
    ``snr_db = inf`` returns the clean signal with sigma = 0.
    """
    y = np.asarray(y_clean, dtype=complex)
    if math.isinf(snr_db) and snr_db > 0:
        return Measurement(y.copy(), 0.0, snr_db)
    if reference_power is None:
        power = float(np.sum(np.abs(y) ** 2))
        if power == 0.0:
            raise ValueError("zero signal cannot meet a finite SNR")
        sigma_sq = power / (y.size * 10.0 ** (snr_db / 10.0))
    else:
        if reference_power <= 0.0:
            raise ValueError("SNR reference power must be positive")
        sigma_sq = reference_power * 10.0 ** (-snr_db / 10.0)
    sigma = math.sqrt(sigma_sq)
    re, im = rng.standard_normal((2, y.size))
    noise = (sigma / math.sqrt(2.0)) * (re + 1j * im)
    return Measurement(y + noise, sigma, snr_db)
