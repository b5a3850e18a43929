"""Iterative per-cell estimators for the DOA/DOD angle spectrum.

Two methods share one iteration engine.  ``mpiaa`` re-estimates every grid
cell by weighted least squares against the interference-plus-noise covariance
of all the other cells (the multipath variant of the iterative adaptive
approach).  ``tigre`` adds a target-induced quadratic penalty whose weight is
the reciprocal of the estimated power of the two diagonal cells that could
legitimize a ghost at that cell; off-diagonal cells without a supporting
actual target are driven toward zero, and on the diagonal the reweighting
behaves asymptotically like an l0 count.

Every iteration updates all cells simultaneously from the previous iterate
(Jacobi semantics), so a single covariance inverse per iteration serves every
cell through rank-one downdates.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .model import AngleSpectrum, ForwardModel, Measurement

__all__ = [
    "TIGRE",
    "MPIAA",
    "DIAGONAL_LS",
    "MATCHED_FILTER",
    "RANDOM",
    "SolverError",
    "SolverParams",
    "IterationRecord",
    "SolverReport",
    "CovarianceState",
    "init_diagonal",
    "init_matched_filter",
    "init_random",
    "build_covariance",
    "per_cell_statistics",
    "tigre_step",
    "mpiaa_step",
    "run",
    "loss_value",
    "regularizer_value",
    "diag_regularizer_value",
]

TIGRE = "tigre"
MPIAA = "mpiaa"

DIAGONAL_LS = "diagonal_ls"
MATCHED_FILTER = "matched_filter"
RANDOM = "random"

_METHODS = (TIGRE, MPIAA)
_INITS = (DIAGONAL_LS, MATCHED_FILTER, RANDOM)

# Below this, the rank-one downdate denominator is treated as numerically
# unusable and the cell falls back to a direct solve.
_DOWNDATE_TOL = 1e-12

_NORMAL_EQ_MAX_COND = 1e12


class SolverError(RuntimeError):
    """Raised when an estimation run fails numerically."""


@dataclass(frozen=True)
class SolverParams:
    """Tuning knobs for one estimation run.

    ``lambda_diag``/``lambda_offdiag`` weight the penalty on DOA = DOD and
    DOA != DOD cells respectively; ``eps0`` keeps the penalty denominator
    positive; ``eps_x`` is the Euclidean change threshold that declares
    convergence.  ``init = None`` picks the method default: diagonal least
    squares for tigre, matched filter for mpiaa.

    The covariance loading follows a continuation schedule: it starts at
    ``loading_start`` (relative to the mean diagonal), holds for
    ``loading_hold`` sweeps, then decays by ``loading_decay`` per sweep down
    to the ``diag_loading`` floor.  The early heavy loading blurs the
    covariance so spurious low-power cells collapse reliably; the late light
    loading restores full resolution so genuine ghosts keep their amplitude.
    ``relaxation`` mixes each simultaneous update with the previous iterate,
    which suppresses the period-two limit cycles that full Jacobi
    best-response updates produce among highly coherent neighboring cells;
    it does not move the fixed points.
    """

    lambda_diag: float = 1.0
    lambda_offdiag: float = 10.0
    eps0: float = 1e-12
    eps_x: float = 1e-2
    max_iters: int = 100
    diag_loading: float = 1e-4
    relaxation: float = 0.7
    loading_start: float = 0.07
    loading_hold: int = 12
    loading_decay: float = 0.5
    method: str = TIGRE
    init: str | None = None

    def __post_init__(self):
        if self.lambda_diag < 0 or self.lambda_offdiag < 0:
            raise ValueError("penalty weights must be nonnegative")
        if self.eps0 <= 0:
            raise ValueError("eps0 must be positive")
        if self.eps_x <= 0:
            raise ValueError("eps_x must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.diag_loading < 0:
            raise ValueError("diag_loading must be nonnegative")
        if not 0.0 < self.relaxation <= 1.0:
            raise ValueError("relaxation must be in (0, 1]")
        if self.loading_start < 0:
            raise ValueError("loading_start must be nonnegative")
        if self.loading_hold < 0:
            raise ValueError("loading_hold must be nonnegative")
        if not 0.0 < self.loading_decay < 1.0:
            raise ValueError("loading_decay must be in (0, 1)")
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.init is not None and self.init not in _INITS:
            raise ValueError(f"unknown init {self.init!r}")

    def loading_at(self, sweep: int) -> float:
        """Covariance loading used at the given sweep index (0-based)."""
        if self.loading_start <= self.diag_loading:
            return self.diag_loading
        if sweep < self.loading_hold:
            return self.loading_start
        scheduled = self.loading_start * self.loading_decay ** (sweep - self.loading_hold)
        return max(self.diag_loading, scheduled)

    def resolved_init(self) -> str:
        if self.init is not None:
            return self.init
        return DIAGONAL_LS if self.method == TIGRE else MATCHED_FILTER

    def with_method(self, method: str, init: str | None = None) -> "SolverParams":
        return replace(self, method=method, init=init)


@dataclass
class IterationRecord:
    """Per-iteration trace entry."""

    change_norm: float
    loss: float
    diag_reg_value: float
    downdate_fallbacks: int = 0


@dataclass(eq=False)
class SolverReport:
    """Converged spectrum plus the run's trace and timing."""

    spectrum: AngleSpectrum
    iterations: int
    converged: bool
    trace: list[IterationRecord]
    wall_time_seconds: float


@dataclass(eq=False)
class CovarianceState:
    """Inverse of ``R(x) = A diag(|x|^2) A^H + delta I`` for one iterate."""

    r: np.ndarray
    r_inv: np.ndarray
    model: ForwardModel
    delta: float


def _as_vector(y) -> np.ndarray:
    if isinstance(y, Measurement):
        return y.y
    return np.asarray(y, dtype=complex)


def init_diagonal(y, model: ForwardModel) -> AngleSpectrum:
    """Best diagonal-only spectrum in least squares: solve ``min_z ||y - C z||``.

    ``C`` holds the responses of the DOA = DOD cells, so the initializer
    explains the measurement with actual targets only; ghosts start at zero.
    Uses the normal equations while they are well posed and falls back to the
    minimum-norm least-squares solution otherwise.
    """
    y_vec = _as_vector(y)
    C = model.diag_dictionary
    G = len(model.grid)
    cond = None
    if G <= model.n_meas:
        gram = C.conj().T @ C
        cond = float(np.linalg.cond(gram))
        if cond < _NORMAL_EQ_MAX_COND:
            z = np.linalg.solve(gram, C.conj().T @ y_vec)
        else:
            z = np.linalg.lstsq(C, y_vec, rcond=None)[0]
    else:
        z = np.linalg.lstsq(C, y_vec, rcond=None)[0]
    if not np.all(np.isfinite(z)):
        raise SolverError(
            f"diagonal initialization is numerically singular (cond ~ {cond:.3e})")
    spectrum = AngleSpectrum.zeros(model.grid)
    np.fill_diagonal(spectrum.entries, z)
    return spectrum


def init_matched_filter(y, model: ForwardModel) -> AngleSpectrum:
    """Per-cell matched filter ``a_i^H y / (a_i^H a_i)`` over the whole grid."""
    y_vec = _as_vector(y)
    # Dictionary columns have unit-modulus entries, so a_i^H a_i = n_meas.
    x0 = (model.dictionary.conj().T @ y_vec) / model.n_meas
    return AngleSpectrum.from_vec(x0, model.grid)


def init_random(model: ForwardModel, rng: np.random.Generator) -> AngleSpectrum:
    """I.i.d. circularly-symmetric complex Gaussian entries, unit variance each."""
    g = len(model.grid)
    re, im = rng.standard_normal((2, g, g))
    return AngleSpectrum((re + 1j * im) / np.sqrt(2.0), model.grid)


def build_covariance(x, model: ForwardModel, diag_loading: float = 1e-8) -> CovarianceState:
    """Invert ``R = A diag(|x|^2) A^H + delta I`` once for the current iterate.

    ``delta`` is ``diag_loading`` times the mean diagonal of the unloaded
    matrix (with a unit fallback when x = 0), so the loading tracks the
    signal scale and keeps R invertible even for sparse iterates.
    """
    x = np.asarray(x, dtype=complex).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("spectrum vector contains non-finite entries")
    A = model.dictionary
    if x.shape != (A.shape[1],):
        raise ValueError(f"vector length {x.shape} does not match grid ({A.shape[1]} cells)")
    powers = np.abs(x) ** 2
    r = (A * powers) @ A.conj().T
    scale = float(np.mean(np.real(np.diagonal(r))))
    if scale <= 0.0:
        scale = 1.0
    delta = diag_loading * scale
    r[np.diag_indices_from(r)] += delta
    r = 0.5 * (r + r.conj().T)
    r_inv = np.linalg.inv(r)
    r_inv = 0.5 * (r_inv + r_inv.conj().T)
    return CovarianceState(r, r_inv, model, delta)


def _downdated_cell(cov: CovarianceState, p: float, a: np.ndarray, y: np.ndarray):
    """Direct solve against ``Q = R - p a a^H`` for one cell (fallback path)."""
    q_mat = cov.r - p * np.outer(a, a.conj())
    sol = np.linalg.solve(q_mat, np.column_stack([y, a]))
    beta = complex(np.vdot(a, sol[:, 0]))
    gamma = float(np.real(np.vdot(a, sol[:, 1])))
    y_quad = float(np.real(np.vdot(y, sol[:, 0])))
    return beta, gamma, y_quad


def per_cell_statistics(cov: CovarianceState, x_i: complex, a_i: np.ndarray, y) -> tuple[complex, float]:
    """Leave-one-out statistics ``beta = a^H Q^-1 y`` and ``gamma = a^H Q^-1 a``.

    ``Q = R - |x_i|^2 a a^H`` excludes the cell's own contribution; its
    inverse is obtained from the cached ``R^-1`` by a rank-one downdate.  A
    vanishing downdate denominator triggers a direct solve instead.
    """
    y_vec = _as_vector(y)
    u = cov.r_inv @ a_i
    s = float(np.real(np.vdot(a_i, u)))
    t = complex(np.vdot(u, y_vec))
    p = abs(x_i) ** 2
    denom = 1.0 - p * s
    if denom <= _DOWNDATE_TOL:
        beta, gamma, _ = _downdated_cell(cov, p, a_i, y_vec)
        return beta, gamma
    beta = t + p * s * t / denom
    gamma = s + p * s * s / denom
    return beta, gamma


@dataclass(eq=False)
class _CellStats:
    """Downdated statistics for every cell of one iterate."""

    beta: np.ndarray    # a_i^H Q_i^-1 y
    gamma: np.ndarray   # a_i^H Q_i^-1 a_i (real positive)
    y_quad: np.ndarray  # y^H Q_i^-1 y (real)
    fallbacks: int


def _all_cell_statistics(cov: CovarianceState, x: np.ndarray, y: np.ndarray) -> _CellStats:
    A = cov.model.dictionary
    r_inv_y = cov.r_inv @ y
    t = A.conj().T @ r_inv_y
    u = cov.r_inv @ A
    s = np.real(np.sum(A.conj() * u, axis=0))
    powers = np.abs(x) ** 2
    denom = 1.0 - powers * s
    bad = denom <= _DOWNDATE_TOL
    safe = np.where(bad, 1.0, denom)
    beta = t / safe
    gamma = s / safe
    y_base = float(np.real(np.vdot(y, r_inv_y)))
    y_quad = y_base + powers * np.abs(t) ** 2 / safe
    for i in np.nonzero(bad)[0]:
        beta[i], gamma[i], y_quad[i] = _downdated_cell(cov, powers[i], A[:, i], y)
    return _CellStats(beta, gamma, y_quad, int(bad.sum()))


def _lambda_matrix(params: SolverParams, g: int) -> np.ndarray:
    lam = np.full((g, g), params.lambda_offdiag)
    np.fill_diagonal(lam, params.lambda_diag)
    return lam


def _support_weight(x_n: AngleSpectrum, eps0: float) -> np.ndarray:
    """Per-cell ``D[g, q] = |X[g,g]|^2 + |X[q,q]|^2 + eps0`` from the iterate."""
    z_pow = np.abs(np.diagonal(x_n.entries)) ** 2
    return z_pow[:, None] + z_pow[None, :] + eps0


def _check_finite(entries: np.ndarray):
    bad = ~np.isfinite(entries)
    if bad.any():
        g, q = (int(v) for v in np.argwhere(bad)[0])
        raise SolverError(f"non-finite update at grid cell (doa_index={g}, dod_index={q})")


def _regularized_entries(x_n: AngleSpectrum, stats: _CellStats, params: SolverParams) -> np.ndarray:
    g = len(x_n.grid)
    d = _support_weight(x_n, params.eps0)
    lam = _lambda_matrix(params, g)
    beta = stats.beta.reshape((g, g), order="F")
    gamma = stats.gamma.reshape((g, g), order="F")
    return d * beta / (d * gamma + lam)


def tigre_step(x_n: AngleSpectrum, y, cov: CovarianceState, params: SolverParams) -> AngleSpectrum:
    """One simultaneous regularized update of every cell from iterate ``x_n``.

    Each cell minimizes its weighted least-squares residual plus
    ``lambda |X|^2 / D`` with ``D`` the supporting diagonal power, giving
    the closed form ``D beta / (D gamma + lambda)``.  ``cov`` must have been
    built from ``x_n``.
    """
    stats = _all_cell_statistics(cov, x_n.vec(), _as_vector(y))
    entries = _regularized_entries(x_n, stats, params)
    _check_finite(entries)
    return AngleSpectrum(entries, x_n.grid)


def mpiaa_step(x_n: AngleSpectrum, y, cov: CovarianceState) -> AngleSpectrum:
    """One unregularized update: the per-cell WLS solution ``beta / gamma``."""
    g = len(x_n.grid)
    stats = _all_cell_statistics(cov, x_n.vec(), _as_vector(y))
    entries = (stats.beta / stats.gamma).reshape((g, g), order="F")
    _check_finite(entries)
    return AngleSpectrum(entries, x_n.grid)


def _effective_lambda(params: SolverParams, g: int) -> np.ndarray:
    if params.method == MPIAA:
        return np.zeros((g, g))
    return _lambda_matrix(params, g)


def _loss_from_stats(entries: np.ndarray, x_n: AngleSpectrum, stats: _CellStats,
                     params: SolverParams) -> float:
    x = entries.ravel(order="F")
    fidelity = stats.y_quad - 2.0 * np.real(np.conj(x) * stats.beta) + np.abs(x) ** 2 * stats.gamma
    lam = _effective_lambda(params, len(x_n.grid))
    d = _support_weight(x_n, params.eps0)
    penalty = lam * np.abs(entries) ** 2 / d
    return float(np.sum(fidelity) + np.sum(penalty))


def loss_value(x: AngleSpectrum, x_n: AngleSpectrum, y, cov: CovarianceState,
               params: SolverParams) -> float:
    """Total objective at ``x`` with covariances frozen at iterate ``x_n``.

    Sum over cells of the weighted residual quadratic plus the penalty
    ``lambda |X|^2 / D``; mpiaa is the penalty-free special case.  Used for
    tracing, never for stepping.
    """
    stats = _all_cell_statistics(cov, x_n.vec(), _as_vector(y))
    return _loss_from_stats(x.entries, x_n, stats, params)


def regularizer_value(x: AngleSpectrum, x_n: AngleSpectrum, params: SolverParams) -> float:
    """Penalty part of the objective at ``x`` with weights from iterate ``x_n``."""
    lam = _effective_lambda(params, len(x_n.grid))
    d = _support_weight(x_n, params.eps0)
    return float(np.sum(lam * np.abs(x.entries) ** 2 / d))


def diag_regularizer_value(z_next, z_n, eps0: float) -> float:
    """Diagonal reweighting sum ``sum_g |z_next_g|^2 / (2 |z_n_g|^2 + eps0)``.

    At a fixed point with well-separated magnitudes this approaches half the
    number of nonzero diagonal entries, which makes it a cheap sparsity
    diagnostic for the converged actual-target estimate.
    """
    z_next = np.asarray(z_next, dtype=complex)
    z_n = np.asarray(z_n, dtype=complex)
    if z_next.shape != z_n.shape:
        raise ValueError("diagonal vectors must have equal length")
    return float(np.sum(np.abs(z_next) ** 2 / (2.0 * np.abs(z_n) ** 2 + eps0)))


def run(y, model: ForwardModel, params: SolverParams | None = None,
        rng: np.random.Generator | None = None) -> SolverReport:
    """Estimate the angle spectrum from one measurement snapshot.

    Initializes per ``params.init``, then alternates covariance construction
    (with the continuation loading schedule) and simultaneous per-cell
    updates, relaxed by ``params.relaxation``, until the Euclidean change
    drops below ``params.eps_x`` or ``params.max_iters`` is reached.  The
    trace records change norm, objective value, and the diagonal sparsity
    diagnostic for every iteration.  ``rng`` is required only for random
    initialization.
    """
    params = params if params is not None else SolverParams()
    y_vec = _as_vector(y)
    if y_vec.shape != (model.n_meas,):
        raise ValueError(
            f"measurement length {y_vec.shape} does not match array size {model.n_meas}")
    init = params.resolved_init()
    if init == RANDOM and rng is None:
        raise ValueError("random initialization requires an explicit rng")
    model.dictionary  # build the cached operator outside the timed solve
    start = time.perf_counter()
    if init == DIAGONAL_LS:
        x_mat = init_diagonal(y_vec, model)
    elif init == MATCHED_FILTER:
        x_mat = init_matched_filter(y_vec, model)
    else:
        x_mat = init_random(model, rng)
    x = x_mat.vec()
    g = len(model.grid)
    trace: list[IterationRecord] = []
    converged = False
    for sweep in range(params.max_iters):
        cov = build_covariance(x, model, params.loading_at(sweep))
        stats = _all_cell_statistics(cov, x, y_vec)
        if params.method == TIGRE:
            target = _regularized_entries(x_mat, stats, params)
        else:
            target = (stats.beta / stats.gamma).reshape((g, g), order="F")
        entries = (1.0 - params.relaxation) * x_mat.entries + params.relaxation * target
        _check_finite(entries)
        next_mat = AngleSpectrum(entries, model.grid)
        next_x = next_mat.vec()
        change = float(np.linalg.norm(next_x - x))
        loss = _loss_from_stats(entries, x_mat, stats, params)
        diag_reg = diag_regularizer_value(np.diagonal(entries), x_mat.diagonal(), params.eps0)
        trace.append(IterationRecord(change, loss, diag_reg, stats.fallbacks))
        x_mat, x = next_mat, next_x
        if change < params.eps_x:
            converged = True
            break
    return SolverReport(x_mat, len(trace), converged, trace, time.perf_counter() - start)
