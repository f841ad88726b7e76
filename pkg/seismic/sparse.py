"""Sparse-spike deconvolution baseline.

Minimizes ||d - G m||_2^2 + chi * ||m||_1 per trace, where G is `same`
convolution with the wavelet, by proximal-gradient iteration (ISTA, or
FISTA with gradient-based adaptive restart). With step = 1/||G||^2 the
soft threshold is step * chi / 2; a minimizer satisfies
2 G^T (d - G m) in chi * subdiff ||m||_1.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.errors import ConfigError, ShapeError, SolverDivergenceError
from core.rng import RngState
from seismic.models import ReflectivitySection, TraceSection, Wavelet

logger = logging.getLogger(__name__)

POWER_ITERATIONS = 20
# The power-iteration estimate is a lower bound; inflate it so step * ||G||^2 <= 1.
NORM_SAFETY = 1.01
CHI_GRID = (1e-3, 3e-3, 1e-2, 3e-2, 1e-1)


class BpiConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    chi: float | None = Field(default=None, ge=0, description="L1 weight; null selects it by grid search on validation traces")
    max_iters: int = Field(default=500, ge=1)
    step: float | Literal["auto"] = Field(default="auto", description="Gradient step, or 'auto' for 1/||G||^2")
    tol: float = Field(default=1e-8, ge=0, description="Stop when the relative objective change drops below this")
    solver: Literal["ista", "fista"] = "ista"
    restart: bool = Field(default=True, description="FISTA gradient-based adaptive restart")
    chi_grid: tuple[float, ...] = Field(default=CHI_GRID, description="Candidate chi as fractions of ||G^T d||_inf")


@dataclass
class ConvOperator:
    """`same` convolution with a wavelet on series of a fixed length."""
    wavelet: Wavelet
    length: int
    _norm_squared: float | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ShapeError(f"ConvOperator length must be positive, got {self.length}")

    @property
    def offset(self) -> int:
        return (len(self.wavelet.samples) - 1) // 2

    def _check(self, x: np.ndarray, what: str) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.length,):
            raise ShapeError(f"{what} must have shape ({self.length},), got {x.shape}")
        return x

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x, "model")
        return np.convolve(x, self.wavelet.samples, mode="full")[self.offset:self.offset + self.length]

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        y = self._check(y, "data")
        padded = np.zeros(self.length + len(self.wavelet.samples) - 1)
        padded[self.offset:self.offset + self.length] = y
        return np.correlate(padded, self.wavelet.samples, mode="valid")

    def as_matrix(self) -> np.ndarray:
        return np.stack([self.apply(column) for column in np.eye(self.length)], axis=1)

    def norm_estimate(self, iterations: int = POWER_ITERATIONS) -> float:
        """Largest eigenvalue of G^T G by power iteration (i.e. ||G||_2^2)."""
        if self._norm_squared is None:
            vector = RngState(0).child("power-iteration").generator.standard_normal(self.length)
            estimate = 0.0
            for _ in range(iterations):
                vector /= np.linalg.norm(vector)
                image = self.apply_adjoint(self.apply(vector))
                estimate = float(vector @ image)
                vector = image
            self._norm_squared = estimate
        return self._norm_squared


@dataclass
class SolveResult:
    m: np.ndarray
    history: list[float]
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.history)


def soft_threshold(x, tau: float):
    if tau < 0:
        raise ConfigError(f"Threshold must be non-negative, got {tau}")
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def objective(m: np.ndarray, d: np.ndarray, op: ConvOperator, chi: float) -> float:
    m = np.asarray(m, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if m.shape != d.shape:
        raise ShapeError(f"model {m.shape} and data {d.shape} lengths differ")
    residual = d - op.apply(m)
    return float(residual @ residual + chi * np.abs(m).sum())


def _step_and_chi(op: ConvOperator, cfg: BpiConfig) -> tuple[float, float]:
    if cfg.chi is None:
        raise ConfigError("chi is unset; choose it with select_chi or set baseline.chi")
    if cfg.step == "auto":
        norm_squared = op.norm_estimate() * NORM_SAFETY
        if norm_squared == 0.0:
            raise ConfigError("The wavelet operator is zero; no step size exists")
        return 1.0 / norm_squared, cfg.chi
    if cfg.step <= 0:
        raise ConfigError(f"step must be positive, got {cfg.step}")
    return float(cfg.step), cfg.chi


def _converged(previous: float, current: float, tol: float) -> bool:
    if previous == 0.0:
        return True
    return abs(previous - current) / previous < tol


def ista_solve(d: np.ndarray, op: ConvOperator, cfg: BpiConfig) -> SolveResult:
    d = np.asarray(d, dtype=np.float64)
    step, chi = _step_and_chi(op, cfg)
    threshold = step * chi / 2.0
    m = np.zeros(op.length)
    previous = objective(m, d, op, chi)
    history: list[float] = []
    for iteration in range(1, cfg.max_iters + 1):
        m = soft_threshold(m + step * op.apply_adjoint(d - op.apply(m)), threshold)
        current = objective(m, d, op, chi)
        history.append(current)
        if not math.isfinite(current) or current > previous + 1e-10 * max(previous, 1e-300) + 1e-14:
            raise SolverDivergenceError(
                f"ISTA objective rose from {previous:.6e} to {current:.6e} at iteration {iteration}",
                iteration=iteration,
            )
        if _converged(previous, current, cfg.tol):
            return SolveResult(m=m, history=history, converged=True)
        previous = current
    return SolveResult(m=m, history=history, converged=False)


def fista_solve(d: np.ndarray, op: ConvOperator, cfg: BpiConfig) -> SolveResult:
    d = np.asarray(d, dtype=np.float64)
    step, chi = _step_and_chi(op, cfg)
    threshold = step * chi / 2.0
    m = np.zeros(op.length)
    y = m.copy()
    momentum = 1.0
    initial = previous = objective(m, d, op, chi)
    history: list[float] = []
    for iteration in range(1, cfg.max_iters + 1):
        m_prev = m
        m = soft_threshold(y + step * op.apply_adjoint(d - op.apply(y)), threshold)
        if cfg.restart and (y - m) @ (m - m_prev) > 0:
            momentum = 1.0
        next_momentum = (1.0 + math.sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0
        y = m + ((momentum - 1.0) / next_momentum) * (m - m_prev)
        momentum = next_momentum

        current = objective(m, d, op, chi)
        history.append(current)
        if not math.isfinite(current) or current > 1e6 * max(initial, 1e-300):
            raise SolverDivergenceError(
                f"FISTA objective blew up to {current:.6e} at iteration {iteration}",
                iteration=iteration,
            )
        if _converged(previous, current, cfg.tol):
            return SolveResult(m=m, history=history, converged=True)
        previous = current
    return SolveResult(m=m, history=history, converged=False)


def _solver(cfg: BpiConfig):
    return fista_solve if cfg.solver == "fista" else ista_solve


def solve_traces(grid: np.ndarray, op: ConvOperator, cfg: BpiConfig, threads: int = 1) -> list[SolveResult]:
    """Independent solves for every trace (column) of a (time, trace, 1) grid."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 3 or grid.shape[0] != op.length:
        raise ShapeError(f"Expected a ({op.length}, traces, 1) section, got {grid.shape}")
    solve = _solver(cfg)
    columns = [grid[:, column, 0] for column in range(grid.shape[1])]
    if threads <= 1:
        return [solve(trace, op, cfg) for trace in columns]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda trace: solve(trace, op, cfg), columns))


def invert_section(
    section: TraceSection,
    op: ConvOperator,
    cfg: BpiConfig,
    threads: int = 1,
    histories: list[list[float]] | None = None,
) -> ReflectivitySection:
    """Per-trace basis-pursuit inversion; objective histories are appended to ``histories`` when given."""
    results = solve_traces(section.grid, op, cfg, threads)
    unconverged = sum(not result.converged for result in results)
    if unconverged:
        logger.info(f"[Baseline] {unconverged}/{len(results)} traces hit max_iters={cfg.max_iters}")
    if histories is not None:
        histories.extend(list(result.history) for result in results)
    grid = np.stack([result.m for result in results], axis=1)[..., None]
    return ReflectivitySection(grid=grid, dt=section.dt)


@dataclass(frozen=True)
class ChiSelection:
    chi: float
    candidates: list[tuple[float, float]]


def select_chi(
    traces: list[np.ndarray], targets: list[np.ndarray], op: ConvOperator, cfg: BpiConfig, threads: int = 1
) -> ChiSelection:
    """Grid-search chi over ``cfg.chi_grid`` x max ||G^T d||_inf by validation MSE."""
    if not traces or len(traces) != len(targets):
        raise ShapeError(f"select_chi needs matching, non-empty trace/target lists ({len(traces)} vs {len(targets)})")
    scale = max(float(np.abs(op.apply_adjoint(trace)).max()) for trace in traces)
    if scale == 0.0:
        return ChiSelection(chi=0.0, candidates=[(0.0, 0.0)])

    candidates = []
    for fraction in cfg.chi_grid:
        chi = fraction * scale
        trial = cfg.model_copy(update={"chi": chi})
        solve = _solver(trial)

        def error(pair):
            trace, target = pair
            return float(np.mean((solve(trace, op, trial).m - np.asarray(target)) ** 2))

        pairs = list(zip(traces, targets))
        if threads <= 1:
            errors = [error(pair) for pair in pairs]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                errors = list(pool.map(error, pairs))
        mse = float(np.mean(errors))
        logger.info(f"[Baseline] chi={chi:.4e} validation MSE {mse:.4e}")
        candidates.append((chi, mse))
    best_chi, _ = min(candidates, key=lambda item: item[1])
    return ChiSelection(chi=best_chi, candidates=candidates)
