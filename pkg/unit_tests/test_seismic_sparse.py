import numpy as np
import pytest

from core.errors import ConfigError, ShapeError, SolverDivergenceError
from core.rng import RngState
from seismic.forward import ricker_wavelet
from seismic.models import TraceSection
from seismic.sparse import (
    BpiConfig,
    ConvOperator,
    fista_solve,
    invert_section,
    ista_solve,
    objective,
    select_chi,
    soft_threshold,
    solve_traces,
)

SPIKE_TIMES = [40, 80, 120, 170, 220]
SPIKE_AMPLITUDES = [0.8, -0.6, 1.0, -0.5, 0.7]


@pytest.fixture
def op() -> ConvOperator:
    return ConvOperator(ricker_wavelet(30.0, 0.004, 41), 256)


@pytest.fixture
def spikes() -> np.ndarray:
    m = np.zeros(256)
    m[SPIKE_TIMES] = SPIKE_AMPLITUDES
    return m


def _chi(op: ConvOperator, d: np.ndarray) -> float:
    return 3e-3 * float(np.abs(op.apply_adjoint(d)).max())


def test_adjoint_matches_inner_product(op):
    gen = RngState(0).generator
    x, y = gen.standard_normal(256), gen.standard_normal(256)
    assert op.apply(x) @ y == pytest.approx(x @ op.apply_adjoint(y), rel=1e-12)


def test_as_matrix_agrees_with_apply_and_adjoint(op):
    gen = RngState(1).generator
    x = gen.standard_normal(256)
    matrix = op.as_matrix()
    np.testing.assert_allclose(matrix @ x, op.apply(x), atol=1e-12)
    np.testing.assert_allclose(matrix.T @ x, op.apply_adjoint(x), atol=1e-12)


def test_norm_estimate_is_a_close_lower_bound(op):
    matrix = op.as_matrix()
    largest = float(np.linalg.eigvalsh(matrix.T @ matrix).max())
    estimate = op.norm_estimate()
    assert 0.8 * largest <= estimate <= largest * (1 + 1e-9)


def test_operator_rejects_wrong_length(op):
    with pytest.raises(ShapeError, match=r"\(256,\)"):
        op.apply(np.zeros(100))


def test_soft_threshold():
    np.testing.assert_allclose(soft_threshold(np.array([-3.0, -0.5, 0.0, 0.5, 3.0]), 1.0), [-2.0, 0.0, 0.0, 0.0, 2.0])
    with pytest.raises(ConfigError, match="non-negative"):
        soft_threshold(np.ones(3), -0.1)


def test_ista_recovers_separated_spikes(op, spikes):
    d = op.apply(spikes)
    cfg = BpiConfig(chi=_chi(op, d), max_iters=5000, tol=1e-12)
    result = ista_solve(d, op, cfg)
    support = np.nonzero(np.abs(result.m) > 0.05 * min(abs(a) for a in SPIKE_AMPLITUDES))[0]
    assert support.tolist() == SPIKE_TIMES
    np.testing.assert_allclose(result.m[SPIKE_TIMES], SPIKE_AMPLITUDES, rtol=0.01)


def test_ista_objective_never_increases(op, spikes):
    d = op.apply(spikes) + 0.01 * RngState(2).generator.standard_normal(256)
    result = ista_solve(d, op, BpiConfig(chi=_chi(op, d), max_iters=300, tol=0.0))
    history = np.asarray(result.history)
    assert len(history) == 300
    assert np.all(np.diff(history) <= 1e-10 * history[:-1])
    assert result.converged is False


def test_fista_reaches_ista_objective_sooner(op, spikes):
    d = op.apply(spikes)
    chi = _chi(op, d)
    ista = ista_solve(d, op, BpiConfig(chi=chi, max_iters=500, tol=0.0))
    fista = fista_solve(d, op, BpiConfig(chi=chi, max_iters=150, tol=0.0, solver="fista"))
    assert min(fista.history) <= ista.history[-1] * (1 + 1e-6)


def test_zero_data_gives_zero_model(op):
    result = ista_solve(np.zeros(256), op, BpiConfig(chi=0.1))
    assert result.converged
    np.testing.assert_array_equal(result.m, np.zeros(256))


def test_missing_chi_is_a_config_error(op):
    with pytest.raises(ConfigError, match="chi is unset"):
        ista_solve(np.zeros(256), op, BpiConfig())


def test_oversized_step_raises_divergence(op, spikes):
    d = op.apply(spikes)
    cfg = BpiConfig(chi=_chi(op, d), step=5.0 / op.norm_estimate(), max_iters=200, tol=0.0)
    with pytest.raises(SolverDivergenceError, match="ISTA objective rose") as excinfo:
        ista_solve(d, op, cfg)
    assert excinfo.value.iteration >= 1


def test_objective_value(op, spikes):
    d = op.apply(spikes)
    assert objective(spikes, d, op, 2.0) == pytest.approx(2.0 * np.abs(spikes).sum())


def test_solve_traces_is_independent_of_threads(op, spikes):
    grid = np.stack([op.apply(spikes), op.apply(-0.5 * spikes), np.zeros(256)], axis=1)[..., None]
    cfg = BpiConfig(chi=0.01, max_iters=200, solver="fista")
    serial = solve_traces(grid, op, cfg, threads=1)
    threaded = solve_traces(grid, op, cfg, threads=2)
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a.m, b.m)


def test_solve_traces_rejects_wrong_trace_length(op):
    with pytest.raises(ShapeError, match="section"):
        solve_traces(np.zeros((100, 2, 1)), op, BpiConfig(chi=0.1))


def test_invert_section_stacks_columns(op, spikes):
    grid = np.stack([op.apply(spikes)] * 2, axis=1)[..., None]
    section = TraceSection(grid=grid, dt=0.004)
    out = invert_section(section, op, BpiConfig(chi=_chi(op, grid[:, 0, 0]), max_iters=2000, tol=1e-12))
    assert out.grid.shape == (256, 2, 1)
    assert out.dt == 0.004
    np.testing.assert_allclose(out.grid[SPIKE_TIMES, 0, 0], SPIKE_AMPLITUDES, rtol=0.01)


def test_select_chi_returns_a_grid_candidate(op, spikes):
    traces = [op.apply(spikes), op.apply(np.roll(spikes, 5))]
    targets = [spikes, np.roll(spikes, 5)]
    cfg = BpiConfig(max_iters=300, tol=1e-8)
    selection = select_chi(traces, targets, op, cfg)
    scale = max(float(np.abs(op.apply_adjoint(trace)).max()) for trace in traces)
    assert len(selection.candidates) == len(cfg.chi_grid)
    assert selection.chi in [fraction * scale for fraction in cfg.chi_grid]
    assert selection.chi == min(selection.candidates, key=lambda item: item[1])[0]


def test_select_chi_rejects_mismatched_lists(op):
    with pytest.raises(ShapeError, match="matching"):
        select_chi([np.zeros(256)], [], op, BpiConfig())


def test_invert_section_collects_objective_histories(op, spikes):
    grid = np.stack([op.apply(spikes), op.apply(0.5 * spikes), np.zeros(256)], axis=1)[..., None]
    cfg = BpiConfig(chi=0.01, max_iters=50, tol=0.0, solver="fista")
    histories: list[list[float]] = []
    out = invert_section(TraceSection(grid=grid, dt=0.004), op, cfg, histories=histories)
    expected = solve_traces(grid, op, cfg)
    assert histories == [result.history for result in expected]
    np.testing.assert_array_equal(out.grid[:, 1, 0], expected[1].m)
