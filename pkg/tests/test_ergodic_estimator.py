"""Tests for running time averages and their diagnostics"""
import math

import numpy as np
import pytest

from ergodiff.models.ergodic import ErgodicSeries, IndicatorBall, StartBox
from ergodiff.models.trajectory import Trajectory
from ergodiff.schemas.simulation import SimulationConfig
from ergodiff.services.ergodic_estimator import (
    FIGURE_CENTERS,
    convergence_diagnostic,
    ensembles_for_centers,
    invariant_ball_mass,
    occupation_comparison,
    run_ensemble,
    sample_starts,
    stabilization_time,
    summarize,
    time_average,
)
from ergodiff.services.sde_integrator import simulate_batch

BALL = IndicatorBall(center=(0.0, 0.0), radius=1.0)


def _trajectory(states, delta=0.1, exploded=False):
    states = np.asarray(states, dtype=np.float64)
    n = len(states) - 1
    config = SimulationConfig(delta=delta, horizon=max(n, 1) * delta, checkpoint_stride=1)
    return Trajectory(
        times=np.arange(len(states)) * delta, states=states, config=config, exploded=exploded
    )


def _series(averages, dt=1.0):
    averages = np.asarray(averages, dtype=np.float64)
    return ErgodicSeries(
        times=np.arange(1, len(averages) + 1) * dt,
        averages=averages,
        master_seed=0,
        trajectory_index=0,
        start=(0.0, 0.0),
        ball=BALL,
    )


def _series_from_occupation(raw, dt=1.0):
    raw = np.asarray(raw, dtype=np.float64)
    times = np.arange(1, len(raw) + 1) * dt
    return _series(np.cumsum(raw * dt) / times, dt)


def test_indicator_ball_is_open():
    """Test points on the sphere are outside the ball"""
    ball = IndicatorBall(center=(2.0, 0.0), radius=1.0)
    values = ball.evaluate(np.array([[2.0, 0.0], [2.5, 0.5], [3.0, 0.0], [0.0, 0.0]]))
    assert values.tolist() == [1.0, 1.0, 0.0, 0.0]
    assert ball.mirrored().center == (-2.0, 0.0)


def test_start_box():
    """Test box construction and validation"""
    box = StartBox.square(-1.0, 2.0, 3)
    assert box.dim == 3
    assert box.lower == (-1.0, -1.0, -1.0)
    with pytest.raises(ValueError):
        StartBox(lower=(1.0, 1.0), upper=(0.0, 2.0))


def test_sample_starts():
    """Test starting points are reproducible and inside the box"""
    box = StartBox.square(-10.0, 10.0)
    starts = sample_starts(50, box, 1)
    assert starts.shape == (50, 2)
    assert np.all((starts >= -10.0) & (starts <= 10.0))
    assert np.array_equal(starts, sample_starts(50, box, 1))
    assert not np.array_equal(starts, sample_starts(50, box, 2))
    with pytest.raises(ValueError):
        sample_starts(0, box, 1)


def test_constant_path_average():
    """Test a path resting inside the ball has f_T = 1 throughout"""
    series = time_average(_trajectory([[0.1, 0.1]] * 11), BALL)
    assert len(series) == 10
    assert np.allclose(series.times, np.arange(1, 11) * 0.1)
    assert np.all(series.averages == 1.0)
    assert series.terminal == 1.0


def test_alternating_path_average():
    """Test left-endpoint averages of a path hopping in and out of the ball"""
    states = [[0.0, 0.0] if k % 2 == 0 else [5.0, 5.0] for k in range(7)]
    series = time_average(_trajectory(states), BALL)
    expected = [1.0, 1 / 2, 2 / 3, 2 / 4, 3 / 5, 3 / 6]
    assert np.allclose(series.averages, expected, rtol=0, atol=1e-15)


def test_running_average_recursion():
    """Test f_{n+1} = (n f_n + f(Y_n))/(n + 1) along a random path"""
    states = np.random.default_rng(0).normal(size=(200, 2))
    series = time_average(_trajectory(states), BALL)
    values = BALL.evaluate(states)
    f = series.averages
    for n in range(1, len(f)):
        assert f[n] == pytest.approx((n * f[n - 1] + values[n]) / (n + 1), abs=1e-14)


def test_short_paths():
    """Test a path without a checkpoint interval has no average unless it exploded"""
    with pytest.raises(ValueError):
        time_average(_trajectory([[0.0, 0.0]]), BALL)
    series = time_average(_trajectory([[0.0, 0.0]], exploded=True), BALL)
    assert len(series) == 0
    assert series.exploded
    assert math.isnan(series.terminal)
    assert math.isnan(stabilization_time(series))


def test_summary_skips_exploded_paths():
    """Test ensemble statistics use only the paths that stayed bounded"""
    good = [time_average(_trajectory([[0.0, 0.0]] * 5), BALL) for _ in range(2)]
    bad = time_average(_trajectory([[9.0, 9.0]] * 5, exploded=True), BALL)
    bad = bad.model_copy(update={"trajectory_index": 7})
    summary = summarize(good + [bad], BALL, StartBox(), 0)
    assert summary.exploded_indices == [7]
    assert len(summary.completed) == 2
    assert summary.terminal_mean == 1.0
    assert summary.terminal_std == 0.0
    assert summary.standard_error == 0.0


def test_diagnostic_constant_occupation():
    """Test a steady occupation rate counts as stabilized"""
    result = convergence_diagnostic(_series([0.5] * 400), 0.25, 10)
    assert result.stabilized
    assert abs(result.drift_of_mean) < 1e-12


def test_diagnostic_trend():
    """Test a steadily rising occupation rate is flagged"""
    raw = np.linspace(0.0, 1.0, 400)
    result = convergence_diagnostic(_series_from_occupation(raw), 0.25, 10)
    assert not result.stabilized
    assert result.drift_of_mean == pytest.approx(0.25, rel=0.01)


def test_diagnostic_noise():
    """Test stationary noise in the occupation rate passes"""
    raw = (np.random.default_rng(5).random(4000) < 0.3).astype(float)
    result = convergence_diagnostic(_series_from_occupation(raw, dt=0.5), 0.25, 10)
    assert abs(result.drift_of_mean) < 0.1
    assert result.pooled_standard_error > 0


def test_diagnostic_arguments():
    """Test invalid windows are rejected"""
    with pytest.raises(ValueError):
        convergence_diagnostic(_series([0.5] * 100), 0.5, 10)
    with pytest.raises(ValueError):
        convergence_diagnostic(_series([0.5] * 4), 0.25, 10)


def test_stabilization_time():
    """Test the first time after which f_T stays near its final value"""
    series = _series([0.5, 0.2, 0.3, 0.305, 0.3])
    assert stabilization_time(series, 0.01) == 3.0
    assert stabilization_time(_series([0.3] * 5), 0.01) == 1.0


def test_invariant_ball_mass():
    """Test mu(B(0, R)) = 1 - exp(-2R^2) for the quadratic well"""
    expected = 1.0 - math.exp(-2.0)
    assert invariant_ball_mass(2.0, (0.0, 0.0), 1.0) == pytest.approx(expected, rel=1e-8)
    assert invariant_ball_mass(2.0, (0.0, 0.0), 6.0) == pytest.approx(1.0, rel=1e-8)
    assert invariant_ball_mass(4.0, (5.0, 0.0), 0.0) == 0.0
    off_center = invariant_ball_mass(4.0, (2.0, 0.0), 1.0)
    assert 0.0 < off_center < invariant_ball_mass(4.0, (0.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        invariant_ball_mass(-1.0)


def test_antipodal_ensembles_match_exactly(z4_field):
    """Test the mirrored ensemble sees the mirrored ball exactly as often"""
    box = StartBox.square(-1.0, 1.0)
    ball = IndicatorBall(center=(0.5, 0.0), radius=0.5)
    plus = run_ensemble(z4_field, ball, 3, 1.0, 1e-3, start_box=box, master_seed=9)
    minus = run_ensemble(
        z4_field, ball.mirrored(), 3, 1.0, 1e-3, start_box=box, master_seed=9, mirror=True
    )
    for a, b in zip(plus.series, minus.series):
        assert np.array_equal(a.averages, b.averages)
        assert a.start == tuple(-v for v in b.start)


def test_centers_share_paths(z4_field):
    """Test every center is averaged along the same simulated paths"""
    box = StartBox.square(-1.0, 1.0)
    summaries = ensembles_for_centers(
        z4_field, [(0.0, 0.0), (0.0, 0.0)], 0.5, 1e-3, n_traj=2, start_box=box, master_seed=4
    )
    assert len(summaries) == 2
    for a, b in zip(summaries[0].series, summaries[1].series):
        assert np.array_equal(a.averages, b.averages)
    assert len(FIGURE_CENTERS) == 7


def test_occupation_comparison(z4_field):
    """Test the occupation table summarizes one ensemble per center"""
    kwargs = {"n_traj": 3, "start_box": StartBox.square(-1.0, 1.0), "master_seed": 5}
    centers = [(0.0, 0.0), (3.0, 0.0)]
    rows = occupation_comparison(z4_field, centers, 0.5, 1e-3, **kwargs)
    summaries = ensembles_for_centers(z4_field, centers, 0.5, 1e-3, **kwargs)
    assert [row.center for row in rows] == centers
    for row, summary in zip(rows, summaries):
        assert row.terminal_mean == summary.terminal_mean
        assert row.n_completed == 3
        assert 0.0 <= row.terminal_mean <= 1.0


def test_planar_brownian_occupation_vanishes(zero_field):
    """Test null-recurrent planar Brownian motion spends a vanishing share of time in a ball"""
    summary = run_ensemble(
        zero_field, BALL, 16, 50.0, 1e-2, start_box=StartBox.square(-1.0, 1.0),
        master_seed=6, scheme="euler", checkpoint_stride=10,
    )
    assert not summary.exploded_indices
    early = summary.mean[np.searchsorted(summary.times, 5.0)]
    assert summary.terminal_mean < 0.5 * early
    assert summary.terminal_mean < 0.15


def test_diagonal_start_stays_bounded(z4_field):
    """Test z4 paths started at (10, 10) never leave the guard radius"""
    for seed in range(4):
        config = SimulationConfig(
            delta=1e-4, horizon=1.0, start=(10.0, 10.0), master_seed=seed, checkpoint_stride=100
        )
        for trajectory in simulate_batch(z4_field, config, [(10.0, 10.0)] * 4, [0, 1, 2, 3]):
            assert not trajectory.exploded
            assert np.all(np.isfinite(trajectory.states))


@pytest.mark.slow
def test_quartic_well_matches_invariant_mass(quartic_well_field):
    """Test time averages in the quartic well approach mu(B) for density exp(-2 r^4)"""
    ball = IndicatorBall(center=(0.0, 0.0), radius=0.5)
    summary = run_ensemble(
        quartic_well_field, ball, 8, 50.0, 1e-3, start_box=StartBox.square(-1.0, 1.0),
        master_seed=12, checkpoint_stride=10,
    )
    mass = invariant_ball_mass(4.0, (0.0, 0.0), 0.5)
    assert summary.terminal_mean == pytest.approx(mass, abs=3 * summary.standard_error + 0.02)


@pytest.mark.slow
def test_z4_ergodic_reproduction(z4_field):
    """Test agreement across starts, decay across centers and stabilized series"""
    near, middle, far = ensembles_for_centers(
        z4_field,
        [(0.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
        20.0,
        1e-4,
        n_traj=8,
        start_box=StartBox.square(-10.0, 10.0),
        master_seed=0,
    )
    assert not near.exploded_indices

    for series in near.completed:
        assert abs(series.terminal - near.terminal_mean) <= 3 * near.terminal_std + 1e-12
        assert convergence_diagnostic(series, 0.25).stabilized

    for upper, lower in ((near, middle), (middle, far)):
        assert upper.terminal_mean - 3 * upper.standard_error > (
            lower.terminal_mean + 3 * lower.standard_error
        )
