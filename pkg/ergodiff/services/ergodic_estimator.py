"""Running time averages f_T = (1/T) int_0^T f(X_t) dt over simulated ensembles"""
import logging
import math

import numpy as np
from scipy.integrate import dblquad
from scipy.special import gamma

from ergodiff.config import settings
from ergodiff.models.ergodic import (
    DiagnosticResult,
    EnsembleSummary,
    ErgodicSeries,
    IndicatorBall,
    OccupationRow,
    StartBox,
)
from ergodiff.models.polynomial import PolyDriftField
from ergodiff.models.trajectory import Trajectory
from ergodiff.schemas.simulation import Scheme, SimulationConfig
from ergodiff.services.sde_integrator import simulate_parallel

logger = logging.getLogger(__name__)

# Separates the starting-point stream from the per-trajectory noise streams
START_TAG = 0x53544152

_ROOT_HALF = math.sqrt(0.5)
FIGURE_CENTERS: list[tuple[float, float]] = [
    (0.0, 0.0),
    (2.0, 0.0),
    (0.0, 2.0),
    (3.0, 0.0),
    (0.0, 3.0),
    (2.0 * _ROOT_HALF, 2.0 * _ROOT_HALF),
    (3.0 * _ROOT_HALF, 3.0 * _ROOT_HALF),
]


def sample_starts(n_traj: int, box: StartBox, master_seed: int) -> np.ndarray:
    """Uniform starting points in the box, shape (n_traj, dim)"""
    if n_traj < 1:
        raise ValueError(f"need at least one trajectory, got {n_traj}")
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, START_TAG]))
    return rng.uniform(box.lower, box.upper, size=(n_traj, box.dim))


def time_average(trajectory: Trajectory, f: IndicatorBall) -> ErgodicSeries:
    """Left-endpoint running averages: f_T = (1/n) sum_{i<n} f(Y_i) at T = n stride delta"""
    if len(trajectory) < 2 and not trajectory.exploded:
        raise ValueError("trajectory has no checkpoint interval to average over")
    # a path that exploded before its first checkpoint yields an empty series
    values = f.evaluate(trajectory.states[:-1])
    # indicator counts are integers, so the cumulative sum is exact
    averages = np.cumsum(values) / np.arange(1, len(values) + 1)
    config = trajectory.config
    return ErgodicSeries(
        times=trajectory.times[1:].copy(),
        averages=averages,
        master_seed=config.master_seed,
        trajectory_index=config.trajectory_index,
        start=tuple(float(v) for v in trajectory.start),
        ball=f,
        exploded=trajectory.exploded,
    )


def simulate_ensemble(
    field: PolyDriftField,
    starts,
    horizon: float,
    delta: float,
    master_seed: int = 0,
    scheme: Scheme | str = Scheme.TAYLOR15_FULL,
    checkpoint_stride: int | None = None,
    guard_radius: float | None = None,
    workers: int | None = None,
    mirror: bool = False,
) -> list[Trajectory]:
    """Trajectory i starts at starts[i] and uses noise stream i.

    mirror=True runs the antipodal ensemble: negated starts driven by negated noise.
    """
    starts = np.asarray(starts, dtype=np.float64)
    if mirror:
        starts = -starts
    config = SimulationConfig(
        field_name=field.name,
        delta=delta,
        horizon=horizon,
        start=tuple(float(v) for v in starts[0]),
        scheme=Scheme.parse(scheme),
        master_seed=master_seed,
        checkpoint_stride=checkpoint_stride or settings.checkpoint_stride,
        guard_radius=guard_radius or settings.guard_radius,
        negate_noise=mirror,
    )
    return simulate_parallel(
        field, config, starts, list(range(len(starts))), workers or settings.workers
    )


def summarize(
    series: list[ErgodicSeries], ball: IndicatorBall, box: StartBox, master_seed: int
) -> EnsembleSummary:
    """Cross-trajectory mean and standard deviation at every checkpoint"""
    completed = [s for s in series if not s.exploded]
    if completed:
        stack = np.stack([s.averages for s in completed])
        times = completed[0].times
        mean = stack.mean(axis=0)
        std = stack.std(axis=0, ddof=1) if len(completed) > 1 else np.zeros_like(mean)
    else:
        times = mean = std = np.empty(0)
    return EnsembleSummary(
        ball=ball,
        start_box=box,
        master_seed=master_seed,
        series=series,
        times=times,
        mean=mean,
        std=std,
    )


def run_ensemble(
    field: PolyDriftField,
    f: IndicatorBall,
    n_traj: int,
    T: float,
    delta: float,
    start_box: StartBox | None = None,
    master_seed: int = 0,
    scheme: Scheme | str = Scheme.TAYLOR15_FULL,
    checkpoint_stride: int | None = None,
    workers: int | None = None,
    mirror: bool = False,
) -> EnsembleSummary:
    """Sample starts from the box, simulate and average f along every path"""
    box = start_box or StartBox.square(-10.0, 10.0, field.dim)
    starts = sample_starts(n_traj, box, master_seed)
    trajectories = simulate_ensemble(
        field, starts, T, delta, master_seed, scheme,
        checkpoint_stride=checkpoint_stride, workers=workers, mirror=mirror,
    )
    summary = summarize([time_average(t, f) for t in trajectories], f, box, master_seed)
    if summary.exploded_indices:
        logger.warning(
            "%d of %d trajectories exploded: %s",
            len(summary.exploded_indices), n_traj, summary.exploded_indices,
        )
    logger.info(
        "Ensemble of %d for ball at %s: terminal mean %.6g", n_traj, f.center, summary.terminal_mean
    )
    return summary


def ensembles_for_centers(
    field: PolyDriftField,
    centers: list[tuple[float, ...]],
    T: float,
    delta: float,
    n_traj: int = 8,
    start_box: StartBox | None = None,
    master_seed: int = 0,
    radius: float = 1.0,
    scheme: Scheme | str = Scheme.TAYLOR15_FULL,
    checkpoint_stride: int | None = None,
    workers: int | None = None,
) -> list[EnsembleSummary]:
    """One ensemble per ball center, all evaluated on the same simulated paths"""
    box = start_box or StartBox.square(-10.0, 10.0, field.dim)
    starts = sample_starts(n_traj, box, master_seed)
    trajectories = simulate_ensemble(
        field, starts, T, delta, master_seed, scheme,
        checkpoint_stride=checkpoint_stride, workers=workers,
    )
    summaries = []
    for center in centers:
        ball = IndicatorBall(center=tuple(center), radius=radius)
        series = [time_average(t, ball) for t in trajectories]
        summaries.append(summarize(series, ball, box, master_seed))
    return summaries


def occupation_table(summaries: list[EnsembleSummary]) -> list[OccupationRow]:
    return [
        OccupationRow(
            center=s.ball.center,
            terminal_mean=s.terminal_mean,
            terminal_std=s.terminal_std,
            standard_error=s.standard_error,
            n_completed=len(s.completed),
        )
        for s in summaries
    ]


def occupation_comparison(
    field: PolyDriftField,
    centers: list[tuple[float, ...]],
    T: float,
    delta: float,
    **kwargs,
) -> list[OccupationRow]:
    """Terminal f_T per ball center"""
    return occupation_table(ensembles_for_centers(field, centers, T, delta, **kwargs))


def _batch_standard_error(window: np.ndarray, n_batches: int) -> float:
    means = np.array([b.mean() for b in np.array_split(window, n_batches)])
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def convergence_diagnostic(
    series: ErgodicSeries,
    window_fraction: float | None = None,
    n_batches: int | None = None,
) -> DiagnosticResult:
    """Compare mean occupation over the last window with the window before it.

    The occupation per checkpoint interval is recovered from f_T; windows are
    split into batches whose means give the standard errors. Stabilized iff
    the difference is within 3 pooled standard errors.
    """
    window_fraction = window_fraction or settings.diagnostic.window_fraction
    n_batches = n_batches or settings.diagnostic.n_batches
    if not 0 < window_fraction < 0.5:
        raise ValueError(f"window_fraction must lie in (0, 1/2), got {window_fraction}")

    times = np.concatenate([[0.0], series.times])
    occupation = np.concatenate([[0.0], series.times * series.averages])
    raw = np.diff(occupation) / np.diff(times)
    width = int(window_fraction * len(raw))
    if width < 2:
        raise ValueError(f"series of {len(raw)} points is shorter than two windows")

    last, previous = raw[-width:], raw[-2 * width:-width]
    batches = min(n_batches, width)
    pooled = math.hypot(
        _batch_standard_error(last, batches), _batch_standard_error(previous, batches)
    )
    drift = float(last.mean() - previous.mean())
    return DiagnosticResult(
        stabilized=abs(drift) <= 3.0 * pooled + 1e-12,
        drift_of_mean=drift,
        pooled_standard_error=pooled,
    )


def stabilization_time(series: ErgodicSeries, tolerance: float = 0.01) -> float:
    """First checkpoint time after which f_T stays within tolerance of its terminal value"""
    if not len(series):
        return math.nan
    off = np.abs(series.averages - series.averages[-1]) >= tolerance
    if not off.any():
        return float(series.times[0])
    last_off = int(np.nonzero(off)[0][-1])
    return float(series.times[min(last_off + 1, len(series) - 1)])


def invariant_ball_mass(
    alpha: float, center: tuple[float, float] = (0.0, 0.0), radius: float = 1.0
) -> float:
    """mu(B) for the planar field b = -grad(r^alpha), density exp(-2 r^alpha)/Z"""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if radius <= 0:
        return 0.0
    # Z = int exp(-2 r^alpha) 2 pi r dr
    norm = 2.0 * math.pi * gamma(2.0 / alpha) / (alpha * 2.0 ** (2.0 / alpha))
    cx, cy = center

    def density(theta, rho):
        x = cx + rho * math.cos(theta)
        y = cy + rho * math.sin(theta)
        return math.exp(-2.0 * math.hypot(x, y) ** alpha) * rho

    mass, _ = dblquad(density, 0.0, radius, 0.0, 2.0 * math.pi, epsabs=1e-12, epsrel=1e-10)
    return mass / norm
