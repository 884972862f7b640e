"""Strong Taylor order-1.5 and Euler-Maruyama integration of dX = b(X)dt + dW"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

import numpy as np
from pydantic import BaseModel

from ergodiff.config import settings
from ergodiff.core.errors import NumericalExplosionError
from ergodiff.models.polynomial import PolyDriftField, evaluate_many
from ergodiff.models.trajectory import NoiseIncrement, Trajectory
from ergodiff.schemas.simulation import Scheme, SimulationConfig
from ergodiff.services.drift_fields import generator_drift_terms, jacobian, load_field
from ergodiff.services.noise import NOISE_BLOCK, noise_range, refine_increments

logger = logging.getLogger(__name__)


class CompiledDrift:
    """b, its Jacobian and L0 b as one list of polynomials sharing a power table"""

    def __init__(self, field: PolyDriftField):
        self.field = field
        self.dim = d = field.dim
        jac = jacobian(field)
        self._polys = (
            list(field.components)
            + [jac[k][j] for k in range(d) for j in range(d)]
            + list(generator_drift_terms(field))
        )

    def drift(self, y: np.ndarray) -> np.ndarray:
        return np.stack(evaluate_many(self.field.components, y), axis=-1)

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        d = self.dim
        values = evaluate_many(self._polys[d:d + d * d], y)
        return np.stack(values, axis=-1).reshape(y.shape[:-1] + (d, d))

    def taylor_terms(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        d = self.dim
        values = evaluate_many(self._polys, y)
        b = np.stack(values[:d], axis=-1)
        jac = np.stack(values[d:d + d * d], axis=-1).reshape(y.shape[:-1] + (d, d))
        l0 = np.stack(values[d + d * d:], axis=-1)
        return b, jac, l0


@lru_cache(maxsize=32)
def compile_drift(field: PolyDriftField) -> CompiledDrift:
    return CompiledDrift(field)


def _taylor_step(
    compiled: CompiledDrift,
    y: np.ndarray,
    dW: np.ndarray,
    dZ: np.ndarray,
    delta: float,
    diagonal: bool,
) -> np.ndarray:
    b, jac, l0 = compiled.taylor_terms(y)
    if diagonal:
        mixed = np.stack(
            [jac[..., k, k] * dZ[..., k] for k in range(compiled.dim)], axis=-1
        )
    else:
        mixed = np.zeros_like(y)
        for j in range(compiled.dim):
            mixed = mixed + jac[..., :, j] * dZ[..., j:j + 1]
    return y + b * delta + dW + 0.5 * l0 * (delta * delta) + mixed


def _euler_step(
    compiled: CompiledDrift, y: np.ndarray, dW: np.ndarray, delta: float
) -> np.ndarray:
    return y + compiled.drift(y) * delta + dW


def _stepper(compiled: CompiledDrift, scheme: Scheme, delta: float):
    if scheme is Scheme.EULER:
        return lambda y, dW, dZ: _euler_step(compiled, y, dW, delta)
    diagonal = scheme is Scheme.TAYLOR15_DIAGONAL
    return lambda y, dW, dZ: _taylor_step(compiled, y, dW, dZ, delta, diagonal)


def step_taylor15(
    field: PolyDriftField,
    y,
    noise: NoiseIncrement,
    delta: float,
    variant: str = "full",
) -> np.ndarray:
    """One order-1.5 step.

    variant="full" uses sum_j (d_j b_k) dZ^j, variant="diagonal" keeps only
    (d_k b_k) dZ^k.
    """
    if variant not in ("full", "diagonal"):
        raise ValueError(f"unknown Taylor variant '{variant}'")
    y = np.asarray(y, dtype=np.float64)
    return _taylor_step(
        compile_drift(field),
        y,
        np.asarray(noise.dW, dtype=np.float64),
        np.asarray(noise.dZ, dtype=np.float64),
        delta,
        variant == "diagonal",
    )


def step_euler(field: PolyDriftField, y, noise: NoiseIncrement, delta: float) -> np.ndarray:
    """y + b(y) delta + dW"""
    y = np.asarray(y, dtype=np.float64)
    return _euler_step(compile_drift(field), y, np.asarray(noise.dW, dtype=np.float64), delta)


def _integrate(
    field: PolyDriftField, config: SimulationConfig, starts: np.ndarray, indices: list[int]
) -> list[Trajectory]:
    compiled = compile_drift(field)
    step = _stepper(compiled, config.scheme, config.delta)
    n, d = starts.shape
    n_steps, stride = config.n_steps, config.checkpoint_stride
    guard_sq = config.guard_radius ** 2

    states = np.full((n, config.n_checkpoints, d), np.nan)
    states[:, 0] = starts
    alive = np.ones(n, dtype=bool)
    explosion_step = np.zeros(n, dtype=np.int64)
    y = starts.copy()

    done = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while done < n_steps and alive.any():
            count = min(NOISE_BLOCK - done % NOISE_BLOCK, n_steps - done)
            if config.zero_noise:
                dW = dZ = np.zeros((n, count, d))
            else:
                noise = noise_range(config.master_seed, indices, done, count, config.delta, d)
                if config.negate_noise:
                    noise = noise.negated()
                dW, dZ = noise.dW, noise.dZ
            for s in range(count):
                y_new = step(y, dW[:, s], dZ[:, s])
                done += 1
                blown = alive & ~((y_new * y_new).sum(axis=-1) <= guard_sq)
                if blown.any():
                    explosion_step[blown] = done
                    alive &= ~blown
                y = np.where(alive[:, None], y_new, y)
                if done % stride == 0:
                    states[alive, done // stride] = y[alive]

    trajectories = []
    for i, index in enumerate(indices):
        row_config = config.model_copy(
            update={"start": tuple(float(v) for v in starts[i]), "trajectory_index": index}
        )
        if alive[i]:
            last = config.n_checkpoints - 1
            exploded, when = False, None
        else:
            last = (int(explosion_step[i]) - 1) // stride
            exploded, when = True, float(explosion_step[i]) * config.delta
            logger.warning(
                "Trajectory %d left the guard radius %g at t=%g",
                index, config.guard_radius, when,
            )
        trajectories.append(
            Trajectory(
                times=np.arange(last + 1) * (stride * config.delta),
                states=states[i, :last + 1].copy(),
                config=row_config,
                exploded=exploded,
                explosion_time=when,
            )
        )
    return trajectories


def simulate(config: SimulationConfig, field: PolyDriftField | None = None) -> Trajectory:
    """Integrate one path; deterministic given the config"""
    if field is None:
        field = load_field(config.field_name)
    starts = np.asarray(config.start, dtype=np.float64).reshape(1, -1)
    if starts.shape[1] != field.dim:
        raise ValueError(f"start {config.start} does not match field dim {field.dim}")
    return _integrate(field, config, starts, [config.trajectory_index])[0]


def simulate_batch(
    field: PolyDriftField,
    config: SimulationConfig,
    starts,
    trajectory_indices: list[int],
) -> list[Trajectory]:
    """Integrate several paths side by side; row i uses the noise stream of trajectory_indices[i]"""
    starts = np.asarray(starts, dtype=np.float64).reshape(len(trajectory_indices), field.dim)
    return _integrate(field, config, starts, list(trajectory_indices))


def simulate_parallel(
    field: PolyDriftField,
    config: SimulationConfig,
    starts,
    trajectory_indices: list[int],
    workers: int = 1,
) -> list[Trajectory]:
    """simulate_batch split over a process pool; results come back in input order"""
    starts = np.asarray(starts, dtype=np.float64).reshape(len(trajectory_indices), field.dim)
    indices = list(trajectory_indices)
    if workers <= 1 or len(indices) <= 1:
        return simulate_batch(field, config, starts, indices)
    bounds = np.linspace(0, len(indices), min(workers, len(indices)) + 1).astype(int)
    chunks = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    logger.info("Simulating %d trajectories on %d workers", len(indices), len(chunks))
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        futures = [
            pool.submit(simulate_batch, field, config, starts[lo:hi], indices[lo:hi])
            for lo, hi in chunks
        ]
        results = []
        for future in futures:
            results.extend(future.result())
    return results


def integrate_endpoints(
    field: PolyDriftField,
    scheme: Scheme,
    starts: np.ndarray,
    noise: NoiseIncrement,
    delta: float,
    guard_radius: float = math.inf,
) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints of paths driven by prescribed increments of shape (n, steps, d).

    Returns the endpoints and a mask of the paths that stayed inside the guard
    radius and inside the region where delta |J(y)| < 1. Flagged rows are frozen
    at their last accepted state.
    """
    compiled = compile_drift(field)
    step = _stepper(compiled, scheme, delta)
    y = np.array(starts, dtype=np.float64)
    kept = np.ones(len(y), dtype=bool)
    guard_sq = guard_radius ** 2
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(noise.dW.shape[1]):
            y_new = step(y, noise.dW[:, s], noise.dZ[:, s])
            inside = (y_new * y_new).sum(axis=-1) <= guard_sq
            stable = delta * np.linalg.norm(compiled.jacobian(y), ord=2, axis=(-2, -1)) < 1.0
            kept &= inside & stable
            y = np.where(kept[:, None], y_new, y)
    return y, kept


class OrderEstimate(BaseModel):
    """Strong errors E|Y_T^delta - Y_T^ref| and their fitted log-log slope"""
    scheme: Scheme
    deltas: list[float]
    errors: list[float]
    slope: float
    delta_ref: float
    n_paths: int
    n_dropped: int = 0


def _commensurate(value: float, unit: float, what: str) -> int:
    ratio = round(value / unit)
    if ratio < 1 or abs(ratio * unit - value) > 1e-9 * value:
        raise ValueError(f"{what} {value} is not an integer multiple of {unit}")
    return ratio


def strong_order_estimate(
    field: PolyDriftField,
    start,
    T: float,
    deltas: list[float],
    n_paths: int,
    delta_ref: float | None = None,
    scheme: Scheme = Scheme.TAYLOR15_FULL,
    master_seed: int = 0,
    chunk_size: int = 50,
    guard_radius: float | None = None,
) -> OrderEstimate:
    """Coupled-path strong error at each delta against a taylor15_full reference at delta_ref.

    A path is dropped from every error mean when any of its runs is flagged by
    integrate_endpoints; the count is reported as n_dropped.
    """
    scheme = Scheme.parse(scheme)
    deltas = sorted((float(d) for d in deltas), reverse=True)
    delta_ref = delta_ref or deltas[-1] / 16
    guard_radius = guard_radius or settings.guard_radius
    n_ref = _commensurate(T, delta_ref, "horizon")
    factors = [_commensurate(d, delta_ref, "time step") for d in deltas]
    for m in factors:
        if n_ref % m:
            raise ValueError(f"horizon {T} is not a whole number of steps of {m * delta_ref}")

    start = np.asarray(start, dtype=np.float64)
    totals = np.zeros(len(deltas))
    n_kept = 0
    for lo in range(0, n_paths, chunk_size):
        indices = list(range(lo, min(lo + chunk_size, n_paths)))
        fine = noise_range(master_seed, indices, 0, n_ref, delta_ref, field.dim)
        y0 = np.tile(start, (len(indices), 1))
        reference, kept = integrate_endpoints(
            field, Scheme.TAYLOR15_FULL, y0, fine, delta_ref, guard_radius
        )
        ends = []
        for m in factors:
            coarse = refine_increments(fine, m, delta_ref)
            end, ok = integrate_endpoints(field, scheme, y0, coarse, m * delta_ref, guard_radius)
            ends.append(end)
            kept &= ok
        for i, end in enumerate(ends):
            totals[i] += np.linalg.norm(end[kept] - reference[kept], axis=-1).sum()
        n_kept += int(kept.sum())

    n_dropped = n_paths - n_kept
    if n_kept == 0:
        raise NumericalExplosionError(f"every {scheme.value} path diverged in the order check")
    if n_dropped:
        logger.warning(
            "%d of %d %s paths left the stable region and were dropped",
            n_dropped, n_paths, scheme.value,
        )
    errors = totals / n_kept

    if np.all(errors > 0):
        slope = float(np.polyfit(np.log(deltas), np.log(errors), 1)[0])
    else:
        slope = math.nan
    logger.info("Strong order of %s: slope %.3f", scheme.value, slope)
    return OrderEstimate(
        scheme=scheme,
        deltas=deltas,
        errors=[float(e) for e in errors],
        slope=slope,
        delta_ref=delta_ref,
        n_paths=n_paths,
        n_dropped=n_dropped,
    )
