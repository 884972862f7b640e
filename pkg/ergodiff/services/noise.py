"""Counter-based Gaussian noise streams for the integrators.

Every (master_seed, trajectory_index) pair keys its own Philox stream. Steps
are grouped in blocks of NOISE_BLOCK; block b starts at counter (0, b, 0, 0),
so the noise of any step is found without generating its predecessors and
does not depend on execution order.
"""
import math

import numpy as np

from ergodiff.models.trajectory import NoiseIncrement

NOISE_BLOCK = 4096


def stream_key(master_seed: int, trajectory_index: int) -> np.ndarray:
    """128-bit Philox key hashed from the seed and trajectory index"""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(trajectory_index,))
    return seq.generate_state(2, dtype=np.uint64)


def gaussian_block(
    master_seed: int, trajectory_index: int, block_index: int, dim: int = 2
) -> np.ndarray:
    """Standard normals of shape (NOISE_BLOCK, 2, dim): U1 and U2 per step and coordinate"""
    bit_generator = np.random.Philox(
        key=stream_key(master_seed, trajectory_index),
        counter=np.array([0, block_index, 0, 0], dtype=np.uint64),
    )
    return np.random.Generator(bit_generator).standard_normal((NOISE_BLOCK, 2, dim))


def increments_from_gaussians(u: np.ndarray, delta: float) -> NoiseIncrement:
    """dW = U1 sqrt(delta), dZ = delta^(3/2) (U1 + U2/sqrt(3)) / 2"""
    u1 = u[..., 0, :]
    u2 = u[..., 1, :]
    return NoiseIncrement(
        dW=u1 * math.sqrt(delta),
        dZ=0.5 * delta ** 1.5 * (u1 + u2 / math.sqrt(3.0)),
    )


def make_noise_stream(
    master_seed: int, trajectory_index: int, step_index: int, delta: float, dim: int = 2
) -> NoiseIncrement:
    """Noise of a single step"""
    block, row = divmod(step_index, NOISE_BLOCK)
    u = gaussian_block(master_seed, trajectory_index, block, dim)[row]
    return increments_from_gaussians(u, delta)


def gaussian_range(
    master_seed: int, trajectory_index: int, first_step: int, count: int, dim: int = 2
) -> np.ndarray:
    """Normals for steps [first_step, first_step + count), shape (count, 2, dim)"""
    out = np.empty((count, 2, dim))
    filled = 0
    while filled < count:
        block, row = divmod(first_step + filled, NOISE_BLOCK)
        take = min(NOISE_BLOCK - row, count - filled)
        out[filled:filled + take] = gaussian_block(
            master_seed, trajectory_index, block, dim
        )[row:row + take]
        filled += take
    return out


def noise_range(
    master_seed: int,
    trajectory_indices,
    first_step: int,
    count: int,
    delta: float,
    dim: int = 2,
) -> NoiseIncrement:
    """Increments for several trajectories at once, arrays of shape (n_traj, count, dim)"""
    u = np.stack(
        [gaussian_range(master_seed, i, first_step, count, dim) for i in trajectory_indices]
    )
    return increments_from_gaussians(u, delta)


def refine_increments(fine: NoiseIncrement, m: int, fine_delta: float) -> NoiseIncrement:
    """Aggregate m consecutive fine-grid increments into one coarse increment.

    dW_coarse = sum dW_j and dZ_coarse = sum (dZ_j + (W_{t_j} - W_start) fine_delta),
    so both grids follow the same Brownian path. The step axis is the
    second-to-last one of fine.dW.
    """
    if m < 1:
        raise ValueError(f"refinement factor must be positive, got {m}")
    steps = fine.dW.shape[-2]
    if steps % m:
        raise ValueError(f"{steps} fine steps cannot be grouped by {m}")
    if m == 1:
        return fine
    lead = fine.dW.shape[:-2]
    dim = fine.dW.shape[-1]
    dW = fine.dW.reshape(lead + (steps // m, m, dim))
    dZ = fine.dZ.reshape(lead + (steps // m, m, dim))
    # W_{t_j} - W_start: increments strictly before fine step j within the group
    before = np.zeros_like(dW)
    before[..., 1:, :] = np.cumsum(dW[..., :-1, :], axis=-2)
    return NoiseIncrement(
        dW=dW.sum(axis=-2),
        dZ=(dZ + before * fine_delta).sum(axis=-2),
    )
