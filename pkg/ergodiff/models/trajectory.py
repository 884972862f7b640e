"""Noise increments and simulated paths"""
import numpy as np
from pydantic import BaseModel, ConfigDict

from ergodiff.schemas.simulation import SimulationConfig


class NoiseIncrement(BaseModel):
    """Brownian increment dW and time-integrated increment dZ over one step (or a batch)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dW: np.ndarray
    dZ: np.ndarray

    def negated(self) -> "NoiseIncrement":
        return NoiseIncrement(dW=-self.dW, dZ=-self.dZ)


class Trajectory(BaseModel):
    """Checkpointed path of one simulation"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    states: np.ndarray
    config: SimulationConfig
    exploded: bool = False
    explosion_time: float | None = None

    @property
    def start(self) -> np.ndarray:
        return self.states[0]

    def __len__(self) -> int:
        return len(self.times)
