"""Test functions, running time averages and ensemble summaries"""
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class IndicatorBall(BaseModel):
    """f(x) = 1 if |x - center| < radius else 0 (open ball)"""
    model_config = ConfigDict(frozen=True)

    center: tuple[float, ...] = (0.0, 0.0)
    radius: float = Field(default=1.0, ge=0)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        offset = x - np.asarray(self.center, dtype=np.float64)
        return (np.sum(offset * offset, axis=-1) < self.radius * self.radius).astype(np.float64)

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    def mirrored(self) -> "IndicatorBall":
        return IndicatorBall(center=tuple(-c for c in self.center), radius=self.radius)


class StartBox(BaseModel):
    """Axis-aligned box the ensemble starting points are drawn from"""
    model_config = ConfigDict(frozen=True)

    lower: tuple[float, ...] = (-10.0, -10.0)
    upper: tuple[float, ...] = (10.0, 10.0)

    @model_validator(mode="after")
    def _check_bounds(self) -> "StartBox":
        if len(self.lower) != len(self.upper):
            raise ValueError("box bounds must have the same dimension")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError(f"empty box {self.lower} .. {self.upper}")
        return self

    @classmethod
    def square(cls, low: float, high: float, dim: int = 2) -> "StartBox":
        return cls(lower=(low,) * dim, upper=(high,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)


class ErgodicSeries(BaseModel):
    """f_T at the checkpoint times T_1, T_2, ... of one trajectory"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    averages: np.ndarray
    master_seed: int
    trajectory_index: int
    start: tuple[float, ...]
    ball: IndicatorBall
    exploded: bool = False

    @property
    def terminal(self) -> float:
        return float(self.averages[-1]) if len(self.averages) else float("nan")

    def __len__(self) -> int:
        return len(self.times)


class DiagnosticResult(BaseModel):
    stabilized: bool
    drift_of_mean: float
    pooled_standard_error: float


class EnsembleSummary(BaseModel):
    """Series of every trajectory plus cross-trajectory statistics per checkpoint.

    Statistics use the trajectories that stayed inside the guard radius.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    ball: IndicatorBall
    start_box: StartBox
    master_seed: int
    series: list[ErgodicSeries]
    times: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    @property
    def completed(self) -> list[ErgodicSeries]:
        return [s for s in self.series if not s.exploded]

    @property
    def exploded_indices(self) -> list[int]:
        return [s.trajectory_index for s in self.series if s.exploded]

    @property
    def terminal_mean(self) -> float:
        return float(self.mean[-1]) if len(self.mean) else float("nan")

    @property
    def terminal_std(self) -> float:
        return float(self.std[-1]) if len(self.std) else float("nan")

    @property
    def standard_error(self) -> float:
        n = len(self.completed)
        return self.terminal_std / np.sqrt(n) if n else float("nan")


class OccupationRow(BaseModel):
    center: tuple[float, ...]
    terminal_mean: float
    terminal_std: float
    standard_error: float
    n_completed: int
