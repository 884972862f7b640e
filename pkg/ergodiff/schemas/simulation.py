"""Simulation configuration schemas"""
import enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Scheme(str, enum.Enum):
    """One-step schemes for dX = b(X)dt + dW"""
    TAYLOR15_FULL = "taylor15_full"
    TAYLOR15_DIAGONAL = "taylor15_diagonal"
    EULER = "euler"

    @classmethod
    def parse(cls, value: "Scheme | str") -> "Scheme":
        """Accept the short CLI spelling `taylor15` for the full variant"""
        if value == "taylor15":
            return cls.TAYLOR15_FULL
        return cls(value)


class SimulationConfig(BaseModel):
    """Time step, horizon, seed, scheme and starting point of one trajectory"""
    model_config = ConfigDict(frozen=True)

    field_name: str = "z4"
    delta: float = Field(gt=0)
    horizon: float = Field(gt=0)
    start: tuple[float, ...] = (0.0, 0.0)
    scheme: Scheme = Scheme.TAYLOR15_FULL
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    checkpoint_stride: int = Field(default=100, ge=1)
    trajectory_index: int = Field(default=0, ge=0)
    guard_radius: float = Field(default=1e6, gt=0)
    # Test hooks: drive the path with zero or with negated noise
    zero_noise: bool = False
    negate_noise: bool = False

    @model_validator(mode="before")
    @classmethod
    def _parse_scheme(cls, data):
        if isinstance(data, dict) and "scheme" in data:
            data = {**data, "scheme": Scheme.parse(data["scheme"])}
        return data

    @model_validator(mode="after")
    def _check_grid(self) -> "SimulationConfig":
        if self.horizon < self.delta:
            raise ValueError(f"horizon {self.horizon} is shorter than one step {self.delta}")
        if self.n_steps % self.checkpoint_stride:
            raise ValueError(
                f"checkpoint_stride {self.checkpoint_stride} does not divide "
                f"the {self.n_steps} steps of the run"
            )
        return self

    @property
    def n_steps(self) -> int:
        return max(1, round(self.horizon / self.delta))

    @property
    def n_checkpoints(self) -> int:
        """Recorded samples, the start included"""
        return self.n_steps // self.checkpoint_stride + 1
