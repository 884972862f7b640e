"""Closed-form radially symmetric gradient fields"""
import enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ergodiff.core.errors import SingularityError


class PotentialKind(str, enum.Enum):
    """Shape of the potential V with b = -grad V"""
    ATTRACTIVE = "attractive"          # V = r^alpha
    REPULSIVE_WELL = "repulsive-well"  # V = -r^(-alpha)


class RadialGradientField(BaseModel):
    """b = -grad V for a power-law potential; consumed by the classifier only"""
    model_config = ConfigDict(frozen=True)

    dim: int = Field(gt=0)
    alpha: float = Field(gt=0)
    kind: PotentialKind

    @property
    def name(self) -> str:
        return f"{self.kind.value}-{self.dim}d-alpha{self.alpha:g}"

    def potential(self, r):
        r = np.asarray(r, dtype=np.float64)
        if self.kind is PotentialKind.ATTRACTIVE:
            return r ** self.alpha
        return -(r ** -self.alpha)

    def radial_factor(self, r):
        """Scalar g(r) with b(x) = g(r) x"""
        r = np.asarray(r, dtype=np.float64)
        if self.kind is PotentialKind.ATTRACTIVE:
            return -self.alpha * r ** (self.alpha - 2.0)
        return -self.alpha * r ** (-self.alpha - 2.0)

    def c_radial(self, r):
        """C = 2 x.b as a function of r alone"""
        r = np.asarray(r, dtype=np.float64)
        if self.kind is PotentialKind.ATTRACTIVE:
            return -2.0 * self.alpha * r ** self.alpha
        return -2.0 * self.alpha * r ** -self.alpha

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        r = np.linalg.norm(x, axis=-1)
        at_origin = r == 0.0
        if np.any(at_origin):
            regular = self.kind is PotentialKind.ATTRACTIVE and self.alpha >= 1.0
            if not regular:
                raise SingularityError(f"{self.name} is singular at r=0")
        safe_r = np.where(at_origin, 1.0, r)
        factor = np.where(at_origin, 0.0, self.radial_factor(safe_r))
        return factor[..., None] * x

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)
