"""Radial envelope profiles consumed by the recurrence classifier"""
import math
from typing import Callable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr
from scipy.interpolate import CubicSpline

RadialFunction = Callable[[np.ndarray], np.ndarray]
# I(r0, r) for r of any shape
IntegralFunction = Callable[[float, np.ndarray], np.ndarray]

Which = Literal["upper", "lower"]


class RadialProfile(BaseModel):
    """beta_upper/beta_lower envelopes of d - 1 + C on spheres |x| = r.

    Closed-form profiles also carry I_upper/I_lower; sampled ones are
    integrated numerically.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    dim: int = Field(gt=0)
    beta_upper: RadialFunction
    beta_lower: RadialFunction
    source: str
    i_upper: IntegralFunction | None = None
    i_lower: IntegralFunction | None = None

    _tables: dict = PrivateAttr(default_factory=dict)

    @property
    def closed_form(self) -> bool:
        return self.i_upper is not None and self.i_lower is not None

    def beta(self, which: Which, r) -> np.ndarray:
        fn = self.beta_upper if which == "upper" else self.beta_lower
        return np.asarray(fn(np.asarray(r, dtype=np.float64)), dtype=np.float64)

    def integral_function(
        self, which: Which, r0: float, r_max: float, per_doubling: int = 64
    ) -> Callable[[np.ndarray], np.ndarray]:
        """r -> I(r) on [r0, r_max]; spline-integrated in log r for sampled profiles"""
        closed = self.i_upper if which == "upper" else self.i_lower
        if closed is not None:
            return lambda r: np.asarray(closed(r0, np.asarray(r, dtype=np.float64)))
        key = (which, r0, r_max, per_doubling)
        if key not in self._tables:
            doublings = max(1, math.ceil(math.log2(r_max / r0)))
            v = np.linspace(math.log(r0), math.log(r_max), doublings * per_doubling + 1)
            # int beta(u)/u du = int beta(e^v) dv
            antiderivative = CubicSpline(v, self.beta(which, np.exp(v))).antiderivative()
            self._tables[key] = antiderivative
        antiderivative = self._tables[key]
        origin = float(antiderivative(math.log(r0)))
        return lambda r: antiderivative(np.log(np.asarray(r, dtype=np.float64))) - origin
