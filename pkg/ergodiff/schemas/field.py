"""Drift field diagnostic schemas"""
from typing import Literal

from pydantic import BaseModel, Field


class RadialDiagnostics(BaseModel):
    """Value of e_r.b at x = (r cos phi, r sin phi)"""
    radius: float = Field(gt=0)
    angle: float
    radial_component: float

    @property
    def direction(self) -> str:
        if self.radial_component < 0:
            return "inward"
        if self.radial_component > 0:
            return "outward"
        return "tangential"


class DriftSector(BaseModel):
    """An arc of the circle |x| = r on which e_r.b keeps one sign"""
    phi_start: float
    phi_end: float
    direction: Literal["inward", "outward"]
