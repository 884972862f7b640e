"""Run manifest schema"""
from typing import Any

from pydantic import BaseModel, Field


class OutputFile(BaseModel):
    path: str
    sha256: str


class RunManifest(BaseModel):
    """Everything needed to re-run a subcommand and check its outputs"""
    subcommand: str
    configuration: dict[str, Any]
    master_seed: int
    version: str
    outputs: list[OutputFile] = []
    duration_seconds: float = Field(default=0.0, ge=0)
