"""CSV and JSON writers with round-trip exact number formatting"""
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from ergodiff.models.ergodic import (
    DiagnosticResult,
    EnsembleSummary,
    ErgodicSeries,
    OccupationRow,
)
from ergodiff.models.trajectory import Trajectory
from ergodiff.schemas.manifest import OutputFile, RunManifest
from ergodiff.schemas.report import ClassificationReport

logger = logging.getLogger(__name__)

SERIES_HEADER = "T,f_T,trajectory,start_x1,start_x2,center_x1,center_x2"


def fmt(value: float) -> str:
    """17 significant digits: enough to round-trip any double"""
    return f"{float(value):.17g}"


def _write_lines(path: Path, lines: list[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def write_trajectory_csv(trajectory: Trajectory, path: Path) -> Path:
    """Header t,x1,x2 and one row per checkpoint"""
    dim = trajectory.states.shape[-1]
    header = ",".join(["t"] + [f"x{j + 1}" for j in range(dim)])
    rows = [
        ",".join([fmt(t)] + [fmt(v) for v in state])
        for t, state in zip(trajectory.times, trajectory.states)
    ]
    return _write_lines(path, [header] + rows)


def series_rows(series: ErgodicSeries) -> list[str]:
    """Rows of the series CSV; the trajectory column holds the noise stream index"""
    tail = ",".join(
        [str(series.trajectory_index)]
        + [fmt(v) for v in series.start[:2]]
        + [fmt(v) for v in series.ball.center[:2]]
    )
    return [f"{fmt(t)},{fmt(f)},{tail}" for t, f in zip(series.times, series.averages)]


def write_series_csv(series: list[ErgodicSeries], path: Path) -> Path:
    lines = [SERIES_HEADER]
    for item in series:
        lines.extend(series_rows(item))
    return _write_lines(path, lines)


def write_json(payload: Any, path: Path) -> Path:
    """Indented JSON; pydantic models are dumped in JSON mode first"""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def report_payload(report: ClassificationReport) -> dict:
    """{profile, r0, criteria: [{name, verdict, evidence, ...}], summary, notes}"""
    return report.model_dump(mode="json")


def _number(value: float) -> float | None:
    """Non-finite statistics become null in JSON"""
    return float(value) if math.isfinite(value) else None


def summary_payload(
    summary: EnsembleSummary,
    diagnostics: list[DiagnosticResult | None] | None = None,
    stabilization: list[float] | None = None,
) -> dict:
    trajectories = []
    for i, item in enumerate(summary.series):
        entry = {
            "trajectory_index": item.trajectory_index,
            "start": list(item.start),
            "terminal": _number(item.terminal),
            "exploded": item.exploded,
        }
        if diagnostics is not None:
            diagnostic = diagnostics[i]
            entry["diagnostic"] = diagnostic.model_dump(mode="json") if diagnostic else None
        if stabilization is not None:
            entry["stabilization_time"] = _number(stabilization[i])
        trajectories.append(entry)
    return {
        "center": list(summary.ball.center),
        "radius": summary.ball.radius,
        "master_seed": summary.master_seed,
        "start_box": summary.start_box.model_dump(mode="json"),
        "trajectories": trajectories,
        "terminal_mean": _number(summary.terminal_mean),
        "terminal_std": _number(summary.terminal_std),
        "standard_error": _number(summary.standard_error),
        "exploded": summary.exploded_indices,
    }


def occupation_payload(rows: list[OccupationRow]) -> list[dict]:
    return [row.model_dump(mode="json") for row in rows]


def file_sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(manifest: RunManifest, outputs: list[Path], path: Path) -> Path:
    """Record the outputs with their hashes and write the manifest"""
    manifest = manifest.model_copy(
        update={"outputs": [OutputFile(path=str(p), sha256=file_sha256(p)) for p in outputs]}
    )
    return write_json(manifest, path)


def read_manifest(path: Path) -> RunManifest:
    return RunManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))
