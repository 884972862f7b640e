"""Command-line dependencies and utilities"""
import logging
import time
from functools import wraps
from pathlib import Path
from typing import Any

import click
from click.core import ParameterSource
from pydantic import ValidationError

from ergodiff import __version__
from ergodiff.config import Settings, load_settings
from ergodiff.core.errors import EXIT_USAGE, ConfigError, ErgodiffError
from ergodiff.schemas.manifest import RunManifest
from ergodiff.services.export import read_manifest, write_manifest

logger = logging.getLogger(__name__)

# Options that steer the run without changing its outputs
RUN_OPTIONS = ("config", "manifest", "workers", "out", "log_level")


class PointType(click.ParamType):
    """A point written as "x1,x2" (or a list in TOML/JSON)"""
    name = "point"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            if isinstance(value, str):
                return tuple(float(v) for v in value.split(","))
            return tuple(float(v) for v in value)
        except (TypeError, ValueError):
            self.fail(f"{value!r} is not a comma-separated point", param, ctx)


class FloatListType(click.ParamType):
    """Comma-separated floats"""
    name = "floats"

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return [float(v) for v in value]
        try:
            return [float(v) for v in str(value).split(",")]
        except ValueError:
            self.fail(f"{value!r} is not a comma-separated list of numbers", param, ctx)


POINT = PointType()
FLOATS = FloatListType()


def run_options(f):
    """--config, --manifest, --workers and --out shared by every subcommand"""
    existing_file = click.Path(exists=True, dir_okay=False, path_type=Path)
    options = [
        click.option("--config", type=existing_file, default=None,
                     help="TOML file with a table for this subcommand."),
        click.option("--manifest", type=existing_file, default=None,
                     help="Replay the configuration recorded in a manifest."),
        click.option("--workers", type=click.IntRange(min=1), default=None,
                     help="Concurrent trajectory workers; outputs do not depend on it."),
        click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None,
                     help="Output directory."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def handles_errors(f):
    """Map toolkit errors to exit codes: 2 for usage/configuration, 3 for numerics"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ErgodiffError as e:
            logger.error("%s", e)
            click.echo(f"Error: {e}", err=True)
            raise click.exceptions.Exit(e.exit_code)
        except (ValidationError, ValueError) as e:
            logger.error("%s", e)
            click.echo(f"Error: {e}", err=True)
            raise click.exceptions.Exit(EXIT_USAGE)
    return decorated_function


def _explicit(ctx: click.Context, name: str) -> bool:
    source = ctx.get_parameter_source(name)
    return source not in (None, ParameterSource.DEFAULT, ParameterSource.DEFAULT_MAP)


def _cast(ctx: click.Context, name: str, value: Any) -> Any:
    for param in ctx.command.params:
        if param.name == name:
            return param.type_cast_value(ctx, value)
    raise ConfigError(f"unknown option '{name}' for {ctx.command.name}")


def resolve_options(ctx: click.Context, subcommand: str) -> tuple[dict, Settings]:
    """Merge defaults < TOML table < manifest configuration < explicit flags.

    Returns the resolved parameters and the settings built from the TOML file.
    """
    params = dict(ctx.params)
    try:
        settings = load_settings(params.get("config"))
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e

    layers: list[dict] = [settings.table(subcommand)]
    if params.get("manifest") is not None:
        manifest = read_manifest(params["manifest"])
        if manifest.subcommand != subcommand:
            raise ConfigError(
                f"manifest {params['manifest']} records '{manifest.subcommand}', not '{subcommand}'"
            )
        layers.append(manifest.configuration)

    for layer in layers:
        for key, value in layer.items():
            name = key.replace("-", "_")
            if name in RUN_OPTIONS or _explicit(ctx, name):
                continue
            params[name] = _cast(ctx, name, value)

    if params.get("seed") is None and "seed" in params:
        params["seed"] = settings.seed
    if params.get("workers") is None:
        params["workers"] = settings.workers
    if params.get("out") is None:
        params["out"] = settings.output_dir
    return params, settings


def recorded_configuration(params: dict) -> dict:
    """JSON-ready copy of the parameters that determine the outputs"""
    recorded = {}
    for key, value in params.items():
        if key in RUN_OPTIONS:
            continue
        if isinstance(value, tuple):
            value = list(value)
        elif isinstance(value, Path):
            value = str(value)
        elif isinstance(value, list):
            value = [list(v) if isinstance(v, tuple) else v for v in value]
        recorded[key] = value
    return recorded


class RunRecorder:
    """Times a subcommand and writes its manifest next to the outputs"""

    def __init__(self, subcommand: str, params: dict):
        self.subcommand = subcommand
        self.params = params
        self.outputs: list[Path] = []
        self.started = time.perf_counter()

    def add(self, path: Path) -> Path:
        self.outputs.append(path)
        return path

    def finish(self, out_dir: Path) -> Path:
        manifest = RunManifest(
            subcommand=self.subcommand,
            configuration=recorded_configuration(self.params),
            master_seed=int(self.params.get("seed") or 0),
            version=__version__,
            duration_seconds=time.perf_counter() - self.started,
        )
        path = write_manifest(manifest, self.outputs, out_dir / f"{self.subcommand}_manifest.json")
        logger.info("%s finished in %.2fs", self.subcommand, manifest.duration_seconds)
        return path
