"""`ergodiff simulate`: one checkpointed trajectory as CSV"""
import logging

import click

from ergodiff.core.dependencies import (
    POINT,
    RunRecorder,
    handles_errors,
    resolve_options,
    run_options,
)
from ergodiff.core.errors import NumericalExplosionError
from ergodiff.schemas.simulation import SimulationConfig
from ergodiff.services.drift_fields import load_field
from ergodiff.services.export import write_trajectory_csv
from ergodiff.services.sde_integrator import simulate

logger = logging.getLogger(__name__)

SCHEMES = ("taylor15", "taylor15_full", "taylor15_diagonal", "euler")


@click.command("simulate")
@click.option("--field", default=None, help="Field name, bundled definition or JSON file.")
@click.option("--start", type=POINT, default="0,0", show_default=True, help="Starting point x1,x2.")
@click.option("--delta", type=float, default=1e-4, show_default=True, help="Time step.")
@click.option("--T", "horizon", type=float, default=1.0, show_default=True, help="Horizon.")
@click.option("--seed", type=int, default=None, help="Master seed [env: ERGODIFF_SEED].")
@click.option("--scheme", type=click.Choice(SCHEMES), default="taylor15", show_default=True)
@click.option("--stride", type=click.IntRange(min=1), default=None,
              help="Steps between recorded checkpoints.")
@click.option("--trajectory-index", type=click.IntRange(min=0), default=0, show_default=True,
              help="Noise stream of the trajectory.")
@run_options
@click.pass_context
@handles_errors
def simulate_cmd(ctx: click.Context, **_):
    """Integrate dX = b(X)dt + dW and write the checkpoints"""
    params, cfg = resolve_options(ctx, "simulate")
    if params["field"] is None:
        raise click.UsageError("Missing option '--field'.", ctx=ctx)

    recorder = RunRecorder("simulate", params)
    field = load_field(params["field"])
    config = SimulationConfig(
        field_name=field.name,
        delta=params["delta"],
        horizon=params["horizon"],
        start=params["start"],
        scheme=params["scheme"],
        master_seed=params["seed"],
        checkpoint_stride=params["stride"] or cfg.checkpoint_stride,
        trajectory_index=params["trajectory_index"],
        guard_radius=cfg.guard_radius,
    )
    logger.info(
        "Simulating %s with %s: %d steps of %g", field.name, config.scheme.value,
        config.n_steps, config.delta,
    )
    trajectory = simulate(config, field)

    out_dir = params["out"]
    path = recorder.add(write_trajectory_csv(trajectory, out_dir / "trajectory.csv"))
    recorder.finish(out_dir)
    click.echo(f"{len(trajectory)} checkpoints written to {path}")
    if trajectory.exploded:
        raise NumericalExplosionError(
            f"trajectory left the guard radius {config.guard_radius:g} "
            f"at t={trajectory.explosion_time:g}; partial output kept in {path}",
            trajectory.explosion_time,
        )
