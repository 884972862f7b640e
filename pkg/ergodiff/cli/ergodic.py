"""`ergodiff ergodic`: running averages f_T for balls around several centers"""
import logging

import click

from ergodiff.core.dependencies import (
    FLOATS,
    POINT,
    RunRecorder,
    handles_errors,
    resolve_options,
    run_options,
)
from ergodiff.models.ergodic import StartBox
from ergodiff.services.drift_fields import load_field
from ergodiff.services.ergodic_estimator import (
    FIGURE_CENTERS,
    convergence_diagnostic,
    ensembles_for_centers,
    occupation_table,
    stabilization_time,
)
from ergodiff.services.export import (
    occupation_payload,
    summary_payload,
    write_json,
    write_series_csv,
)
from ergodiff.services.plotting import write_series_svg

logger = logging.getLogger(__name__)

SCHEMES = ("taylor15", "taylor15_full", "taylor15_diagonal", "euler")


def _diagnose(series, window_fraction, n_batches):
    try:
        return convergence_diagnostic(series, window_fraction, n_batches)
    except ValueError as e:
        logger.warning("No diagnostic for trajectory %d: %s", series.trajectory_index, e)
        return None


@click.command("ergodic")
@click.option("--field", default="z4", show_default=True)
@click.option("--center", "centers", type=POINT, multiple=True,
              help="Ball center x1,x2; repeatable. Defaults to the seven reference centers.")
@click.option("--radius", type=float, default=1.0, show_default=True)
@click.option("--n-traj", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--T", "horizon", type=float, default=100.0, show_default=True)
@click.option("--delta", type=float, default=1e-4, show_default=True)
@click.option("--seed", type=int, default=None, help="Master seed [env: ERGODIFF_SEED].")
@click.option("--start-box", type=FLOATS, default="-10,10", show_default=True,
              help="Lower and upper bound of the square the starts are drawn from.")
@click.option("--scheme", type=click.Choice(SCHEMES), default="taylor15", show_default=True)
@click.option("--stride", type=click.IntRange(min=1), default=None)
@click.option("--window-fraction", type=float, default=None,
              help="Window of the convergence diagnostic as a fraction of the series.")
@click.option("--tolerance", type=float, default=0.01, show_default=True,
              help="Band around the terminal value used for stabilization times.")
@run_options
@click.pass_context
@handles_errors
def ergodic_cmd(ctx: click.Context, **_):
    """Simulate one ensemble and average the indicator of every ball along it"""
    params, cfg = resolve_options(ctx, "ergodic")
    recorder = RunRecorder("ergodic", params)
    if len(params["start_box"]) != 2:
        raise click.BadParameter("expected two numbers LOW,HIGH", param_hint="--start-box")

    field = load_field(params["field"])
    box = StartBox.square(*params["start_box"], dim=field.dim)
    centers = list(params["centers"]) or FIGURE_CENTERS
    summaries = ensembles_for_centers(
        field,
        centers,
        T=params["horizon"],
        delta=params["delta"],
        n_traj=params["n_traj"],
        start_box=box,
        master_seed=params["seed"],
        radius=params["radius"],
        scheme=params["scheme"],
        checkpoint_stride=params["stride"] or cfg.checkpoint_stride,
        workers=params["workers"],
    )

    out_dir = params["out"]
    window = params["window_fraction"] or cfg.diagnostic.window_fraction
    payloads = []
    click.echo(f"{'center':<24}{'terminal f_T':>16}{'std error':>14}  stabilization times")
    for k, summary in enumerate(summaries):
        recorder.add(write_series_csv(summary.series, out_dir / f"series_center{k}.csv"))
        recorder.add(write_series_svg(summary, out_dir / f"series_center{k}.svg"))
        diagnostics = [_diagnose(s, window, cfg.diagnostic.n_batches) for s in summary.series]
        times = [stabilization_time(s, params["tolerance"]) for s in summary.series]
        payloads.append(summary_payload(summary, diagnostics, times))
        center = "(" + ", ".join(f"{c:.4g}" for c in summary.ball.center) + ")"
        click.echo(
            f"{center:<24}{summary.terminal_mean:>16.6g}{summary.standard_error:>14.3g}  "
            + " ".join(f"{t:g}" for t in times)
        )

    payload = {"centers": payloads, "occupation": occupation_payload(occupation_table(summaries))}
    recorder.add(write_json(payload, out_dir / "ergodic_summary.json"))
    recorder.finish(out_dir)
