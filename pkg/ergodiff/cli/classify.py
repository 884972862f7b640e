"""`ergodiff classify`: recurrence/transience criteria for a radial profile"""
from pathlib import Path

import click

from ergodiff.core.dependencies import RunRecorder, handles_errors, resolve_options, run_options
from ergodiff.services.drift_fields import load_field
from ergodiff.services.export import report_payload, write_json
from ergodiff.services.recurrence_classifier import (
    classify,
    make_profile,
    report_to_table,
    sampled_profile,
)

PROFILES = ("brownian", "power-well", "attractive", "z4", "holomorphic")


@click.command("classify")
@click.option("--profile", type=click.Choice(PROFILES), default=None, help="Built-in profile.")
@click.option("--field-file", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Polynomial field (JSON or bundled name) classified by sampled envelopes.")
@click.option("--dim", type=click.IntRange(min=1), default=2, show_default=True)
@click.option("--alpha", type=float, default=1.0, show_default=True,
              help="Exponent of the power-well and attractive potentials.")
@click.option("--power", type=click.IntRange(min=2), default=4, show_default=True,
              help="n of the holomorphic profile b = -(d/dz) z^n.")
@click.option("--r0", type=float, default=None, help="Lower radius of the integrals.")
@click.option("--doublings", type=click.IntRange(min=3), default=None,
              help="Upper limits N = r0 2^k for k = 1..doublings.")
@run_options
@click.pass_context
@handles_errors
def classify_cmd(ctx: click.Context, **_):
    """Evaluate cr1, cr2, cr4, cr5 and print the verdicts"""
    params, cfg = resolve_options(ctx, "classify")
    recorder = RunRecorder("classify", params)

    if params["field_file"] is not None:
        profile = sampled_profile(
            load_field(params["field_file"]),
            cfg.classifier.n_angles,
            cfg.classifier.angle_tol,
        )
    elif params["profile"] is not None:
        profile = make_profile(
            params["profile"], dim=params["dim"], alpha=params["alpha"], n=params["power"]
        )
    else:
        raise click.UsageError("Missing option '--profile' or '--field-file'.", ctx=ctx)

    classifier = cfg.classifier
    if params["doublings"] is not None:
        classifier = classifier.model_copy(update={"doublings": params["doublings"]})
    r0 = classifier.r0 if params["r0"] is None else params["r0"]
    report = classify(profile, r0=r0, cfg=classifier)

    out_dir = params["out"]
    recorder.add(write_json(report_payload(report), out_dir / "classify_report.json"))
    recorder.finish(out_dir)
    click.echo(report_to_table(report))
