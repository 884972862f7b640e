"""Main command-line application"""
import logging

import click

from ergodiff import __version__
from ergodiff.config import settings

# Import subcommands
from ergodiff.cli.classify import classify_cmd
from ergodiff.cli.ergodic import ergodic_cmd
from ergodiff.cli.order_check import order_check_cmd
from ergodiff.cli.simulate import simulate_cmd

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def configure_logging(level: str) -> None:
    """Configure root logging to stderr and route Python warnings through it"""
    numeric = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(
        level=numeric, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    logging.getLogger().setLevel(numeric)
    logging.captureWarnings(True)


@click.group()
@click.version_option(__version__, prog_name="ergodiff")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None,
              help="Logging level [env: ERGODIFF_LOG_LEVEL].")
def cli(log_level: str | None):
    """Simulate, classify and time-average diffusions dX = b(X)dt + dW"""
    configure_logging(log_level or settings.log_level)


# Register subcommands
cli.add_command(simulate_cmd)
cli.add_command(classify_cmd)
cli.add_command(ergodic_cmd)
cli.add_command(order_check_cmd)


if __name__ == "__main__":
    cli()
