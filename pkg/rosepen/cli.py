import functools
import logging
import sys

import click

from .config import BACKENDS, MODES, Config
from .errors import RosepenError
from .pencil_manager import PencilManager

CERTIFICATE_FAILED = 6


def handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except RosepenError as err:
            click.echo(f"Error: {err}", err=True)
            sys.exit(err.exit_code)

    return wrapper


input_option = click.option("--input", "-i", "input_path", required=True,
                            help="JSON document to read")
sigma_option = click.option("--sigma", "-s", default=None,
                            help="Comma-separated sigma^-1, e.g. 2,0,1 (default: first companion)")
out_option = click.option("--out", "-o", default=None, help="Write JSON here instead of stdout")
mode_option = click.option("--mode", type=click.Choice(MODES), default=None,
                           help="Field mode (default from config)")
backend_option = click.option("--backend", type=click.Choice(BACKENDS), default=None,
                              help="Eigenvalue backend (default from config)")


@click.group()
@click.pass_context
def cli(ctx):
    try:
        config = Config()
        logging.basicConfig(level=config.get_log_level(),
                            format="%(levelname)s %(name)s: %(message)s")
    except RosepenError as err:
        click.echo(f"Error: {err}", err=True)
        ctx.exit(err.exit_code)
    ctx.obj = PencilManager(config)


@cli.command()
@input_option
@sigma_option
@mode_option
@out_option
@click.pass_obj
@handle_errors
def build(manager, input_path, sigma, mode, out):
    """Build the Fiedler pencil of a Rosenbrock system"""
    manager.write(manager.build(input_path, sigma, mode), out)


@cli.command()
@input_option
@sigma_option
@backend_option
@mode_option
@out_option
@click.pass_obj
@handle_errors
def zeros(manager, input_path, sigma, backend, mode, out):
    """Compute and classify the finite zeros of a system or spec"""
    manager.write(manager.zeros(input_path, sigma, backend, mode), out)


@cli.command()
@input_option
@sigma_option
@click.option("--all", "sweep", is_flag=True, help="Certify every bijection")
@click.option("--pencil", "pencil_path", default=None, help="Pencil document to certify")
@out_option
@click.pass_obj
@handle_errors
def verify(manager, input_path, sigma, sweep, pencil_path, out):
    """Certify pencils as Rosenbrock linearizations"""
    if sweep:
        summary = manager.verify_all(input_path)
    else:
        summary = manager.verify(input_path, sigma, pencil_path)
    manager.write(summary, out)
    if not summary["passed"]:
        failed = [",".join(map(str, r["sigma"])) for r in summary["results"] if not r["passed"]]
        click.echo(f"Certificate failed for sigma {'; '.join(failed)}", err=True)
        sys.exit(CERTIFICATE_FAILED)


@cli.command()
@click.option("--sigma", "-s", required=True, help="Comma-separated sigma^-1")
@click.option("--m", "m", type=int, default=None, help="Expected length of sigma")
@out_option
@click.pass_obj
@handle_errors
def ciss(manager, sigma, m, out):
    """Show the consecution-inversion structure of a bijection"""
    manager.write(manager.ciss(sigma, m), out)


@cli.command()
@input_option
@out_option
@click.pass_obj
@handle_errors
def smith(manager, input_path, out):
    """Smith form of S(lambda) and Smith-McMillan form of G(lambda)"""
    manager.write(manager.smith(input_path), out)


@cli.command()
@input_option
@out_option
@click.pass_obj
@handle_errors
def realize(manager, input_path, out):
    """State-space realization of a rational matrix spec"""
    manager.write(manager.realize(input_path), out)


if __name__ == "__main__":
    cli()
