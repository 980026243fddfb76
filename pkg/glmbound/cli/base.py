import logging
import sys
from typing import Optional, Sequence

import click
import numpy as np
import rich_click.typer as typer
from rich.console import Console
from rich.logging import RichHandler

from glmbound.base.exceptions import GlmBoundError, InvariantViolation
from glmbound.version import __version__

typer.rich_click.SHOW_ARGUMENTS = True
typer.rich_click.USE_MARKDOWN = True
typer.rich_click.GROUP_ARGUMENTS_OPTIONS = False

app = typer.Typer(
    name='glmbound',
    help='Minimax lower bounds for generalized linear models',
    no_args_is_help=True,
    context_settings=dict(help_option_names=['-h', '--help']),
)

#: Name shown in usage lines
PROG_NAME = 'glmbound'


def setup_cli() -> None:
    """
    Setups command-line interface for glmbound.
    """
    sys.exit(run(sys.argv[1:]))


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Runs the command line on an argument list.

    Parameters
    ----------
    argv:
        Arguments without the program name, defaults to `sys.argv[1:]`.

    Returns
    -------
    The exit status: `0` on success, `1` for usage and validation
    errors and `2` when a mathematical invariant is violated
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    command = typer.main.get_command(app)
    try:
        result = command.main(
            args=argv, prog_name=PROG_NAME, standalone_mode=False
        )
    except click.ClickException as error:
        _report(error.format_message())
        return 1
    except click.Abort:
        _report('aborted')
        return 1
    except InvariantViolation as error:
        _report(str(error))
        return 2
    except (GlmBoundError, OSError, np.linalg.LinAlgError) as error:
        _report(str(error))
        return 1
    return result if isinstance(result, int) else 0


def configure_logging(verbosity: int) -> None:
    """
    Sends glmbound's log records to stderr through rich.

    Parameters
    ----------
    verbosity:
        `0` for warnings, `1` for info and `2` or more for debug
        messages
    """
    logger = logging.getLogger('glmbound')
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.addHandler(
        RichHandler(
            console=Console(stderr=True), show_time=False, show_path=False
        )
    )
    logger.setLevel(
        (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbosity, 2)]
    )


def _report(message: str) -> None:
    typer.secho(f'Error: {message}', err=True, fg='red')


@app.callback(invoke_without_command=True)
def version_callback(
    version: Optional[bool] = typer.Option(
        None, '-v', '--version', is_eager=True, help='Show glmbound version.'
    ),
    verbose: int = typer.Option(
        0,
        '-V',
        '--verbose',
        count=True,
        help='Log progress to stderr, twice for debug output.',
    ),
) -> None:
    """
    Adds --version and --verbose options to cli.
    """
    if version:
        typer.echo(__version__)
        raise typer.Exit()
    configure_logging(verbose)
