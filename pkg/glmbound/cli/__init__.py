import rich_click.typer as typer

from glmbound.cli.base import app, run, setup_cli
from glmbound.cli.bound import bound_command
from glmbound.cli.estimate import estimate_command
from glmbound.cli.prior import prior_command
from glmbound.cli.report import report_command
from glmbound.cli.simulate import simulate_command
from glmbound.cli.verify import verify_command

#: The click command, for the documentation
command = typer.main.get_command(app)
