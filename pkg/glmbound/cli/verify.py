from pathlib import Path
from typing import Optional

import rich_click.typer as typer

from glmbound.base.exceptions import InvariantViolation
from glmbound.cli.base import app
from glmbound.cli.config import (
    Format,
    Grid,
    RunConfig,
    Suite,
    format_option,
    output_option,
    write_table,
)
from glmbound.verify import VERIFICATION_TOLERANCE, run_suite


@app.command('verify')
def verify_command(
    suite: Suite = typer.Option(
        ..., '--suite', help='Which inequality to check.'
    ),
    grid: Grid = typer.Option(Grid.fine, '--grid', help='Grid size.'),
    output_format: Format = format_option(),
    output_path: Optional[Path] = output_option(),
) -> None:
    """
    Checks an information inequality on a grid of instances by
    quadrature. Exits with status 2 if any slack is negative beyond
    tolerance.
    """
    config = RunConfig(
        subcommand='verify',
        grid=grid,
        output_path=output_path,
        output_format=output_format,
    ).validate()
    rows = run_suite(suite.value, config.grid.value)

    parameters = list(rows[0].parameters)
    write_table(
        (*parameters, 'lhs', 'rhs', 'slack'),
        [
            (
                *(row.parameters[name] for name in parameters),
                row.lhs,
                row.rhs,
                row.slack,
            )
            for row in rows
        ],
        config,
    )

    failures = [
        row for row in rows if not row.holds(VERIFICATION_TOLERANCE)
    ]
    if failures:
        raise InvariantViolation(
            f'{len(failures)} of {len(rows)} {suite.value} checks have '
            f'negative slack, worst {min(r.slack for r in failures):.3g}'
        )
