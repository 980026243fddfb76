from pathlib import Path
from typing import Optional

import rich_click.typer as typer

from glmbound.base.exceptions import InvariantViolation
from glmbound.cli.base import app
from glmbound.cli.config import (
    Format,
    RunConfig,
    design_option,
    format_option,
    output_option,
    parse_family_list,
    scale_option,
    seed_option,
    threads_option,
    trials_option,
    write_table,
)
from glmbound.design import load_design
from glmbound.families import parse_family_spec
from glmbound.risk import favorability_report

#: Columns of the favorability table
HEADER = (
    'family',
    'case',
    'bound_value',
    'bayes_bound',
    'bayes_risk',
    'worst_case_risk',
    'worst_case_half_width',
    'gaussian_risk',
    'gaussian_empirical_risk',
    'achievability_ratio',
)


@app.command('report')
def report_command(
    design_path: Path = design_option(),
    families: str = typer.Option(
        'gaussian,bernoulli,poisson',
        '--families',
        help='Comma-separated family specs.',
    ),
    scale: float = scale_option(),
    budget: Optional[int] = typer.Option(
        None, '--budget', help='Random worst-case candidates per family.'
    ),
    trials: int = trials_option(),
    seed: int = seed_option(),
    threads: Optional[int] = threads_option(),
    output_format: Format = format_option(),
    output_path: Optional[Path] = output_option(),
) -> None:
    """
    Compares each family's measured risks with the shared lower bound
    and the Gaussian linear model. Exits with status 2 if a worst-case
    risk falls below the bound.
    """
    config = RunConfig(
        subcommand='report',
        design_path=design_path,
        family_spec=families,
        scale=scale,
        trials=trials,
        seed=seed,
        output_path=output_path,
        output_format=output_format,
        threads=threads,
    ).validate()
    design = load_design(config.design_path)
    family_list = [
        parse_family_spec(spec, config.scale, design.radius)
        for spec in parse_family_list(config.family_spec)
    ]
    rows = favorability_report(
        design,
        family_list,
        trials=trials,
        seed=seed,
        budget=budget,
        threads=threads,
    )

    write_table(
        HEADER,
        [
            (
                row.family,
                row.case,
                row.bound_value,
                row.bayes_bound,
                row.bayes_risk.mean_sq_error,
                row.worst_case_risk.mean_sq_error,
                row.worst_case_risk.half_width,
                row.gaussian_risk,
                row.gaussian_empirical_risk,
                row.achievability_ratio,
            )
            for row in rows
        ],
        config,
    )

    unsound = [row.family for row in rows if not row.is_sound]
    if unsound:
        raise InvariantViolation(
            f'Measured worst-case risk is below the bound for '
            f'{", ".join(unsound)}'
        )
