from pathlib import Path
from typing import Optional

import rich_click.typer as typer

from glmbound.bound import (
    DEFAULT_CONSTANT,
    ag_comparison_bound,
    generalized_bound,
    theorem1_bound,
)
from glmbound.cli.base import app
from glmbound.cli.config import (
    Format,
    RunConfig,
    design_option,
    family_option,
    format_option,
    load_inputs,
    output_option,
    scale_option,
    write_table,
)
from glmbound.design import load_vector
from glmbound.families import parse_family_spec
from glmbound.utils.functions import format_vector

#: Columns of the bound table
HEADER = (
    'bound_value',
    'constant',
    'raw_min_term',
    'case',
    'bayes_bound',
    'L',
    'scale',
    'trace_inv_gram',
    'n',
    'd',
    'epsilons',
)


@app.command('bound')
def bound_command(
    design_path: Path = design_option(),
    family_spec: str = family_option(),
    scale: float = scale_option(),
    constant: float = typer.Option(
        DEFAULT_CONSTANT,
        '--constant',
        help='Universal constant, defaults to 1/(pi e^3).',
    ),
    row_scales: Optional[Path] = typer.Option(
        None,
        '--row-scales',
        exists=True,
        dir_okay=False,
        help='Vector file of per-row scales, evaluated at their minimum.',
    ),
    ag_strong_convexity: Optional[float] = typer.Option(
        None,
        '--ag-R',
        help=(
            'Lower curvature bound R; adds the comparison bound for '
            'strongly convex cumulants as an ag_bound column.'
        ),
    ),
    output_format: Format = format_option(),
    output_path: Optional[Path] = output_option(),
) -> None:
    """
    Evaluates the minimax lower bound
    `constant * min(s / L * Tr((M^T M)^-1), 1)` of a design.
    With `--ag-R` the comparison bound for strongly convex cumulants is
    added, scaled by the same constant.
    """
    config = RunConfig(
        subcommand='bound',
        design_path=design_path,
        family_spec=family_spec,
        scale=scale,
        constant=constant,
        output_path=output_path,
        output_format=output_format,
    ).validate()
    design, family = load_inputs(config)

    if row_scales is None:
        report = theorem1_bound(design, family, config.constant)
    else:
        families = [
            parse_family_spec(config.family_spec, s, design.radius)
            for s in load_vector(row_scales)
        ]
        report = generalized_bound(design, families, config.constant)

    header = HEADER
    row = (
        report.bound_value,
        report.constant,
        report.raw_min_term,
        report.case,
        report.bayes_bound,
        report.curvature_bound,
        report.scale,
        report.trace_inv_gram,
        report.n,
        report.d,
        format_vector(report.prior.epsilons),
    )
    if ag_strong_convexity is not None:
        header = (*header, 'ag_bound')
        row = (
            *row,
            config.constant
            * ag_comparison_bound(design, family, ag_strong_convexity),
        )
    write_table(header, [row], config)
