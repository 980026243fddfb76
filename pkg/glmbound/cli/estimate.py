from pathlib import Path
from typing import Optional

import rich_click.typer as typer

from glmbound.base.data_structures import EstimatorConfig
from glmbound.base.family import GlmModel
from glmbound.cli.base import app
from glmbound.cli.config import (
    Estimator,
    RunConfig,
    design_option,
    family_option,
    load_inputs,
    output_option,
    scale_option,
    write_text,
)
from glmbound.design import load_vector
from glmbound.estimate import estimate
from glmbound.utils.functions import format_vector


@app.command('estimate')
def estimate_command(
    design_path: Path = design_option(),
    family_spec: str = family_option(),
    scale: float = scale_option(),
    data_path: Path = typer.Option(
        ...,
        '--data',
        exists=True,
        dir_okay=False,
        help='Vector file of the n observations.',
    ),
    estimator: Estimator = typer.Option(
        Estimator.linear, '--estimator', help='Estimator kind.'
    ),
    project: bool = typer.Option(
        True,
        '--project/--no-project',
        help='Project the estimate onto the unit ball.',
    ),
    output_path: Optional[Path] = output_option(),
) -> None:
    """
    Prints the estimate of theta as comma-separated numbers.
    """
    config = RunConfig(
        subcommand='estimate',
        design_path=design_path,
        family_spec=family_spec,
        scale=scale,
        output_path=output_path,
    ).validate()
    design, family = load_inputs(config)
    theta = estimate(
        GlmModel(design, family),
        load_vector(data_path),
        EstimatorConfig(estimator.kind, project_to_ball=project),
    )
    write_text(format_vector(theta) + '\n', config)
