from pathlib import Path
from typing import Optional

from glmbound.bound import bayes_bound_for_prior, construct_prior
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
from glmbound.design import reparametrize
from glmbound.utils.functions import format_vector


@app.command('prior')
def prior_command(
    design_path: Path = design_option(),
    family_spec: str = family_option(),
    scale: float = scale_option(),
    output_format: Format = format_option(),
    output_path: Optional[Path] = output_option(),
) -> None:
    """
    Constructs the box prior witnessing the bound, in the coordinates of
    the reparametrized design.
    """
    config = RunConfig(
        subcommand='prior',
        design_path=design_path,
        family_spec=family_spec,
        scale=scale,
        output_path=output_path,
        output_format=output_format,
    ).validate()
    design, family = load_inputs(config)
    rotated = reparametrize(design)
    prior = construct_prior(rotated, family)

    write_table(
        ('case', 'payoff', 'bayes_bound', 'epsilons'),
        [
            (
                prior.case,
                prior.payoff,
                bayes_bound_for_prior(rotated, family, prior),
                format_vector(prior.epsilons),
            )
        ],
        config,
    )
