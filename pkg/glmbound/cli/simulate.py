from pathlib import Path
from typing import Optional

import numpy as np
import rich_click.typer as typer

from glmbound.base.data_structures import EstimatorConfig
from glmbound.base.family import GlmModel
from glmbound.bound import construct_prior
from glmbound.cli.base import app
from glmbound.cli.config import (
    Estimator,
    Format,
    Mode,
    RunConfig,
    design_option,
    family_option,
    format_option,
    load_inputs,
    output_option,
    scale_option,
    seed_option,
    threads_option,
    trials_option,
    write_table,
)
from glmbound.design import load_vector, reparametrize
from glmbound.risk import bayes_risk, risk_at, worst_case_risk
from glmbound.utils.functions import format_vector

#: Columns of the simulation table
HEADER = (
    'mode',
    'estimator',
    'mean_sq_error',
    'half_width',
    'trials',
    'failures',
    'seed',
    'theta_at_max',
)


@app.command('simulate')
def simulate_command(
    design_path: Path = design_option(),
    family_spec: str = family_option(),
    scale: float = scale_option(),
    estimator: Estimator = typer.Option(
        Estimator.linear, '--estimator', help='Estimator kind.'
    ),
    mode: Mode = typer.Option(
        Mode.fixed,
        '--mode',
        help='Risk at `--theta`, worst case over the ball or Bayes risk '
        'under the witnessing prior.',
    ),
    theta_path: Optional[Path] = typer.Option(
        None,
        '--theta',
        exists=True,
        dir_okay=False,
        help='Vector file of the parameter for `--mode fixed`, defaults '
        'to the origin.',
    ),
    budget: Optional[int] = typer.Option(
        None,
        '--budget',
        help='Random boundary candidates for `--mode worst`, defaults to '
        'd.',
    ),
    trials: int = trials_option(),
    seed: int = seed_option(),
    threads: Optional[int] = threads_option(),
    output_format: Format = format_option(),
    output_path: Optional[Path] = output_option(),
) -> None:
    """
    Measures the L2 risk of an estimator by Monte Carlo.
    """
    config = RunConfig(
        subcommand='simulate',
        design_path=design_path,
        family_spec=family_spec,
        scale=scale,
        trials=trials,
        seed=seed,
        output_path=output_path,
        output_format=output_format,
        threads=threads,
    ).validate()
    design, family = load_inputs(config)
    model = GlmModel(design, family)
    estimator_config = EstimatorConfig(estimator.kind)

    if mode == Mode.fixed:
        theta = (
            np.zeros(design.d)
            if theta_path is None
            else load_vector(theta_path)
        )
        result = risk_at(
            model, theta, estimator_config, trials, seed, threads
        )
    elif mode == Mode.worst:
        result = worst_case_risk(
            model,
            estimator_config,
            design.d if budget is None else budget,
            trials,
            seed,
            threads,
        )
    else:
        rotated = reparametrize(design)
        result = bayes_risk(
            GlmModel(rotated, family),
            construct_prior(rotated, family),
            estimator_config,
            trials,
            seed,
            threads,
        )

    write_table(
        HEADER,
        [
            (
                mode.value,
                estimator.value,
                result.mean_sq_error,
                result.half_width,
                result.trials,
                result.failures,
                result.seed,
                format_vector(result.theta_at_max),
            )
        ],
        config,
    )
