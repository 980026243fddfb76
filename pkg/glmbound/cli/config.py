import csv
import io
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

import rich_click.typer as typer

from glmbound.base.data_structures import DesignSpec
from glmbound.base.exceptions import DomainError
from glmbound.base.family import GlmFamily
from glmbound.base.types import EstimatorKind
from glmbound.design import load_design
from glmbound.families import parse_family_spec
from glmbound.utils.functions import format_number


class Estimator(str, Enum):
    linear = 'linear'
    irls = 'irls'
    zero = 'zero'

    @property
    def kind(self) -> EstimatorKind:
        return {
            'linear': 'linear_mle',
            'irls': 'irls_mle',
            'zero': 'zero',
        }[self.value]


class Mode(str, Enum):
    fixed = 'fixed'
    worst = 'worst'
    bayes = 'bayes'


class Suite(str, Enum):
    lemma1 = 'lemma1'
    lemma2 = 'lemma2'
    chain = 'chain'


class Grid(str, Enum):
    coarse = 'coarse'
    fine = 'fine'


class Format(str, Enum):
    tsv = 'tsv'
    csv = 'csv'


@dataclass(frozen=True)
class RunConfig:
    """
    Validated flags of one invocation.

    Attributes
    ----------
    subcommand:
        The subcommand name

    design_path:
        Design matrix file

    family_spec:
        Family spec, e.g. `gaussian:L=2`

    scale:
        The scale `s(sigma)`

    constant:
        The universal constant of the bound

    trials:
        Monte Carlo trials

    seed:
        Master seed

    output_path:
        Output file, stdout when `None`

    grid:
        Verification grid level

    output_format:
        Table format

    threads:
        Worker threads, `None` for the default
    """

    subcommand: str
    design_path: Optional[Path] = None
    family_spec: str = 'gaussian'
    scale: float = 1.0
    constant: float = 1.0
    trials: int = 100_000
    seed: int = 0
    output_path: Optional[Path] = None
    grid: Grid = Grid.fine
    output_format: Format = Format.tsv
    threads: Optional[int] = None

    def validate(self) -> 'RunConfig':
        """
        Checks every numeric flag before any computation starts.

        Returns
        -------
        The config itself
        """
        if not self.scale > 0:
            raise DomainError(f'--scale must be positive, got {self.scale}')
        if not self.constant > 0:
            raise DomainError(
                f'--constant must be positive, got {self.constant}'
            )
        if self.trials < 1:
            raise DomainError(f'--trials must be positive, got {self.trials}')
        if self.seed < 0:
            raise DomainError(f'--seed must be nonnegative, got {self.seed}')
        if self.threads is not None and self.threads < 1:
            raise DomainError(
                f'--threads must be positive, got {self.threads}'
            )
        return self


def load_inputs(config: RunConfig) -> Tuple[DesignSpec, GlmFamily]:
    """
    Loads the design and the family named by a config.
    """
    design = load_design(config.design_path)
    family = parse_family_spec(config.family_spec, config.scale, design.radius)
    return design, family


def write_table(
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
    config: RunConfig,
) -> None:
    """
    Writes a table with a single header line, numbers formatted to 12
    significant digits.

    Parameters
    ----------
    header:
        Column names

    rows:
        Table rows, numbers or strings

    config:
        Supplies the format and the output path
    """
    buffer = io.StringIO()
    writer = csv.writer(
        buffer,
        delimiter='\t' if config.output_format == Format.tsv else ',',
        lineterminator='\n',
    )
    writer.writerow(header)
    writer.writerows([_format_cell(cell) for cell in row] for row in rows)
    write_text(buffer.getvalue(), config)


def write_text(text: str, config: RunConfig) -> None:
    """
    Writes text to the configured output.
    """
    if config.output_path is None:
        typer.echo(text, nl=False)
    else:
        with open(config.output_path, 'w', encoding='utf-8') as file:
            file.write(text)


def _format_cell(cell: Any) -> str:
    if isinstance(cell, str):
        return cell
    return format_number(cell)


def parse_family_list(specs: str) -> List[str]:
    """
    Splits a comma-separated list of family specs.
    """
    names = [spec.strip() for spec in specs.split(',') if spec.strip()]
    if not names:
        raise DomainError('--families needs at least one family')
    return names


def design_option() -> Any:
    return typer.Option(
        ...,
        '--design',
        exists=True,
        dir_okay=False,
        help='Design matrix file, one comma-separated row per line.',
    )


def family_option() -> Any:
    return typer.Option(
        'gaussian',
        '--family',
        help='Family spec: `gaussian[:L=<v>]`, `bernoulli` or `poisson`.',
    )


def scale_option() -> Any:
    return typer.Option(1.0, '--scale', help='The scale s(sigma).')


def trials_option() -> Any:
    return typer.Option(100_000, '--trials', help='Monte Carlo trials.')


def seed_option() -> Any:
    return typer.Option(0, '--seed', help='Master seed.')


def threads_option() -> Any:
    return typer.Option(
        None,
        '--threads',
        help='Worker threads, defaults to $GLMBOUND_THREADS or the CPU '
        'count. Does not change the output.',
    )


def format_option() -> Any:
    return typer.Option(Format.tsv, '--format', help='Table format.')


def output_option() -> Any:
    return typer.Option(
        None, '--output', '-o', dir_okay=False, help='Write to a file.'
    )
