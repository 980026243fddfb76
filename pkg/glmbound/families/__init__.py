__all__ = [
    'Gaussian',
    'Bernoulli',
    'Poisson',
    'make_family',
    'parse_family_spec',
]

import logging
from typing import Optional

from glmbound.base.exceptions import DomainError
from glmbound.base.family import GlmFamily
from glmbound.families.bernoulli import Bernoulli
from glmbound.families.gaussian import Gaussian
from glmbound.families.poisson import Poisson

logger = logging.getLogger(__name__)


def make_family(
    name: str,
    scale: float = 1.0,
    design_radius: float = 1.0,
    curvature_bound: Optional[float] = None,
) -> GlmFamily:
    """
    Creates a built-in family.

    Parameters
    ----------
    name:
        One of `'gaussian'`, `'bernoulli'` and `'poisson'`. See
        `glmbound.base.types.FamilyName`.

    scale:
        The scale `s(sigma)`, defaults to `1`. Bernoulli and Poisson
        have unit dispersion, other values are replaced by `1`.

    design_radius:
        `max_i ||m_i||_2` of the intended design, defaults to `1`.

    curvature_bound:
        `L` of the Gaussian family, defaults to `1`. Ignored by the
        other families, whose bound follows from their cumulant.

    Returns
    -------
    The family
    """
    if not scale > 0:
        raise DomainError(f'Scale must be positive, got {scale}')
    if not design_radius > 0:
        raise DomainError(
            f'Design radius must be positive, got {design_radius}'
        )

    if name == 'gaussian':
        return Gaussian(
            1.0 if curvature_bound is None else curvature_bound, scale
        )

    if name not in ('bernoulli', 'poisson'):
        raise DomainError(f'Unknown family {name!r}')

    if scale != 1.0:
        logger.warning(
            'The %s family has unit scale, ignoring scale %g', name, scale
        )
    if name == 'bernoulli':
        return Bernoulli()
    return Poisson(design_radius)


def parse_family_spec(
    spec: str, scale: float = 1.0, design_radius: float = 1.0
) -> GlmFamily:
    """
    Parses the command-line family syntax `gaussian[:L=<v>]`,
    `bernoulli` or `poisson`.

    Parameters
    ----------
    spec:
        The family spec

    scale:
        The scale `s(sigma)`, defaults to `1`.

    design_radius:
        `max_i ||m_i||_2` of the intended design, defaults to `1`.

    Returns
    -------
    The family
    """
    name, _, arguments = spec.strip().partition(':')
    options = {}
    for argument in filter(None, arguments.split(':')):
        key, separator, value = argument.partition('=')
        if not separator:
            raise DomainError(f'Malformed family option {argument!r}')
        try:
            options[key.strip()] = float(value)
        except ValueError:
            raise DomainError(
                f'Family option {key.strip()!r} needs a number, got '
                f'{value!r}'
            ) from None

    unknown = set(options) - ({'L'} if name == 'gaussian' else set())
    if unknown:
        raise DomainError(
            f'Unknown option(s) {", ".join(sorted(unknown))} for family '
            f'{name!r}'
        )

    return make_family(name, scale, design_radius, options.get('L'))
