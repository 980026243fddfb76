import math
import os
from typing import Optional

import numpy as np

from glmbound.base.exceptions import DomainError

#: Environment variable holding the default number of worker threads
THREADS_ENVIRONMENT_VARIABLE = 'GLMBOUND_THREADS'


def format_number(value: float, significant_digits: int = 12) -> str:
    """
    Formats a number with a fixed number of significant digits.

    Parameters
    ----------
    value:
        The number

    significant_digits:
        Number of significant digits, defaults to `12`.

    Returns
    -------
    The formatted number, `inf`, `-inf` or `nan` for non-finite values
    """
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return f'{value:.{significant_digits}g}'


def format_vector(vector: Optional[np.ndarray]) -> str:
    """
    Formats a vector as comma-separated numbers, or an empty string for
    `None`.
    """
    if vector is None:
        return ''
    return ','.join(format_number(float(v)) for v in vector)


def substream(seed: int, index: int) -> np.random.Generator:
    """
    Returns the counter-mode random stream of one Monte Carlo trial.
    Streams are keyed by `(seed, index)` only, so a trial draws the same
    numbers whichever thread runs it and in whatever order.

    Parameters
    ----------
    seed:
        The master seed, in `[0, 2**128)`

    index:
        The trial index, in `[0, 2**64)`

    Returns
    -------
    A generator positioned at the start of the trial's stream
    """
    if seed < 0 or index < 0:
        raise DomainError('Seeds and trial indices must be nonnegative')
    # Word 0 of the counter advances with every draw, word 1 holds the
    # trial index
    return np.random.Generator(
        np.random.Philox(key=seed, counter=index << 64)
    )


def default_thread_count() -> int:
    """
    Gets the default number of Monte Carlo worker threads, read from
    the `GLMBOUND_THREADS` environment variable and falling back to the
    number of CPUs.
    """
    value = os.environ.get(THREADS_ENVIRONMENT_VARIABLE)
    if value:
        try:
            threads = int(value)
        except ValueError:
            raise DomainError(
                f'{THREADS_ENVIRONMENT_VARIABLE} must be an integer, '
                f'got {value!r}'
            ) from None
        if threads < 1:
            raise DomainError(f'{THREADS_ENVIRONMENT_VARIABLE} must be >= 1')
        return threads
    return os.cpu_count() or 1
