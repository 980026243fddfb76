from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from glmbound.base.data_structures import DesignSpec
from glmbound.design import make_design


def pytest_configure(config: pytest.Config) -> None:
    config.addinivalue_line(
        'markers', 'slow: long Monte Carlo or quadrature checks'
    )


@pytest.fixture(scope='session')
def identity10() -> DesignSpec:
    return make_design(np.eye(10))


@pytest.fixture(scope='session')
def identity2() -> DesignSpec:
    return make_design(np.eye(2))


@pytest.fixture(scope='session')
def tall_design() -> DesignSpec:
    # Row norms stay below 1
    return make_design(
        np.array(
            [
                [0.6, 0.3],
                [0.2, 0.7],
                [0.4, -0.2],
                [0.5, 0.5],
                [-0.3, 0.6],
                [0.7, 0.1],
            ]
        )
    )


@pytest.fixture(scope='session')
def rank_deficient() -> DesignSpec:
    return make_design(np.array([[1.0, 0.0], [0.5, 0.0]]))


@pytest.fixture
def write_matrix(tmp_path: Path) -> Callable[[str, np.ndarray], Path]:
    def write(name: str, matrix: np.ndarray) -> Path:
        matrix = np.atleast_2d(matrix)
        path = tmp_path / name
        path.write_text(
            '\n'.join(','.join(repr(float(v)) for v in row) for row in matrix)
            + '\n',
            encoding='utf-8',
        )
        return path

    return write
