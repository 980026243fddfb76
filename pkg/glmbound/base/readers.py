import math
from pathlib import Path
from typing import List, TextIO, Union

import numpy as np

from glmbound.base.exceptions import ParseError

#: Lines starting with this marker are ignored
COMMENT_MARKER = '#'


class MatrixReader:
    """
    Reader for the matrix text format shared by every subcommand: one
    row per line, comma-separated decimal literals, optional `#` comment
    lines and no header.

    Attributes
    ----------
    text:
        Raw text to read rows from
    """

    def __init__(self, input: Union[str, Path, TextIO]) -> None:
        """
        Initializes the reader.

        Parameters
        ----------
        input:
            Input, this can be raw text, a filepath or an open text
            stream.
        """
        # If input is a filepath
        if isinstance(input, Path):
            with open(input, encoding='utf-8') as file:
                self.text: str = file.read()

        # If input is raw text
        elif isinstance(input, str):
            self.text: str = input

        # Otherwise a text stream
        else:
            self.text: str = input.read()

    def read(self) -> np.ndarray:
        """
        Parses the text into a rectangular matrix.

        Returns
        -------
        Matrix of shape `(rows, columns)`
        """
        rows: List[List[float]] = []
        width = None
        for line_number, line in enumerate(self.text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith(COMMENT_MARKER):
                continue

            row = [
                self._parse_token(token, line_number, column)
                for column, token in enumerate(stripped.split(','), start=1)
            ]

            # Rows must all have the width of the first one
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(
                    f'expected {width} values, found {len(row)}',
                    row=line_number,
                )
            rows.append(row)

        if not rows:
            raise ParseError('input contains no rows', row=1)

        return np.array(rows, dtype=float)

    @staticmethod
    def _parse_token(token: str, row: int, column: int) -> float:
        """
        Parses one decimal literal.

        Parameters
        ----------
        token:
            The token text

        row:
            1-based line number of the token

        column:
            1-based column of the token

        Returns
        -------
        The parsed value
        """
        try:
            value = float(token)
        except ValueError:
            raise ParseError(
                f'{token.strip()!r} is not a number', row, column
            ) from None
        if not math.isfinite(value):
            raise ParseError(f'{token.strip()!r} is not finite', row, column)
        return value


class VectorReader(MatrixReader):
    """
    Reader for vectors written in the matrix text format, either as a
    single row or as a single column.
    """

    def read(self) -> np.ndarray:
        """
        Parses the text into a vector.

        Returns
        -------
        One-dimensional array
        """
        matrix = super().read()
        if min(matrix.shape) != 1:
            raise ParseError(
                f'expected a single row or column, found shape '
                f'{matrix.shape[0]}x{matrix.shape[1]}',
                row=1,
            )
        return matrix.ravel()
