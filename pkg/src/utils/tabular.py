"""Text-typed CSV reading shared by the dataset, stage-file and results readers."""

import re
from pathlib import Path

import pandas as pd

_FIELD_COUNT = re.compile(r"Expected (\d+) fields in line (\d+), saw (\d+)")


def read_string_table(path: Path) -> pd.DataFrame:
    """
    Read a headed CSV keeping every cell as text.

    The first line is the header. A row wider than the header is an error,
    never an implicit index column. Data row ``i`` of the result is file line
    ``i + 2``.

    Raises:
        pandas.errors.EmptyDataError: If the file has no header
        pandas.errors.ParserError: On a row wider than the header, naming its line
    """
    try:
        raw = pd.read_csv(
            Path(path),
            header=None,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            encoding="utf-8",
        )
    except pd.errors.ParserError as e:
        match = _FIELD_COUNT.search(str(e))
        if match is None:
            raise
        expected, line, found = match.groups()
        raise pd.errors.ParserError(
            f"line {line}: expected {expected} fields, found {found}"
        ) from e

    frame = raw.iloc[1:].reset_index(drop=True)
    frame.columns = [str(name) for name in raw.iloc[0].tolist()]
    return frame
