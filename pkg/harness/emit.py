"""CSV tables and whitespace plot data."""
import logging
from pathlib import Path

import pandas as pd

from snakelab.exceptions import ArgumentError

logger = logging.getLogger(__name__)


def check_schema(frame, columns):
    if list(frame.columns) != list(columns):
        raise ArgumentError(f"Table columns {list(frame.columns)} do not match schema {list(columns)}")


def csv_text(frame, columns=None):
    if columns is not None:
        check_schema(frame, columns)
    return frame.to_csv(index=False, lineterminator='\n', float_format='%.17g')


def write_csv(frame, path, columns=None):
    text = csv_text(frame, columns)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)
    logger.info("wrote %d rows to %s", len(frame), path)
    return Path(path)


def plot_data_text(table, columns):
    """``#``-prefixed header and right-aligned numeric columns in table order.

    Raises:
        ArgumentError: On an empty table, an empty selection, an unknown or a
            non-numeric column
    """
    if not columns:
        raise ArgumentError("Select at least one column for plot data")
    unknown = [c for c in columns if c not in table.columns]
    if unknown:
        raise ArgumentError(f"Unknown plot columns {unknown}; available: {list(table.columns)}")
    if table.empty:
        raise ArgumentError("Cannot emit plot data from an empty table")
    selected = table[list(columns)]
    for name in columns:
        if not pd.api.types.is_numeric_dtype(selected[name]):
            raise ArgumentError(f"Plot column {name!r} is not numeric")
    body = selected.astype(float).to_string(index=False, header=False,
                                            float_format='{:.10g}'.format)
    return '# ' + ' '.join(columns) + '\n' + body + '\n'


def emit_plot_data(table, columns, path):
    text = plot_data_text(table, columns)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)
    return Path(path)


def emit_plot_series(table, x, series, directory, stem):
    """One ``<stem>_<y>.dat`` file of ``x y`` per requested series."""
    directory = Path(directory)
    return [emit_plot_data(table, [x, y], directory / f"{stem}_{y}.dat") for y in series]
