"""
Plain CSV matrix files.

Matrices are comma separated, row-major, dot decimal, with an optional
header row (detected when the first row does not parse as numbers). Floats
are written with 12 significant digits. Writes go to a temporary file in the
target directory and are renamed into place, so a failed run never leaves a
partial output file behind.
"""

import csv
import io
import os
import tempfile

import numpy as np

from .errors import MatrixParseError

FLOAT_FORMAT = "{:.12g}"


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FORMAT.format(float(v))
    return str(v)


def _is_number(field):
    try:
        float(field)
    except ValueError:
        return False
    return True


def parse_matrix(text, source="<string>"):
    """
    Parse CSV text into a 2-D float array.

    Returns
    -------
    matrix : numpy.ndarray
    header : list of str or None

    Raises
    ------
    MatrixParseError
        On ragged rows or non-numeric fields; the message names the row and
        column (1-based, counting the header line).
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(f.strip() for f in r)]
    if not rows:
        raise MatrixParseError(f"{source}: no data")
    header = None
    if not all(_is_number(f) for f in rows[0]):
        header = [f.strip() for f in rows[0]]
        rows = rows[1:]
        first_line = 2
    else:
        first_line = 1
    if not rows:
        raise MatrixParseError(f"{source}: header but no data rows")
    width = len(header) if header is not None else len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        line = first_line + i
        if len(row) != width:
            raise MatrixParseError(
                f"{source}: row {line} has {len(row)} fields, expected {width}"
            )
        for j, field in enumerate(row):
            try:
                out[i, j] = float(field)
            except ValueError:
                raise MatrixParseError(
                    f"{source}: row {line}, column {j + 1}: cannot parse {field.strip()!r}"
                ) from None
    if not np.all(np.isfinite(out)):
        i, j = np.argwhere(~np.isfinite(out))[0]
        raise MatrixParseError(f"{source}: row {first_line + i}, column {j + 1}: non-finite value")
    return out, header


def read_matrix(path):
    """Read a CSV matrix file; returns the array (header, if any, is dropped)."""
    with open(path, newline="") as fh:
        return parse_matrix(fh.read(), source=str(path))[0]


def _atomic_write(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_table(rows, header=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_matrix(path, matrix, header=None):
    """Write a 2-D array as CSV (12 significant digits)."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    _atomic_write(path, format_table(M.tolist(), header))


def write_table(path, header, rows):
    """Write rows of mixed values under a header row."""
    _atomic_write(path, format_table(rows, header))


def write_text(path, text):
    _atomic_write(path, text)
