"""Plain-text matrix files.

The first line is ``"m n"``; then ``m`` lines of ``n`` space-separated
values written with 17 significant digits, which round-trips every
finite double exactly.  Blank lines and lines starting with ``#`` are
ignored on read.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from gomp_lab.errors import DimensionMismatch, ParseError


def format_matrix(A) -> str:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("only finite matrices can be written")
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in A]
    return "\n".join(lines) + "\n"


def parse_matrix(text) -> np.ndarray:
    rows = [(no, line.split()) for no, line in enumerate(text.splitlines(), start=1)
            if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise ParseError("empty matrix file", line=1)
    no, header = rows[0]
    if len(header) != 2:
        raise ParseError(f"header must be 'm n', got {' '.join(header)!r}", line=no)
    try:
        m, n = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError("header dimensions must be integers", line=no) from None
    if m < 1 or n < 1:
        raise ParseError("header dimensions must be positive", line=no)
    body = rows[1:]
    if len(body) != m:
        raise DimensionMismatch(f"header declares {m} rows, file has {len(body)}")
    A = np.empty((m, n))
    for r, (no, fields) in enumerate(body):
        if len(fields) != n:
            raise ParseError(
                f"row {r + 1} has {len(fields)} values, expected {n}", line=no,
                column=len(fields) + 1 if len(fields) < n else n + 1,
            )
        for c, tok in enumerate(fields):
            try:
                A[r, c] = float(tok)
            except ValueError:
                raise ParseError(f"row {r + 1}: cannot parse {tok!r}", line=no, column=c + 1) from None
    if not np.all(np.isfinite(A)):
        raise ParseError("matrix contains non-finite values")
    return A


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def write_matrix(path, A):
    Path(path).write_text(format_matrix(A))


def matrix_io(path, direction, matrix=None):
    """Read (``direction="Read"``) or write (``"Write"``) a matrix file."""
    d = str(direction).lower()
    if d == "read":
        return read_matrix(path)
    if d == "write":
        if matrix is None:
            raise ValueError("Write needs a matrix")
        write_matrix(path, matrix)
        return None
    raise ValueError(f"direction must be Read or Write, got {direction!r}")
