"""Plain-text state and density-matrix files.

Layout (UTF-8)::

    dim N
    a+bi,a-bi,...      <- one row for a state vector, N rows for a density matrix

Entries are rendered with 17 significant digits so files round-trip exactly.
"""

from __future__ import annotations

import csv
import math
import os

import numpy as np

from .errors import StateFileError

CSV_DIGITS = 15


def format_real(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return format(x, ".17g")


def format_complex(z: complex) -> str:
    z = complex(z)
    re = format_real(z.real)
    im = format_real(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{re}{im}i"


def parse_complex(token: str) -> complex:
    token = token.strip()
    if not token.endswith("i"):
        # a bare real is accepted as well
        return complex(float(token))
    return complex(token[:-1] + "j")


def dumps(array) -> str:
    a = np.asarray(array, dtype=complex)
    if a.ndim == 1:
        rows = [a]
    elif a.ndim == 2 and a.shape[0] == a.shape[1]:
        rows = list(a)
    else:
        raise ValueError(f"expected a vector or a square matrix, got shape {a.shape}")
    lines = [f"dim {a.shape[0]}"]
    lines += [",".join(format_complex(z) for z in row) for row in rows]
    return "\n".join(lines) + "\n"


def loads(text: str) -> np.ndarray:
    """Parse the file format above; raises :class:`StateFileError` on malformed input."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("dim"):
        raise StateFileError("first line must be 'dim N'")
    try:
        N = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise StateFileError(f"bad header {lines[0]!r}") from None
    body = lines[1:]
    if len(body) not in (1, N):
        raise StateFileError(f"expected 1 or {N} data rows, found {len(body)}")
    rows = []
    for lineno, line in enumerate(body, start=2):
        tokens = line.split(",")
        if len(tokens) != N:
            raise StateFileError(f"line {lineno}: expected {N} entries, found {len(tokens)}")
        try:
            rows.append([parse_complex(t) for t in tokens])
        except ValueError:
            raise StateFileError(f"line {lineno}: malformed complex entry") from None
    a = np.array(rows, dtype=complex)
    return a[0] if len(body) == 1 and N != 1 else a


def save(path, array) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(array))


def load(path: str | os.PathLike) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def format_csv(x) -> str:
    """Table rendering: integers as-is, reals snapped to 15 significant digits.

    Snapping absorbs last-bit rounding noise (0.06249999999999997 -> 0.0625);
    the shortest round-trip form of the snapped value is written.
    """
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    x = float(format(x, f".{CSV_DIGITS}g"))
    if x == 0.0:
        return "0"
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def write_csv(path, header, rows) -> int:
    """Write a table with LF line endings; returns the number of data rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_csv(v) for v in row])
    return len(rows)
