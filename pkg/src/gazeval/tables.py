"""TSV reading/writing helpers.

All interchange files are UTF-8, tab separated, one header row, and may
carry leading ``#`` comment lines (used to embed config hash and seed).
Floats are serialized with ``repr`` so values round-trip exactly and
reruns are byte-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError


def fmt_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_tsv(path, header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_value(v) for v in row])


def read_tsv(path, expected_columns: Sequence[str] | None = None) -> tuple[list[str], list[list[str]]]:
    """Read a TSV, skipping comment lines. Returns (header, rows).

    If expected_columns is given, every name must be present in the header
    (extra columns are tolerated) or a DataError is raised.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    header: list[str] | None = None
    rows: list[list[str]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        for line in csv.reader(fh, delimiter="\t"):
            if not line or (line[0].startswith("#") and header is None):
                continue
            if header is None:
                header = line
                continue
            rows.append(line)
    if header is None:
        raise DataError(f"empty table: {path}")
    if expected_columns is not None:
        missing = [c for c in expected_columns if c not in header]
        if missing:
            raise DataError(f"{path}: missing columns {missing}; found {header}")
    return header, rows


def rows_as_dicts(header: Sequence[str], rows: Iterable[Sequence[str]]):
    idx = {name: i for i, name in enumerate(header)}
    for row in rows:
        yield {name: row[i] for name, i in idx.items()}
