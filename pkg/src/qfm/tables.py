"""Tabular results surface shared by the sweep operations.

Rows are kept in scan order.  Cells may be None for points where a
measurement could not complete; those are emitted as the explicit
marker ``NA`` rather than NaN so downstream CSV consumers can tell a
failed point from a numeric zero.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["SweepTable", "format_number"]

NA_MARKER = "NA"


def format_number(x) -> str:
    """Render a number for CSV output.

    Floats use their shortest exact representation so a written file
    parses back to bit-identical values; integral floats drop the
    trailing ``.0`` (0.0 -> ``0``).
    """
    if x is None:
        return NA_MARKER
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    r = repr(float(x))
    return r[:-2] if r.endswith(".0") else r


@dataclass
class SweepTable:
    """Column-labelled result rows from a parameter sweep."""

    columns: tuple
    rows: list = field(default_factory=list)

    def append(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(
                f"row has {len(values)} cells, table has {len(self.columns)} columns"
            )
        self.rows.append(tuple(values))

    def column(self, name: str) -> np.ndarray:
        """One column as a float array; None cells come back as NaN."""
        i = self.columns.index(name)
        return np.array(
            [np.nan if r[i] is None else float(r[i]) for r in self.rows]
        )

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(format_number(v) for v in row) + "\n")
        return buf.getvalue()

    def to_csv(self, dest) -> None:
        """Write the table to a path or text stream (UTF-8, LF endings)."""
        text = self.to_csv_string()
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            Path(dest).write_text(text, encoding="utf-8", newline="\n")

    def __len__(self) -> int:
        return len(self.rows)
