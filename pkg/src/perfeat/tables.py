"""Aligned plain-text report tables.

Human-readable companions to the machine CSVs: two-decimal numbers, a first
column of labels, right-aligned value columns, and footnotes for anything
that would otherwise be lost in rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence


def fmt(value: Optional[float], decimals: int = 2) -> str:
    """Fixed-point text for a table cell; absent values print empty."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{decimals}f}"


def fmt_p(p: Optional[float]) -> str:
    """p-values with floor display below three decimals."""
    if p is None or (isinstance(p, float) and math.isnan(p)):
        return ""
    if p < 0.001:
        return "<.001"
    return f"{p:.3f}"


@dataclass
class ReportTable:
    """One titled table with aligned columns and optional footnotes."""

    title: str
    headers: List[str]
    rows: List[List[str]] = field(default_factory=list)
    footnotes: List[str] = field(default_factory=list)

    def add_row(self, cells: Sequence) -> None:
        self.rows.append(["" if c is None else str(c) for c in cells])

    def render(self) -> str:
        columns = len(self.headers)
        for row in self.rows:
            if len(row) != columns:
                raise ValueError("row width does not match the header")
        widths = [
            max(len(self.headers[j]), *(len(row[j]) for row in self.rows), 1)
            if self.rows
            else max(len(self.headers[j]), 1)
            for j in range(columns)
        ]
        lines = [self.title, "=" * len(self.title), ""]
        header_cells = [self.headers[0].ljust(widths[0])] + [
            self.headers[j].rjust(widths[j]) for j in range(1, columns)
        ]
        lines.append("  ".join(header_cells).rstrip())
        lines.append("-" * len("  ".join(header_cells).rstrip()))
        for row in self.rows:
            cells = [row[0].ljust(widths[0])] + [
                row[j].rjust(widths[j]) for j in range(1, columns)
            ]
            lines.append("  ".join(cells).rstrip())
        if self.footnotes:
            lines.append("")
            lines.extend(self.footnotes)
        return "\n".join(lines) + "\n"
