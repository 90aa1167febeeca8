"""Scan results and their CSV serialization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["ScanResult", "fmt17", "write_csv"]


@dataclass
class ScanResult:
    """Ordered samples of a one-parameter scan.

    ``rows`` holds one dict per grid point with the keys of ``columns``;
    ``metadata`` collects run-level information (panel counts, truncation,
    quadrature) and ``warnings`` per-point messages (empty string if none).
    """

    parameter: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        return [r.get(name) for r in self.rows]

    def add(self, **values) -> None:
        self.rows.append({c: values.get(c) for c in self.columns})

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.rows if r.get("warn", "").startswith("error"))


def fmt17(value) -> str:
    """Floats at 17 significant digits; None and NaN become 'nan'."""
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    return str(value).replace(",", ";").replace("\n", " ")


def write_csv(result: ScanResult, fh, header_lines=()) -> None:
    """Write ``#`` header lines, the column row, then one row per sample."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    for k, v in result.metadata.items():
        fh.write(f"# meta {k} = {v}\n")
    fh.write(",".join(result.columns) + "\n")
    for r in result.rows:
        fh.write(",".join(fmt17(r.get(c)) for c in result.columns) + "\n")
