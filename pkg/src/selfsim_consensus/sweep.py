"""Parameter sweeps over (family, k, n) and their CSV/JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .graphs import Family, GraphSpec
from .metrics import MetricsReport, full_report

__all__ = [
    "MAX_SWEEP_N",
    "METRIC_NAMES",
    "SCHEMA",
    "SweepSpec",
    "cmd_sweep",
    "format_table",
    "parse_int_list",
    "parse_range",
]

SCHEMA = "selfsim-consensus/metrics v1"
ID_COLUMNS = ("family", "n", "k", "N", "E")
METRIC_NAMES = MetricsReport.CSV_COLUMNS[len(ID_COLUMNS):]
# closed forms stay finite in float64 well past this; the limit keeps sweeps sane
MAX_SWEEP_N = 30


@dataclass
class SweepSpec:
    families: list[Family]
    k_values: list[int]
    n_range: tuple[int, int]
    outputs: list[str] = field(default_factory=lambda: list(METRIC_NAMES))
    format: str = "csv"

    def validate(self) -> None:
        if not self.families:
            raise ValueError("sweep needs at least one family")
        if not self.k_values:
            raise ValueError("sweep needs at least one k")
        if not self.outputs:
            raise ValueError("sweep needs at least one output column")
        self.families = [Family.parse(f) for f in self.families]
        lo, hi = self.n_range
        if lo > hi:
            raise ValueError(f"empty n range {lo}..{hi}")
        if lo < 1:
            raise ValueError("n must start at 1 or later")
        if hi > MAX_SWEEP_N:
            raise ValueError(f"n up to {hi} exceeds the sweep budget of {MAX_SWEEP_N}")
        for k in self.k_values:
            if k < 3:
                raise ValueError(f"k must be >= 3, got {k}")
        unknown = [o for o in self.outputs if o not in METRIC_NAMES]
        if unknown:
            raise ValueError(f"unknown output columns: {', '.join(unknown)}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")


def _row(args: tuple[GraphSpec, bool]) -> dict:
    gspec, spectrum_check = args
    return full_report(gspec, spectrum_check=spectrum_check).row()


def cmd_sweep(spec: SweepSpec, *, spectrum_check: bool = True, workers: int = 1) -> list[dict]:
    """One row per (family, k, n), in that order, with the requested metric columns.

    With ``workers > 1`` rows are computed in a process pool; ``map`` keeps
    the input order, so the output is the same either way.
    """
    spec.validate()
    lo, hi = spec.n_range
    jobs = [
        (GraphSpec(family, n, k), spectrum_check)
        for family in spec.families
        for k in spec.k_values
        for n in range(lo, hi + 1)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            full_rows = list(pool.map(_row, jobs))
    else:
        full_rows = [_row(j) for j in jobs]
    rows = []
    for full in full_rows:
        row = {c: full[c] for c in ID_COLUMNS}
        row.update((o, full[o]) for o in spec.outputs)
        rows.append(row)
    return rows


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    return str(value)


def format_table(rows: Sequence[dict], fmt: str = "csv", schema: str = SCHEMA) -> str:
    """Render rows deterministically; floats use their shortest round-trip repr."""
    if fmt == "json":
        return json.dumps({"schema": schema, "rows": list(rows)}, indent=1) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    buf.write(f"# schema: {schema}\n")
    if rows:
        cols = list(rows[0].keys())
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in cols])
    return buf.getvalue()


def parse_range(text: str) -> tuple[int, int]:
    """``"3..8"`` -> ``(3, 8)``; a single number is a one-element range."""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..", 1)
        return int(a), int(b)
    return int(text), int(text)


def parse_int_list(text: "str | Iterable[int]") -> list[int]:
    if not isinstance(text, str):
        return [int(x) for x in text]
    return [int(x) for x in text.replace(" ", "").split(",") if x]
