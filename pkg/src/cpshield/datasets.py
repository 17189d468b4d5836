"""Self-describing tabular output.

CSV files start with a ``#`` metadata preamble followed by a header whose
every column carries its unit in brackets, e.g. ``z [m]``. Numbers use
scientific notation with nine significant digits so that identical inputs
give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

FLOAT_FORMAT = "{:.8e}"


@dataclass
class Dataset:
    columns: list  # (name, unit) pairs
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def header(self):
        return [f"{name} [{unit}]" for name, unit in self.columns]

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, expected {len(self.columns)}")
        self.rows.append(tuple(values))

    def column(self, name):
        idx = [c[0] for c in self.columns].index(name)
        return [row[idx] for row in self.rows]


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, (int, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return FLOAT_FORMAT.format(value)
    return str(value)


def to_csv(ds):
    buf = io.StringIO()
    for key in sorted(ds.metadata):
        buf.write(f"# {key}: {ds.metadata[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ds.header)
    for row in ds.rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def to_structured(ds):
    payload = {
        "metadata": ds.metadata,
        "columns": [{"name": n, "unit": u} for n, u in ds.columns],
        "rows": [[format_value(v) for v in row] for row in ds.rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def render(ds, fmt="csv"):
    if fmt == "csv":
        return to_csv(ds)
    if fmt == "structured":
        return to_structured(ds)
    raise ValueError(f"unknown format {fmt!r}")


def read_csv(text):
    """Parse a CSV produced by :func:`to_csv` back into a :class:`Dataset`.

    Numeric cells come back as floats; everything else stays a string.
    """
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    columns = []
    for cell in header:
        name, sep, unit = cell.rpartition(" [")
        if not sep or not unit.endswith("]"):
            raise ValueError(f"column {cell!r} lacks a unit")
        columns.append((name, unit[:-1]))
    ds = Dataset(columns, metadata=meta)
    for row in reader:
        parsed = []
        for cell in row:
            try:
                parsed.append(float(cell))
            except ValueError:
                parsed.append(cell)
        ds.add(*parsed)
    return ds
