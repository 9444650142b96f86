"""Matrix files, structured reports and their JSON/CSV serialization.

Matrix file (JSON)::

    {"schema_version": "1", "n": 2, "entries": [[re, im], ...]}   # row-major

Reports hold run metadata, named tables and named verdicts.  Complex table
columns are split into ``<name>_re`` / ``<name>_im``.  CSV numbers use 17
significant digits so doubles round-trip exactly.
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io as _io
import json
import math
import platform
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from .errors import ConfigError

SCHEMA_VERSION = "1"

__all__ = [
    "SCHEMA_VERSION",
    "matrix_to_dict",
    "matrix_from_dict",
    "save_matrix",
    "load_matrix",
    "Table",
    "Verdict",
    "Report",
    "config_hash",
    "format_number",
]


def matrix_to_dict(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError("only square matrices can be stored")
    flat = m.reshape(-1)
    return {
        "schema_version": SCHEMA_VERSION,
        "n": int(m.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_dict(data, source="<matrix>"):
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: expected a JSON object")
    unknown = sorted(set(data) - {"schema_version", "n", "entries"})
    if unknown:
        raise ConfigError(f"{source}: unknown keys {unknown}")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"{source}: schema_version must be {SCHEMA_VERSION!r}")
    n = data.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigError(f"{source}: n must be a positive integer")
    entries = data.get("entries")
    if not isinstance(entries, list) or len(entries) != n * n:
        got = len(entries) if isinstance(entries, list) else type(entries).__name__
        raise ConfigError(f"{source}: expected {n * n} entries, got {got}")
    out = np.empty(n * n, dtype=complex)
    for i, pair in enumerate(entries):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
        ):
            raise ConfigError(f"{source}: entry {i} must be a [re, im] pair of numbers")
        re_, im_ = float(pair[0]), float(pair[1])
        if not (math.isfinite(re_) and math.isfinite(im_)):
            raise ConfigError(f"{source}: entry {i} is not finite")
        out[i] = complex(re_, im_)
    return out.reshape(n, n)


def _reject_constant(name):
    raise ValueError(f"non-finite constant {name}")


def load_json(path):
    """Parse a JSON file; errors carry line and column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: line {exc.lineno} column {exc.colno} (offset {exc.pos}): {exc.msg}"
        ) from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def save_matrix(path, m):
    Path(path).write_text(json.dumps(matrix_to_dict(m)) + "\n", encoding="utf-8")


def load_matrix(path):
    return matrix_from_dict(load_json(path), source=str(path))


def format_number(x):
    """17-significant-digit text for CSV cells."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, (complex, np.complexfloating)):
        return [_json_value(x.real), _json_value(x.imag)]
    if isinstance(x, dict):
        return {str(k): _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_json_value(v) for v in x]
    return x


@dataclass
class Table:
    """Named columns with one row per record; complex cells are split."""

    columns: list
    rows: list = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError("row length does not match the columns")
        self.rows.append(list(values))

    def _complex_columns(self):
        flags = []
        for j in range(len(self.columns)):
            flags.append(any(isinstance(r[j], (complex, np.complexfloating)) for r in self.rows))
        return flags

    def flat(self):
        flags = self._complex_columns()
        header = []
        for name, cplx in zip(self.columns, flags):
            header += [f"{name}_re", f"{name}_im"] if cplx else [name]
        body = []
        for r in self.rows:
            out = []
            for v, cplx in zip(r, flags):
                if cplx:
                    z = complex(v)
                    out += [z.real, z.imag]
                else:
                    out.append(v)
            body.append(out)
        return header, body

    def to_csv(self):
        header, body = self.flat()
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in body:
            w.writerow([format_number(v) for v in r])
        return buf.getvalue()

    def to_json(self):
        header, body = self.flat()
        return {"columns": header, "rows": [[_json_value(v) for v in r] for r in body]}


@dataclass
class Verdict:
    passed: bool
    residual: float
    threshold: float
    note: str = ""

    def to_json(self):
        out = {
            "passed": bool(self.passed),
            "residual": _json_value(self.residual),
            "threshold": _json_value(self.threshold),
        }
        if self.note:
            out["note"] = self.note
        return out


def config_hash(config):
    text = json.dumps(_json_value(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def versions():
    from . import __version__

    return {
        "hslab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


@dataclass
class Report:
    """Structured output of one command run."""

    command: str
    seed: int | None
    config: dict
    tables: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    timestamp: str = field(
        default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    )

    def verdict(self, name, passed, residual, threshold, note=""):
        self.verdicts[name] = Verdict(bool(passed), residual, threshold, note)

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts.values())

    def header(self):
        return {
            "command": self.command,
            "seed": self.seed,
            "config": _json_value(self.config),
            "config_hash": config_hash(self.config),
            "versions": versions(),
            "timestamp": self.timestamp,
        }

    def to_json(self):
        doc = {
            "meta": self.header(),
            "values": _json_value(self.values),
            "tables": {k: t.to_json() for k, t in self.tables.items()},
            "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
            "passed": self.passed,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def csv_files(self):
        stem = self.command.replace(" ", "_")
        return {f"{stem}_{name}.csv": t.to_csv() for name, t in self.tables.items()}

    def write(self, out_dir, fmt="json"):
        """Write the report; returns the written paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        stem = self.command.replace(" ", "_")
        if fmt in ("json", "both"):
            p = out / f"{stem}.json"
            p.write_text(self.to_json(), encoding="utf-8")
            written.append(p)
        if fmt in ("csv", "both"):
            for name, text in self.csv_files().items():
                p = out / name
                p.write_text(text, encoding="utf-8")
                written.append(p)
        return written
