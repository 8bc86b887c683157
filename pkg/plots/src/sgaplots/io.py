"""Reading the experiment CSV schemas.

Every experiment table starts with two comment lines::

    # schema=<name> v<version>
    # config=<canonical JSON of the producing configuration>

followed by a CSV header and rows.  Readers here validate the schema
name, version, and required columns, and raise :class:`SchemaError`
naming whatever is wrong.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

SUPPORTED_VERSION = 1

REQUIRED_COLUMNS = {
    "sweep": ["pi", "m", "freq_disordered", "ci_lo", "ci_hi",
              "freq_quasispecies", "qci_lo", "qci_hi"],
    "trajectories": ["replica", "gen", "f_star", "f_bar", "n_master",
                     "n_descendants", "d_max"],
    "events": ["replica", "tau0", "tau1", "tau2", "tau_bar",
               "event_disordered", "event_quasispecies"],
}


class SchemaError(Exception):
    """The input file does not match the expected table schema."""


@dataclass
class Table:
    """One parsed experiment table."""

    schema: str
    version: int
    config: dict
    columns: list[str]
    rows: list[dict[str, str]]
    path: str

    def floats(self, column: str) -> list[float]:
        try:
            return [float(row[column]) for row in self.rows]
        except ValueError as exc:
            raise SchemaError(
                f"{self.path}: column {column!r} holds a non-numeric value "
                f"({exc})") from None

    def config_echo(self) -> str:
        return json.dumps(self.config, sort_keys=True, separators=(",", ":"))


def read_table(path: str | Path, expected_schema: str) -> Table:
    """Parse and validate one table file against an expected schema."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if len(lines) < 2 or not lines[0].startswith("# schema=") \
            or not lines[1].startswith("# config="):
        raise SchemaError(
            f"{path}: missing '# schema=' / '# config=' header lines")
    schema_field = lines[0].removeprefix("# schema=").strip()
    name, _, version_tag = schema_field.partition(" ")
    if name != expected_schema:
        raise SchemaError(
            f"{path}: schema is {name!r}, expected {expected_schema!r}")
    if not version_tag.startswith("v"):
        raise SchemaError(f"{path}: malformed schema version {version_tag!r}")
    try:
        version = int(version_tag[1:])
    except ValueError:
        raise SchemaError(
            f"{path}: malformed schema version {version_tag!r}") from None
    if version != SUPPORTED_VERSION:
        raise SchemaError(
            f"{path}: schema version {version} unsupported "
            f"(expected {SUPPORTED_VERSION})")
    try:
        config = json.loads(lines[1].removeprefix("# config="))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: config echo is not valid JSON: {exc}") \
            from None
    reader = csv.DictReader(io.StringIO("\n".join(lines[2:])))
    if reader.fieldnames is None:
        raise SchemaError(f"{path}: missing CSV header line")
    columns = list(reader.fieldnames)
    missing = [c for c in REQUIRED_COLUMNS[expected_schema]
               if c not in columns]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {', '.join(repr(c) for c in missing)} "
            f"for the {expected_schema} schema")
    rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: table has a header but no data rows")
    for row in rows:
        if any(value is None for value in row.values()):
            raise SchemaError(f"{path}: ragged row {row!r}")
    return Table(schema=name, version=version, config=config,
                 columns=columns, rows=rows, path=str(path))
