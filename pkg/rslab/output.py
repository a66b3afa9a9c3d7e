"""Result emission: JSON records, CSV tables and the run-manifest sidecar."""

import csv, hashlib, io, json, logging, math, sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .utils import FORMAT_VERSION, get_rslab_version

logger = logging.getLogger(__name__)

supported_formats: list[str] = ["json", "csv"]


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)


@dataclass
class Payload:
    """One command's result: scalar ``record`` fields plus an optional ``table``."""

    command: str
    record: dict = field(default_factory=dict)
    table: Table | None = None


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None = None
    versions: dict = field(default_factory=dict)
    started: str = ""
    finished: str = ""
    data_file: str = ""
    data_sha256: str = ""
    summary: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "command": self.command,
            "parameters": to_plain(self.parameters),
            "seed": self.seed,
            "versions": self.versions,
            "started": self.started,
            "finished": self.finished,
            "data_file": self.data_file,
            "data_sha256": self.data_sha256,
            "summary": to_plain(self.summary),
        }


def timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def collect_versions() -> dict:
    versions = {"rslab": get_rslab_version(), "format_version": FORMAT_VERSION}
    for package in ("numpy", "sympy", "joblib"):
        try:
            versions[package] = version(package)
        except PackageNotFoundError:
            versions[package] = "unknown"
    return versions


def to_plain(value):
    """JSON-ready form: complex -> [re, im], Fraction -> "p/q", numpy scalars and arrays -> Python."""
    if isinstance(value, dict):
        return {str(key): to_plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_plain(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if value is None or isinstance(value, str):
        return value
    if hasattr(value, "value") and hasattr(value, "name"):
        return value.value
    return str(value)


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(to_plain(value))


def to_json(value, level: int = 0) -> str:
    """``json.dumps(indent=2)`` layout with floats printed to 17 significant digits."""
    pad, inner = "  " * level, "  " * (level + 1)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"Non-finite float in JSON output: {value}")
        text = format(value, ".17g")
        return text + ".0" if text.lstrip("-").isdigit() else text
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(key))}: {to_json(item, level + 1)}" for key, item in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        return "[\n" + ",\n".join(inner + to_json(item, level + 1) for item in value) + "\n" + pad + "]"
    return json.dumps(value)


def render(payload: Payload, format: str) -> str:
    """The data file body. Depends on the payload alone, never on wall-clock time."""
    if format not in supported_formats:
        raise ValueError(f"Unsupported format: {format}. Expecting: " + " ".join(supported_formats))
    if format == "csv":
        if payload.table is None:
            raise ValueError(f"Command {payload.command} produces a record, not a table; use --format json")
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(payload.table.columns)
        for row in payload.table.rows:
            writer.writerow([format_cell(cell) for cell in row])
        return buffer.getvalue()

    document = {"format_version": FORMAT_VERSION, "command": payload.command}
    document.update(to_plain(payload.record))
    if payload.table is not None:
        document["columns"] = list(payload.table.columns)
        document["rows"] = to_plain(payload.table.rows)
    return to_json(document) + "\n"


def _data_path(out: Path, command: str, format: str) -> Path:
    if out.suffix in (".json", ".csv"):
        return out
    return out / f"{command.replace(' ', '_')}.{format}"


def emit(payload: Payload, format: str = "json", out: str | Path | None = None, manifest: RunManifest | None = None):
    """Writes the data file (or stdout when ``out`` is None) and, with a file, the manifest sidecar.

    ``out`` is either a directory, which receives ``<command>.<format>``, or a file
    path ending in .json or .csv. The sidecar sits next to the data file as
    ``<stem>.manifest.json``. Returns the written paths.
    """
    body = render(payload, format)
    if out is None:
        sys.stdout.write(body)
        return []

    path = _data_path(Path(out), payload.command, format)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as file:
        file.write(body)
    logger.info(f"Wrote {path}")
    if manifest is None:
        return [path]

    manifest.data_file = path.name
    manifest.data_sha256 = hashlib.sha256(body.encode("utf-8")).hexdigest()
    manifest.finished = manifest.finished or timestamp()
    sidecar = path.with_name(f"{path.stem}.manifest.json")
    with open(sidecar, "w", newline="\n", encoding="utf-8") as file:
        file.write(to_json(manifest.as_dict()) + "\n")
    logger.info(f"Wrote {sidecar}")
    return [path, sidecar]


def read_json(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as file:
        return json.load(file)


def read_csv(path: str | Path) -> Table:
    """Reads back a CSV data file; numeric cells come back as int or float."""
    with open(path, newline="", encoding="utf-8") as file:
        reader = csv.reader(file)
        columns = next(reader)
        rows = [[_parse_cell(cell) for cell in row] for row in reader]
    return Table(columns, rows)


def _parse_cell(cell: str):
    if cell in ("true", "false"):
        return cell == "true"
    for cast in (int, float):
        try:
            return cast(cell)
        except ValueError:
            pass
    return cell
