"""
Reports
=======
The machine-readable result of every CLI command, plus a rich console
summary for humans (written to stderr so stdout stays a single JSON
document).

Reports are deterministic: identical inputs, flags and seeds give identical
reports apart from the ``timings_ms`` block.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union
import hashlib
import json

import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

from src import __version__
from src.utils.formatting import ensure_finite, format_duration, format_number, verdict_mark

SCHEMA_VERSION = 1


def digest_bytes(data: bytes) -> str:
    """``sha256:<hex>`` digest of an input file's bytes."""
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _serialize_data(value: Any) -> Any:
    """Convert numpy and pandas values into plain JSON types."""
    if isinstance(value, pd.DataFrame):
        return [_serialize_data(row) for row in value.to_dict(orient="records")]
    if isinstance(value, dict):
        return {str(k): _serialize_data(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_serialize_data(v) for v in value]
    if isinstance(value, np.ndarray):
        return _serialize_data(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    return value


@dataclass
class Report:
    """Result of one command."""

    command: str
    payload: Dict[str, Any] = field(default_factory=dict)
    input_digests: Dict[str, str] = field(default_factory=dict)
    seeds: List[int] = field(default_factory=list)
    timings_ms: Dict[str, float] = field(default_factory=dict)
    tool_version: str = __version__

    def to_dict(self) -> Dict[str, Any]:
        """
        JSON-ready dictionary.

        Raises:
            ValueError: when any floating-point field is NaN or infinite
        """
        data = {
            "command": self.command,
            "tool_version": self.tool_version,
            "schema_version": SCHEMA_VERSION,
            "input_digests": self.input_digests,
            "seeds": [int(s) for s in self.seeds],
            **_serialize_data(self.payload),
            "timings_ms": _serialize_data(self.timings_ms),
        }
        ensure_finite(data)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def save_json(self, path: Union[str, Path]) -> Path:
        """Save the report as a JSON file."""
        output_path = Path(path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w") as f:
            f.write(self.to_json())
        return output_path


def write_json(data: Dict[str, Any], path: Union[str, Path]) -> Path:
    """Write a plain JSON document (complex or mesh file) next to a report."""
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w") as f:
        json.dump(_serialize_data(data), f, indent=2)
    return output_path


# Verdict keys shown as marks in the console summary
_VERDICT_KEYS = ("is_exact", "certified", "elliptic", "oracle_agrees", "consistent", "vacuous")


def print_summary(report: Report, console: Optional[Console] = None) -> None:
    """Print the scalar fields of a report as a rich table."""
    console = console or Console(stderr=True)
    table = Table(title=f"{report.command} (v{report.tool_version})", show_header=False)
    table.add_column("Field", style="cyan")
    table.add_column("Value")

    for key, value in _serialize_data(report.payload).items():
        if key in _VERDICT_KEYS and isinstance(value, bool):
            table.add_row(key, verdict_mark(value))
        elif isinstance(value, bool) or value is None or isinstance(value, str):
            table.add_row(key, str(value))
        elif isinstance(value, (int, float)):
            table.add_row(key, format_number(value))
        elif isinstance(value, list) and len(value) <= 8 and all(isinstance(v, (int, float)) for v in value):
            table.add_row(key, ", ".join(format_number(v) for v in value))

    if report.seeds:
        table.add_row("seeds", ", ".join(str(s) for s in report.seeds))
    total = sum(report.timings_ms.values())
    table.add_row("time", format_duration(total))
    console.print(table)
