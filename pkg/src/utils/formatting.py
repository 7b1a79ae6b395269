"""
Formatting Utilities
====================
Matrix JSON encoding shared repo-wide, finiteness checks for reports, and
human-readable number formatting for console summaries.

Matrix encoding::

    {"rows": r, "cols": c, "re": [row-major reals], "im": [row-major reals]}

``im`` may be omitted for real matrices.
"""

import math
from typing import Any, Dict, Union

import numpy as np

from src.errors import ParseError


def encode_matrix(matrix: np.ndarray) -> Dict[str, Any]:
    """Encode a 2-D array in the repo-wide matrix JSON form."""
    matrix = np.asarray(matrix)
    rows, cols = matrix.shape
    data: Dict[str, Any] = {
        "rows": int(rows),
        "cols": int(cols),
        "re": [float(x) for x in np.real(matrix).ravel()],
    }
    imag = np.imag(matrix)
    if np.any(imag != 0):
        data["im"] = [float(x) for x in imag.ravel()]
    return data


def decode_matrix(data: Dict[str, Any]) -> np.ndarray:
    """Decode a matrix JSON object into a complex array."""
    try:
        rows = int(data["rows"])
        cols = int(data["cols"])
        real = np.asarray(data["re"], dtype=float)
        imag = np.asarray(data.get("im") or np.zeros(rows * cols), dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"Malformed matrix object: {e}") from e

    if rows < 0 or cols < 0:
        raise ParseError(f"Negative matrix shape ({rows}, {cols})")
    if real.size != rows * cols or imag.size != rows * cols:
        raise ParseError(
            f"Matrix payload has {real.size} real / {imag.size} imaginary entries, "
            f"expected {rows * cols}"
        )
    return (real + 1j * imag).reshape(rows, cols)


def real_if_close(value: complex, tol: float = 1e-10) -> Union[float, complex]:
    """Drop an imaginary part that is below ``tol``."""
    if abs(complex(value).imag) <= tol:
        return float(complex(value).real)
    return complex(value)


def ensure_finite(data: Any, path: str = "report") -> None:
    """
    Walk a JSON-ready structure and fail on NaN or infinite floats.

    Raises:
        ValueError: naming the first offending key path
    """
    if isinstance(data, float):
        if not math.isfinite(data):
            raise ValueError(f"Non-finite value at {path}: {data}")
    elif isinstance(data, dict):
        for key, value in data.items():
            ensure_finite(value, f"{path}.{key}")
    elif isinstance(data, (list, tuple)):
        for i, value in enumerate(data):
            ensure_finite(value, f"{path}[{i}]")


def format_number(value: Union[int, float], decimal_places: int = 3) -> str:
    """Format a number; small or large floats switch to scientific notation."""
    if isinstance(value, (int, np.integer)):
        return f"{value:,}"
    value = float(value)
    if value != 0 and (abs(value) < 1e-3 or abs(value) >= 1e6):
        return f"{value:.{decimal_places}e}"
    return f"{value:.{decimal_places}f}"


def format_duration(milliseconds: float) -> str:
    """Format a duration in milliseconds in human-readable form."""
    if milliseconds < 1000:
        return f"{milliseconds:.1f}ms"
    seconds = milliseconds / 1000
    if seconds < 60:
        return f"{seconds:.2f}s"
    minutes = int(seconds // 60)
    return f"{minutes}m {int(seconds % 60)}s"


def verdict_mark(ok: bool) -> str:
    """Console mark for a pass/fail verdict."""
    return "[green]✓[/green]" if ok else "[red]✗[/red]"
