"""
Timing Utilities
================
Millisecond stopwatches for report timings.
"""

import time
from contextlib import contextmanager
from typing import Dict, Iterator


class Timings:
    """Collects named wall-clock durations in milliseconds."""

    def __init__(self):
        self._timings: Dict[str, float] = {}

    @contextmanager
    def measure(self, name: str) -> Iterator[None]:
        """Time the enclosed block under ``name``."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self._timings[name] = (time.perf_counter() - start) * 1000.0

    def as_dict(self) -> Dict[str, float]:
        return dict(self._timings)
