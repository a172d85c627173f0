"""Pass/fail bookkeeping for the acceptance suite."""

import time
from contextlib import contextmanager

RESULTS: list[str] = []


@contextmanager
def criterion(number: int, title: str, budget: float | None = None):
    """Time a criterion, record one PASS/FAIL line, and enforce its time budget."""
    notes: list[str] = []
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield notes
        elapsed = time.perf_counter() - start
        if budget is not None:
            assert elapsed < budget, f"took {elapsed:.1f}s, budget {budget}s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        detail = "; ".join(notes)
        line = f"criterion {number:2d} {status}  {title}  ({elapsed:.1f}s)"
        if detail:
            line += f"  [{detail}]"
        RESULTS.append(line)
        print(line)
