"""Acceptance criteria 1-10; each test prints one PASS/FAIL line."""

from __future__ import annotations

import time

import pytest

from pdo.selftest import CRITERIA

# runtime ceilings in seconds; all numeric checks are exact (tolerance zero)
RUNTIME = {1: 60.0, 3: 120.0}


@pytest.mark.parametrize("num, title, fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, title, fn, capsys):
    t = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    dt = time.perf_counter() - t
    limit = RUNTIME.get(num)
    if limit is not None and dt >= limit:
        ok, detail = False, f"{detail}; runtime {dt:.1f}s over {limit:.0f}s"
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} [{num}] {title} ({detail}; {dt:.1f}s)")
    assert ok, detail
