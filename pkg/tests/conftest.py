import json
import time
from pathlib import Path

import pytest
from hypothesis import settings

from harperdisc import build_model, compute_bands

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

GOLDEN = Path(__file__).parent / "golden" / "thresholds.json"

# acceptance results, filled by tests/test_acceptance.py and printed at the end
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def golden():
    return json.loads(GOLDEN.read_text())


_BANDS: dict = {}
BAND_SECONDS: dict = {}


def bands_for(P, Q):
    """Exact band structure, computed once per session at the default precision."""
    if (P, Q) not in _BANDS:
        t0 = time.perf_counter()
        _BANDS[(P, Q)] = compute_bands(build_model(P, Q))
        BAND_SECONDS[(P, Q)] = time.perf_counter() - t0
    return _BANDS[(P, Q)]


@pytest.fixture(scope="session")
def band_runs():
    return bands_for


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")
