import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from qsdlab.cohring import GeometryTriple  # noqa: E402

# criterion id -> (label, status, seconds); filled by tests/test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def geom():
    cache = {}

    def get(space, bundle):
        key = (space, tuple(bundle))
        if key not in cache:
            cache[key] = GeometryTriple.build(space, list(bundle))
        return cache[key]

    return get


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    # never touch the user's cache directory from tests
    monkeypatch.setenv("QSD_CACHE_DIR", str(tmp_path / "qsd-cache"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: (int(c.rstrip("abcdef")), c)):
        label, status, secs = ACCEPTANCE[cid]
        terminalreporter.write_line(f"[{status}] criterion {cid}: {label} ({secs:.2f}s)")
