import time
from contextlib import contextmanager

import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS] = {}


@pytest.fixture
def criterion(request):
    """``with criterion(3, "text", limit=10):`` records PASS/FAIL and wall time."""
    results = request.config.stash[_RESULTS]

    @contextmanager
    def run(number, text, limit=None):
        t0 = time.perf_counter()
        ok = False
        try:
            yield
            elapsed = time.perf_counter() - t0
            if limit is not None:
                assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
            ok = True
        finally:
            elapsed = time.perf_counter() - t0
            prev = results.get(number)
            passed = ok and (prev is None or prev[0])
            part = text if ok else f"{text} [failed]"
            parts = (prev[1] + "; " if prev else "") + part
            results[number] = (passed, parts, (prev[2] if prev else 0.0) + elapsed)
            print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {text} ({elapsed:.2f}s)")

    return run


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        passed, text, elapsed = results[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {text} ({elapsed:.2f}s)")
