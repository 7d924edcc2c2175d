import time
from contextlib import contextmanager

import pytest

_results = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_results] = []


@pytest.fixture
def criterion(request, capsys):
    """Context manager recording one acceptance criterion as PASS or FAIL."""
    log = request.config.stash[_results]

    @contextmanager
    def run(n, title):
        info = {"detail": ""}
        start = time.perf_counter()
        try:
            yield info
        except BaseException as e:
            line = f"FAIL criterion {n:>2}: {title} [{time.perf_counter() - start:.1f}s] {type(e).__name__}: {e}"
            log.append(line.splitlines()[0][:300])
            with capsys.disabled():
                print("\n" + log[-1])
            raise
        log.append(f"PASS criterion {n:>2}: {title} [{time.perf_counter() - start:.1f}s] {info['detail']}")
        with capsys.disabled():
            print("\n" + log[-1])
    return run


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_results, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
