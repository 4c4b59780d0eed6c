import functools

import numpy as np
import pytest

from lstar.factory import FamilySpec, make_pair


@functools.lru_cache(maxsize=None)
def cached_pair(family, sign="noncompact", p=None, q=None, n=None, scale=1.0, with_center=None):
    return make_pair(FamilySpec(family, sign, p=p, q=q, n=n, scale=scale, with_center=with_center))


def bdi(p, q, sign="noncompact"):
    return cached_pair("bdi", sign, p=p, q=q)


# small pairs that are cheap enough to sweep in unit tests
SMALL_SPECS = [
    ("bdi", dict(p=1, q=2)), ("bdi", dict(p=2, q=2)), ("bdi", dict(p=1, q=3)),
    ("ai", dict(n=2)), ("ai", dict(n=3)), ("aii", dict(n=2)),
    ("aiii", dict(p=1, q=2)), ("bdiii", dict(n=3)), ("ci", dict(n=2)),
    ("cii", dict(p=1, q=1)), ("a", dict(n=2)), ("bd", dict(n=3)), ("c", dict(n=1)),
]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
