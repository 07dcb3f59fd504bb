import itertools

import pytest

from cremona_gw.tower import label_ray


def permutohedral_cones(n):
    """Maximal cones of the permutohedral fan from complete flags of subsets.

    Built from permutations directly, independent of star subdivision.
    """
    cones = set()
    for perm in itertools.permutations(range(n + 1)):
        flag = [frozenset(perm[:k]) for k in range(1, n + 1)]
        cones.add(frozenset(label_ray(n, s) for s in flag))
    return cones


@pytest.fixture(scope="session")
def perm_cones():
    return {n: permutohedral_cones(n) for n in range(2, 6)}


_criteria: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, text, ok):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
        _criteria.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criteria, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
