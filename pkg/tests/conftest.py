import itertools
from pathlib import Path

import numpy as np
import pytest

from lcqmac.gf import FieldSpec, field_of_order
from lcqmac.matf import MatF

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def span_size(field: FieldSpec, rows: np.ndarray) -> int:
    """Number of distinct vectors in the row space, by enumerating all combinations."""
    seen = set()
    n = rows.shape[1] if rows.ndim == 2 else 0
    for coeffs in itertools.product(range(field.d), repeat=rows.shape[0]):
        acc = np.zeros(n, dtype=np.int64)
        for c, row in zip(coeffs, rows):
            acc = field.add(acc, field.mul(row, np.int64(c)))
        seen.add(tuple(acc.tolist()))
    return len(seen)


def brute_rank(field: FieldSpec, rows: np.ndarray) -> int:
    size = span_size(field, rows)
    r = 0
    while field.d**r < size:
        r += 1
    return r


def random_full_rank(field: FieldSpec, rows: int, cols: int, rng: np.random.Generator) -> MatF:
    from lcqmac.matf import mat_rank

    while True:
        m = MatF(field, rng.integers(0, field.d, size=(rows, cols)))
        if mat_rank(m) == min(rows, cols):
            return m


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[2, 3, 5])
def prime_field(request):
    return field_of_order(request.param)


# One (number, verdict, detail) entry per acceptance criterion, filled by test_acceptance.
ACCEPTANCE: list[tuple[int, str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{verdict} criterion {number}: {detail}")
