import numpy as np
import pytest

from cyclesync.ingest import Panel, standardize_rows


def random_panel(rng, n, t, standardized=True):
    x = rng.standard_normal((n, t))
    # mix in a common component so spectra are not all noise
    x += rng.uniform(0, 2) * rng.standard_normal(t)
    labels = tuple(f"S{i}" for i in range(n))
    if standardized:
        return Panel(labels, 0, standardize_rows(x), True)
    return Panel(labels, 0, x, False)


def inertia_count(matrix, x):
    """Number of eigenvalues below x, by Sylvester's law of inertia on an
    unpivoted LDL^T factorisation of (matrix - x I)."""
    a = np.array(matrix, dtype=float) - x * np.eye(len(matrix))
    n = len(a)
    d = np.zeros(n)
    l = np.eye(n)
    for j in range(n):
        d[j] = a[j, j] - np.sum(l[j, :j] ** 2 * d[:j])
        if d[j] == 0.0:
            d[j] = -1e-14 * (1.0 + abs(a[j, j]))
        for i in range(j + 1, n):
            l[i, j] = (a[i, j] - np.sum(l[i, :j] * l[j, :j] * d[:j])) / d[j]
    return int(np.sum(d < 0))


def bisection_eigenvalues(matrix, lo=None, hi=None, tol=1e-13):
    """All eigenvalues (descending) by bisection on the inertia count."""
    a = np.asarray(matrix, dtype=float)
    n = len(a)
    radius = np.max(np.sum(np.abs(a), axis=1))
    lo = -radius - 1.0 if lo is None else lo
    hi = radius + 1.0 if hi is None else hi
    values = []
    for k in range(n):
        # k-th smallest: smallest x with count(x) > k
        a_lo, a_hi = lo, hi
        while a_hi - a_lo > tol:
            mid = 0.5 * (a_lo + a_hi)
            if inertia_count(a, mid) > k:
                a_hi = mid
            else:
                a_lo = mid
        values.append(0.5 * (a_lo + a_hi))
    return np.array(values[::-1])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
