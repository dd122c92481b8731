from __future__ import annotations

import numpy as np
import pytest

from lnelab.classify import brieskorn_germ, horn_germ
from lnelab.harness import corpus
from lnelab.variety import ImplicitGerm, SparsePolynomial

CRITERIA_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def P(n, terms):
    return SparsePolynomial.from_terms(n, terms)


@pytest.fixture(scope="session")
def b233():
    return brieskorn_germ(2, 3, 3)


@pytest.fixture(scope="session")
def horn():
    return horn_germ(3, 2, 2)


@pytest.fixture(scope="session")
def cone():
    return corpus.cone()


@pytest.fixture(scope="session")
def plane():
    return corpus.plane()


@pytest.fixture(scope="session")
def line3():
    return corpus.line()


@pytest.fixture(scope="session")
def superiso():
    return corpus.superisolated_real()


@pytest.fixture(scope="session")
def xaxis():
    """{y = 0} in R^2."""
    return ImplicitGerm.hypersurface(P(2, [(1, (0, 1))]), name="xaxis")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
