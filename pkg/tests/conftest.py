from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest

from abeldecomp import latalg


def random_unimodular(n: int, rng: random.Random, steps: int = 12) -> np.ndarray:
    """Product of random elementary integer matrices and sign flips."""
    U = latalg.identity(n)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        E = latalg.identity(n)
        E[i, j] = rng.randint(-3, 3)
        U = U.dot(E)
    for i in range(n):
        if rng.random() < 0.3:
            U[:, i] = -U[:, i]
    return U


def random_symplectic(d: tuple, rng: random.Random, steps: int = 10) -> np.ndarray:
    """Random element of Sp^D built from transvection-like generators preserving J_D."""
    g = len(d)
    J = latalg.alternating_form(d)
    M = latalg.identity(2 * g)
    for _ in range(steps):
        kind = rng.randrange(3)
        N = latalg.identity(2 * g)
        i = rng.randrange(g)
        c = rng.randint(-2, 2)
        if kind == 0:
            # x_i -> x_i + c*y_i: symplectic for any type
            N[i, g + i] = c
        elif kind == 1:
            N[g + i, i] = c
        else:
            j = rng.randrange(g)
            if i == j or d[i] != d[j]:
                continue
            # simultaneous change on (x_i, x_j) and the dual change on (y_i, y_j)
            N[i, j] = c
            N[g + j, g + i] = -c
        assert (N.T.dot(J).dot(N) == J).all()
        M = M.dot(N)
    return M


@pytest.fixture
def rng():
    return random.Random(20261016)


def frac_matrix(rows):
    return latalg.rat_matrix([[Fraction(x) for x in r] for r in rows])


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
