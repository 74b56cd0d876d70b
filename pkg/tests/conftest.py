import itertools

import numpy as np
import pytest

from icek.chain import ChainModel


def demo_chain():
    """Precise chain on {a, b}: start in a, a -> (0.5, 0.5), b absorbing."""
    return ChainModel.stationary("ab", [[1.0, 0.0]], [[[0.5, 0.5]], [[0.0, 1.0]]])


def path_probability_expectation(init, P, values, n):
    """Expectation of an n-measurable gamble under a precise chain, by
    summing path probabilities over X^n."""
    X = len(init)
    total = 0.0
    for w in itertools.product(range(X), repeat=n):
        prob = init[w[0]] if n else 1.0
        for a, b in zip(w, w[1:]):
            prob *= P[a][b]
        total += prob * values[w]
    return total


@pytest.fixture
def demo():
    return demo_chain()


@pytest.fixture
def rng():
    return np.random.default_rng(20141028)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("]")[1].split(".")[0])):
        terminalreporter.write_line(line)
