from fractions import Fraction

import pytest

from forestchain import TransitionMatrix, uniform_chain


def chain(rows) -> TransitionMatrix:
    return TransitionMatrix(
        tuple(tuple(Fraction(x) for x in row) for row in rows))


@pytest.fixture
def fixture_a() -> TransitionMatrix:
    # worked 3-state example: pi = (3/7, 3/14, 5/14), K = 16/7
    return chain([
        [0, Fraction(1, 2), Fraction(1, 2)],
        [Fraction(1, 3), 0, Fraction(2, 3)],
        [1, 0, 0],
    ])


@pytest.fixture
def d2() -> TransitionMatrix:
    # deterministic two-state swap; periodic with period 2
    return chain([[0, 1], [1, 0]])


@pytest.fixture
def r3() -> TransitionMatrix:
    # reducible: 0 is transient, {1} and {2} absorbing
    return chain([
        [0, Fraction(1, 2), Fraction(1, 2)],
        [0, 1, 0],
        [0, 0, 1],
    ])


@pytest.fixture
def u4() -> TransitionMatrix:
    return uniform_chain(4)
