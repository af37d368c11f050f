import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pppcov.errors import InvalidArgumentError
from pppcov.partitions import a_coefficient, b_coefficient, enumerate_tj

PARTITION_NUMBERS = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]


def test_examples():
    assert enumerate_tj(0) == ((),)
    assert enumerate_tj(2) == ((2, 0), (0, 1))
    assert len(enumerate_tj(5)) == 7


def test_counts():
    for j, p in enumerate(PARTITION_NUMBERS):
        assert len(enumerate_tj(j)) == p
    assert len(enumerate_tj(30)) == 5604


def _brute_force(j):
    """Partitions of j as multisets of parts, by generating non-increasing sequences."""
    out = set()

    def rec(remaining, largest, parts):
        if remaining == 0:
            c = Counter(parts)
            out.add(tuple(c.get(q, 0) for q in range(1, j + 1)))
            return
        for part in range(min(remaining, largest), 0, -1):
            rec(remaining - part, part, parts + [part])

    rec(j, j, [])
    return out


@pytest.mark.parametrize("j", range(1, 13))
def test_matches_brute_force(j):
    got = enumerate_tj(j)
    assert set(got) == _brute_force(j)
    assert len(set(got)) == len(got)
    for p in got:
        assert len(p) == j
        assert sum(q * n for q, n in enumerate(p, start=1)) == j


@pytest.mark.parametrize("j", [-1, 31, 1.5, True])
def test_rejects_bad_j(j):
    with pytest.raises(InvalidArgumentError):
        enumerate_tj(j)


def test_b_coefficient_examples():
    assert b_coefficient(()) == 1
    assert b_coefficient((2, 0)) == 3
    assert b_coefficient((0, 1)) == 2


def test_a_coefficient_examples():
    assert a_coefficient((), [], 3.0) == 1.0
    assert a_coefficient((1,), [0.7], 2.0) == pytest.approx(-1.4)
    assert a_coefficient((0, 1), [9.9, 0.7], 2.0) == pytest.approx(0.7)


def _derivative_from_partitions(j, g_derivs):
    """j-th derivative of exp(g) at a point, divided by exp(g), via the partition sum."""
    total = 0.0
    for p in enumerate_tj(j):
        term = math.factorial(j)
        for q, n in enumerate(p, start=1):
            term *= (g_derivs[q - 1] / math.factorial(q)) ** n / math.factorial(n)
        total += term
    return total


@given(st.lists(st.floats(-1.0, 1.0), min_size=4, max_size=4), st.integers(1, 4))
def test_faa_di_bruno_against_finite_differences(coefs, j):
    # g(z) = sum c_k z^k / k!, so g^(q)(0) = c_q
    c = [0.0] + list(coefs)

    def f(z):
        return math.exp(sum(c[k] * z ** k / math.factorial(k) for k in range(5)))

    h = 0.05
    # central difference stencil of high order for the j-th derivative at 0
    nodes = np.arange(-6, 7) * h
    vander = np.vander(nodes, increasing=True).T
    rhs = np.zeros(len(nodes))
    rhs[j] = math.factorial(j)
    weights = np.linalg.solve(vander, rhs) / 1.0
    numeric = float(weights @ np.array([f(z) for z in nodes]))
    exact = _derivative_from_partitions(j, c[1:]) * f(0.0)
    assert numeric == pytest.approx(exact, rel=1e-6, abs=1e-9)


def test_a_coefficient_reproduces_bell_identity():
    # with scale=1 and E_q=(-1)^q x_q the partition sum is B_j(x)/j!
    x = [0.3, -1.2, 0.5, 2.0]
    factors = [(-1) ** q * x[q - 1] for q in range(1, 5)]
    bell4 = (x[0] ** 4 + 6 * x[0] ** 2 * x[1] + 4 * x[0] * x[2] + 3 * x[1] ** 2 + x[3])
    total = math.fsum(a_coefficient(p, factors, 1.0) for p in enumerate_tj(4))
    assert total == pytest.approx(bell4 / 24, rel=1e-13)
