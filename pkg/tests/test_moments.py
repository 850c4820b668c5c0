from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lbforge.moments import (MacroState, all_multi_indices, enumerate_constraints, equation_count,
                             gaussian_moment, maxwellian_moment, partition_count,
                             partition_count_restricted, partitions)

from oracles import brute_partitions, generating_function_coefficients, hermite_gaussian_moment

OMEGA_REFERENCE = {
    1: [1, 2, 3, 4, 5, 6, 7, 8],
    2: [1, 2, 4, 6, 9, 12, 16, 20],
    3: [1, 2, 4, 7, 11, 16, 23, 31],
    4: [1, 2, 4, 7, 12, 18, 27, 38],
}


@pytest.mark.parametrize("q, expected", [(0, 1), (4, 5), (5, 7)])
def test_partition_count_examples(q, expected):
    assert partition_count(q) == expected
    assert len(brute_partitions(q)) == expected


def test_partition_count_matches_generating_function():
    coeffs = generating_function_coefficients(20)
    assert [partition_count(q) for q in range(21)] == coeffs


def test_partition_count_large_q_is_exact():
    # p(64) = 1741630; Python ints cannot overflow
    assert partition_count(64) == 1741630
    assert partition_count(100) == 190569292


@pytest.mark.parametrize("q, D, expected", [(4, 2, 3), (4, 4, 5), (7, 1, 1), (0, 3, 1)])
def test_partition_count_restricted_examples(q, D, expected):
    assert partition_count_restricted(q, D) == expected


@pytest.mark.parametrize("q", range(0, 13))
@pytest.mark.parametrize("D", [1, 2, 3, 4])
def test_restriction_duality(q, D):
    parts = brute_partitions(q)
    by_count = sum(1 for p in parts if len(p) <= D)
    by_largest = sum(1 for p in parts if not p or p[0] <= D)
    assert by_count == by_largest == partition_count_restricted(q, D)
    assert partition_count_restricted(q, D) == generating_function_coefficients(q, D)[q]


def test_partitions_generator_is_descending_and_complete():
    got = list(partitions(6))
    assert got[0] == (6,) and got[-1] == (1,) * 6
    assert set(got) == brute_partitions(6)
    assert all(list(p) == sorted(p, reverse=True) for p in got)
    assert set(partitions(6, max_parts=2)) == {p for p in brute_partitions(6) if len(p) <= 2}


@pytest.mark.parametrize("D", [1, 2, 3, 4])
@pytest.mark.parametrize("m", range(8))
def test_equation_count_reproduces_table(m, D):
    assert equation_count(m, D) == OMEGA_REFERENCE[D][m]


def test_enumerate_constraints_2d_order_4():
    assert enumerate_constraints(4, 2) == [(0, 0), (2, 0), (4, 0), (2, 2), (6, 0), (4, 2), (8, 0), (6, 2), (4, 4)]


def test_enumerate_constraints_small_and_3d():
    assert enumerate_constraints(1, 3) == [(0, 0, 0), (2, 0, 0)]
    c = enumerate_constraints(4, 3)
    assert len(c) == 11
    assert c[-4:] == [(8, 0, 0), (6, 2, 0), (4, 4, 0), (4, 2, 2)]


@pytest.mark.parametrize("m", range(7))
@pytest.mark.parametrize("D", [1, 2, 3, 4])
def test_enumerate_constraints_properties(m, D):
    c = enumerate_constraints(m, D)
    assert len(c) == len(set(c)) == equation_count(m, D)
    assert all(x % 2 == 0 for a in c for x in a)
    assert all(sum(a) <= 2 * m for a in c)
    assert all(list(a) == sorted(a, reverse=True) and len(a) == D for a in c)
    assert c[0] == (0,) * D


@pytest.mark.parametrize("a, expected", [
    ((0, 0), Fraction(1)), ((2, 0), Fraction(1, 2)), ((4, 2), Fraction(3, 8)), ((8, 0), Fraction(105, 16)),
    ((3, 0), Fraction(0)), ((2, 1, 2), Fraction(0)),
])
def test_gaussian_moment_examples(a, expected):
    assert gaussian_moment(a) == expected
    assert float(expected) == pytest.approx(hermite_gaussian_moment(a), abs=1e-12)


def test_gaussian_moment_denominators_are_powers_of_two():
    for a in all_multi_indices(12, 3):
        den = gaussian_moment(a).denominator
        assert den & (den - 1) == 0


def test_maxwellian_moment_examples():
    assert maxwellian_moment((2, 0), MacroState(1, (0, 0), 1)) == pytest.approx(0.5)
    assert maxwellian_moment((1, 0), MacroState(2, (0.1, 0), 1)) == pytest.approx(0.2)
    for theta in (0.5, 1.0, 1.7):
        assert maxwellian_moment((4,), MacroState(1, (0.0,), theta)) == pytest.approx(0.75 * theta ** 2)


def test_maxwellian_moment_rejects_nonpositive_temperature():
    with pytest.raises(ValueError):
        maxwellian_moment((2,), MacroState(1, (0.0,), 0.0))


@pytest.mark.parametrize("D", [1, 2, 3])
def test_maxwellian_at_rest_equals_gaussian_moment(D):
    rest = MacroState(1.0, (0.0,) * D, 1.0)
    for a in all_multi_indices(8, D):
        assert maxwellian_moment(a, rest) == pytest.approx(float(gaussian_moment(a)), abs=1e-15)


@given(u=st.floats(-1, 1), theta=st.floats(0.2, 3), k=st.integers(0, 8))
def test_maxwellian_1d_against_hermite_quadrature(u, theta, k):
    # x = u + sqrt(theta) * y with y ~ exp(-y^2)/sqrt(pi)
    import numpy as np
    y, w = np.polynomial.hermite.hermgauss(30)
    ref = float(np.sum(w * (u + np.sqrt(theta) * y) ** k) / np.sqrt(np.pi))
    assert maxwellian_moment((k,), MacroState(1.0, (u,), theta)) == pytest.approx(ref, rel=1e-10, abs=1e-12)
