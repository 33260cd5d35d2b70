from fractions import Fraction

import pytest

from cbe_moments.singularity import (
    InconsistentPoint,
    Order,
    SingularPoint,
    check_consistency,
    extremal_point,
    integral_dimension,
    order_of,
    singularity_order,
    star_point,
    threshold_beta,
)


def test_reference_orders():
    assert order_of(extremal_point(3, 1)) == Order(Fraction(6), Fraction(-12))
    assert order_of(extremal_point(4, 1)) == Order(Fraction(12), Fraction(-24))


@pytest.mark.parametrize("q", [1, 2, 3, 4])
def test_star_point(q):
    p = star_point(q)
    assert order_of(p) == Order(Fraction(2 * q), Fraction(-4 * q * q))
    assert integral_dimension(p) == 2 * q - 1
    assert threshold_beta(p) == 4 * q * q


@pytest.mark.parametrize("k", [2, 3, 4, 5])
@pytest.mark.parametrize("q", [1, 2, 3])
def test_extremal_point(k, q):
    p = extremal_point(k, q)
    n = k * q * q * (k - 1)
    assert order_of(p) == Order(Fraction(n), Fraction(-2 * n))
    assert integral_dimension(p) == (k * q * q - 1) * (k - 1)
    assert threshold_beta(p) == 2 * k * q * q


def test_order_at_rational_beta():
    assert singularity_order(extremal_point(3, 1), Fraction(7, 3)) == 6 * (1 - Fraction(6, 7))
    assert singularity_order(star_point(2), 4) == 4 - Fraction(16, 4)


def test_extremal_point_layout_k2_q1():
    p = extremal_point(2, 1)
    assert p.values == {(2, 1): 1, (2, 2): 0}


def test_k1_has_no_threshold():
    p = extremal_point(1, 2)
    assert order_of(p).constant == 0 and integral_dimension(p) == 0
    with pytest.raises(ValueError):
        threshold_beta(p)


def test_hand_built_point():
    # one centre coordinate at 1 (k = 3 leaves the centre row unconstrained)
    p = SingularPoint(3, 1, {(3, 1): 1})
    assert order_of(p) == Order(Fraction(1), Fraction(-2))
    # for k = 2 the row sum would force the other centre coordinate to 0
    with pytest.raises(InconsistentPoint):
        order_of(SingularPoint(2, 1, {(2, 1): 1}))


@pytest.mark.parametrize(
    "values",
    [
        {(2, 1): 0, (2, 2): 1},  # ordering inside a row
        {(2, 1): 1, (2, 2): 1},  # row sum 2 != 1
        {(1, 1): 1, (2, 1): 0},  # x^(1) <= x^(2)_1
        {(2, 1): 2},  # not 0/1
        {(5, 1): 1},  # outside the array
    ],
)
def test_inconsistent_points(values):
    with pytest.raises(InconsistentPoint):
        order_of(SingularPoint(2, 1, values))


def test_free_coordinate_pinned_by_neighbours():
    # x^(2)_2 = 1 forces the free x^(1)_1 up against it
    with pytest.raises(InconsistentPoint):
        check_consistency(SingularPoint(3, 1, {(2, 2): 1}))
