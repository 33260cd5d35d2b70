import math
from fractions import Fraction

import pytest

from cbe_moments.combinatorics import ArraySpec, ResourceLimitError, enumerate_I
from cbe_moments.exact import (
    jack_at_ones,
    mom_exact,
    mom_exact_J,
    mom_quadrature,
    single_point_moment,
)
from cbe_moments.weights import pochhammer, psi

DELTAS = [Fraction(1, 3), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)]


def one_point_moment(N, q, beta):
    """E|Psi|^{2q} = prod_j Gamma(1+jb)Gamma(1+2q+jb)/Gamma(1+q+jb)^2 with b = beta/2."""
    h = Fraction(beta) / 2
    out = Fraction(1)
    for j in range(N):
        out *= pochhammer(1 + q + j * h, q) / pochhammer(1 + j * h, q)
    return out


def test_examples():
    for d in DELTAS:
        assert mom_exact(ArraySpec(1, 1, 1), d).value == 2
    for N in range(8):
        assert mom_exact(ArraySpec(N, 1, 1), 1).value == N + 1
    assert mom_exact(ArraySpec(2, 2, 1), 1).value == 10
    assert mom_exact_J(ArraySpec(2, 2, 1), 1).value == 10
    assert mom_exact_J(ArraySpec(1, 1, 1), Fraction(2, 7)).value == 2


def test_zero_N():
    assert mom_exact(ArraySpec(0, 3, 2), Fraction(1, 2)).value == 1


@pytest.mark.parametrize("N,k,q", [(1, 1, 1), (2, 1, 1), (3, 2, 1), (2, 1, 2), (2, 3, 1), (1, 2, 2)])
@pytest.mark.parametrize("d", DELTAS)
def test_dp_matches_J_enumeration(N, k, q, d):
    spec = ArraySpec(N, k, q)
    assert mom_exact(spec, d).value == mom_exact_J(spec, d, max_free=20).value


@pytest.mark.parametrize("N,k,q", [(1, 1, 1), (2, 2, 1), (3, 2, 1), (2, 1, 2), (3, 3, 1), (1, 2, 2)])
def test_unit_weight_count_matches_enumerator(N, k, q):
    spec = ArraySpec(N, k, q)
    assert mom_exact(spec, 1).value == sum(1 for _ in enumerate_I(spec, max_free=20))


@pytest.mark.parametrize("N", [1, 2, 5, 9])
@pytest.mark.parametrize("q", [1, 2, 3])
@pytest.mark.parametrize("beta", [Fraction(1), Fraction(2), Fraction(4), Fraction(2, 3), Fraction(7, 3)])
def test_k1_matches_product_formula(N, q, beta):
    expected = one_point_moment(N, q, beta)
    assert mom_exact(ArraySpec(N, 1, q), 2 / beta).value == expected
    assert single_point_moment(N, q, 2 / beta) == expected


@pytest.mark.parametrize("N", [1, 2, 5, 20, 60])
def test_cue_second_moment_of_moments(N):
    # for beta = 2, k = 2, q = 1 the moment is binom(N+3, 3)
    assert mom_exact(ArraySpec(N, 2, 1), 1).value == math.comb(N + 3, 3)


@pytest.mark.parametrize("k,q", [(1, 1), (2, 1), (3, 1), (2, 2), (1, 3)])
@pytest.mark.parametrize("d", [Fraction(1, 2), Fraction(1), Fraction(6, 7)])
def test_one_point_is_degenerate(k, q, d):
    assert mom_exact(ArraySpec(1, k, q), d).value == math.comb(2 * q, q) ** k


@pytest.mark.parametrize("N,k,beta", [(2, 2, 2), (3, 2, 4), (2, 2, 1), (3, 1, 1), (1, 1, 3)])
def test_quadrature_matches_dp(N, k, beta):
    spec = ArraySpec(N, k, 1)
    exact = mom_exact(spec, Fraction(2, beta)).value
    assert mom_quadrature(spec, beta).value == pytest.approx(float(exact), rel=1e-9)


def test_quadrature_examples():
    assert mom_quadrature(ArraySpec(2, 2, 1), 2).value == pytest.approx(10, abs=1e-9)
    assert mom_quadrature(ArraySpec(1, 1, 1), 3).value == pytest.approx(2, abs=1e-12)


def test_layer_cap_reports_row():
    with pytest.raises(ResourceLimitError) as err:
        mom_exact(ArraySpec(30, 3, 1), 1, max_layer=50)
    assert err.value.row is not None and err.value.suggestion


def test_parallel_layers_are_identical():
    spec = ArraySpec(12, 2, 2)
    serial = mom_exact(spec, Fraction(2, 3))
    parallel = mom_exact(spec, Fraction(2, 3), workers=2)
    assert serial.value == parallel.value and serial.nodes == parallel.nodes


def test_result_metadata():
    r = mom_exact(ArraySpec(3, 2, 1), Fraction(1, 2))
    assert r.beta == 4 and r.method == "I-DP" and r.nodes > 0
    assert isinstance(r.value, Fraction)


def test_jack_at_ones_single_row():
    # one level of branching: P_(3,0)(1,1) is the sum of its four weights
    d = Fraction(2, 5)
    assert jack_at_ones((3, 0), d) == sum(psi((m,), (3, 0), d) for m in range(4))
