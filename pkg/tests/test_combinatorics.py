import itertools

import pytest
from hypothesis import given, settings, strategies as st

from cbe_moments.combinatorics import (
    ArraySpec,
    ContractViolation,
    IArray,
    JArray,
    ResourceLimitError,
    bijection_S,
    bijection_S_inv,
    check_I,
    check_J,
    enumerate_extensions,
    enumerate_I,
    enumerate_J,
    enumerate_restrictions,
    extend,
    interlaces,
)


def sig_strategy(max_len=5, max_part=6):
    return st.lists(st.integers(0, max_part), min_size=1, max_size=max_len).map(
        lambda xs: tuple(sorted(xs, reverse=True))
    )


def test_interlaces_examples():
    assert interlaces((2,), (3, 1))
    assert interlaces((1, 1), (1, 1, 0))
    assert not interlaces((4,), (3, 1))


def test_interlaces_length_mismatch():
    with pytest.raises(ContractViolation):
        interlaces((1, 1), (2, 1))


def test_extend():
    assert extend((), 5) == (5, 0)
    assert extend((3, 1), 5) == (5, 3, 1, 0)
    assert interlaces((3, 1), extend((2,), 4))
    with pytest.raises(ValueError):
        extend((6,), 5)


def test_extensions_of_single_part():
    out = list(enumerate_extensions((1,), 2))
    assert sorted(out) == sorted([(2, 1), (2, 0), (1, 1), (1, 0)])
    assert len(out) == 4
    assert sorted(enumerate_extensions((1,), 2, sum_target=2)) == [(1, 1), (2, 0)]


@pytest.mark.parametrize("M,N", [(1, 3), (2, 4), (4, 2)])
def test_full_row_has_N_plus_one_extensions(M, N):
    assert len(list(enumerate_extensions((N,) * M, N))) == N + 1


@settings(max_examples=60, deadline=None)
@given(sig_strategy(), st.integers(0, 3), st.data())
def test_extensions_match_brute_force(mu, extra, data):
    N = max(mu) + extra
    brute = [
        lam
        for lam in itertools.product(range(N, -1, -1), repeat=len(mu) + 1)
        if interlaces(mu, lam)
    ]
    assert list(enumerate_extensions(mu, N)) == brute
    target = data.draw(st.integers(0, N * (len(mu) + 1)))
    assert list(enumerate_extensions(mu, N, target)) == [l for l in brute if sum(l) == target]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=2, max_size=5).map(lambda xs: tuple(sorted(xs, reverse=True))))
def test_restrictions_match_brute_force(lam):
    brute = [
        mu for mu in itertools.product(range(lam[0], -1, -1), repeat=len(lam) - 1) if interlaces(mu, lam)
    ]
    assert list(enumerate_restrictions(lam)) == brute


def _brute_I(spec):
    """Independent count: try every assignment of every row and filter."""
    N, W = spec.N, spec.width

    def rows(m):
        return [r for r in itertools.product(range(N, -1, -1), repeat=m) if list(r) == sorted(r, reverse=True)]

    def ok_sum(m, r):
        return not (m % (2 * spec.q) == 0 and m <= W) or sum(r) == N * m // 2

    count = 0
    for center in rows(W):
        if not ok_sum(W, center):
            continue
        halves = []
        for _ in range(2):
            chains = [[center]]
            for m in range(W - 1, 0, -1):
                chains = [c + [r] for c in chains for r in rows(m) if interlaces(r, c[-1]) and ok_sum(m, r)]
            halves.append(len(chains))
        count += halves[0] * halves[1]
    return count


@pytest.mark.parametrize(
    "N,k,q", [(1, 1, 1), (2, 2, 1), (3, 2, 1), (2, 1, 2), (2, 3, 1), (1, 2, 2), (0, 2, 1)]
)
def test_I_count_matches_brute_force(N, k, q):
    spec = ArraySpec(N, k, q)
    assert sum(1 for _ in enumerate_I(spec, max_free=20)) == _brute_I(spec)


def test_I_examples():
    assert sorted(a.ascending for a in enumerate_I(ArraySpec(1, 1, 1))) == [((0,),), ((1,),)]
    assert sum(1 for _ in enumerate_I(ArraySpec(2, 2, 1))) == 10
    assert sum(1 for _ in enumerate_I(ArraySpec(0, 2, 2), max_free=20)) == 1


@pytest.mark.parametrize("N,k,q", [(2, 2, 1), (3, 1, 2), (2, 3, 1), (1, 2, 2)])
def test_bijection_is_a_bijection(N, k, q):
    spec = ArraySpec(N, k, q)
    Js = list(enumerate_J(spec, max_free=20))
    Is = [bijection_S(j, spec) for j in Js]
    assert all(check_I(i, spec) for i in Is)
    assert len(set(Is)) == len(Is) == sum(1 for _ in enumerate_I(spec, max_free=20))
    assert all(bijection_S_inv(i, spec) == j for i, j in zip(Is, Js))


def test_bijection_smallest_case():
    spec = ArraySpec(1, 1, 1)
    for m in (0, 1):
        arr = bijection_S(JArray(((m,), (1, 0))), spec)
        assert arr == IArray(ascending=((m,),), descending=())


def test_bijection_rejects_invalid():
    spec = ArraySpec(1, 1, 1)
    with pytest.raises(ContractViolation):
        bijection_S(JArray(((2,), (1, 0))), spec)
    with pytest.raises(ContractViolation):
        bijection_S_inv(IArray(ascending=((3,),), descending=()), spec)


def test_validators_reject_broken_sums():
    spec = ArraySpec(2, 2, 1)
    assert not check_J(JArray(((1,), (2, 1), (2, 2, 0), (2, 2, 0, 0))), spec)
    assert not check_I(IArray(ascending=((1,), (2, 1)), descending=((1,),)), spec)


def test_enumerator_size_guard():
    with pytest.raises(ResourceLimitError):
        next(enumerate_I(ArraySpec(2, 4, 1), max_free=5))


def test_spec_validation():
    with pytest.raises(ContractViolation):
        ArraySpec(-1, 1, 1)
    with pytest.raises(ContractViolation):
        ArraySpec(1, 0, 1)
