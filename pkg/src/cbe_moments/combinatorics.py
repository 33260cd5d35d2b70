"""Signatures, interlacing, and the constrained interlacing arrays.

A signature is a plain tuple of weakly decreasing nonnegative integers. Two
families of arrays index the moment sums:

* ``JArray``: a full triangular pattern of rows 1..2kq whose top row is
  ``(N,...,N,0,...,0)`` with k-1 row-sum constraints.
* ``IArray``: two triangular patterns glued along a shared centre row of
  width kq, every coordinate in ``[0, N]``.

``bijection_S`` relabels the free coordinates of the first family into the
second.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

Signature = tuple[int, ...]

DEFAULT_MAX_FREE = 12


class ContractViolation(ValueError):
    """An argument does not satisfy an operation's precondition."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed a configured size cap."""

    def __init__(self, message: str, *, row: Optional[int] = None, suggestion: Optional[str] = None):
        super().__init__(message)
        self.row = row
        self.suggestion = suggestion


def is_signature(parts: Sequence[int]) -> bool:
    return all(p >= 0 for p in parts) and all(a >= b for a, b in zip(parts, parts[1:]))


def as_signature(parts: Sequence[int]) -> Signature:
    sig = tuple(int(p) for p in parts)
    if not is_signature(sig):
        raise ContractViolation(f"not a signature (weakly decreasing, nonnegative): {sig}")
    return sig


def interlaces(mu: Sequence[int], lam: Sequence[int]) -> bool:
    """True iff ``lam[0] >= mu[0] >= lam[1] >= ... >= mu[M-1] >= lam[M]``."""
    if len(lam) != len(mu) + 1:
        raise ContractViolation(
            f"interlacing needs len(lambda) == len(mu) + 1, got {len(lam)} and {len(mu)}"
        )
    return all(lam[i] >= mu[i] >= lam[i + 1] for i in range(len(mu)))


def extend(lam: Sequence[int], N: int) -> Signature:
    """Pad a signature to ``(N, lam..., 0)``; the empty signature maps to ``(N, 0)``."""
    if any(p > N for p in lam):
        raise ValueError(f"part exceeds N={N}: {tuple(lam)}")
    return (N, *lam, 0)


def _bounded_rows(lo: Sequence[int], hi: Sequence[int], target: Optional[int]) -> Iterator[Signature]:
    """All tuples with ``lo[i] <= x[i] <= hi[i]`` (descending lex), optionally with fixed sum.

    The caller guarantees that every such tuple is automatically weakly
    decreasing (true for interlacing boxes).
    """
    n = len(lo)
    if target is None:
        yield from itertools.product(*(range(h, l - 1, -1) for l, h in zip(lo, hi)))
        return
    # suffix bounds for prefix-sum pruning
    min_rest = [0] * (n + 1)
    max_rest = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        min_rest[i] = min_rest[i + 1] + lo[i]
        max_rest[i] = max_rest[i + 1] + hi[i]
    if not min_rest[0] <= target <= max_rest[0]:
        return
    buf = [0] * n

    def rec(i: int, remaining: int) -> Iterator[Signature]:
        if i == n - 1:
            if lo[i] <= remaining <= hi[i]:
                buf[i] = remaining
                yield tuple(buf)
            return
        top = min(hi[i], remaining - min_rest[i + 1])
        bottom = max(lo[i], remaining - max_rest[i + 1])
        for v in range(top, bottom - 1, -1):
            buf[i] = v
            yield from rec(i + 1, remaining - v)

    if n == 0:
        if target == 0:
            yield ()
        return
    yield from rec(0, target)


def enumerate_extensions(mu: Sequence[int], N: int, sum_target: Optional[int] = None) -> Iterator[Signature]:
    """Yield every ``lam`` of length ``len(mu)+1`` with ``mu < lam`` and parts <= N.

    Order is descending lexicographic. With ``sum_target`` only rows of that
    sum are produced (pruned during generation, not filtered afterwards).
    """
    if any(p > N for p in mu):
        raise ValueError(f"part exceeds N={N}: {tuple(mu)}")
    M = len(mu)
    if M == 0:
        lo, hi = [0], [N]
    else:
        lo = [mu[0]] + [mu[i] for i in range(1, M)] + [0]
        hi = [N] + [mu[i - 1] for i in range(1, M)] + [mu[M - 1]]
    yield from _bounded_rows(lo, hi, sum_target)


def enumerate_restrictions(lam: Sequence[int], sum_target: Optional[int] = None) -> Iterator[Signature]:
    """Yield every ``mu`` of length ``len(lam)-1`` with ``mu < lam`` (descending lex)."""
    if len(lam) == 0:
        raise ContractViolation("the empty signature has no restrictions")
    lo = [lam[i + 1] for i in range(len(lam) - 1)]
    hi = [lam[i] for i in range(len(lam) - 1)]
    yield from _bounded_rows(lo, hi, sum_target)


@dataclass(frozen=True)
class ArraySpec:
    """Box height ``N`` and moment orders ``k`` (outer) and ``q`` (inner)."""

    N: int
    k: int
    q: int

    def __post_init__(self) -> None:
        if self.N < 0 or self.k < 1 or self.q < 1:
            raise ContractViolation(f"need N >= 0 and k, q >= 1, got {self}")

    @property
    def width(self) -> int:
        return self.k * self.q

    @property
    def free_count(self) -> int:
        return self.width ** 2 - (self.k - 1)

    def row_target(self, m: int) -> Optional[int]:
        """Row-sum target for row ``m`` of either half of an I-array, or None."""
        if m % (2 * self.q) == 0 and m <= self.width:
            return self.N * m // 2
        return None

    def constrained_rows(self) -> list[tuple[str, int]]:
        """Distinct constrained rows of an I-array as ``(side, m)`` pairs.

        The centre row, when constrained, is listed once as ``("center", kq)``.
        """
        rows: list[tuple[str, int]] = []
        for m in range(2 * self.q, self.width + 1, 2 * self.q):
            if m == self.width:
                rows.append(("center", m))
            else:
                rows.append(("ascending", m))
                rows.append(("descending", m))
        return sorted(rows, key=lambda r: (r[1], r[0]))

    def top_row(self) -> Signature:
        return (self.N,) * self.width + (0,) * self.width


@dataclass(frozen=True)
class JArray:
    """Rows ``rows[i]`` of length ``i+1``; the last row is the fixed top row."""

    rows: tuple[Signature, ...]


@dataclass(frozen=True)
class IArray:
    """``ascending[m-1]`` is row m (m = 1..kq, the last being the centre).

    ``descending[m-1]`` is the descending-side row of length m for
    m = 1..kq-1; the centre row is shared and stored only in ``ascending``.
    """

    ascending: tuple[Signature, ...]
    descending: tuple[Signature, ...]

    @property
    def center(self) -> Signature:
        return self.ascending[-1]


def check_J(arr: JArray, spec: ArraySpec) -> bool:
    rows = arr.rows
    L = 2 * spec.width
    if len(rows) != L or any(len(r) != i + 1 for i, r in enumerate(rows)):
        return False
    if not all(is_signature(r) for r in rows):
        return False
    if rows[-1] != spec.top_row():
        return False
    if not all(interlaces(rows[i], rows[i + 1]) for i in range(L - 1)):
        return False
    for j in range(1, spec.k):
        if sum(rows[2 * j * spec.q - 1]) != spec.N * j * spec.q:
            return False
    return True


def check_I(arr: IArray, spec: ArraySpec) -> bool:
    """Independent validator: shapes, box bound, interlacing, and row sums."""
    W = spec.width
    if len(arr.ascending) != W or len(arr.descending) != W - 1:
        return False
    for side in (arr.ascending, arr.descending):
        for i, row in enumerate(side):
            if len(row) != i + 1:
                return False
            if not is_signature(row) or any(p > spec.N for p in row):
                return False
    desc_full = arr.descending + (arr.center,)
    for side in (arr.ascending, desc_full):
        for m in range(1, W):
            if not interlaces(side[m - 1], side[m]):
                return False
    for j in range(1, spec.k // 2 + 1):
        m = 2 * j * spec.q
        if sum(arr.ascending[m - 1]) != spec.N * j * spec.q:
            return False
        if sum(desc_full[m - 1]) != spec.N * j * spec.q:
            return False
    return True


def bijection_S(arr: JArray, spec: ArraySpec) -> IArray:
    """Map a J-array onto the I-array with the same free coordinates."""
    if not check_J(arr, spec):
        raise ContractViolation("input is not an element of J_N(k;q)")
    W = spec.width
    rows = arr.rows
    ascending = tuple(rows[:W])
    # row i (1-based, i > W) keeps its middle block lam_{i-W+1..W}
    descending = [()] * (W - 1)
    for i in range(W + 1, 2 * W):
        descending[2 * W - i - 1] = tuple(rows[i - 1][i - W : W])
    return IArray(ascending=ascending, descending=tuple(descending))


def bijection_S_inv(arr: IArray, spec: ArraySpec) -> JArray:
    if not check_I(arr, spec):
        raise ContractViolation("input is not an element of I_N(k;q)")
    W, N = spec.width, spec.N
    rows = list(arr.ascending)
    for i in range(W + 1, 2 * W):
        pad = i - W
        rows.append((N,) * pad + arr.descending[2 * W - i - 1] + (0,) * pad)
    rows.append(spec.top_row())
    return JArray(rows=tuple(rows))


def signatures(length: int, N: int, sum_target: Optional[int] = None) -> Iterator[Signature]:
    """All signatures of the given length with parts <= N, descending lex order."""
    for sig in itertools.combinations_with_replacement(range(N, -1, -1), length):
        if sum_target is None or sum(sig) == sum_target:
            yield sig


def _guard(spec: ArraySpec, max_free: int) -> None:
    if spec.free_count > max_free:
        raise ResourceLimitError(
            f"{spec} has {spec.free_count} free coordinates (cap {max_free}); use the DP engine",
            suggestion="mom_exact",
        )


def _descend(row: Signature, spec: ArraySpec) -> Iterator[tuple[Signature, ...]]:
    """All chains row_1 < ... < row_{len(row)-1} below ``row``, listed top-down."""
    if len(row) == 1:
        yield ()
        return
    target = spec.row_target(len(row) - 1)
    for mu in enumerate_restrictions(row, target):
        for rest in _descend(mu, spec):
            yield (mu,) + rest


def enumerate_I(spec: ArraySpec, max_free: int = DEFAULT_MAX_FREE) -> Iterator[IArray]:
    """Brute-force stream of I_N(k;q); a test oracle for small instances."""
    _guard(spec, max_free)
    W = spec.width
    for center in signatures(W, spec.N, spec.row_target(W)):
        for asc in _descend(center, spec):
            ascending = tuple(reversed(asc)) + (center,)
            for desc in _descend(center, spec):
                yield IArray(ascending=ascending, descending=tuple(reversed(desc)))


def enumerate_J(spec: ArraySpec, max_free: int = DEFAULT_MAX_FREE) -> Iterator[JArray]:
    """Brute-force stream of J_N(k;q), top row downwards."""
    _guard(spec, max_free)
    top = spec.top_row()

    def target(m: int) -> Optional[int]:
        if m % (2 * spec.q) == 0 and m < 2 * spec.width:
            return spec.N * m // 2
        return None

    def rec(row: Signature) -> Iterator[tuple[Signature, ...]]:
        if len(row) == 1:
            yield ()
            return
        for mu in enumerate_restrictions(row, target(len(row) - 1)):
            for rest in rec(mu):
                yield (mu,) + rest

    for chain in rec(top):
        yield JArray(rows=tuple(reversed(chain)) + (top,))
