"""Power counting for singularities of the coefficient integrand at 0/1 points.

Coordinates of a continuous I-array are addressed as ``(r, i)``: ``r`` runs
over the ``2kq-1`` rows from the bottom of the ascending half (r = 1), through
the centre (r = kq), to the bottom of the descending half (r = 2kq-1); ``i``
is the 1-based position in a row of length ``min(r, 2kq-r)``. Constrained
rows sit at ``r = 2jq`` (j = 1..k-1) with target sum half their length.

A ``SingularPoint`` assigns 0 or 1 to some coordinates. Unassigned ones are
held at generic interior values and are not integrated over.

In ``"array"`` mode the order of the singularity is::

    (centre coordinates at 0/1 + equal pairs on adjacent rows
     - 2 * equal pairs within a row) * (1 - 2/beta)

``"row"`` mode is the single centre-row integral left after integrating out
both halves (k = 1 or 2), where each coordinate at 0/1 costs ``1 - 2/beta``
and each equal pair gains ``4/beta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Union

Coord = tuple[int, int]


class InconsistentPoint(ValueError):
    """The assignment cannot sit inside the closure of the constrained array set."""


@dataclass(frozen=True)
class Order:
    """A singularity order ``constant + inverse_beta / beta``."""

    constant: Fraction
    inverse_beta: Fraction

    def at(self, beta: Union[Fraction, int, str]) -> Fraction:
        return self.constant + self.inverse_beta / Fraction(beta)

    def __str__(self) -> str:
        return f"{self.constant} + ({self.inverse_beta})/beta"


@dataclass(frozen=True)
class SingularPoint:
    k: int
    q: int
    values: dict = field(hash=False)
    mode: str = "array"

    @property
    def width(self) -> int:
        return self.k * self.q

    def row_length(self, r: int) -> int:
        return min(r, 2 * self.width - r)

    def rows(self) -> range:
        if self.mode == "row":
            return range(self.width, self.width + 1)
        return range(1, 2 * self.width)

    def row_target(self, r: int):
        if self.mode == "row":
            return Fraction(self.q) if self.k == 2 else None
        if r % (2 * self.q) == 0 and r < 2 * self.width:
            return Fraction(self.row_length(r), 2)
        return None


def star_point(q: int) -> SingularPoint:
    """All-0/1 point of the k = 2 centre-row integral: q ones then q zeros."""
    W = 2 * q
    vals = {(W, i): (1 if i <= q else 0) for i in range(1, W + 1)}
    return SingularPoint(2, q, vals, mode="row")


def extremal_point(k: int, q: int) -> SingularPoint:
    """The 0/1 point obtained after removing k centred squares of side q.

    Square ``s`` spans the rows strictly between constrained rows ``2(s-1)q``
    and ``2sq``; in each row it occupies the middle ``min(t, 2q-t)`` slots,
    ``t`` being the offset from the lower constrained row. The remaining
    slots are 1 on the left and 0 on the right.
    """
    W = k * q
    vals: dict[Coord, int] = {}
    for r in range(1, 2 * W):
        L = min(r, 2 * W - r)
        t = r % (2 * q)
        w = min(t, 2 * q - t)
        a = (L - w) // 2
        for i in range(1, a + 1):
            vals[(r, i)] = 1
            vals[(r, L - a + i)] = 0
    return SingularPoint(k, q, vals)


def _relations(point: SingularPoint) -> list[tuple[Coord, Coord]]:
    """All pairs ``(hi, lo)`` with ``value[hi] >= value[lo]`` required."""
    rel = []
    for r in point.rows():
        L = point.row_length(r)
        rel += [((r, i), (r, i + 1)) for i in range(1, L)]
    if point.mode == "array":
        for r in range(1, 2 * point.width - 1):
            a, b = (r, r + 1) if point.row_length(r) < point.row_length(r + 1) else (r + 1, r)
            for i in range(1, point.row_length(a) + 1):
                rel.append(((b, i), (a, i)))
                rel.append(((a, i), (b, i + 1)))
    return rel


def check_consistency(point: SingularPoint) -> None:
    """Raise :class:`InconsistentPoint` unless the assignment is feasible.

    Unassigned coordinates must admit values strictly inside (0, 1).
    """
    vals = point.values
    coords = {(r, i) for r in point.rows() for i in range(1, point.row_length(r) + 1)}
    for c, v in vals.items():
        if c not in coords:
            raise InconsistentPoint(f"coordinate {c} is outside the array")
        if v not in (0, 1):
            raise InconsistentPoint(f"coordinate {c} has value {v}, expected 0 or 1")
    rel = _relations(point)
    for hi, lo in rel:
        if hi in vals and lo in vals and vals[hi] < vals[lo]:
            raise InconsistentPoint(f"ordering violated between {hi} and {lo}")
    # propagate bounds through chains of unassigned coordinates
    floor = {c: 0 for c in coords if c not in vals}
    ceil = {c: 1 for c in coords if c not in vals}
    forced_low = {c: False for c in floor}
    forced_high = {c: False for c in floor}
    changed = True
    while changed:
        changed = False
        for hi, lo in rel:
            if hi in floor:
                push = (lo in vals and vals[lo] == 1) or (lo in floor and forced_low[lo])
                if push and not forced_low[hi]:
                    forced_low[hi] = changed = True
            if lo in ceil:
                push = (hi in vals and vals[hi] == 0) or (hi in ceil and forced_high[hi])
                if push and not forced_high[lo]:
                    forced_high[lo] = changed = True
    for c in floor:
        if forced_low[c] or forced_high[c]:
            raise InconsistentPoint(f"free coordinate {c} is pinned to the boundary")
    for r in point.rows():
        target = point.row_target(r)
        if target is None:
            continue
        L = point.row_length(r)
        fixed = [vals[(r, i)] for i in range(1, L + 1) if (r, i) in vals]
        rest = target - sum(fixed)
        n_free = L - len(fixed)
        if n_free == 0 and rest != 0:
            raise InconsistentPoint(f"row {r} sums to {sum(fixed)}, needs {target}")
        if n_free > 0 and not 0 < rest < n_free:
            raise InconsistentPoint(f"row {r} constraint cannot be met with interior free values")


def _counts(point: SingularPoint) -> tuple[int, int, int]:
    vals = point.values
    center = [c for c in vals if c[0] == point.width]
    same_row = sum(
        1 for a, b in combinations(sorted(vals), 2) if a[0] == b[0] and vals[a] == vals[b]
    )
    adjacent = 0
    if point.mode == "array":
        adjacent = sum(
            1 for a, b in combinations(sorted(vals), 2) if abs(a[0] - b[0]) == 1 and vals[a] == vals[b]
        )
    return len(center), adjacent, same_row


def order_of(point: SingularPoint) -> Order:
    """Order of the singularity at ``point`` as an affine function of 1/beta."""
    check_consistency(point)
    boundary, adjacent, same_row = _counts(point)
    if point.mode == "row":
        return Order(Fraction(boundary), Fraction(-2 * boundary - 4 * same_row))
    n = boundary + adjacent - 2 * same_row
    return Order(Fraction(n), Fraction(-2 * n))


def singularity_order(point: SingularPoint, beta: Union[Fraction, int, str]) -> Fraction:
    return order_of(point).at(beta)


def integral_dimension(point: SingularPoint) -> int:
    """Dimension of the integral over the coordinates the point keeps."""
    if point.mode == "row":
        return 2 * point.q - 1 if point.k == 2 else point.q
    total = point.width**2 - (point.k - 1)
    n_coords = sum(point.row_length(r) for r in point.rows())
    return total - (n_coords - len(point.values))


def threshold_beta(point: SingularPoint) -> Fraction:
    """The beta at which the order equals the dimension (integrability is lost from there on)."""
    o = order_of(point)
    d = integral_dimension(point)
    gap = d - o.constant
    if gap == 0 or o.inverse_beta == 0:
        raise ValueError("order never reaches the dimension at any finite beta")
    beta = o.inverse_beta / gap
    if beta <= 0:
        raise ValueError("no positive beta makes this singularity critical")
    return beta
