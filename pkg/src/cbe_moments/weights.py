"""Branching weights for interlacing pairs.

``psi`` is the exact rational weight attached to a discrete interlacing pair
``mu < lam`` by the Jack branching rule, ``psi_gamma_form`` re-evaluates the
same number from its Gamma-function factorisation, and ``phi`` is the
continuous weight on interlacing pairs in ``[0, 1]``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln

from .combinatorics import ContractViolation, interlaces

Rational = Union[Fraction, int, str]


@dataclass(frozen=True)
class RationalParam:
    """The Jack parameter ``delta = 2 / beta`` held as an exact fraction."""

    delta: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    @classmethod
    def from_beta(cls, beta: Rational) -> "RationalParam":
        beta = Fraction(beta)
        if beta <= 0:
            raise ValueError(f"beta must be positive, got {beta}")
        return cls(Fraction(2) / beta)

    @property
    def beta(self) -> Fraction:
        return Fraction(2) / self.delta

    def __str__(self) -> str:
        return str(self.delta)


def as_delta(delta: Union[RationalParam, Rational]) -> Fraction:
    if isinstance(delta, RationalParam):
        return delta.delta
    d = Fraction(delta)
    if d <= 0:
        raise ValueError(f"delta must be positive, got {d}")
    return d


def pochhammer(t: Fraction, m: int) -> Fraction:
    """Rising factorial ``t (t+1) ... (t+m-1)`` as an exact fraction."""
    if m < 0:
        raise ValueError("Pochhammer length must be nonnegative")
    t = Fraction(t)
    num, den = 1, 1
    for s in range(m):
        num *= t.numerator + s * t.denominator
        den *= t.denominator
    return Fraction(num, den)


@lru_cache(maxsize=1 << 20)
def _psi(mu: tuple, lam: tuple, p: int, r: int) -> Fraction:
    # delta = p / r; every Pochhammer argument is (integer) + (integer) * delta,
    # so scaling all factors by r keeps the arithmetic in integers.
    M = len(mu)
    num, den = 1, 1
    for j in range(M):
        m = mu[j] - lam[j + 1]
        if m == 0:
            continue
        mj = mu[j]
        for i in range(j + 1):
            d = j - i
            a = (mu[i] - mj) * r + p * (d + 1)
            b = (lam[i] - mj + 1) * r + p * d
            c = (mu[i] - mj + 1) * r + p * d
            e = (lam[i] - mj) * r + p * (d + 1)
            for s in range(0, m * r, r):
                num *= (a + s) * (b + s)
                den *= (c + s) * (e + s)
    return Fraction(num, den)


def psi(mu: Sequence[int], lam: Sequence[int], delta: Union[RationalParam, Rational]) -> Fraction:
    """Exact branching weight of the interlacing pair ``mu < lam``."""
    mu, lam = tuple(mu), tuple(lam)
    if not interlaces(mu, lam):
        raise ContractViolation(f"{mu} does not interlace {lam}")
    d = as_delta(delta)
    return _psi(mu, lam, d.numerator, d.denominator)


def _gamma_ratio_exact(terms: list[tuple[int, int, int]], delta: Fraction) -> Fraction:
    """Evaluate ``prod Gamma(n + c*delta)^e`` over ``(n, c, e)`` exactly.

    Factors are grouped by their delta-coefficient ``c``; within a group the
    arguments differ by integers, so numerator/denominator pairs collapse into
    Pochhammer symbols. Groups with ``c == 0`` are plain factorials.
    """
    groups: dict[int, tuple[list[int], list[int]]] = defaultdict(lambda: ([], []))
    for n, c, e in terms:
        bucket = groups[c][0 if e > 0 else 1]
        bucket.extend([n] * abs(e))
    out = Fraction(1)
    for c, (ups, downs) in groups.items():
        if c == 0:
            for n in ups:
                out *= math.factorial(n - 1)
            for n in downs:
                out /= math.factorial(n - 1)
            continue
        if len(ups) != len(downs):
            raise ArithmeticError(f"unbalanced Gamma factors for delta-coefficient {c}")
        for hi_n, lo_n in zip(sorted(ups), sorted(downs)):
            base = lo_n + c * delta if hi_n >= lo_n else hi_n + c * delta
            poch = pochhammer(base, abs(hi_n - lo_n))
            out = out * poch if hi_n >= lo_n else out / poch
    return out


def psi_gamma_form(mu: Sequence[int], lam: Sequence[int], delta: Union[RationalParam, Rational]) -> Fraction:
    """The same weight as :func:`psi`, evaluated from its Gamma-ratio factorisation."""
    mu, lam = tuple(mu), tuple(lam)
    if not interlaces(mu, lam):
        raise ContractViolation(f"{mu} does not interlace {lam}")
    d = as_delta(delta)
    M = len(mu)
    terms: list[tuple[int, int, int]] = []
    # 1 / Gamma(delta)^M
    terms.append((0, 1, -M))
    for i in range(M):
        for j in range(i + 1, M):
            s = j - i
            terms += [
                (mu[i] - lam[j + 1], s + 1, 1),
                (mu[i] - mu[j] + 1, s, 1),
                (mu[i] - lam[j + 1] + 1, s, -1),
                (mu[i] - mu[j], s + 1, -1),
                (lam[i] - lam[j + 1] + 1, s, 1),
                (lam[i] - mu[j], s + 1, 1),
                (lam[i] - lam[j + 1], s + 1, -1),
                (lam[i] - mu[j] + 1, s, -1),
            ]
        terms += [
            (mu[i] - lam[i + 1], 1, 1),
            (lam[i] - lam[i + 1] + 1, 0, 1),
            (lam[i] - mu[i], 1, 1),
            (mu[i] - lam[i + 1] + 1, 0, -1),
            (lam[i] - lam[i + 1], 1, -1),
            (lam[i] - mu[i] + 1, 0, -1),
        ]
    return _gamma_ratio_exact(terms, d)


def continuous_interlaces(y: Sequence[float], x: Sequence[float]) -> bool:
    if len(x) != len(y) + 1:
        raise ContractViolation("continuous interlacing needs len(x) == len(y) + 1")
    return all(x[i] >= y[i] >= x[i + 1] for i in range(len(y)))


def log_phi(y: np.ndarray, x: np.ndarray, delta: float) -> np.ndarray:
    """Vectorised ``log phi`` over a leading batch axis.

    ``y`` has shape ``(..., M)`` and ``x`` shape ``(..., M+1)``. Coincident
    coordinates give ``-inf`` for ``delta > 1`` and ``+inf`` for ``delta < 1``.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    M = y.shape[-1]
    if delta == 1.0:
        return np.zeros(y.shape[:-1])
    with np.errstate(divide="ignore"):
        cross = np.log(np.abs(x[..., :, None] - y[..., None, :])).sum(axis=(-1, -2))
        iu_x = np.triu_indices(M + 1, 1)
        iu_y = np.triu_indices(M, 1)
        dx = np.log(np.abs(x[..., iu_x[0]] - x[..., iu_x[1]])).sum(axis=-1)
        dy = np.log(np.abs(y[..., iu_y[0]] - y[..., iu_y[1]])).sum(axis=-1) if M > 1 else 0.0
    out = (delta - 1.0) * cross + (1.0 - delta) * (dx + dy) - M * gammaln(delta)
    # coincidences make the combination ambiguous (inf - inf); resolve by continuous extension
    degenerate = ~np.isfinite(cross) | ~np.isfinite(dx) | ~np.isfinite(dy)
    if np.any(degenerate):
        out = np.where(degenerate, np.inf if delta < 1 else -np.inf, out)
    return out


def phi(y: Sequence[float], x: Sequence[float], delta: float) -> float:
    """Continuous analogue of :func:`psi` for ``y < x`` inside ``[0, 1]``."""
    if not continuous_interlaces(y, x):
        raise ContractViolation(f"{tuple(y)} does not interlace {tuple(x)}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    return float(np.exp(log_phi(np.asarray(y), np.asarray(x), float(delta))))


def base_weight(y: Sequence[float], x: Sequence[float]) -> float:
    """The delta-free product ``phi_base`` with ``Gamma(delta)^M phi = phi_base^(delta-1)``."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    M = len(y)
    cross = np.prod(np.abs(x[:, None] - y[None, :]))
    dx = np.prod([x[i] - x[j] for i in range(M + 1) for j in range(i + 1, M + 1)])
    dy = np.prod([y[i] - y[j] for i in range(M) for j in range(i + 1, M)]) if M > 1 else 1.0
    return float(cross / (dx * dy))
