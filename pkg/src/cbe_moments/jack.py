"""Jack polynomial evaluation by the branching rule, and the CβE expectation formula."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .combinatorics import ContractViolation, ResourceLimitError, Signature, as_signature, enumerate_restrictions
from .weights import RationalParam, Rational, as_delta, psi

DEFAULT_NODE_CAP = 2_000_000


class NumericalFailure(ArithmeticError):
    """A floating-point result violated a structural guarantee (e.g. realness)."""


class _Session:
    """One evaluation of a branching sum at a fixed point set.

    Memo entries are keyed on the signature; the signature length fixes how
    many variables remain.
    """

    def __init__(self, points: Sequence[complex], weight, node_cap: int):
        self.points = [complex(z) for z in points]
        self.weight = weight
        self.node_cap = node_cap
        self.memo: dict[Signature, complex] = {}

    def eval(self, lam: Signature) -> complex:
        M = len(lam)
        if M == 0:
            return 1.0 + 0j
        hit = self.memo.get(lam)
        if hit is not None:
            return hit
        if len(self.memo) >= self.node_cap:
            raise ResourceLimitError(
                f"branching lattice exceeds node cap {self.node_cap}", suggestion="smaller signature"
            )
        x = self.points[M - 1]
        size = sum(lam)
        if M == 1:
            val = x ** lam[0]
        else:
            val = 0j
            for mu in enumerate_restrictions(lam):
                val += self.weight(mu, lam) * x ** (size - sum(mu)) * self.eval(mu)
        self.memo[lam] = val
        return val


@dataclass(frozen=True)
class JackEvalRequest:
    lam: Signature
    points: tuple[complex, ...]
    delta: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", as_signature(self.lam))
        object.__setattr__(self, "points", tuple(complex(z) for z in self.points))
        object.__setattr__(self, "delta", as_delta(self.delta))
        if len(self.points) != len(self.lam):
            raise ContractViolation("need exactly one point per part of lambda")


def jack_eval(
    lam: Sequence[int],
    points: Sequence[complex],
    delta: Union[RationalParam, Rational],
    node_cap: int = DEFAULT_NODE_CAP,
) -> complex:
    """Evaluate the Jack polynomial ``P_lam(points; delta)``.

    Branching weights are exact fractions; only the monomials are complex floats.
    """
    req = JackEvalRequest(tuple(lam), tuple(points), as_delta(delta))
    d = req.delta
    if d == 1:
        weight = lambda mu, lam_: 1.0
    else:
        weight = lambda mu, lam_: float(psi(mu, lam_, d))
    return _Session(req.points, weight, node_cap).eval(req.lam)


def schur_eval(lam: Sequence[int], points: Sequence[complex], node_cap: int = DEFAULT_NODE_CAP) -> complex:
    """Schur polynomial via the same branching recursion with unit weights (no ``psi`` calls)."""
    lam = as_signature(lam)
    if len(points) != len(lam):
        raise ContractViolation("need exactly one point per part of lambda")
    return _Session(points, lambda mu, lam_: 1.0, node_cap).eval(lam)


@dataclass(frozen=True)
class RepeatedPointSpec:
    """Angles ``t_1..t_k``; each ``exp(i t_j)`` is repeated ``2q`` times."""

    N: int
    k: int
    q: int
    angles: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.N < 1 or self.k < 1 or self.q < 1:
            raise ContractViolation("need N, k, q >= 1")
        if len(self.angles) != self.k:
            raise ContractViolation(f"need {self.k} angles, got {len(self.angles)}")

    def points(self) -> list[complex]:
        return [cmath.exp(1j * t) for t in self.angles for _ in range(2 * self.q)]

    def partition(self) -> Signature:
        w = self.k * self.q
        return (self.N,) * w + (0,) * w


def matsumoto_expectation(
    spec: RepeatedPointSpec,
    beta: Rational,
    imag_tol: float = 1e-9,
    node_cap: int = DEFAULT_NODE_CAP,
) -> float:
    """``E[prod_j |Psi(t_j)|^{2q}]`` over CβE_N from a single Jack evaluation."""
    delta = Fraction(2) / Fraction(beta)
    val = jack_eval(spec.partition(), spec.points(), delta, node_cap)
    val /= cmath.exp(1j * spec.N * spec.q * math.fsum(spec.angles))
    scale = max(1.0, abs(val.real))
    if abs(val.imag) > imag_tol * scale:
        raise NumericalFailure(f"imaginary residue {val.imag:.3e} exceeds tolerance")
    if val.real < -imag_tol * scale:
        raise NumericalFailure(f"negative expectation {val.real:.3e}")
    return max(val.real, 0.0)
