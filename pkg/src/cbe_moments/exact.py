"""Exact moments of moments by transfer DP over interlacing rows, plus two oracles.

``mom_exact`` runs two row-by-row passes (one per half of the I-array) that
each end on the shared centre row and then contracts them. ``mom_exact_J``
enumerates the J-array sum directly. ``mom_quadrature`` integrates the Jack
expectation formula over a trigonometric grid that is exact for the
integrand's degree.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .combinatorics import (
    DEFAULT_MAX_FREE,
    ArraySpec,
    ResourceLimitError,
    Signature,
    enumerate_extensions,
    enumerate_J,
    enumerate_restrictions,
    extend,
)
from .jack import DEFAULT_NODE_CAP, RepeatedPointSpec, matsumoto_expectation
from .weights import RationalParam, Rational, as_delta, psi

DEFAULT_MAX_LAYER = 1_000_000

METHODS = ("I-DP", "J-enum", "quadrature", "monte-carlo")


@dataclass
class MoMResult:
    value: Union[Fraction, float]
    spec: ArraySpec
    delta: Fraction
    method: str
    nodes: int = 0
    wall_time: float = 0.0
    stderr: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def beta(self) -> Fraction:
        return Fraction(2) / self.delta


def _transfer_chunk(args):
    """Push one chunk of a DP layer forward by one row."""
    items, N, target, p, r, descending, unit = args
    delta = Fraction(p, r)
    out: dict[Signature, Union[int, Fraction]] = {}
    for src, w in items:
        parent = extend(src, N) if descending else None
        for dst in enumerate_extensions(src, N, target):
            if unit:
                inc = w
            elif descending:
                inc = w * psi(dst, parent, delta)
            else:
                inc = w * psi(src, dst, delta)
            out[dst] = out.get(dst, 0) + inc
    return out


def _advance(layer, N, target, delta, descending, unit, workers, pool):
    items = sorted(layer.items(), reverse=True)
    if workers <= 1 or len(items) < 2 * workers:
        parts = [_transfer_chunk((items, N, target, delta.numerator, delta.denominator, descending, unit))]
    else:
        size = math.ceil(len(items) / workers)
        chunks = [items[i : i + size] for i in range(0, len(items), size)]
        jobs = [(c, N, target, delta.numerator, delta.denominator, descending, unit) for c in chunks]
        parts = list(pool.map(_transfer_chunk, jobs))
    merged: dict = {}
    for part in parts:
        for key, w in part.items():
            merged[key] = merged.get(key, 0) + w
    return merged


def _row_passes(spec: ArraySpec, delta: Fraction, max_layer: int, workers: int, unit: bool):
    """Return the ascending and descending layers over the centre row, plus a node count."""
    N, W = spec.N, spec.width
    one = 1 if unit else Fraction(1)
    asc = {(a,): one for a in range(N, -1, -1) if spec.row_target(1) in (None, a)}
    desc = {}
    for a in range(N, -1, -1):
        if spec.row_target(1) in (None, a):
            desc[(a,)] = one if unit else psi((a,), extend((), N), delta)
    nodes = len(asc) + len(desc)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for m in range(1, W):
            target = spec.row_target(m + 1)
            asc = _advance(asc, N, target, delta, False, unit, workers, pool)
            desc = _advance(desc, N, target, delta, True, unit, workers, pool)
            nodes += len(asc) + len(desc)
            biggest = max(len(asc), len(desc))
            if biggest > max_layer:
                raise ResourceLimitError(
                    f"DP layer at row {m + 1} has {biggest} entries (cap {max_layer})",
                    row=m + 1,
                    suggestion=f"reduce N below {N} or raise --max-layer-size",
                )
    finally:
        if pool is not None:
            pool.shutdown()
    return asc, desc, nodes


def mom_exact(
    spec: ArraySpec,
    delta: Union[RationalParam, Rational],
    max_layer: int = DEFAULT_MAX_LAYER,
    workers: int = 1,
) -> MoMResult:
    """Exact rational MoM_N(k;q) at ``beta = 2/delta``."""
    d = as_delta(delta)
    t0 = time.perf_counter()
    if spec.N == 0:
        return MoMResult(Fraction(1), spec, d, "I-DP", nodes=1, wall_time=time.perf_counter() - t0)
    # psi is identically 1 at delta = 1, so the sum is a lattice-point count
    unit = d == 1
    asc, desc, nodes = _row_passes(spec, d, max_layer, workers, unit)
    total = sum(asc[c] * desc[c] for c in sorted(asc) if c in desc)
    return MoMResult(Fraction(total), spec, d, "I-DP", nodes=nodes, wall_time=time.perf_counter() - t0)


def mom_exact_J(
    spec: ArraySpec,
    delta: Union[RationalParam, Rational],
    max_free: int = DEFAULT_MAX_FREE,
) -> MoMResult:
    """Direct enumeration of the J-array sum of products of branching weights."""
    d = as_delta(delta)
    t0 = time.perf_counter()
    total = Fraction(0)
    count = 0
    for arr in enumerate_J(spec, max_free):
        w = Fraction(1)
        for lo, hi in zip(arr.rows, arr.rows[1:]):
            w *= psi(lo, hi, d)
        total += w
        count += 1
    return MoMResult(total, spec, d, "J-enum", nodes=count, wall_time=time.perf_counter() - t0)


def jack_at_ones(lam: Signature, delta: Union[RationalParam, Rational]) -> Fraction:
    """Exact ``P_lam(1, ..., 1; delta)``: the sum over branching chains of weight products."""
    d = as_delta(delta)
    layer: dict[Signature, Fraction] = {tuple(lam): Fraction(1)}
    for _ in range(len(lam) - 1):
        nxt: dict[Signature, Fraction] = {}
        for top, w in layer.items():
            for mu in enumerate_restrictions(top):
                nxt[mu] = nxt.get(mu, 0) + w * psi(mu, top, d)
        layer = nxt
    return sum(layer.values(), Fraction(0))


def single_point_moment(N: int, q: int, delta: Union[RationalParam, Rational]) -> Fraction:
    """Exact ``E|Psi(t)|^{2q}`` (any t), which by rotation invariance is MoM_N(1;q)."""
    return jack_at_ones((N,) * q + (0,) * q, delta)


def mom_quadrature(spec: ArraySpec, beta: Rational, node_cap: int = DEFAULT_NODE_CAP) -> MoMResult:
    """Average the Jack expectation over a ``(2Nq+1)^k`` periodic grid of angles."""
    t0 = time.perf_counter()
    beta = Fraction(beta)
    d = Fraction(2) / beta
    if spec.N == 0:
        return MoMResult(1.0, spec, d, "quadrature", nodes=1, wall_time=time.perf_counter() - t0)
    M = 2 * spec.N * spec.q + 1
    grid = 2 * np.pi * np.arange(M) / M
    total = math.fsum(
        matsumoto_expectation(RepeatedPointSpec(spec.N, spec.k, spec.q, tuple(ts)), beta, node_cap=node_cap)
        for ts in itertools.product(grid.tolist(), repeat=spec.k)
    )
    return MoMResult(
        total / M**spec.k, spec, d, "quadrature", nodes=M**spec.k, wall_time=time.perf_counter() - t0
    )
