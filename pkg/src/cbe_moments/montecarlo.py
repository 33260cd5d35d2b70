"""Metropolis sampling of CβE_N and a Monte Carlo estimate of MoM_N(k;q).

Chains are simulated in fixed-size blocks, each block vectorised across its
chains and driven by its own Philox stream spawned from the root seed. The
block layout depends only on the chain count, so results do not depend on
how many worker threads process the blocks.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .combinatorics import ArraySpec

CHAINS_PER_BLOCK = 64


class AcceptanceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class McConfig:
    n_chains: int = 512
    burn_in: int = 1000
    thin: Optional[int] = None  # proposals per kept sample; None means N (one sweep)
    width: Optional[float] = None  # None means pi / sqrt(N)
    seed: int = 0
    n_samples: int = 100_000  # kept samples summed over all chains
    n_batches: int = 10  # batch means per chain
    workers: int = 1

    def __post_init__(self) -> None:
        for name in ("n_chains", "n_samples", "n_batches", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.burn_in < 0 or (self.thin is not None and self.thin < 1):
            raise ValueError("burn_in must be >= 0 and thin >= 1")
        if self.width is not None and self.width <= 0:
            raise ValueError("width must be positive")


def log_density_unnorm(theta, beta: float) -> float:
    """``beta * sum_{j<k} log|e^{i theta_j} - e^{i theta_k}|`` (normalisation omitted)."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[-1]
    if n < 2:
        return 0.0
    j, k = np.triu_indices(n, 1)
    dist = 2.0 * np.abs(np.sin((theta[..., j] - theta[..., k]) / 2.0))
    with np.errstate(divide="ignore"):
        return float(beta * np.log(dist).sum())


def partition_function_Z(theta, q: int) -> np.ndarray:
    """``(1/2pi) int_0^{2pi} |Psi(t)|^{2q} dt`` per sample, by an exact periodic trapezoid rule.

    ``theta`` has shape ``(..., N)``; the rule uses ``2Nq+1`` nodes, enough for a
    trigonometric polynomial of degree ``Nq``.
    """
    theta = np.asarray(theta, dtype=float)
    N = theta.shape[-1]
    M = 2 * N * q + 1
    t = 2.0 * np.pi * np.arange(M) / M
    sq = np.prod(2.0 - 2.0 * np.cos(t[:, None] - theta[..., None, :]), axis=-1)
    return np.mean(sq**q, axis=-1)


def _sweep(theta, beta, width, rng, n_props, start):
    """Run ``n_props`` single-angle Metropolis proposals on every chain; return accepts."""
    C, N = theta.shape
    accepted = 0
    for s in range(n_props):
        j = (start + s) % N
        old = theta[:, j]
        new = np.mod(old + rng.uniform(-width, width, size=C), 2.0 * np.pi)
        logu = np.log(rng.uniform(size=C))
        if N > 1:
            others = np.delete(theta, j, axis=1)
            with np.errstate(divide="ignore"):
                d_new = np.log(np.abs(np.sin((new[:, None] - others) / 2.0))).sum(axis=1)
                d_old = np.log(np.abs(np.sin((old[:, None] - others) / 2.0))).sum(axis=1)
            delta = beta * (d_new - d_old)
        else:
            delta = np.zeros(C)
        acc = logu < delta
        theta[acc, j] = new[acc]
        accepted += int(acc.sum())
    return accepted


def _run_block(N, beta, cfg: McConfig, n_chains, n_keep, seed_seq):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    width = cfg.width if cfg.width is not None else math.pi / math.sqrt(N)
    thin = cfg.thin if cfg.thin is not None else N
    theta = rng.uniform(0.0, 2.0 * np.pi, size=(n_chains, N))
    step = 0
    for _ in range(cfg.burn_in):
        _sweep(theta, beta, width, rng, N, step)
        step += N
    kept = np.empty((n_chains, n_keep, N))
    acc = 0
    for i in range(n_keep):
        acc += _sweep(theta, beta, width, rng, thin, step)
        step += thin
        kept[:, i] = theta
    return kept, acc, n_keep * thin * n_chains


def _blocks(cfg: McConfig) -> list[tuple[int, np.random.SeedSequence]]:
    n_blocks = math.ceil(cfg.n_chains / CHAINS_PER_BLOCK)
    seqs = np.random.SeedSequence(cfg.seed).spawn(n_blocks)
    sizes = [CHAINS_PER_BLOCK] * (n_blocks - 1) + [cfg.n_chains - CHAINS_PER_BLOCK * (n_blocks - 1)]
    return list(zip(sizes, seqs))


@dataclass
class ChainRun:
    samples: np.ndarray  # (n_chains, n_keep, N)
    acceptance: float
    diagnostics: dict = field(default_factory=dict)


def run_chains(N: int, beta: float, cfg: McConfig) -> ChainRun:
    """Simulate all chains; samples are indexed ``[chain, kept step, angle]``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    n_keep = max(1, math.ceil(cfg.n_samples / cfg.n_chains))
    blocks = _blocks(cfg)
    job = lambda b: _run_block(N, float(beta), cfg, b[0], n_keep, b[1])
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            results = list(ex.map(job, blocks))
    else:
        results = [job(b) for b in blocks]
    samples = np.concatenate([r[0] for r in results], axis=0)
    acc = sum(r[1] for r in results) / sum(r[2] for r in results)
    diag = {"acceptance_rate": acc}
    # a single angle has a flat target, so every proposal is accepted
    if N > 1 and not 0.1 <= acc <= 0.9:
        msg = f"Metropolis acceptance rate {acc:.3f} is outside [0.1, 0.9]"
        diag["warning"] = msg
        warnings.warn(msg, AcceptanceWarning, stacklevel=2)
    return ChainRun(samples, acc, diag)


def sample_cbe(N: int, beta: float, config: McConfig) -> Iterator[np.ndarray]:
    """Stream post-burn-in, thinned CβE_N states (chain-major order)."""
    run = run_chains(N, beta, config)
    for chain in run.samples:
        yield from chain


@dataclass
class McEstimate:
    mean: float
    stderr: Optional[float]
    ess: float
    n_samples: int
    diagnostics: dict = field(default_factory=dict)


MIN_EFFECTIVE = 100


def batch_means(values: np.ndarray, n_batches: int) -> McEstimate:
    """Mean with a batch-means standard error; ``values`` is ``(n_chains, n_keep)``."""
    values = np.atleast_2d(values)
    C, K = values.shape
    b = max(1, min(n_batches, K))
    size = K // b
    trimmed = values[:, : b * size]
    means = trimmed.reshape(C, b, size).mean(axis=2).ravel()
    n = values.size
    mean = float(values.mean())
    var = float(values.var(ddof=1)) if n > 1 else 0.0
    if means.size > 1:
        se = float(means.std(ddof=1) / math.sqrt(means.size))
    else:
        se = float("nan")
    # rounding noise on a deterministic quantity counts as zero variance
    if var <= (1e-12 * abs(mean)) ** 2:
        ess = float(n)
        se = 0.0
    elif se > 0 and math.isfinite(se):
        ess = var / se**2
    else:
        ess = 0.0
    diag = {}
    if ess < MIN_EFFECTIVE:
        diag["refused_error_bar"] = f"effective sample size {ess:.1f} < {MIN_EFFECTIVE}"
        se = None
    return McEstimate(mean, se, ess, n, diag)


def mom_mc(spec: ArraySpec, beta: float, config: McConfig) -> McEstimate:
    """Estimate MoM_N(k;q) as the chain average of ``Z(q)^k``."""
    run = run_chains(spec.N, beta, config)
    Z = partition_function_Z(run.samples, spec.q)
    est = batch_means(Z**spec.k, config.n_batches)
    est.diagnostics.update(run.diagnostics)
    return est
