"""Leading-order asymptotics of MoM_N(k;q).

Coefficient estimators sample in fixed-size chunks, one Philox stream per
chunk spawned from the root seed, so an estimate depends only on
``(seed, budget)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.special import betaln, gammaln, logsumexp

from .weights import log_phi

Number = Union[Fraction, int, float, str]
CHUNK = 20_000
MIN_ELIMINATION_ACCEPTANCE = 1e-4


class DomainError(ValueError):
    """The coefficient integral is infinite (or not known finite) at this beta."""

    def __init__(self, msg: str, report: "FinitenessReport"):
        super().__init__(msg)
        self.report = report


def _exact_or_float(beta: Number):
    if isinstance(beta, float):
        return beta
    return Fraction(beta)


def exponent(k: int, q: int, beta: Number):
    """``(2/beta)(kq)^2 - (k-1)``; exact when beta is rational."""
    if k < 1 or q < 1:
        raise ValueError("k and q must be >= 1")
    b = _exact_or_float(beta)
    if b <= 0:
        raise ValueError("beta must be positive")
    return 2 / b * (k * q) ** 2 - (k - 1)


def log_coeff_k1(q: int, beta: float) -> float:
    d = 2.0 / float(beta)
    i = np.arange(1, q + 1)
    return float(np.sum(gammaln(d * i) - gammaln(d * (q + i))))


def coeff_k1(q: int, beta: Number) -> float:
    """Closed-form coefficient for k = 1: ``prod_i Gamma(delta i) / Gamma(delta (q+i))``."""
    if q < 1 or float(beta) <= 0:
        raise ValueError("need q >= 1 and beta > 0")
    return math.exp(log_coeff_k1(q, float(beta)))


# ---------------------------------------------------------------- finiteness


@dataclass(frozen=True)
class FinitenessReport:
    k: int
    q: int
    known_finite: tuple  # (lo, hi, hi_inclusive); hi None means infinity
    known_infinite: Optional[Fraction]  # infinite on [value, inf)
    conjectured_finite: Optional[tuple]  # open interval (lo, hi)
    beta: Optional[Number] = None
    status: Optional[str] = None

    @property
    def reason(self) -> str:
        lo, hi, closed = self.known_finite
        if self.k == 1:
            return f"A(1;{self.q})=(0,inf)"
        if self.k == 2:
            return f"A(2;{self.q})=(0,{hi})"
        return f"(0,{hi}] is inside A({self.k};{self.q}); infinite for beta >= {self.known_infinite}"

    def as_dict(self) -> dict:
        lo, hi, closed = self.known_finite
        return {
            "k": self.k,
            "q": self.q,
            "known_finite": {"lo": str(lo), "hi": None if hi is None else str(hi), "hi_inclusive": closed},
            "known_infinite_from": None if self.known_infinite is None else str(self.known_infinite),
            "conjectured_finite": None if self.conjectured_finite is None else [str(v) for v in self.conjectured_finite],
            "beta": None if self.beta is None else str(self.beta),
            "status": self.status,
            "reason": self.reason,
        }


def finiteness_domain(k: int, q: int, beta: Optional[Number] = None) -> FinitenessReport:
    """Where ``c(k;q)`` is finite, and the status of a queried beta."""
    if k < 1 or q < 1:
        raise ValueError("k and q must be >= 1")
    if k == 1:
        finite, infinite, conj = (Fraction(0), None, False), None, None
    elif k == 2:
        finite, infinite, conj = (Fraction(0), Fraction(4 * q * q), False), Fraction(4 * q * q), None
    else:
        t = Fraction(2 * k * q * q)
        finite, infinite, conj = (Fraction(0), Fraction(2), True), t, (Fraction(2), t)
    status = None
    if beta is not None:
        b = _exact_or_float(beta)
        if b <= 0:
            raise ValueError("beta must be positive")
        hi, closed = finite[1], finite[2]
        if hi is None or b < hi or (closed and b == hi):
            status = "finite"
        elif infinite is not None and b >= infinite:
            status = "infinite"
        else:
            status = "unknown-conjectured-finite"
    return FinitenessReport(k, q, finite, infinite, conj, beta, status)


# ------------------------------------------------------------ MC plumbing


@dataclass
class CoeffEstimate:
    value: float
    stderr: float
    n_samples: int
    ess: float
    diagnostics: dict = field(default_factory=dict)


def _chunks(budget: int, seed: int) -> list[tuple[int, np.random.SeedSequence]]:
    budget = int(budget)
    if budget < 2:
        raise ValueError("mc budget must be at least 2")
    n = math.ceil(budget / CHUNK)
    sizes = [CHUNK] * (n - 1) + [budget - CHUNK * (n - 1)]
    return list(zip(sizes, np.random.SeedSequence(seed).spawn(n)))


def _run(draw: Callable, budget: int, seed: int, workers: int) -> np.ndarray:
    """Concatenate per-chunk weight vectors produced by ``draw(n, rng)``."""
    job = lambda c: draw(c[0], np.random.Generator(np.random.Philox(c[1])))
    chunks = _chunks(budget, seed)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    return np.concatenate(parts)


def _summarise(w: np.ndarray, scale: float = 1.0) -> CoeffEstimate:
    n = w.size
    mean = float(np.mean(w))
    std = float(np.std(w, ddof=1))
    if std <= 1e-13 * abs(mean):
        std = 0.0
    total = float(np.sum(w))
    ess = total**2 / float(np.sum(w * w)) if total > 0 else 0.0
    diag = {}
    if total > 0:
        share = float(np.max(w)) / total
        diag["max_weight_share"] = share
        if share > 0.01:
            diag["unreliable_variance"] = f"a single draw carries {share:.1%} of the total weight"
    return CoeffEstimate(mean * scale, std * scale / math.sqrt(n), n, ess, diag)


def _log_pair_gaps(x: np.ndarray) -> np.ndarray:
    n = x.shape[1]
    if n < 2:
        return np.zeros(x.shape[0])
    i, j = np.triu_indices(n, 1)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x[:, i] - x[:, j])).sum(axis=1)


def _log_prefactor(n: int, d: float) -> float:
    M = np.arange(1, n + 1)
    return float(np.sum(gammaln(d) - 2.0 * gammaln(M * d)))


# ---------------------------------------------------------- k = 1 and k = 2


def coeff_k1_integral(q: int, beta: Number, mc_budget: int = 100_000, seed: int = 0, workers: int = 1) -> CoeffEstimate:
    """MC of the ``q``-dimensional Selberg-type integral for the k = 1 coefficient.

    Coordinates are drawn i.i.d. from Beta(delta, delta), which absorbs the
    ``[x(1-x)]^(delta-1)`` factor; sorting maps the cube onto the chamber at a
    cost of ``1/q!``.
    """
    d = 2.0 / float(beta)
    if q < 1 or d <= 0:
        raise ValueError("need q >= 1 and beta > 0")
    log_const = q * betaln(d, d) - gammaln(q + 1) + _log_prefactor(q, d)

    def draw(n, rng):
        x = rng.beta(d, d, size=(n, q))
        return np.exp(2.0 * d * _log_pair_gaps(x))

    w = _run(draw, mc_budget, seed, workers)
    return _summarise(w, math.exp(log_const))


def coeff_k2(q: int, beta: Number, mc_budget: int = 100_000, seed: int = 0, workers: int = 1) -> CoeffEstimate:
    """MC of the single-row integral for k = 2 on ``sum x = q``.

    The first ``2q-1`` coordinates are Beta(delta, delta) draws and the last is
    ``q`` minus their sum (Lebesgue measure on the free coordinates).
    """
    report = finiteness_domain(2, q, beta)
    if report.status != "finite":
        raise DomainError(f"c(2;{q}) is infinite at beta={beta}: {report.reason}", report)
    d = 2.0 / float(beta)
    n_free = 2 * q - 1
    log_const = n_free * betaln(d, d) - gammaln(2 * q + 1) + _log_prefactor(2 * q, d)

    def draw(n, rng):
        u = rng.beta(d, d, size=(n, n_free))
        r = q - u.sum(axis=1)
        ok = (r > 0) & (r < 1)
        x = np.concatenate([u, r[:, None]], axis=1)[ok]
        rr = r[ok]
        out = np.zeros(n)
        out[ok] = np.exp(2.0 * d * _log_pair_gaps(x) + (d - 1.0) * np.log(rr * (1.0 - rr)))
        return out

    w = _run(draw, mc_budget, seed, workers)
    est = _summarise(w, math.exp(log_const))
    if d <= 0.5:
        est.diagnostics["unreliable_variance"] = (
            "delta <= 1/2: the eliminated coordinate's boundary factor has infinite variance"
        )
    return est


# ---------------------------------------------------------- general k


def _uniform_row(parent: np.ndarray, rng, target: Optional[float]):
    """Draw a row interlacing ``parent`` uniformly; eliminate its last entry if ``target``."""
    n, L = parent.shape
    m = L - 1
    hi, lo = parent[:, :-1], parent[:, 1:]
    span = hi - lo
    u = rng.uniform(size=(n, m))
    row = lo + u * span
    # rows whose parent was already rejected may have negative spans
    with np.errstate(divide="ignore", invalid="ignore"):
        log_span = np.log(span)
    if target is None:
        return row, log_span.sum(axis=1), np.ones(n, dtype=bool)
    row[:, -1] = target - row[:, :-1].sum(axis=1)
    ok = (row[:, -1] >= lo[:, -1]) & (row[:, -1] <= hi[:, -1])
    return row, log_span[:, :-1].sum(axis=1), ok


def _center_row(n, W, target, d, rng):
    """Centre row, sorted decreasing, and its log proposal density."""
    beta_prop = d < 1.0
    if target is None:
        x = rng.beta(d, d, size=(n, W)) if beta_prop else rng.uniform(size=(n, W))
        ok = np.ones(n, dtype=bool)
    else:
        u = rng.beta(d, d, size=(n, W - 1)) if beta_prop else rng.uniform(size=(n, W - 1))
        r = target - u.sum(axis=1)
        ok = (r >= 0) & (r <= 1)
        x = np.concatenate([u, np.clip(r, 0.0, 1.0)[:, None]], axis=1)
    x = -np.sort(-x, axis=1)
    if beta_prop:
        with np.errstate(divide="ignore"):
            lg = (d - 1.0) * np.log(x * (1.0 - x)) - betaln(d, d)
    else:
        lg = np.zeros_like(x)
    if target is None:
        logp = gammaln(W + 1) + lg.sum(axis=1)
    else:
        # any of the W sorted values may have been the eliminated one
        logp = gammaln(W) + logsumexp(lg.sum(axis=1, keepdims=True) - lg, axis=1)
    return x, logp, ok


def _array_target(k: int, q: int, m: int) -> Optional[float]:
    return m / 2.0 if m % (2 * q) == 0 and m < k * q * 2 else None


def _sample_arrays(k, q, d, n, rng, weighted: bool):
    """One batch of continuous arrays: return (log f - log p, valid mask)."""
    W = k * q
    center, logp, ok = _center_row(n, W, _array_target(k, q, W) if k % 2 == 0 else None, d, rng)
    logf = np.zeros(n)
    ones, zeros = np.ones((n, 1)), np.zeros((n, 1))
    asc, desc = center, center
    for m in range(W - 1, 0, -1):
        t = _array_target(k, q, m)
        a_row, lp_a, ok_a = _uniform_row(asc, rng, t)
        d_row, lp_d, ok_d = _uniform_row(desc, rng, t)
        logp = logp - lp_a - lp_d
        ok &= ok_a & ok_d
        if weighted:
            logf += log_phi(a_row, asc, d)
            logf += log_phi(desc, np.concatenate([ones, d_row, zeros], axis=1), d)
        asc, desc = a_row, d_row
    if weighted:
        # bottom of the descending side pairs with the extension of the empty row
        logf += log_phi(desc, np.concatenate([ones, zeros], axis=1), d)
    return logf - logp, ok


def coeff_general(
    k: int, q: int, beta: Number, mc_budget: int = 100_000, seed: int = 0, workers: int = 1
) -> CoeffEstimate:
    """MC of the full constrained-array integral.

    The centre row is drawn first, then each lower row uniformly inside its
    interlacing box on both halves; constrained rows have their last entry
    eliminated and out-of-box results rejected. Importance weights are the
    products of ``phi`` over both chains divided by the proposal density.
    """
    report = finiteness_domain(k, q, beta)
    if report.status == "infinite":
        raise DomainError(f"c({k};{q}) is infinite at beta={beta}: {report.reason}", report)
    d = 2.0 / float(beta)

    def draw(n, rng):
        lw, ok = _sample_arrays(k, q, d, n, rng, weighted=d != 1.0)
        out = np.zeros(n)
        with np.errstate(over="ignore"):
            out[ok] = np.exp(lw[ok])
        return out

    w = _run(draw, mc_budget, seed, workers)
    est = _summarise(w)
    acc = float(np.count_nonzero(w)) / w.size
    est.diagnostics["elimination_acceptance"] = acc
    if acc < MIN_ELIMINATION_ACCEPTANCE:
        est.diagnostics["low_acceptance"] = (
            f"constraint elimination accepted {acc:.2e} < {MIN_ELIMINATION_ACCEPTANCE:g}"
        )
    if report.status == "unknown-conjectured-finite":
        est.diagnostics["caveat"] = (
            f"conjectured-finite: beta={beta} lies in ({report.conjectured_finite[0]}, "
            f"{report.conjectured_finite[1]}) where finiteness is not proven"
        )
    if d < 1.0:
        est.diagnostics["proposal"] = "Beta(delta, delta) on centre row"
    return est


def volume_rejection(k: int, q: int, mc_budget: int = 100_000, seed: int = 0) -> CoeffEstimate:
    """Volume of the constrained array set by plain rejection from the unit cube.

    Every free coordinate is uniform on [0, 1]; constrained rows fix their last
    entry by the row sum. The acceptance fraction is the volume.
    """
    W = k * q

    def draw(n, rng):
        rows = {}
        ok = np.ones(n, dtype=bool)
        for side in ("a", "d"):
            for m in range(1, W):
                rows[side, m] = _free_row(n, m, _array_target(k, q, m), rng)
        center = _free_row(n, W, _array_target(k, q, W) if k % 2 == 0 else None, rng)
        for side in ("a", "d"):
            rows[side, W] = center
        for key, x in rows.items():
            ok &= np.all((x >= 0) & (x <= 1), axis=1)
            ok &= np.all(x[:, :-1] >= x[:, 1:], axis=1)
            m = key[1]
            if m < W:
                up = rows[key[0], m + 1]
                ok &= np.all((up[:, :-1] >= x) & (x >= up[:, 1:]), axis=1)
        return ok.astype(float)

    return _summarise(_run(draw, mc_budget, seed, 1))


def _free_row(n, m, target, rng):
    x = rng.uniform(size=(n, m))
    if target is not None:
        x[:, -1] = target - x[:, :-1].sum(axis=1)
    return x


# ---------------------------------------------------------- ratios


@dataclass
class RatioTable:
    k: int
    q: int
    beta: Number
    exponent: Union[Fraction, float]
    N: list[int]
    mom: list
    ratio: list[float]
    stderr: list[Optional[float]]
    slope: Optional[float] = None
    running_slope: list[Optional[float]] = field(default_factory=list)
    limit: Optional[float] = None
    coefficient: Optional[float] = None
    warnings: list[str] = field(default_factory=list)


def fit_slope(N: Sequence[int], mom: Sequence[float]) -> float:
    """Least-squares slope of ``log MoM`` against ``log N``."""
    if len(N) < 3:
        raise ValueError("slope fit needs at least 3 values of N")
    x = np.log(np.asarray(N, dtype=float))
    y = np.log(np.asarray([float(m) for m in mom]))
    return float(np.polyfit(x, y, 1)[0])


def extrapolate_ratio(N: Sequence[int], ratio: Sequence[float], degree: int = 2) -> float:
    """Fit the ratio as a polynomial in ``1/N`` and return its value at ``1/N = 0``."""
    deg = min(degree, len(N) - 1)
    if deg < 0:
        raise ValueError("need at least one value of N")
    h = 1.0 / np.asarray(N, dtype=float)
    return float(np.polyfit(h, np.asarray(ratio, dtype=float), deg)[-1])


def asymptotic_ratio(
    k: int,
    q: int,
    beta: Number,
    N_list: Sequence[int],
    method: str = "exact",
    compute: Optional[Callable[[int], tuple]] = None,
) -> RatioTable:
    """Tabulate ``MoM_N / N^exponent`` with a log-log slope and extrapolated limit.

    ``compute(N)`` returns ``(value, stderr)``; by default it is the exact DP
    (``method="exact"``) or the Metropolis estimator (``method="monte-carlo"``).
    """
    from .combinatorics import ArraySpec

    if compute is None:
        if method == "exact":
            from .exact import mom_exact

            b = Fraction(beta)
            compute = lambda N: (mom_exact(ArraySpec(N, k, q), Fraction(2) / b).value, None)
        elif method == "monte-carlo":
            from .montecarlo import McConfig

            compute = lambda N: _mc_point(ArraySpec(N, k, q), float(beta), McConfig())
        else:
            raise ValueError(f"unknown method {method!r}")
    N_list = sorted(set(int(n) for n in N_list))
    if not N_list or N_list[0] < 1:
        raise ValueError("N values must be >= 1")
    e = exponent(k, q, beta)
    ef = float(e)
    mom, ratio, se = [], [], []
    for N in N_list:
        v, s = compute(N)
        mom.append(v)
        ratio.append(float(v) / N**ef)
        se.append(None if s is None else s / N**ef)
    table = RatioTable(k, q, beta, e, N_list, mom, ratio, se)
    table.running_slope = [fit_slope(N_list[: i + 1], mom[: i + 1]) if i >= 2 else None for i in range(len(N_list))]
    if len(N_list) >= 3:
        table.slope = table.running_slope[-1]
    else:
        table.warnings.append("fewer than 3 N values: slope fit refused")
    table.limit = extrapolate_ratio(N_list, ratio)
    if k == 1:
        table.coefficient = coeff_k1(q, beta)
    return table


def _mc_point(spec, beta, cfg):
    from .montecarlo import mom_mc

    est = mom_mc(spec, beta, cfg)
    return est.mean, est.stderr
