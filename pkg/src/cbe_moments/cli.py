"""Command-line entry point: ``cbe-moments <command> [flags]``.

Every command prints one JSON object (or a CSV table for ``scan`` and
``sample`` when ``--format csv``). Exact values are written as
``{"num": "...", "den": "..."}``. Wall time is reported only with ``--timing``
so that reruns with the same seed produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
import warnings
from fractions import Fraction
from typing import Any, Optional, Sequence, Union

from . import __version__
from .asymptotics import (
    DomainError,
    asymptotic_ratio,
    coeff_general,
    coeff_k1,
    coeff_k2,
    finiteness_domain,
)
from .combinatorics import ArraySpec, ContractViolation, ResourceLimitError
from .exact import DEFAULT_MAX_LAYER, mom_exact, mom_exact_J, mom_quadrature
from .jack import jack_eval
from .montecarlo import McConfig, mom_mc, run_chains
from .singularity import extremal_point, integral_dimension, order_of, star_point, threshold_beta

WORKERS_ENV = "CBE_MOMENTS_WORKERS"
DEFAULTS: dict[str, Any] = {
    "k": 1,
    "q": 1,
    "beta": "2",
    "method": None,
    "mc_budget": 100_000,
    "seed": 0,
    "format": "json",
    "max_layer_size": DEFAULT_MAX_LAYER,
}
_RATIONAL = re.compile(r"^\s*[+]?\d+\s*(/\s*\d+\s*)?$")


class CliError(Exception):
    def __init__(self, kind: str, message: str, exit_code: int = 2, **extra):
        super().__init__(message)
        self.kind = kind
        self.exit_code = exit_code
        self.extra = extra


def parse_beta(text: Union[str, int, float, Fraction]) -> Union[Fraction, float]:
    """``"p/q"`` and integers parse exactly; anything else is a float."""
    if isinstance(text, (Fraction, int)):
        value: Union[Fraction, float] = Fraction(text)
    elif isinstance(text, float):
        value = text
    elif _RATIONAL.match(str(text)):
        value = Fraction(str(text).replace(" ", ""))
    else:
        try:
            value = float(text)
        except ValueError:
            raise CliError("usage", f"cannot parse beta {text!r}") from None
    if not value > 0 or (isinstance(value, float) and not math.isfinite(value)):
        raise CliError("usage", f"beta must be positive and finite, got {text!r}")
    return value


def rational_json(x: Fraction) -> dict:
    return {"num": str(x.numerator), "den": str(x.denominator)}


def _budget(text: Union[str, int, float]) -> int:
    """Accept ``1e6`` style budgets."""
    value = float(text)
    if value != int(value) or value < 2:
        raise CliError("usage", f"--mc-budget must be an integer >= 2, got {text!r}")
    return int(value)


def _parse_N_list(text: str) -> list[int]:
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


# ------------------------------------------------------------ config merge


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and isinstance(data.get("inputs"), dict):
        data = data["inputs"]
    return {k.replace("-", "_"): v for k, v in data.items()}


def _resolve(args: argparse.Namespace, keys: Sequence[str]) -> dict:
    """Flags win over the config file, which wins over defaults."""
    cfg = _load_config(args.config)
    out = {}
    for key in keys:
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in cfg:
            out[key] = cfg[key]
        elif key == "workers":
            out[key] = int(os.environ.get(WORKERS_ENV, "1"))
        else:
            out[key] = DEFAULTS.get(key)
    if "workers" in out and int(out["workers"]) < 1:
        raise CliError("usage", "--workers must be >= 1")
    return out


def _require(inp: dict, *keys: str) -> None:
    missing = [k for k in keys if inp.get(k) is None]
    if missing:
        raise CliError("usage", "missing required parameter(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _record(command: str, inputs: dict, method: str, value: Any = None, **rest) -> dict:
    rec = {"command": command, "inputs": inputs, "method": method, "version": __version__}
    if isinstance(value, Fraction):
        rec["value"] = rational_json(value)
        rec["exact"] = str(value)
        rec["value_decimal"] = repr(float(value))
    elif value is not None:
        rec["value"] = value
    rec.update({k: v for k, v in rest.items() if v is not None})
    return rec


def _echo(inp: dict) -> dict:
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in inp.items()}


# ------------------------------------------------------------------ commands


MOM_METHODS = {"exact": "I-DP", "j-enum": "J-enum", "quadrature": "quadrature", "mc": "monte-carlo"}


def cmd_mom(args) -> dict:
    inp = _resolve(args, ["N", "k", "q", "beta", "method", "mc_budget", "seed", "workers", "max_layer_size"])
    _require(inp, "N")
    inp["mc_budget"] = _budget(inp["mc_budget"])
    inp["method"] = inp["method"] or "exact"
    if inp["method"] not in MOM_METHODS:
        raise CliError("usage", f"unknown method {inp['method']!r}; choose from {sorted(MOM_METHODS)}")
    beta = parse_beta(inp["beta"])
    spec = ArraySpec(int(inp["N"]), int(inp["k"]), int(inp["q"]))
    method = inp["method"]
    diag: dict = {}
    if isinstance(beta, float) and method in ("exact", "j-enum"):
        diag["routing"] = f"decimal beta {inp['beta']!r} has no exact rational form here; used quadrature"
        method = "quadrature"
    t0 = time.perf_counter()
    stderr = None
    if method == "mc":
        cfg = McConfig(n_samples=_budget(inp["mc_budget"]), seed=int(inp["seed"]), workers=int(inp["workers"]))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = mom_mc(spec, float(beta), cfg)
        value: Any = est.mean
        stderr = est.stderr
        diag.update(est.diagnostics)
        diag["ess"] = est.ess
        diag["n_samples"] = est.n_samples
    elif method == "quadrature":
        value = mom_quadrature(spec, Fraction(beta)).value
    elif method == "j-enum":
        value = mom_exact_J(spec, Fraction(2) / beta).value
    else:
        value = mom_exact(spec, Fraction(2) / beta, max_layer=int(inp["max_layer_size"]), workers=int(inp["workers"])).value
    rec = _record("mom", _echo(inp), MOM_METHODS[method], value, stderr=stderr, diagnostics=diag)
    if method == "mc":
        rec["seed"] = int(inp["seed"])
        rec["mc_budget"] = _budget(inp["mc_budget"])
    if args.timing:
        rec["wall_time"] = time.perf_counter() - t0
    return rec


def _coeff_k1_exact(q: int, beta: Fraction) -> Optional[Fraction]:
    """Exact k = 1 coefficient when every Gamma argument is an integer."""
    d = Fraction(2) / beta
    if d.denominator != 1:
        return None
    d = int(d)
    out = Fraction(1)
    for i in range(1, q + 1):
        out *= Fraction(math.factorial(d * i - 1), math.factorial(d * (q + i) - 1))
    return out


def cmd_coeff(args) -> dict:
    inp = _resolve(args, ["k", "q", "beta", "method", "mc_budget", "seed", "workers"])
    beta = parse_beta(inp["beta"])
    k, q = int(inp["k"]), int(inp["q"])
    inp["mc_budget"] = _budget(inp["mc_budget"])
    report = finiteness_domain(k, q, beta)
    diag: dict = {"finiteness": report.as_dict()}
    t0 = time.perf_counter()
    if report.status == "infinite":
        raise CliError(
            "domain",
            f"coefficient is infinite at beta={inp['beta']}: {report.reason}",
            reason=report.reason,
            finiteness=report.as_dict(),
        )
    method = inp["method"] or ("closed-form" if k == 1 else "integral" if k == 2 else "general")
    budget = _budget(inp["mc_budget"])
    seed, workers = int(inp["seed"]), int(inp["workers"])
    rec_extra: dict = {}
    if method == "closed-form":
        if k != 1:
            raise CliError("usage", "closed-form coefficient exists only for k = 1")
        value: Any = coeff_k1(q, beta)
        exact = _coeff_k1_exact(q, beta) if isinstance(beta, Fraction) else None
        if exact is not None:
            rec_extra["exact"] = str(exact)
            rec_extra["exact_value"] = rational_json(exact)
    elif method in ("integral", "general"):
        if method == "integral" and k != 2:
            raise CliError("usage", "the single-row integral applies only to k = 2")
        fn = coeff_k2 if method == "integral" else lambda q_, b_, **kw: coeff_general(k, q_, b_, **kw)
        try:
            est = fn(q, beta, mc_budget=budget, seed=seed, workers=workers)
        except DomainError as e:
            raise CliError("domain", str(e), reason=e.report.reason, finiteness=e.report.as_dict()) from None
        value = est.value
        rec_extra.update(stderr=est.stderr, seed=seed, mc_budget=budget)
        diag.update(est.diagnostics)
        diag["ess"] = est.ess
    else:
        raise CliError("usage", f"unknown coeff method {method!r}")
    rec = _record("coeff", _echo(inp), method, value, diagnostics=diag, **rec_extra)
    if args.timing:
        rec["wall_time"] = time.perf_counter() - t0
    return rec


def cmd_scan(args) -> Union[dict, str]:
    inp = _resolve(args, ["k", "q", "beta", "method", "mc_budget", "seed", "workers", "max_layer_size", "N_list", "format"])
    _require(inp, "N_list")
    inp["mc_budget"] = _budget(inp["mc_budget"])
    if args.format is None and "format" not in _load_config(args.config):
        inp["format"] = "csv"
    beta = parse_beta(inp["beta"])
    k, q = int(inp["k"]), int(inp["q"])
    Ns = _parse_N_list(inp["N_list"])
    method = inp["method"] or "exact"
    if isinstance(beta, float) and method == "exact":
        raise CliError("usage", "exact scans need a rational beta such as 2 or 7/3")
    if method == "exact":
        compute = lambda N: (
            mom_exact(ArraySpec(N, k, q), Fraction(2) / beta, max_layer=int(inp["max_layer_size"]), workers=int(inp["workers"])).value,
            None,
        )
    elif method == "mc":
        cfg = McConfig(n_samples=_budget(inp["mc_budget"]), seed=int(inp["seed"]), workers=int(inp["workers"]))

        def compute(N):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                est = mom_mc(ArraySpec(N, k, q), float(beta), cfg)
            return est.mean, est.stderr

    else:
        raise CliError("usage", f"scan method must be exact or mc, got {method!r}")
    table = asymptotic_ratio(k, q, beta, Ns, compute=compute)
    for w in table.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if inp["format"] == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["N", "MoM", "ratio", "slope"])
        for N, m, r, s in zip(table.N, table.mom, table.ratio, table.running_slope):
            writer.writerow([N, str(m) if isinstance(m, Fraction) else repr(float(m)), repr(r), "" if s is None else repr(s)])
        return buf.getvalue()
    rows = [
        {
            "N": N,
            "MoM": rational_json(m) if isinstance(m, Fraction) else m,
            "ratio": r,
            "stderr": s,
            "slope": sl,
        }
        for N, m, r, s, sl in zip(table.N, table.mom, table.ratio, table.stderr, table.running_slope)
    ]
    e = table.exponent
    rec = _record(
        "scan",
        _echo(inp),
        method,
        rows=rows,
        exponent=rational_json(e) if isinstance(e, Fraction) else e,
        slope=table.slope,
        limit=table.limit,
        coefficient=table.coefficient,
        warnings=table.warnings or None,
    )
    if method == "mc":
        rec["seed"] = int(inp["seed"])
    return rec


def cmd_jack(args) -> dict:
    inp = _resolve(args, ["lam", "points", "beta"])
    _require(inp, "lam", "points")
    lam = [int(p) for p in str(inp["lam"]).split(",")]
    points = [complex(p.strip().replace(" ", "")) for p in str(inp["points"]).split(",")]
    beta = parse_beta(inp["beta"])
    if isinstance(beta, float):
        raise CliError("usage", "jack evaluation needs a rational beta")
    v = jack_eval(lam, points, Fraction(2) / beta)
    return _record("jack", _echo(inp), "branching", {"re": v.real, "im": v.imag})


def cmd_sample(args) -> Union[dict, str]:
    inp = _resolve(args, ["N", "beta", "mc_budget", "seed", "workers", "format"])
    _require(inp, "N")
    beta = float(parse_beta(inp["beta"]))
    n = inp["mc_budget"] = _budget(inp["mc_budget"])
    cfg = McConfig(n_chains=min(512, n), n_samples=n, seed=int(inp["seed"]), workers=int(inp["workers"]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        run = run_chains(int(inp["N"]), beta, cfg)
    samples = run.samples.reshape(-1, run.samples.shape[-1])[:n]
    if inp["format"] == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"theta_{j + 1}" for j in range(samples.shape[1])])
        for row in samples:
            writer.writerow([repr(float(t)) for t in row])
        return buf.getvalue()
    return _record(
        "sample",
        _echo(inp),
        "metropolis",
        samples=samples.tolist(),
        seed=int(inp["seed"]),
        diagnostics=run.diagnostics,
    )


def cmd_singularity(args) -> dict:
    inp = _resolve(args, ["k", "q", "beta", "point"])
    k, q = int(inp["k"]), int(inp["q"])
    kind = inp["point"] or "extremal"
    if kind == "star":
        if k != 2:
            raise CliError("usage", "the star point lives in the k = 2 single-row integral")
        point = star_point(q)
    elif kind == "extremal":
        point = extremal_point(k, q)
    else:
        raise CliError("usage", f"unknown point {kind!r}; choose extremal or star")
    order = order_of(point)
    out = {
        "order": {"constant": str(order.constant), "inverse_beta": str(order.inverse_beta), "text": str(order)},
        "dimension": integral_dimension(point),
    }
    try:
        out["threshold_beta"] = str(threshold_beta(point))
    except ValueError as e:
        out["threshold_beta"] = None
        out["threshold_note"] = str(e)
    if args.beta is not None or "beta" in _load_config(args.config):
        b = parse_beta(inp["beta"])
        if isinstance(b, float):
            raise CliError("usage", "singularity orders are exact; give beta as an integer or p/q")
        out["value"] = rational_json(order.at(b))
        out["exact"] = str(order.at(b))
    return _record("singularity", _echo(inp), kind, **out)


def cmd_finiteness(args) -> dict:
    inp = _resolve(args, ["k", "q", "beta"])
    beta = None
    if args.beta is not None or "beta" in _load_config(args.config):
        beta = parse_beta(inp["beta"])
    report = finiteness_domain(int(inp["k"]), int(inp["q"]), beta)
    return _record("finiteness", _echo(inp), "table", report=report.as_dict(), status=report.status)


# -------------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser, *flags: str) -> None:
    add = {
        "N": lambda: p.add_argument("--N", type=int),
        "k": lambda: p.add_argument("--k", type=int),
        "q": lambda: p.add_argument("--q", type=int),
        "beta": lambda: p.add_argument("--beta", help="integer, p/q (exact) or decimal"),
        "method": lambda: p.add_argument("--method"),
        "mc_budget": lambda: p.add_argument("--mc-budget", dest="mc_budget"),
        "seed": lambda: p.add_argument("--seed", type=int),
        "workers": lambda: p.add_argument("--workers", type=int, help=f"default from ${WORKERS_ENV} or 1"),
        "format": lambda: p.add_argument("--format", choices=["json", "csv"]),
        "max_layer_size": lambda: p.add_argument("--max-layer-size", dest="max_layer_size", type=int),
    }
    for f in flags:
        add[f]()
    p.add_argument("--config", help="JSON file with the same keys as the flags (or a previous output record)")
    p.add_argument("--timing", action="store_true", help="include wall time in the output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbe-moments", description="Moments of moments of CβE characteristic polynomials.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mom", help="MoM_N(k;q) by exact DP, J-enumeration, quadrature or Metropolis")
    _common(p, "N", "k", "q", "beta", "method", "mc_budget", "seed", "workers", "format", "max_layer_size")
    p.set_defaults(func=cmd_mom)

    p = sub.add_parser("coeff", help="leading coefficient c(k;q)")
    _common(p, "k", "q", "beta", "method", "mc_budget", "seed", "workers", "format")
    p.set_defaults(func=cmd_coeff)

    p = sub.add_parser("scan", help="MoM_N / N^exponent over a list of N")
    _common(p, "k", "q", "beta", "method", "mc_budget", "seed", "workers", "format", "max_layer_size")
    p.add_argument("--N-list", dest="N_list", help="e.g. 1..20 or 20,50,100")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("jack", help="evaluate a Jack polynomial by branching")
    _common(p, "beta", "format")
    p.add_argument("--lam", help="comma-separated signature, e.g. 2,1,0")
    p.add_argument("--points", help="comma-separated complex numbers, e.g. 1,0.5,1j")
    p.set_defaults(func=cmd_jack)

    p = sub.add_parser("sample", help="dump CβE_N samples from the Metropolis chains")
    _common(p, "N", "beta", "mc_budget", "seed", "workers", "format")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("singularity", help="singularity order at a 0/1 point")
    _common(p, "k", "q", "beta", "format")
    p.add_argument("--point", choices=["extremal", "star"])
    p.set_defaults(func=cmd_singularity)

    p = sub.add_parser("finiteness", help="finiteness domain of c(k;q)")
    _common(p, "k", "q", "beta", "format")
    p.set_defaults(func=cmd_finiteness)
    return parser


def _dump(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except CliError as e:
        err = {"error": e.kind, "message": str(e), **e.extra}
        sys.stdout.write(_dump(err))
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ResourceLimitError as e:
        err = {"error": "resource", "message": str(e), "row": e.row, "suggestion": e.suggestion}
        sys.stdout.write(_dump(err))
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (ContractViolation, ValueError) as e:
        sys.stdout.write(_dump({"error": "invalid-input", "message": str(e)}))
        print(f"error: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(out if isinstance(out, str) else _dump(out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
