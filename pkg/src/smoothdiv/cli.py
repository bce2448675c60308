"""Command-line interface.

Subcommands::

    smoothdiv eval           generator value or a vector divergence
    smoothdiv sweep          convergence sweep written as CSV (or JSON)
    smoothdiv duality-check  conjugate vs M_P*phi on a grid, JSON report
    smoothdiv lasso-demo     synthetic LASSO, solution JSON + surrogate CSV

Exit codes: 0 success, 1 numeric or check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import divergence as dv
from .duality import LaplaceDual, mgf_check, sample_w, verify_duality
from .errors import DimensionError, DomainError
from .generator import GeneratorParams, phi, phi_tv
from .lasso import dumps_solution, make_problem, solve_lasso, surrogate_report
from .limits import SweepMode, SweepSpec, format_number, sweep, write_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad flag value or unreadable input file (exit code 2)."""


def read_vector(path: str, flag: str) -> np.ndarray:
    """One decimal per line; blank lines and lines starting with '#' are skipped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"{flag}: cannot read {path}: {exc.strerror}") from None
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise UsageError(f"{flag}: {path}:{lineno}: not a number: {line!r}") from None
    if not values:
        raise UsageError(f"{flag}: {path} contains no values")
    if not all(math.isfinite(v) for v in values):
        raise UsageError(f"{flag}: {path} contains non-finite values")
    return np.array(values)


def parse_grid(text: str, flag: str) -> list[float]:
    """Comma list ``a,b,c`` or geometric ``lo:hi:n``."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
            if n < 1 or lo <= 0 or hi <= 0:
                raise ValueError
            values = [float(v) for v in np.geomspace(lo, hi, n)] if n > 1 else [lo]
        else:
            values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag}: cannot parse grid {text!r}") from None
    if not values or not all(math.isfinite(v) and v > 0 for v in values):
        raise UsageError(f"{flag}: grid values must be positive and finite")
    if len(values) > 1:
        diffs = np.diff(values)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise UsageError(f"{flag}: grid must be strictly monotone")
    return values


def _positive(flag):
    def conv(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not (math.isfinite(v) and v > 0):
            raise argparse.ArgumentTypeError(f"{flag} must be positive and finite, got {text}")
        return v

    conv.__name__ = flag
    return conv


def _finite(text):
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return v


def _nonneg(text):
    v = float(text)
    if not (math.isfinite(v) and v >= 0):
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return v


def _count(minimum):
    def conv(text):
        v = int(text)
        if v < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {text}")
        return v

    return conv


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return v


def _add_params(p, alpha=True, beta=True):
    if alpha:
        p.add_argument("--alpha", type=_positive("--alpha"), default=1.0)
    if beta:
        p.add_argument("--beta", type=_positive("--beta"), default=1.0)
    p.add_argument("--ctilde", type=_positive("--ctilde"), default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothdiv", description="Smooth divergences and their l1 limits."
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    ev = sub.add_parser("eval", help="evaluate phi(t) or a vector divergence")
    _add_params(ev)
    ev.add_argument("--t", type=_finite, help="scalar argument of the generator")
    ev.add_argument("--q", help="file with the vector Q")
    ev.add_argument("--p", help="file with the positive vector P")
    ev.add_argument("--qstar", help="file with Q* (default zeros)")
    ev.add_argument("--sigma", help="file with positive sigma (default ones)")
    ev.add_argument(
        "--divergence", choices=["phi", "tv", "new", "wl1"], default="phi",
        help="phi: D_phi(Q,P); tv: ||Q-P||_1; new: scaled shift divergence; wl1: weighted l1",
    )
    ev.add_argument("--shift", action="store_true", help="shorthand for --divergence new")

    sw = sub.add_parser("sweep", help="convergence sweep as CSV")
    sw.add_argument(
        "--mode", choices=["alpha-over-beta", "p-to-zero", "alpha-to-zero"],
        default="alpha-over-beta",
        help="alpha-over-beta: grid=beta, family=m, ctilde=1/beta; "
        "p-to-zero: grid=m, family=beta; alpha-to-zero: grid=alpha, family=beta",
    )
    sw.add_argument("--divergence", choices=["phi", "new"], default="phi")
    sw.add_argument("--q", required=True)
    sw.add_argument("--p", help="base weight vector p0 (default ones)")
    sw.add_argument("--qstar")
    sw.add_argument("--sigma")
    _add_params(sw)
    sw.add_argument("--unit-slope", action="store_true", help="use ctilde = 1/beta in every mode")
    sw.add_argument("--grid", "--beta-grid", dest="grid", help="comma list or lo:hi:n")
    sw.add_argument("--log-grid", dest="log_grid", help="geometric grid lo:hi:n")
    sw.add_argument("--family", "--m-family", dest="family", help="comma list or lo:hi:n")
    sw.add_argument("--log-family", dest="log_family", help="geometric family lo:hi:n")
    sw.add_argument("--format", choices=["csv", "json"], default="csv")
    sw.add_argument("--out", help="output path (default standard output)")

    du = sub.add_parser("duality-check", help="verify conjugate == M_P * phi")
    _add_params(du)
    du.add_argument("--mp", type=_positive("--mp"), default=1.0)
    du.add_argument("--t-min", type=_finite, default=-10.0)
    du.add_argument("--t-max", type=_finite, default=10.0)
    du.add_argument("--grid-n", type=_count(1), default=201)
    du.add_argument("--samples", type=_count(0), default=0)
    du.add_argument("--seed", type=_seed, default=0)
    du.add_argument("--out")

    la = sub.add_parser("lasso-demo", help="synthetic LASSO and its smooth l1 surrogates")
    la.add_argument("--n", type=_count(1), default=200)
    la.add_argument("--k", type=_count(1), default=50)
    la.add_argument("--sparsity", type=_count(0), default=5)
    la.add_argument("--noise-sd", type=_nonneg, default=0.1)
    la.add_argument("--lambda", dest="lam", type=_nonneg, default=1.0)
    la.add_argument("--seed", type=_seed, default=0)
    la.add_argument("--alpha", type=_positive("--alpha"), default=1.0)
    la.add_argument("--beta-grid", default="1e1,1e2,1e3,1e4")
    la.add_argument("--m-family", default="1e2,1e3,1e4")
    la.add_argument("--tol", type=_positive("--tol"), default=1e-10)
    la.add_argument("--max-iter", type=_count(1), default=100_000)
    la.add_argument("--out", required=True, help="path of the surrogate CSV")
    la.add_argument("--json", dest="json_out", help="write solution JSON here instead of stdout")
    return parser


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def run_eval(args) -> int:
    params = GeneratorParams(args.alpha, args.beta, args.ctilde)
    kind = "new" if args.shift else args.divergence
    if args.t is not None:
        if args.q is not None:
            raise UsageError("--t and --q are mutually exclusive")
        if kind not in ("phi", "tv"):
            raise UsageError(f"--divergence {kind} needs vector inputs (--q)")
        value = phi(params, args.t) if kind == "phi" else phi_tv(args.t)
    else:
        if args.q is None:
            raise UsageError("one of --t or --q is required")
        q = read_vector(args.q, "--q")
        k = q.shape[0]
        qstar = read_vector(args.qstar, "--qstar") if args.qstar else np.zeros(k)
        sigma = read_vector(args.sigma, "--sigma") if args.sigma else np.ones(k)
        if kind == "wl1":
            value = dv.weighted_l1(q, qstar, sigma)
        else:
            if args.p is None:
                raise UsageError(f"--p is required for --divergence {kind}")
            p = read_vector(args.p, "--p")
            if kind == "phi":
                value = dv.d_phi(params, q, p)
            elif kind == "tv":
                value = dv.d_tv(q, p)
            else:
                value = dv.d_new(params, q, qstar, p, sigma)
    print(format_number(value))
    return EXIT_OK


_MODES = {
    "alpha-over-beta": SweepMode.ALPHA_OVER_BETA_TO_ZERO,
    "p-to-zero": SweepMode.P_TO_ZERO,
    "alpha-to-zero": SweepMode.ALPHA_TO_ZERO,
}


def run_sweep(args) -> int:
    if (args.grid is None) == (args.log_grid is None):
        raise UsageError("exactly one of --grid/--beta-grid or --log-grid is required")
    if (args.family is None) == (args.log_family is None):
        raise UsageError("exactly one of --family/--m-family or --log-family is required")
    grid = parse_grid(args.grid or args.log_grid, "--grid" if args.grid else "--log-grid")
    family = parse_grid(
        args.family or args.log_family, "--family" if args.family else "--log-family"
    )
    q = read_vector(args.q, "--q")
    spec = SweepSpec(
        _MODES[args.mode],
        grid,
        family,
        q,
        kind=args.divergence,
        qstar=read_vector(args.qstar, "--qstar") if args.qstar else None,
        sigma=read_vector(args.sigma, "--sigma") if args.sigma else None,
        p=read_vector(args.p, "--p") if args.p else None,
        alpha=args.alpha,
        beta=args.beta,
        ctilde=args.ctilde,
        unit_slope=args.unit_slope,
    )
    rows = sweep(spec)
    if args.format == "json":
        text = json.dumps([asdict(r) for r in rows]) + "\n"
    else:
        text = write_csv(rows)
    _emit(text, args.out)
    return EXIT_OK


def run_duality_check(args) -> int:
    if args.t_min > args.t_max:
        raise UsageError("--t-min must not exceed --t-max")
    params = GeneratorParams(args.alpha, args.beta, args.ctilde)
    dual = LaplaceDual(params, args.mp)
    grid = np.linspace(args.t_min, args.t_max, args.grid_n)
    report = verify_duality(dual, grid)
    payload = report.to_dict()
    ok = report.passed
    if args.samples > 0:
        w = sample_w(dual, args.samples, args.seed)
        se = math.sqrt(dual.variance / args.samples)
        mean = float(np.mean(w))
        zs = [f * dual.rate for f in (-0.4, -0.2, 0.1, 0.25, 0.4)]
        mc = mgf_check(dual, w, zs)
        mc.update(
            samples=args.samples,
            seed=args.seed,
            mean=mean,
            mean_se=se,
            mean_within_4se=abs(mean - 1.0) <= 4.0 * se,
        )
        mc["pass"] = mc["pass"] and mc["mean_within_4se"]
        payload["monte_carlo"] = mc
        ok = ok and mc["pass"]
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK if ok else EXIT_FAIL


def run_lasso_demo(args) -> int:
    if args.sparsity > args.k:
        raise UsageError("--sparsity must not exceed --k")
    betas = parse_grid(args.beta_grid, "--beta-grid")
    ms = parse_grid(args.m_family, "--m-family")
    problem, _ = make_problem(args.n, args.k, args.sparsity, args.noise_sd, args.seed, args.lam)
    solution = solve_lasso(problem, tol=args.tol, max_iter=args.max_iter)
    _emit(dumps_solution(problem, solution) + "\n", args.json_out)
    Path(args.out).write_text(write_csv(surrogate_report(solution, args.alpha, betas, ms)))
    return EXIT_OK if solution.converged and solution.accepted else EXIT_FAIL


_COMMANDS = {
    "eval": run_eval,
    "sweep": run_sweep,
    "duality-check": run_duality_check,
    "lasso-demo": run_lasso_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, DimensionError) as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog} {args.command}: error: {exc}\n")
    except DomainError as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
