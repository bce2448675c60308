"""Convergence sweeps of the smooth divergences towards their l1 targets.

Three ways of driving a divergence to its l1 limit are supported:

``ALPHA_TO_ZERO``
    smoothing scale alpha shrinks (grid), beta is the family parameter, the
    reference/weight vector ``p`` is held fixed.
``ALPHA_OVER_BETA_TO_ZERO``
    beta grows (grid) with ``ctilde = 1/beta``, ``p = p0/m`` for each family
    value ``m``.  This is the configuration of the Fig. 1-style gap curves
    ``beta -> ||Q||_1 - D``.
``P_TO_ZERO``
    ``p = p0/m`` with ``m`` growing (grid), beta is the family parameter.

Rows are emitted family-major, grid-minor, and the signed gap is always
``target - divergence``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .divergence import (
    as_posvec,
    as_vec,
    d_new,
    d_phi,
    d_tv,
    l1_norm,
    weighted_l1,
)
from .errors import DimensionError, DomainError
from .generator import GeneratorParams, phi, phi_tv

__all__ = [
    "SweepMode",
    "SweepSpec",
    "SweepRow",
    "CSV_HEADER",
    "sweep",
    "sweep_phi_surrogate",
    "sweep_shift_surrogate",
    "write_csv",
    "read_csv",
    "format_number",
    "geometric_schedule",
    "ClaimResult",
    "LimitReport",
    "check_limits",
]

CSV_HEADER = ("mode", "varying", "family", "divergence", "target", "gap")


class SweepMode(enum.Enum):
    ALPHA_TO_ZERO = "alpha_to_zero"
    ALPHA_OVER_BETA_TO_ZERO = "alpha_over_beta_to_zero"
    P_TO_ZERO = "p_to_zero"


def _check_grid(values, name: str) -> tuple:
    vals = tuple(float(v) for v in values)
    if not vals:
        raise DomainError(f"{name} must be nonempty")
    if not all(math.isfinite(v) and v > 0.0 for v in vals):
        raise DomainError(f"{name} values must be positive and finite")
    diffs = np.diff(vals)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise DomainError(f"{name} must be strictly monotone")
    return vals


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition of one convergence sweep.

    ``kind`` selects the divergence: ``"phi"`` for ``d_phi(q, p)`` or ``"new"``
    for ``d_new(q, qstar, p, sigma)``.  ``p`` is the base weight vector ``p0``
    (ones when omitted); ``unit_slope`` forces ``ctilde = 1/beta`` in the modes
    where ``ctilde`` is otherwise taken from the template.
    """

    mode: SweepMode
    grid: Sequence[float]
    family: Sequence[float]
    q: Sequence[float]
    kind: str = "phi"
    qstar: Sequence[float] | None = None
    sigma: Sequence[float] | None = None
    p: Sequence[float] | None = None
    alpha: float = 1.0
    beta: float = 1.0
    ctilde: float = 1.0
    unit_slope: bool = False

    def __post_init__(self):
        if self.kind not in ("phi", "new"):
            raise DomainError(f"kind must be 'phi' or 'new', got {self.kind!r}")
        object.__setattr__(self, "mode", SweepMode(self.mode))
        object.__setattr__(self, "grid", _check_grid(self.grid, "grid"))
        object.__setattr__(self, "family", _check_grid(self.family, "family"))
        q = as_vec(self.q, "q")
        k = q.shape[0]
        object.__setattr__(self, "q", q)
        qstar = np.zeros(k) if self.qstar is None else as_vec(self.qstar, "qstar")
        sigma = np.ones(k) if self.sigma is None else as_posvec(self.sigma, "sigma")
        p = np.ones(k) if self.p is None else as_posvec(self.p, "p")
        for name, v in (("qstar", qstar), ("sigma", sigma), ("p", p)):
            if v.shape[0] != k:
                raise DimensionError(f"{name} has dimension {v.shape[0]}, expected {k}")
        object.__setattr__(self, "qstar", qstar)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "p", p)
        GeneratorParams(self.alpha, self.beta, self.ctilde)

    @property
    def label(self) -> str:
        return f"{self.kind}/{self.mode.value}"


@dataclass(frozen=True)
class SweepRow:
    mode: str
    varying: float
    family: float
    divergence_value: float
    limit_target: float
    gap: float


def _cell(spec: SweepSpec, varying: float, family: float) -> tuple[float, float]:
    mode = spec.mode
    if mode is SweepMode.ALPHA_TO_ZERO:
        alpha, beta, p = varying, family, spec.p
        ctilde = 1.0 / beta if spec.unit_slope else spec.ctilde
    elif mode is SweepMode.ALPHA_OVER_BETA_TO_ZERO:
        alpha, beta, p = spec.alpha, varying, spec.p / family
        ctilde = 1.0 / beta
    else:
        alpha, beta, p = spec.alpha, family, spec.p / varying
        ctilde = 1.0 / beta if spec.unit_slope else spec.ctilde
    params = GeneratorParams(alpha, beta, ctilde)
    if spec.kind == "new":
        value = d_new(params, spec.q, spec.qstar, p, spec.sigma)
        target = params.slope * weighted_l1(spec.q, spec.qstar, spec.sigma)
    else:
        value = d_phi(params, spec.q, p)
        if mode is SweepMode.ALPHA_TO_ZERO:
            target = params.slope * d_tv(spec.q, p)
        else:
            target = params.slope * l1_norm(spec.q)
    return value, target


def sweep(spec: SweepSpec) -> list[SweepRow]:
    """Evaluate every (family, grid) cell of ``spec``; ``len(grid)*len(family)`` rows."""
    rows = []
    for fam in spec.family:
        for var in spec.grid:
            value, target = _cell(spec, var, fam)
            rows.append(SweepRow(spec.label, var, fam, value, target, target - value))
    return rows


def sweep_phi_surrogate(q, beta_grid, m_family, alpha: float = 1.0) -> list[SweepRow]:
    """``||q||_1 - D_{phi_{alpha,beta,1/beta}}(q, (1/m) 1)`` over beta (grid) and m (family)."""
    spec = SweepSpec(
        SweepMode.ALPHA_OVER_BETA_TO_ZERO, beta_grid, m_family, q, kind="phi", alpha=alpha
    )
    return sweep(spec)


def sweep_shift_surrogate(
    q, qstar, sigma, beta_grid, m_family, alpha: float = 1.0
) -> list[SweepRow]:
    """``sum|q - q*|/sigma - D^new_{phi_{alpha,beta,1/beta}, (1/m) 1, sigma}(q, q*)``."""
    spec = SweepSpec(
        SweepMode.ALPHA_OVER_BETA_TO_ZERO,
        beta_grid,
        m_family,
        q,
        kind="new",
        qstar=qstar,
        sigma=sigma,
        alpha=alpha,
    )
    return sweep(spec)


def format_number(x: float) -> str:
    """Shortest round-trip decimal (at most 17 significant digits)."""
    return repr(float(x))


def write_csv(rows: Iterable[SweepRow], stream=None) -> str | None:
    """Write rows with header ``mode,varying,family,divergence,target,gap``.

    Returns the CSV text when ``stream`` is None.
    """
    own = stream is None
    out = io.StringIO() if own else stream
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(
            [r.mode]
            + [format_number(v) for v in (r.varying, r.family, r.divergence_value, r.limit_target, r.gap)]
        )
    return out.getvalue() if own else None


def read_csv(text: str) -> list[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    return [SweepRow(row[0], *(float(v) for v in row[1:])) for row in reader if row]


# -- limit certification ---------------------------------------------------


def geometric_schedule(start: float = 1.0, stop: float = 1e-8, ratio: float = 10.0) -> list[float]:
    """Decreasing geometric sequence ``start, start/ratio, ..., stop``."""
    n = int(round(math.log(start / stop) / math.log(ratio)))
    return [start / ratio**j for j in range(n + 1)]


@dataclass
class ClaimResult:
    """Outcome of one limit claim along its schedule.

    ``gaps`` holds, per schedule point, the worst relative gap
    ``|target - value| / (1 + |target|)``.  Only the terminal value is
    asserted; ``monotone`` is informational.
    """

    name: str
    schedule: list[float]
    gaps: list[float]
    bound: float

    @property
    def terminal_gap(self) -> float:
        return self.gaps[-1]

    @property
    def passed(self) -> bool:
        return self.terminal_gap <= self.bound

    @property
    def monotone(self) -> bool:
        return all(b <= a for a, b in zip(self.gaps, self.gaps[1:]))


@dataclass
class LimitReport:
    claims: list[ClaimResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def __getitem__(self, name: str) -> ClaimResult:
        for c in self.claims:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[ClaimResult]:
        return [c for c in self.claims if not c.passed]


def _rel(target, value) -> float:
    target = np.asarray(target, dtype=np.float64)
    value = np.asarray(value, dtype=np.float64)
    return float(np.max(np.abs(target - value) / (1.0 + np.abs(target))))


def _run(name, schedule, bound, evaluate: Callable[[float], tuple]) -> ClaimResult:
    gaps = [_rel(*evaluate(h)) for h in schedule]
    return ClaimResult(name, list(schedule), gaps, bound)


def check_limits(
    q,
    p,
    qstar=None,
    sigma=None,
    *,
    alpha: float = 1.0,
    beta: float = 1.0,
    ctilde: float = 1.0,
    schedule: Sequence[float] | None = None,
    rel_bound: float = 1e-6,
) -> LimitReport:
    """Numerically certify every l1 limit of both divergence families.

    ``schedule`` is a decreasing sequence of factors ``h`` ending near 0
    (default ``1, 1e-1, ..., 1e-8``).  Each claim maps ``h`` to its own
    parameter: ``alpha*h`` for alpha -> 0, ``beta/h`` for beta -> inf, and
    ``p*h`` (or ``h*1``, or ``p_k*h**(1 + k/K)``) for P -> 0.  A claim passes
    when its terminal relative gap is at most ``rel_bound``.

    Claim names::

        generator_alpha        phi(t_k) -> ctilde*beta*|t_k - 1|, alpha -> 0
        generator_ratio_alpha  phi with ctilde=1/beta -> |t_k - 1|, alpha -> 0
        generator_ratio_beta   same limit, beta -> inf
        phi_alpha              d_phi -> ctilde*beta*d_tv, alpha -> 0
        phi_ratio_alpha        d_phi (ctilde=1/beta) -> d_tv, alpha -> 0
        phi_ratio_beta         same limit, beta -> inf
        phi_mass_scaled        d_phi(q, p*h) -> ctilde*beta*||q||_1
        phi_mass_uniform       d_phi(q, h*1) -> ctilde*beta*||q||_1
        phi_mass_hetero        coordinates decaying at different rates
        shift_*                the same six for d_new against the weighted l1 target

    where ``t_k = q_k/p_k``.
    """
    q = as_vec(q, "q")
    k = q.shape[0]
    p = as_posvec(p, "p")
    qstar = np.zeros(k) if qstar is None else as_vec(qstar, "qstar")
    sigma = np.ones(k) if sigma is None else as_posvec(sigma, "sigma")
    if not (p.shape[0] == qstar.shape[0] == sigma.shape[0] == k):
        raise DimensionError("q, p, qstar and sigma must share one dimension")
    schedule = geometric_schedule() if schedule is None else list(schedule)
    if not schedule:
        raise DomainError("schedule must be nonempty")
    if not all(0.0 < h <= 1.0 for h in schedule):
        raise DomainError("schedule factors must lie in (0, 1]")
    GeneratorParams(alpha, beta, ctilde)

    t = q / p
    tv = d_tv(q, p)
    l1 = l1_norm(q)
    wl1 = weighted_l1(q, qstar, sigma)
    hetero = 1.0 + np.arange(k) / k

    def gp(a=alpha, b=beta, c=ctilde):
        return GeneratorParams(a, b, c)

    def unit(a=alpha, b=beta):
        return GeneratorParams.unit_slope(a, b)

    mass_paths = {
        "scaled": lambda h: p * h,
        "uniform": lambda h: np.full(k, h),
        "hetero": lambda h: p * h**hetero,
    }

    specs = [
        ("generator_alpha", lambda h: (ctilde * beta * phi_tv(t), phi(gp(a=alpha * h), t))),
        ("generator_ratio_alpha", lambda h: (phi_tv(t), phi(unit(a=alpha * h), t))),
        ("generator_ratio_beta", lambda h: (phi_tv(t), phi(unit(b=beta / h), t))),
        ("phi_alpha", lambda h: (ctilde * beta * tv, d_phi(gp(a=alpha * h), q, p))),
        ("phi_ratio_alpha", lambda h: (tv, d_phi(unit(a=alpha * h), q, p))),
        ("phi_ratio_beta", lambda h: (tv, d_phi(unit(b=beta / h), q, p))),
    ]
    for tag, path in mass_paths.items():
        specs.append(
            (f"phi_mass_{tag}", lambda h, path=path: (ctilde * beta * l1, d_phi(gp(), q, path(h))))
        )
    specs += [
        ("shift_alpha", lambda h: (ctilde * beta * wl1, d_new(gp(a=alpha * h), q, qstar, p, sigma))),
        ("shift_ratio_alpha", lambda h: (wl1, d_new(unit(a=alpha * h), q, qstar, p, sigma))),
        ("shift_ratio_beta", lambda h: (wl1, d_new(unit(b=beta / h), q, qstar, p, sigma))),
    ]
    for tag, path in mass_paths.items():
        specs.append(
            (
                f"shift_mass_{tag}",
                lambda h, path=path: (ctilde * beta * wl1, d_new(gp(), q, qstar, path(h), sigma)),
            )
        )
    return LimitReport([_run(name, schedule, rel_bound, fn) for name, fn in specs])
