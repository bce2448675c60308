"""Legendre/MGF duality of the smooth generator with a generalized Laplace law.

Let ``W = 1 + Z1 - Z2`` with ``Z1, Z2`` i.i.d. Gamma(shape, rate) and

    shape = M_P * ctilde * alpha,    rate = M_P * ctilde * beta.

The cumulant function of ``W`` is ``Lambda(z) = z - shape*log(1 - z^2/rate^2)``
on ``|z| < rate`` and its convex conjugate equals ``M_P * phi(t)``.  The
conjugate is computed here by bisection on ``Lambda'(z) = t`` so that it is
an independent check of the closed-form generator.

Sampling uses a counter-based generator: every uniform is a SplitMix64 hash of
``(seed, sample index, stream, attempt, lane)``.  Sample ``i`` therefore
depends only on ``(seed, i)`` and any chunking of the index range reproduces
the same draws.  Gamma variates use Marsaglia-Tsang rejection with normals
from Box-Muller; shapes below one are boosted via
``Gamma(a) = Gamma(a + 1) * U**(1/a)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .generator import GeneratorParams, phi

__all__ = [
    "LaplaceDual",
    "cumulant",
    "cumulant_prime",
    "conjugate",
    "sample_w",
    "sample_gamma",
    "DualityReport",
    "verify_duality",
    "mgf_check",
]

_ENDPOINT_GUARD = 1.0 - 1e-15
_WIDTH_TOL = 1e-14
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class LaplaceDual:
    """Generalized Laplace law paired with ``phi_{alpha,beta,ctilde}`` at mass ``m_p``."""

    params: GeneratorParams
    m_p: float = 1.0

    def __post_init__(self):
        m = float(self.m_p)
        if not math.isfinite(m) or m <= 0.0:
            raise DomainError(f"m_p must be positive and finite, got {self.m_p!r}")
        object.__setattr__(self, "m_p", m)

    @property
    def shape(self) -> float:
        return self.m_p * self.params.ctilde * self.params.alpha

    @property
    def rate(self) -> float:
        return self.m_p * self.params.ctilde * self.params.beta

    @property
    def variance(self) -> float:
        """Variance of ``W``: twice the variance of one Gamma(shape, rate) variate."""
        return 2.0 * self.shape / self.rate**2


def _log_one_minus_sq(w):
    return np.log1p(-w) + np.log1p(w)


def cumulant(dual: LaplaceDual, z):
    """Log-MGF ``Lambda(z)`` of ``W``; defined for ``|z| < rate``."""
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.abs(z) < dual.rate):
        raise DomainError(f"cumulant is infinite for |z| >= rate = {dual.rate!r}")
    w = z / dual.rate
    out = z - dual.shape * _log_one_minus_sq(w)
    return out[()] if out.ndim == 0 else out


def cumulant_prime(dual: LaplaceDual, z):
    """``Lambda'(z) = 1 + 2*shape*z / (rate^2 - z^2)``."""
    z = np.asarray(z, dtype=np.float64)
    w = z / dual.rate
    with np.errstate(divide="ignore"):
        out = 1.0 + 2.0 * dual.shape * w / (dual.rate * (1.0 - w) * (1.0 + w))
    return out[()] if out.ndim == 0 else out


def conjugate(dual: LaplaceDual, t, return_argmax: bool = False):
    """``sup_z (z*t - Lambda(z))`` by bisection on the increasing ``Lambda'``.

    The bracket is ``(-rate, rate)`` shrunk by a relative ``1e-15`` and the
    search stops once its width is at most ``1e-14 * rate``.
    """
    t = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise DomainError("t must be finite")
    rate, shape = dual.rate, dual.shape
    lo = np.full(t.shape, -rate * _ENDPOINT_GUARD)
    hi = np.full(t.shape, rate * _ENDPOINT_GUARD)
    for _ in range(200):
        if np.all(hi - lo <= _WIDTH_TOL * rate):
            break
        mid = 0.5 * (lo + hi)
        below = cumulant_prime(dual, mid) < t
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    z = 0.5 * (lo + hi)
    w = z / rate
    value = z * (t - 1.0) + shape * _log_one_minus_sq(w)
    # z = 0 is always feasible, so the supremum is never negative
    value = np.maximum(value, 0.0)
    if value.ndim == 0:
        value, z = value[()], z[()]
    return (value, z) if return_argmax else value


# -- counter-based sampling --------------------------------------------------


def _mix(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _uniform(base: np.ndarray, stream: int, attempt: int, lane: int) -> np.ndarray:
    """Uniform(0, 1) keyed by per-index ``base`` and the (stream, attempt, lane) code."""
    code = np.uint64(((stream & 0xFFFF) << 48) | ((attempt & 0xFFFFFFFF) << 8) | (lane & 0xFF))
    bits = _mix(_mix(base + code) ^ np.uint64(0x9E3779B97F4A7C15))
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def _index_base(seed: int, index: np.ndarray) -> np.ndarray:
    s = np.array([seed & _MASK64], dtype=np.uint64)
    return _mix(_mix(s ^ np.uint64(0xD1B54A32D192ED03)) + index.astype(np.uint64))


def _gamma_unit(base: np.ndarray, shape: float, stream: int) -> np.ndarray:
    """Gamma(shape, 1) variates, one per entry of ``base``."""
    boost = shape < 1.0
    a = shape + 1.0 if boost else shape
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(base.shape[0])
    pending = np.arange(base.shape[0])
    attempt = 0
    while pending.size:
        b = base[pending]
        u1 = _uniform(b, stream, attempt, 0)
        u2 = _uniform(b, stream, attempt, 1)
        u3 = _uniform(b, stream, attempt, 2)
        x = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)
        v = 1.0 + c * x
        ok = v > 0.0
        v3 = np.where(ok, v * v * v, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            accept = ok & (np.log(u3) < 0.5 * x * x + d - d * v3 + d * np.log(v3))
        out[pending[accept]] = d * v3[accept]
        pending = pending[~accept]
        attempt += 1
    if boost:
        ub = _uniform(base, stream, 0xFFFFFFFF, 3)
        out = np.exp(np.log(out) + np.log(ub) / shape)
    return out


def sample_gamma(shape: float, n: int, seed: int, stream: int = 0, start: int = 0) -> np.ndarray:
    """Gamma(shape, 1) draws for sample indices ``start .. start+n-1``."""
    if not (math.isfinite(shape) and shape > 0):
        raise DomainError(f"shape must be positive, got {shape!r}")
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n!r}")
    base = _index_base(int(seed), np.arange(start, start + n, dtype=np.uint64))
    return _gamma_unit(base, float(shape), stream)


def sample_w(dual: LaplaceDual, n: int, seed: int, start: int = 0) -> np.ndarray:
    """Draws of ``W = 1 + Z1 - Z2`` for sample indices ``start .. start+n-1``.

    Deterministic in ``(seed, index)``: concatenating chunks gives the same
    array as one call over the full range.
    """
    z1 = sample_gamma(dual.shape, n, seed, stream=1, start=start)
    z2 = sample_gamma(dual.shape, n, seed, stream=2, start=start)
    return 1.0 + (z1 - z2) / dual.rate


# -- reports ----------------------------------------------------------------


@dataclass
class DualityReport:
    params: GeneratorParams
    m_p: float
    shape: float
    rate: float
    grid_size: int
    max_rel_error: float
    tolerance: float = 1e-9

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "params": {
                "alpha": self.params.alpha,
                "beta": self.params.beta,
                "ctilde": self.params.ctilde,
            },
            "m_p": self.m_p,
            "shape": self.shape,
            "rate": self.rate,
            "grid_size": self.grid_size,
            "max_rel_error": self.max_rel_error,
            "pass": self.passed,
        }


def verify_duality(dual: LaplaceDual, t_grid, tolerance: float = 1e-9) -> DualityReport:
    """Max over the grid of ``|conjugate(t) - M_P*phi(t)| / (1 + M_P*phi(t))``."""
    t = np.asarray(t_grid, dtype=np.float64).ravel()
    if t.size == 0:
        raise DomainError("t_grid must be nonempty")
    target = dual.m_p * phi(dual.params, t)
    err = np.abs(conjugate(dual, t) - target) / (1.0 + target)
    return DualityReport(
        dual.params, dual.m_p, dual.shape, dual.rate, int(t.size), float(np.max(err)), tolerance
    )


def mgf_check(dual: LaplaceDual, samples: np.ndarray, z_values, n_se: float = 3.0) -> dict:
    """Compare the empirical log-MGF of ``samples`` with :func:`cumulant`.

    The standard error of the log-MGF estimate is the delta-method value
    ``sd(exp(zW)) / (sqrt(n) * mean(exp(zW)))``.
    """
    w = np.asarray(samples, dtype=np.float64)
    n = w.size
    out = {"z": [], "empirical": [], "analytic": [], "se": [], "within": []}
    for z in z_values:
        e = np.exp(z * w)
        mean = float(np.mean(e))
        se = float(np.std(e, ddof=1) / math.sqrt(n) / mean)
        emp = math.log(mean)
        ana = float(cumulant(dual, z))
        out["z"].append(float(z))
        out["empirical"].append(emp)
        out["analytic"].append(ana)
        out["se"].append(se)
        out["within"].append(abs(emp - ana) <= n_se * se)
    out["pass"] = all(out["within"])
    return out
