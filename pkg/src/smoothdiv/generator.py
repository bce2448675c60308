"""Smooth divergence generator and the total-variation generator.

The smooth generator is

    phi(t) = c * a * (s - 1 + log(2 / (s + 1))),   u = b (t - 1) / a,  s = sqrt(1 + u^2)

for positive parameters ``a`` (alpha, smoothing scale), ``b`` (beta, slope
factor) and ``c`` (ctilde, global multiplier).  The ``log(2 / (s + 1))`` term
equals ``log(2 (s - 1) / u^2)`` because ``(s - 1)(s + 1) = u^2``; the former has
no 0/0 at ``t = 1`` and is the form evaluated here.

``phi`` is strictly convex, ``phi(1) = phi'(1) = 0``, its slope tends to
``+-c*b`` at ``+-inf`` and ``phi(t) <= c*b*|t - 1|`` with equality only at
``t = 1``.  As ``a -> 0`` (or ``a/b -> 0`` with ``c = 1/b``) it approaches the
scaled absolute deviation, which is what makes it a smooth l1 surrogate.

All functions accept scalars or numpy arrays and return the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "GeneratorParams",
    "GeneratorValue",
    "OVERFLOW_SWITCH",
    "phi",
    "phi_shifted",
    "phi_prime",
    "phi_tv",
    "phi_limit_gap",
    "phi_parts",
]

# Beyond this |u| the asymptotic expression is used; u^2 would overflow.
OVERFLOW_SWITCH = 1e154

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class GeneratorParams:
    """Parameter triple ``(alpha, beta, ctilde)``, validated once at construction."""

    alpha: float
    beta: float
    ctilde: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "ctilde"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise DomainError(f"{name} must be a real number, got {value!r}") from None
            if not math.isfinite(value) or value <= 0.0:
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def unit_slope(cls, alpha: float, beta: float) -> "GeneratorParams":
        """Parameters with ``ctilde = 1/beta`` so the asymptotic slope is one."""
        return cls(alpha, beta, 1.0 / float(beta))

    @property
    def slope(self) -> float:
        """Asymptotic slope ``ctilde * beta`` (the l1 multiplier)."""
        return self.ctilde * self.beta


@dataclass(frozen=True)
class GeneratorValue:
    """Value of ``phi`` together with its internal argument ``u`` and ``s = hypot(1, u)``."""

    value: float
    u: float
    s: float


def _check_finite(t) -> np.ndarray:
    arr = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("argument t must be finite")
    return arr


def _unit_generator(u: np.ndarray) -> np.ndarray:
    """``s - 1 + log(2/(s+1))`` for ``|u| <= OVERFLOW_SWITCH``, written as ``x - log1p(x/2)``."""
    au = np.abs(u)
    s = np.hypot(1.0, au)
    # s - 1 without cancellation for small |u|
    x = np.where(au < 1.0, au * au / (1.0 + s), s - 1.0)
    return x - np.log1p(0.5 * x)


def _phi_from_shift(params: GeneratorParams, d: np.ndarray) -> np.ndarray:
    a, b, c = params.alpha, params.beta, params.ctilde
    with np.errstate(over="ignore"):
        u = b * d / a
    au = np.abs(u)
    big = au > OVERFLOW_SWITCH
    if not np.any(big):
        return c * a * _unit_generator(u)
    out = np.empty_like(au)
    small = ~big
    out[small] = c * a * _unit_generator(u[small])
    # asymptotic branch: c*b*|d| + c*a*(log 2 - 1 - log|u| - log1p(1/|u|)),
    # with log|u| assembled from logs so that an infinite u still works
    db = np.abs(d[big])
    log_au = math.log(b) + np.log(db) - math.log(a)
    with np.errstate(over="ignore"):
        lin = c * b * db
    inv = np.exp(-log_au)
    with np.errstate(invalid="ignore"):
        tail = lin + c * a * (_LOG2 - 1.0 - log_au - np.log1p(inv))
    out[big] = np.where(np.isinf(lin), np.inf, tail)
    return out


def phi_shifted(params: GeneratorParams, d):
    """Evaluate ``phi(1 + d)`` from the shift ``d = t - 1`` directly.

    Callers that already hold ``t - 1`` as a difference (for instance
    ``(q - p)/p``) should use this to avoid recomputing ``1 + d - 1``.
    """
    d = _check_finite(d)
    out = _phi_from_shift(params, np.atleast_1d(d))
    return out.reshape(d.shape)[()] if d.ndim == 0 else out


def phi(params: GeneratorParams, t):
    """Smooth generator ``phi_{alpha,beta,ctilde}(t)``; exactly 0 at ``t = 1``."""
    t = _check_finite(t)
    return phi_shifted(params, t - 1.0)


def phi_prime(params: GeneratorParams, t):
    """Derivative ``ctilde * beta * u / (1 + sqrt(1 + u^2))``."""
    t = _check_finite(t)
    a, b, c = params.alpha, params.beta, params.ctilde
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        u = b * (t - 1.0) / a
        au = np.abs(u)
        inv = 1.0 / au
        ratio = np.where(
            au <= 1.0,
            u / (1.0 + np.hypot(1.0, u)),
            np.sign(u) / (inv + np.hypot(1.0, inv)),
        )
    return c * b * ratio


def phi_tv(t):
    """Total-variation generator ``|t - 1|``."""
    t = _check_finite(t)
    return np.abs(t - 1.0)


def phi_limit_gap(params: GeneratorParams, t):
    """``phi(t) - ctilde*beta*|t - 1|``; never positive, zero only at ``t = 1``."""
    t = _check_finite(t)
    d = t - 1.0
    return phi_shifted(params, d) - params.slope * np.abs(d)


def phi_parts(params: GeneratorParams, t: float) -> GeneratorValue:
    """Scalar ``phi(t)`` with the intermediate ``u`` and ``s`` exposed."""
    t = float(_check_finite(t))
    u = params.beta * (t - 1.0) / params.alpha
    return GeneratorValue(value=float(phi(params, t)), u=u, s=math.hypot(1.0, u))
