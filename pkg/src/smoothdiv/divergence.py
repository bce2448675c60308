"""Vector divergences built on the generators.

* ``d_phi``   generalized phi-divergence  sum_k p_k phi(q_k / p_k)
* ``d_new``   scaled shift divergence     sum_k p_k phi((q_k - q*_k)/(p_k sigma_k) + 1)
* ``d_tv``    total variation / l1 distance
* ``weighted_l1`` and ``l1_norm``

``q`` may hold any finite reals (zeros and negatives included); ``p`` and
``sigma`` must be strictly positive.  Sums are formed with :func:`math.fsum`,
so results are correctly rounded and independent of summation order.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError, DomainError
from .generator import GeneratorParams, _phi_from_shift

__all__ = [
    "as_vec",
    "as_posvec",
    "total_mass",
    "phi_terms",
    "new_terms",
    "d_phi",
    "d_new",
    "d_tv",
    "weighted_l1",
    "l1_norm",
]


def as_vec(values, name: str = "q") -> np.ndarray:
    """Validate a finite real vector with at least one entry (read-only copy)."""
    arr = np.array(values, dtype=np.float64, ndmin=1)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must have at least one entry")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must have finite entries")
    arr.setflags(write=False)
    return arr


def as_posvec(values, name: str = "p") -> np.ndarray:
    """Like :func:`as_vec` but every entry must be strictly positive."""
    arr = as_vec(values, name)
    if not np.all(arr > 0.0):
        raise DomainError(f"{name} must have strictly positive entries")
    return arr


def total_mass(p) -> float:
    """Total mass ``M_P = sum_i p_i`` of a positive vector."""
    return math.fsum(as_posvec(p))


def _same_dim(**vecs):
    dims = {name: v.shape[0] for name, v in vecs.items()}
    if len(set(dims.values())) != 1:
        raise DimensionError(f"dimension mismatch: {dims}")


def phi_terms(params: GeneratorParams, q, p) -> np.ndarray:
    """Per-coordinate terms ``p_k * phi(q_k / p_k)`` of :func:`d_phi`."""
    q, p = as_vec(q, "q"), as_posvec(p, "p")
    _same_dim(q=q, p=p)
    # t - 1 = (q - p)/p keeps full precision when q is close to p
    return p * _phi_from_shift(params, (q - p) / p)


def new_terms(params: GeneratorParams, q, qstar, p, sigma) -> np.ndarray:
    """Per-coordinate terms of :func:`d_new`."""
    q, qstar = as_vec(q, "q"), as_vec(qstar, "qstar")
    p, sigma = as_posvec(p, "p"), as_posvec(sigma, "sigma")
    _same_dim(q=q, qstar=qstar, p=p, sigma=sigma)
    return p * _phi_from_shift(params, (q - qstar) / (p * sigma))


def d_phi(params: GeneratorParams, q, p) -> float:
    """Generalized phi-divergence ``D_phi(Q, P)``; zero iff ``q == p``."""
    return math.fsum(phi_terms(params, q, p))


def d_new(params: GeneratorParams, q, qstar, p, sigma) -> float:
    """Scaled shift divergence ``D^new_{phi,P,sigma}(Q, Q*)``; zero iff ``q == qstar``.

    Here ``p`` acts as a weight/scale rather than as a reference point.
    """
    return math.fsum(new_terms(params, q, qstar, p, sigma))


def d_tv(q, p) -> float:
    """l1 (total variation) distance ``sum_k |p_k - q_k|``."""
    q, p = as_vec(q, "q"), as_posvec(p, "p")
    _same_dim(q=q, p=p)
    return math.fsum(np.abs(p - q))


def weighted_l1(q, qstar, sigma) -> float:
    """``sum_k |q_k - q*_k| / sigma_k``; with ``qstar = 0`` a weighted l1 norm."""
    q, qstar, sigma = as_vec(q, "q"), as_vec(qstar, "qstar"), as_posvec(sigma, "sigma")
    _same_dim(q=q, qstar=qstar, sigma=sigma)
    return math.fsum(np.abs(q - qstar) / sigma)


def l1_norm(q) -> float:
    return math.fsum(np.abs(as_vec(q, "q")))
