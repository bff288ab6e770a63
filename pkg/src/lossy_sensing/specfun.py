"""Binomial coefficients and terminating 2F1 series in forms that survive large arguments."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

# Below this, ln C(N, n) is summed term by term; lgamma differences lose
# relative accuracy when the result is small compared with lgamma(N).
_DIRECT_SUM_LIMIT = 4000


def log_binomial(N: int, n: int) -> float:
    """Natural log of the binomial coefficient C(N, n)."""
    if N < 0 or n < 0:
        raise ValueError(f"log_binomial needs non-negative arguments, got N={N}, n={n}")
    if n > N:
        raise ValueError(f"log_binomial needs n <= N, got N={N}, n={n}")
    k = min(n, N - n)
    if k == 0:
        return 0.0
    if k <= _DIRECT_SUM_LIMIT:
        # ln prod_{j=1..k} (N-k+j)/j
        return math.fsum(math.log1p((N - k) / j) for j in range(1, k + 1))
    return math.lgamma(N + 1) - math.lgamma(n + 1) - math.lgamma(N - n + 1)


def hypergeom_terminating(n: int, m: int, z: float) -> float:
    """2F1(-n, -m; 1; z) for non-negative integers n, m and z >= 0.

    Every term of the series is non-negative, so the sum is accumulated
    with ``math.fsum`` and carries no cancellation.
    """
    if n < 0 or m < 0:
        raise ValueError(f"n and m must be non-negative integers, got n={n}, m={m}")
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    terms = [1.0]
    term = 1.0
    for k in range(min(n, m)):
        term *= (n - k) * (m - k) / ((k + 1) ** 2) * z
        terms.append(term)
    return math.fsum(terms)


def log_hypergeom_terminating(n, m: int, z: float) -> np.ndarray:
    """Vectorized ``log 2F1(-n, -m; 1; z)`` over an array of ``n``.

    Works in log space so that ``z**k`` cannot overflow when ``z`` is huge
    (very cold baths); the terms are combined with log-sum-exp.
    """
    n = np.asarray(n, dtype=float)
    if m < 0 or np.any(n < 0):
        raise ValueError("n and m must be non-negative")
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    if m == 0 or z == 0:
        return np.zeros_like(n)
    logz = math.log(z)
    log_terms = np.zeros((m + 1,) + n.shape)
    log_terms[1:] = -np.inf
    acc = np.zeros_like(n)
    with np.errstate(divide="ignore"):
        for k in range(m):
            acc = acc + np.log(np.clip(n - k, 0.0, None)) + math.log((m - k) / (k + 1) ** 2) + logz
            log_terms[k + 1] = acc
    return logsumexp(log_terms, axis=0)
