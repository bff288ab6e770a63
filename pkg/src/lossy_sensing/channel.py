"""Boson-number statistics after the lossy thermal channel.

Three independent routes are provided and are expected to agree:

* closed-form output distributions (binomial at zero temperature, the
  hypergeometric law for Fock inputs in a thermal bath, Bose-Einstein for
  thermal inputs),
* direct integration of the birth-death equations for ``p_n``,
* closed-form first and second moments.

Time is measured by ``s = 2*gamma*t = 2x`` so that ``eta = exp(-s)``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from .fockspace import (
    ChannelParams,
    InputState,
    NumberDistribution,
    thermal_distribution,
)
from .specfun import log_hypergeom_terminating

log = logging.getLogger(__name__)

NT_FLOOR = 1e-8
TAIL_TOL = 1e-12
MIN_DIM = 16
MAX_DIM = 1 << 16
ODE_DRIFT_TOL = 1e-8


class NormalizationError(RuntimeError):
    """A truncated distribution lost (or gained) more mass than allowed."""


class Method(enum.Enum):
    ANALYTIC_BINOMIAL = "analytic_binomial"
    ANALYTIC_S20 = "analytic_hypergeometric"
    ANALYTIC_BOSE_EINSTEIN = "analytic_bose_einstein"
    ODE_ORACLE = "ode_oracle"


@dataclass(frozen=True)
class EvolutionResult:
    dist: NumberDistribution
    params: ChannelParams
    method: Method
    dim_used: int

    @property
    def probs(self) -> np.ndarray:
        return self.dist.probs


def initial_dim(m: float, params: ChannelParams, min_dim: int = MIN_DIM) -> int:
    """Starting truncation for an output whose mean is about ``m + n_T(1-eta)``."""
    guess = 4.0 * (m + params.n_T * params.one_minus_eta()) + 10.0
    return max(min_dim, int(math.ceil(guess)))


def _adaptive(build, start: int, tail_tol: float):
    dim = start
    while True:
        result = build(dim)
        if result.dist.tail_mass < tail_tol:
            return result
        if dim >= MAX_DIM:
            raise NormalizationError(
                f"tail mass {result.dist.tail_mass:.3e} still above {tail_tol:g} at dim={dim}"
            )
        dim *= 2


def evolve_fock_zero_T(m: int, params: ChannelParams, dim: int | None = None) -> EvolutionResult:
    """Zero-temperature loss of ``|m>``: binomial thinning with survival probability eta."""
    if params.n_T != 0:
        raise ValueError(f"evolve_fock_zero_T needs n_T = 0 (got {params.n_T}); use evolve_fock_thermal")
    return _binomial(m, params, dim)


def _binomial(m: int, params: ChannelParams, dim: int | None) -> EvolutionResult:
    if m < 0:
        raise ValueError(f"Fock occupation must be >= 0, got {m}")
    dim = max(m + 1, MIN_DIM) if dim is None else dim
    if dim <= m:
        raise ValueError(f"dim={dim} must exceed m={m}")
    eta, loss = params.eta(), params.one_minus_eta()
    n = np.arange(m + 1, dtype=float)
    logc = gammaln(m + 1) - gammaln(n + 1) - gammaln(m - n + 1)
    probs = np.zeros(dim)
    probs[: m + 1] = np.exp(logc + xlogy(m - n, loss) + xlogy(n, eta))
    # lgamma round-off can leave the sum a few ulps away from one
    probs /= math.fsum(probs)
    return EvolutionResult(NumberDistribution(probs, 0.0), params, Method.ANALYTIC_BINOMIAL, dim)


def _hypergeometric_probs(m: int, params: ChannelParams, dim: int) -> np.ndarray:
    nT = params.n_T
    loss = params.one_minus_eta()
    eta = params.eta()
    n = np.arange(dim, dtype=float)
    # e^{beta omega} = 1 + 1/n_T
    log_e = math.log1p(1.0 / nT)
    log_e_minus_1 = -math.log(nT)
    log_e_minus_eta = math.log(loss + 1.0 / nT)
    z = eta / (nT * (nT + 1.0) * loss * loss)
    logp = (
        (n + m) * math.log(loss)
        + log_e_minus_1
        + m * log_e
        - (n + m + 1) * log_e_minus_eta
        + log_hypergeom_terminating(n, m, z)
    )
    return np.exp(logp)


def evolve_fock_thermal(
    m: int,
    params: ChannelParams,
    dim: int | None = None,
    *,
    tail_tol: float = TAIL_TOL,
    min_dim: int = MIN_DIM,
) -> EvolutionResult:
    """Output statistics of ``|m>`` after a thermal bath, from the closed-form hypergeometric law.

    With ``dim=None`` the truncation doubles until the tail mass is below
    ``tail_tol``. For ``n_T <= NT_FLOOR`` the closed form is singular and the
    binomial law is returned instead.
    """
    if m < 0:
        raise ValueError(f"Fock occupation must be >= 0, got {m}")
    if params.n_T <= NT_FLOOR:
        return _binomial(m, params, dim)
    if params.x == 0:
        return _binomial(m, params, dim)

    def build(d: int) -> EvolutionResult:
        if d <= m:
            raise ValueError(f"dim={d} must exceed m={m}")
        probs = _hypergeometric_probs(m, params, d)
        tail = 1.0 - math.fsum(probs)
        if tail < -ODE_DRIFT_TOL:
            raise NormalizationError(
                f"hypergeometric distribution sums to {1 - tail!r} for m={m}, "
                f"x={params.x}, n_T={params.n_T}, dim={d}"
            )
        if tail < 0:
            if tail < -1e-10:
                log.warning("clamping negative tail mass %.3e (m=%d, %s)", tail, m, params)
            probs = probs / (1.0 - tail)
            tail = 0.0
        return EvolutionResult(NumberDistribution(probs, tail), params, Method.ANALYTIC_S20, d)

    if dim is not None:
        return build(dim)
    return _adaptive(build, initial_dim(m, params, min_dim), tail_tol)


def evolve_thermal_input(
    mean: float,
    params: ChannelParams,
    dim: int | None = None,
    *,
    tail_tol: float = TAIL_TOL,
    min_dim: int = MIN_DIM,
) -> EvolutionResult:
    """A thermal input stays thermal; its mean relaxes towards ``n_T``."""
    if mean < 0:
        raise ValueError(f"thermal mean must be >= 0, got {mean}")
    out_mean = output_mean(mean, params)

    def build(d: int) -> EvolutionResult:
        return EvolutionResult(
            thermal_distribution(out_mean, d), params, Method.ANALYTIC_BOSE_EINSTEIN, d
        )

    if dim is not None:
        return build(dim)
    return _adaptive(build, initial_dim(out_mean, params.replace(n_T=0.0), min_dim), tail_tol)


def evolve(state: InputState, params: ChannelParams, dim: int | None = None, **kw) -> EvolutionResult:
    """Route an input state to the appropriate closed-form evolution."""
    if state.kind == "thermal":
        return evolve_thermal_input(state.mean, params, dim, **kw)
    m = int(state.value)
    if m == 0 and params.n_T > NT_FLOOR:
        return evolve_thermal_input(0.0, params, dim, **kw)
    if params.n_T <= NT_FLOOR:
        return _binomial(m, params, dim)
    return evolve_fock_thermal(m, params, dim, **kw)


def ode_step_size(params: ChannelParams, dim: int) -> float:
    return min(1e-3, 0.1 / (1.0 + params.n_T) / dim)


def _birth_death_generator(dim: int, n_T: float, extra_axes: int):
    """Return ``f(p) = dp/ds`` for the truncated birth-death chain (p_{-1} = p_{dim} = 0)."""
    n = np.arange(dim, dtype=float).reshape((-1,) + (1,) * extra_axes)
    diag = -((1.0 + n_T) * n + n_T * (n + 1.0))
    down = (1.0 + n_T) * n[1:]  # n+1 -> n
    up = n_T * n[1:]  # n-1 -> n

    def rhs(p: np.ndarray) -> np.ndarray:
        dp = diag * p
        dp[:-1] += down * p[1:]
        dp[1:] += up * p[:-1]
        return dp

    return rhs


def integrate_birth_death(p0: np.ndarray, params: ChannelParams, dim: int) -> np.ndarray:
    """Classical RK4 on the truncated birth-death equations, fixed step, from s=0 to s=2x.

    ``p0`` may carry extra trailing axes to evolve several distributions at once.
    """
    p = np.array(p0, dtype=float)
    if p.shape[0] != dim:
        raise ValueError(f"initial vector has {p.shape[0]} entries, expected dim={dim}")
    s_end = 2.0 * params.x
    if s_end == 0:
        return p
    steps = int(math.ceil(s_end / ode_step_size(params, dim)))
    h = s_end / steps
    f = _birth_death_generator(dim, params.n_T, p.ndim - 1)
    for _ in range(steps):
        k1 = f(p)
        k2 = f(p + 0.5 * h * k1)
        k3 = f(p + 0.5 * h * k2)
        k4 = f(p + h * k3)
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return p


def ode_evolve(
    initial: NumberDistribution,
    params: ChannelParams,
    dim: int | None = None,
    *,
    tail_tol: float = TAIL_TOL,
) -> EvolutionResult:
    """Evolve ``initial`` by integrating the birth-death equations directly.

    Probability that reaches the top of the box leaks out (absorbing
    truncation) and is booked as tail mass. With an explicit ``dim`` more
    than ``ODE_DRIFT_TOL`` of leakage is an error; with ``dim=None`` the box
    doubles until the leakage is below ``tail_tol``.
    """
    if dim is None:
        mean = float(np.dot(np.arange(initial.dim), initial.probs))
        dim = max(initial.dim, initial_dim(mean, params))
        while True:
            result = _ode_run(initial, params, dim, drift_tol=math.inf)
            if result.dist.tail_mass - initial.tail_mass < tail_tol or dim >= MAX_DIM:
                return _ode_run(initial, params, dim) if dim >= MAX_DIM else result
            dim *= 2
    return _ode_run(initial, params, dim)


def _ode_run(initial: NumberDistribution, params: ChannelParams, dim: int, drift_tol: float = ODE_DRIFT_TOL):
    p = integrate_birth_death(initial.padded(dim), params, dim)
    drift = (1.0 - initial.tail_mass) - math.fsum(p)
    if abs(drift) > drift_tol:
        raise NormalizationError(
            f"birth-death integration lost {drift:.3e} of probability at dim={dim} "
            f"(x={params.x}, n_T={params.n_T}); increase dim or reduce the step"
        )
    p = np.clip(p, 0.0, None)
    total = math.fsum(p)
    if total > 1.0:
        p = p / total
        total = 1.0
    return EvolutionResult(NumberDistribution(p, 1.0 - total), params, Method.ODE_ORACLE, dim)


def output_mean(mean_in: float, params: ChannelParams) -> float:
    return params.eta() * (mean_in - params.n_T) + params.n_T


def moments(initial_mean: float, initial_second_moment: float, params: ChannelParams) -> tuple[float, float]:
    """Closed-form ``(<n>, <n^2>)`` after the channel, for any input with the given moments."""
    if initial_second_moment < initial_mean**2 - 1e-12 * max(1.0, initial_mean**2):
        raise ValueError("second moment must be at least the squared mean")
    eta, loss, nT = params.eta(), params.one_minus_eta(), params.n_T
    mean = eta * (initial_mean - nT) + nT
    second = (
        eta * eta * initial_second_moment
        + eta * (4.0 * nT + 1.0) * loss * initial_mean
        + 2.0 * nT * nT * loss * loss
        + nT * loss
    )
    return mean, second
