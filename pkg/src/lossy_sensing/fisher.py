"""Fisher information of boson counting.

For Fock-diagonal output states the symmetric logarithmic derivative is
diagonal, so the counting Fisher information computed here is also the
quantum Fisher information.

Damping is handled through the dimensionless exposure ``x = gamma*t``:
a Fisher value reported for ``Parameter.GAMMA`` is the information about
``x`` (equivalently about gamma in units of ``1/t``), and ``1/sqrt(F)/x``
is the relative uncertainty ``dgamma/gamma``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import channel
from .fockspace import ChannelParams, InputState, Parameter, thermal_distribution

P_FLOOR = 1e-14
DROPPED_MASS_TOL = 1e-9


class NonIdentifiableError(ValueError):
    """The Fisher information vanishes: the data carry no information on the parameter."""


class DerivativeMethod(enum.Enum):
    ANALYTIC = "analytic"
    CENTRAL_DIFFERENCE = "central_difference"
    ONE_SIDED = "one_sided"


@dataclass(frozen=True)
class Derivative:
    values: np.ndarray
    method: DerivativeMethod
    step: float | None = None


@dataclass(frozen=True)
class DistributionFamily:
    """A one-parameter family ``X -> p(X)`` on a fixed truncation ``dim``.

    ``lower`` is the open lower edge of the valid domain of X.
    """

    probs: Callable[[float], np.ndarray]
    parameter: Parameter
    dim: int
    derivative: Callable[[float], np.ndarray] | None = None
    lower: float = 0.0
    label: str = ""


@dataclass(frozen=True)
class FisherResult:
    value: float
    parameter: Parameter
    derivative_method: DerivativeMethod
    step: float | None
    dim_used: int
    dropped_mass: float
    tail_mass: float = 0.0

    @property
    def reliable(self) -> bool:
        return self.dropped_mass < DROPPED_MASS_TOL


def fd_step(x0: float) -> float:
    return max(1e-5 * abs(x0), 1e-7)


def distribution_derivative(family: DistributionFamily, x0: float, *, force_numeric: bool = False) -> Derivative:
    """``dp_n/dX`` at ``x0``: analytic when the family provides it, otherwise finite differences.

    The numerical path is a central difference refined by one Richardson
    step; near the lower domain edge a one-sided second-order stencil is
    used instead.
    """
    if family.derivative is not None and not force_numeric:
        return Derivative(np.asarray(family.derivative(x0), dtype=float), DerivativeMethod.ANALYTIC)
    h = fd_step(x0)
    f = family.probs
    if x0 - h <= family.lower:
        f0, f1, f2 = f(x0), f(x0 + h), f(x0 + 2 * h)
        return Derivative((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h), DerivativeMethod.ONE_SIDED, h)
    d_h = (f(x0 + h) - f(x0 - h)) / (2.0 * h)
    d_h2 = (f(x0 + h / 2) - f(x0 - h / 2)) / h
    return Derivative((4.0 * d_h2 - d_h) / 3.0, DerivativeMethod.CENTRAL_DIFFERENCE, h)


def counting_fisher(
    family: DistributionFamily,
    x0: float,
    *,
    p_floor: float = P_FLOOR,
    force_numeric: bool = False,
) -> FisherResult:
    """``sum_n (dp_n/dX)**2 / p_n`` over outcomes with ``p_n >= p_floor``."""
    p = np.asarray(family.probs(x0), dtype=float)
    deriv = distribution_derivative(family, x0, force_numeric=force_numeric)
    keep = p >= p_floor
    if not np.any(keep):
        raise NonIdentifiableError(f"every outcome probability is below p_floor={p_floor:g}")
    dp = deriv.values[keep]
    value = math.fsum(dp * dp / p[keep])
    return FisherResult(
        value=value,
        parameter=family.parameter,
        derivative_method=deriv.method,
        step=deriv.step,
        dim_used=family.dim,
        dropped_mass=math.fsum(p[~keep]),
        tail_mass=max(0.0, 1.0 - math.fsum(p)),
    )


def uncertainty_from_fisher(f: FisherResult, repetitions: int = 1) -> float:
    """Cramer-Rao bound ``1/sqrt(repetitions * F)``."""
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    if not f.value > 0:
        raise NonIdentifiableError(
            f"Fisher information for {f.parameter.value} is zero: parameter not identifiable"
        )
    return 1.0 / math.sqrt(repetitions * f.value)


# --- families -----------------------------------------------------------


def _bose_einstein_dmu(mu: float, dim: int) -> np.ndarray:
    n = np.arange(dim, dtype=float)
    if mu == 0:
        out = np.zeros(dim)
        out[0] = -1.0
        if dim > 1:
            out[1] = 1.0
        return out
    p = thermal_distribution(mu, dim).probs
    return p * (n / mu - (n + 1.0) / (1.0 + mu))


def thermal_family(
    mean: float,
    params: ChannelParams,
    parameter: Parameter,
    dim: int | None = None,
    **trunc,
) -> DistributionFamily:
    """Bose-Einstein output of a thermal input with the given mean (vacuum when ``mean = 0``)."""
    if dim is None:
        dim = channel.evolve_thermal_input(mean, params, **trunc).dim_used
    nT0, x0 = params.n_T, params.x

    if parameter is Parameter.GAMMA:

        def mu(x):
            return math.exp(-2 * x) * (mean - nT0) + nT0

        def dmu(x):
            return -2.0 * math.exp(-2 * x) * (mean - nT0)

    else:

        def mu(nT):
            return math.exp(-2 * x0) * (mean - nT) + nT

        def dmu(nT):
            return -math.expm1(-2 * x0)

    return DistributionFamily(
        probs=lambda X: thermal_distribution(mu(X), dim).probs,
        derivative=lambda X: _bose_einstein_dmu(mu(X), dim) * dmu(X),
        parameter=parameter,
        dim=dim,
        label=f"thermal:{mean:g}",
    )


def fock_family(
    m: int,
    params: ChannelParams,
    parameter: Parameter,
    dim: int | None = None,
    **trunc,
) -> DistributionFamily:
    """Output of the Fock input ``|m>`` as a function of x or of n_T."""
    if m == 0 and params.n_T > channel.NT_FLOOR:
        return thermal_family(0.0, params, parameter, dim, **trunc)
    if parameter is Parameter.GAMMA and params.n_T <= channel.NT_FLOOR:
        nT = params.n_T
        if dim is None:
            dim = max(m + 1, trunc.get("min_dim", channel.MIN_DIM))

        def probs(x):
            return channel._binomial(m, ChannelParams(x, nT), dim).probs

        def deriv(x):
            eta, loss = math.exp(-2 * x), -math.expm1(-2 * x)
            p = probs(x)
            n = np.arange(dim, dtype=float)
            dp_deta = np.where(n <= m, p * (n / eta - (m - n) / loss), 0.0)
            return -2.0 * eta * dp_deta

        return DistributionFamily(probs, parameter, dim, deriv, 0.0, f"fock:{m}")

    if dim is None:
        dim = channel.evolve_fock_thermal(m, params, **trunc).dim_used
    if parameter is Parameter.GAMMA:
        nT = params.n_T

        def probs(x):
            return channel.evolve_fock_thermal(m, ChannelParams(x, nT), dim).probs

    else:
        x_fixed = params.x

        def probs(nT):
            return channel.evolve_fock_thermal(m, ChannelParams(x_fixed, nT), dim).probs

    return DistributionFamily(probs, parameter, dim, None, 0.0, f"fock:{m}")


def family_for(state: InputState, params: ChannelParams, parameter: Parameter, dim: int | None = None, **trunc):
    if state.kind == "thermal":
        return thermal_family(state.mean, params, parameter, dim, **trunc)
    return fock_family(int(state.value), params, parameter, dim, **trunc)


def parameter_value(params: ChannelParams, parameter: Parameter) -> float:
    return params.x if parameter is Parameter.GAMMA else params.n_T


def state_fisher(
    state: InputState,
    params: ChannelParams,
    parameter: Parameter,
    *,
    p_floor: float = P_FLOOR,
    **trunc,
) -> FisherResult:
    """Counting (= quantum) Fisher information of ``state`` sent through the channel."""
    family = family_for(state, params, parameter, **trunc)
    return counting_fisher(family, parameter_value(params, parameter), p_floor=p_floor)
