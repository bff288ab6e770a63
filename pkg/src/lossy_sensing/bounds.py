"""Closed-form precision limits for damping and temperature estimation.

Damping results are relative uncertainties ``dgamma/gamma`` and depend on
gamma and t only through ``x = gamma*t``. Temperature results are absolute
uncertainties on ``n_T``.

Purification bounds come from dilating the channel into a beam splitter
(angle theta1) followed by a two-mode squeezer (strength theta2), with
``cos^2 theta1 = eta/A`` and ``cosh^2 theta2 = A`` where
``A = 1 + n_T (1 - eta)``. For a probe with mean boson number N the
purified quantum Fisher information is::

    4 * ( N * (theta1'^2 + cos^2 theta1 * theta2'^2) + theta2'^2 )

Divergent cases are returned as :class:`Divergent` (an infinite float that
remembers why) rather than raised, so sweeps can leave gaps.
"""

from __future__ import annotations

import math

from .channel import moments
from .fockspace import ChannelParams, Parameter


class Divergent(float):
    """``+inf`` tagged with the reason the uncertainty diverges."""

    reason: str

    def __new__(cls, reason: str):
        obj = super().__new__(cls, math.inf)
        obj.reason = reason
        return obj

    def __repr__(self) -> str:
        return f"Divergent({self.reason!r})"

    def __reduce__(self):
        return (Divergent, (self.reason,))


def is_divergent(value) -> bool:
    return isinstance(value, Divergent) or not math.isfinite(value)


def _check_mean(N_in: float) -> None:
    if not (math.isfinite(N_in) and N_in >= 0):
        raise ValueError(f"input mean boson number must be finite and >= 0, got {N_in}")


def damping_bound_zero_T(N_in: float, x: float) -> float:
    """Zero-temperature purification limit on ``dgamma/gamma``."""
    _check_mean(N_in)
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if N_in == 0:
        return Divergent("no input bosons at zero temperature")
    if x == 0:
        return Divergent("no action of the damping (x = 0)")
    try:
        value = math.sqrt(math.expm1(2.0 * x)) / (2.0 * x * math.sqrt(N_in))
    except OverflowError:
        return Divergent("complete absorption")
    if not math.isfinite(value):
        return Divergent("complete absorption")
    return value


def damping_bound_finite_T(N_in: float, params: ChannelParams) -> float:
    """Purification limit on ``dgamma/gamma`` in a bath with occupation ``n_T``."""
    _check_mean(N_in)
    x, nT = params.x, params.n_T
    if N_in == 0 and nT == 0:
        return Divergent("no information: no input bosons and zero temperature")
    if x == 0:
        return Divergent("no action of the damping (x = 0)")
    eta, loss = params.eta(), params.one_minus_eta()
    A = 1.0 + nT * loss
    info = N_in * (1.0 + nT * (1.0 + eta * eta)) + eta * A * nT
    try:
        value = A * math.sqrt(math.expm1(2.0 * x)) / (2.0 * x) / math.sqrt(info)
    except (OverflowError, ZeroDivisionError):
        return Divergent("complete absorption")
    if not math.isfinite(value):
        return Divergent("complete absorption")
    return value


def purification_ratio(N_in: float, params: ChannelParams) -> float:
    """Closed form of ``damping_bound_finite_T / damping_bound_zero_T`` (N_in > 0)."""
    if not N_in > 0:
        raise ValueError("the ratio needs N_in > 0")
    eta, nT = params.eta(), params.n_T
    A = 1.0 + nT * params.one_minus_eta()
    return A / math.sqrt(1.0 + nT * (1.0 + eta * eta) + (nT / N_in) * eta * A)


def generator_qfi(parameter: Parameter, N_in: float, params: ChannelParams) -> float:
    """Purified QFI ``4<G^dag G>`` from the derivatives of the two dilation angles.

    For ``Parameter.GAMMA`` the derivative is taken with respect to x.
    """
    _check_mean(N_in)
    eta, loss, nT = params.eta(), params.one_minus_eta(), params.n_T
    A = 1.0 + nT * loss
    c = eta / A  # cos^2 theta1
    if parameter is Parameter.GAMMA:
        deta, dnT = -2.0 * eta, 0.0
    else:
        deta, dnT = 0.0, 1.0
    dA = dnT * loss - nT * deta
    dc = (deta * A - eta * dA) / (A * A)
    # d(cos^2)/dX = -sin(2 theta1) theta1'  ->  theta1'^2 = dc^2 / (4 c (1-c))
    one_minus_c = (A - eta) / A
    th1_sq = dc * dc / (4.0 * c * one_minus_c) if one_minus_c > 0 else 0.0
    # d(cosh^2)/dX = sinh(2 theta2) theta2'  ->  theta2'^2 = dA^2 / (4 A (A-1))
    if parameter is Parameter.GAMMA:
        # dA = 2 eta n_T and A - 1 = n_T (1-eta); cancel n_T to stay finite at n_T = 0
        th2_sq = eta * eta * nT / (A * loss) if loss > 0 else math.inf
    else:
        th2_sq = dA * dA / (4.0 * A * (A - 1.0)) if nT > 0 else math.inf
    return 4.0 * (N_in * (th1_sq + c * th2_sq) + th2_sq)


def temperature_bound(N_in: float, params: ChannelParams) -> float:
    """Purification limit on the absolute uncertainty of ``n_T``."""
    _check_mean(N_in)
    nT, x = params.n_T, params.x
    if nT == 0:
        return Divergent("zero temperature is a boundary of the n_T domain")
    if x == 0:
        return Divergent("no interaction with the bath (x = 0)")
    eta, loss = params.eta(), params.one_minus_eta()
    A = 1.0 + nT * loss
    info = loss * (A * (1.0 + nT) + N_in * eta * (1.0 + 2.0 * nT))
    return A * math.sqrt(nT * (1.0 + nT) / info)


def vacuum_temperature_uncertainty(params: ChannelParams) -> float:
    """``sqrt(n_T (n_T + 1/(1-eta)))``, the vacuum-probe limit (exact for counting)."""
    if params.n_T == 0:
        return Divergent("zero temperature is a boundary of the n_T domain")
    if params.x == 0:
        return Divergent("no interaction with the bath (x = 0)")
    nT = params.n_T
    return math.sqrt(nT * (nT + 1.0 / params.one_minus_eta()))


def steady_state_temperature_uncertainty(n_T: float) -> float:
    """Thermal-field number fluctuation ``sqrt(n_T (n_T + 1))`` reached as t -> infinity."""
    return math.sqrt(n_T * (n_T + 1.0))


def damping_sensitivity(N_in: float, var_in: float, params: ChannelParams) -> float:
    """Error-propagation estimate of ``dgamma/gamma`` from the mean boson count."""
    _check_mean(N_in)
    if var_in < 0:
        raise ValueError(f"input variance must be >= 0, got {var_in}")
    x, nT = params.x, params.n_T
    if x == 0:
        return Divergent("no action of the damping (x = 0)")
    if N_in == nT:
        return Divergent("output boson number independent of gamma (N_in = n_T)")
    eta, loss = params.eta(), params.one_minus_eta()
    var_out = eta * eta * var_in + eta * (2.0 * nT + 1.0) * loss * N_in + (nT + 1.0 - eta * nT) * nT * loss
    slope = 2.0 * x * eta * abs(N_in - nT)
    if slope == 0:
        return Divergent("complete absorption")
    return math.sqrt(var_out) / slope


def error_propagation(parameter: Parameter, N_in: float, var_in: float, params: ChannelParams) -> float:
    """``std(N_out) / |d<N_out>/dX|`` built from the closed-form output moments.

    Gamma results are relative (``dgamma/gamma``); n_T results absolute.
    """
    mean, second = moments(N_in, var_in + N_in * N_in, params)
    var_out = max(second - mean * mean, 0.0)
    eta = params.eta()
    if parameter is Parameter.GAMMA:
        if params.x == 0:
            return Divergent("no action of the damping (x = 0)")
        slope = abs(2.0 * eta * (N_in - params.n_T)) * params.x
        if slope == 0:
            return Divergent("output boson number independent of gamma (N_in = n_T)")
    else:
        slope = params.one_minus_eta()
        if slope == 0:
            return Divergent("no interaction with the bath (x = 0)")
        if params.n_T == 0 and var_out == 0:
            return Divergent("zero temperature is a boundary of the n_T domain")
    return math.sqrt(var_out) / slope


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_minimize(f, a: float, b: float, tol: float = 1e-8, max_iter: int = 200) -> float:
    """Abscissa of the minimum of a unimodal ``f`` on ``[a, b]``, to within ``tol``."""
    a, b = min(a, b), max(a, b)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def optimal_interaction_time(N_in: float = 1.0) -> tuple[float, float]:
    """Exposure ``x = gamma*t`` minimizing the zero-temperature bound, and the bound there."""
    if not N_in > 0:
        raise ValueError(f"N_in must be > 0, got {N_in}")
    x_opt = golden_section_minimize(lambda x: damping_bound_zero_T(1.0, x), 0.01, 5.0, 1e-8)
    return x_opt, damping_bound_zero_T(N_in, x_opt)
