"""Sequential single-boson probing: split a total exposure into many short slices.

A total exposure ``total_x = gamma*t`` is divided into ``nu = total_x/slice_x``
slices; each slice sends one boson through the channel for ``slice_x`` and
counts what comes out. Independent slices add their Fisher information.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import channel
from .bounds import damping_bound_zero_T
from .fisher import DistributionFamily, counting_fisher, fock_family, uncertainty_from_fisher
from .fockspace import ChannelParams, NumberDistribution, Parameter, fock_distribution

EXPANSION_LIMIT = 0.05


class ExpansionValidityWarning(UserWarning):
    """The first-order short-time expansion is being used outside its comfort zone."""


@dataclass(frozen=True)
class SequentialSpec:
    total_x: float
    slice_x: float
    n_T: float = 0.0

    def __post_init__(self):
        if not self.total_x > 0:
            raise ValueError(f"total_x must be > 0, got {self.total_x}")
        if not self.slice_x > 0:
            raise ValueError(f"slice_x must be > 0, got {self.slice_x}")
        if self.slice_x > self.total_x * (1 + 1e-12):
            raise ValueError(f"slice_x={self.slice_x} exceeds total_x={self.total_x}")
        if not self.n_T >= 0:
            raise ValueError(f"n_T must be >= 0, got {self.n_T}")

    @property
    def slices(self) -> float:
        return self.total_x / self.slice_x


def sequential_damping_uncertainty(spec: SequentialSpec) -> float:
    """``dgamma/gamma`` from ``nu`` single bosons each exposed for ``slice_x`` (zero temperature)."""
    if spec.n_T != 0:
        raise ValueError("sequential damping estimation is only modeled at n_T = 0")
    # the per-slice limit is relative to gamma already; nu repetitions divide it by sqrt(nu)
    return damping_bound_zero_T(1.0, spec.slice_x) / math.sqrt(spec.slices)


def short_time_single_boson_distribution(slice_x: float, n_T: float) -> NumberDistribution:
    """First-order counting statistics of ``|1>`` after a short slice: outcomes 0, 1, 2."""
    if slice_x < 0 or n_T < 0:
        raise ValueError("slice_x and n_T must be non-negative")
    u = 2.0 * slice_x
    if u * (n_T + 1.0) > EXPANSION_LIMIT:
        warnings.warn(
            f"2*slice_x*(n_T+1) = {u * (n_T + 1):.3g} exceeds {EXPANSION_LIMIT}; "
            "short-time expansion is inaccurate",
            ExpansionValidityWarning,
            stacklevel=2,
        )
    p0 = u * (n_T + 1.0)
    p2 = 2.0 * u * n_T
    p1 = 1.0 - p0 - p2
    if p1 < 0:
        raise ValueError(
            f"short-time expansion invalid at slice_x={slice_x}, n_T={n_T} "
            "(negative probability); use a smaller slice_x"
        )
    return NumberDistribution(np.array([p0, p1, p2]), 0.0)


def short_time_family(slice_x: float) -> DistributionFamily:
    """The three-outcome short-time law as a family in ``n_T``, with its exact derivative."""
    u = 2.0 * slice_x

    def probs(nT):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ExpansionValidityWarning)
            return short_time_single_boson_distribution(slice_x, nT).probs

    return DistributionFamily(
        probs=probs,
        derivative=lambda nT: np.array([u, -3.0 * u, 2.0 * u]),
        parameter=Parameter.THERMAL_OCCUPATION,
        dim=3,
        lower=0.0,
        label="fock:1 short-time",
    )


def sequential_temperature_uncertainty(spec: SequentialSpec, method: str = "expansion") -> float:
    """``dn_T`` from ``nu`` single-boson slices.

    ``method="expansion"`` uses the first-order three-outcome law;
    ``method="exact"`` uses the full single-boson output distribution for
    each slice.
    """
    if not spec.n_T > 0:
        raise ValueError("sequential temperature estimation needs n_T > 0")
    if method == "expansion":
        short_time_single_boson_distribution(spec.slice_x, spec.n_T)  # validity checks
        f = counting_fisher(short_time_family(spec.slice_x), spec.n_T)
    elif method == "exact":
        params = ChannelParams(spec.slice_x, spec.n_T)
        f = counting_fisher(fock_family(1, params, Parameter.THERMAL_OCCUPATION), spec.n_T)
    else:
        raise ValueError(f"unknown method {method!r}; use 'expansion' or 'exact'")
    return uncertainty_from_fisher(f) / math.sqrt(spec.slices)


def sequential_temperature_limit(n_T: float, total_x: float) -> float:
    """Vanishing-slice limit ``sqrt(n_T (n_T+1) / ((3 n_T + 2) * 2 total_x))``."""
    return math.sqrt(n_T * (n_T + 1.0) / ((3.0 * n_T + 2.0) * 2.0 * total_x))


def timing_error_propagation(spec: SequentialSpec, rel_t_error: float) -> float:
    """Extra ``dn_T`` caused by a relative error ``dt/t`` in the total time (first order)."""
    if rel_t_error < 0:
        raise ValueError(f"rel_t_error must be >= 0, got {rel_t_error}")
    # dn_T ~ t^{-1/2}  =>  |d(dn_T)/dt| * dt = dn_T * (dt/t) / 2
    return 0.5 * sequential_temperature_limit(spec.n_T, spec.total_x) * rel_t_error


def ode_single_slice(slice_x: float, n_T: float, dim: int = 16) -> NumberDistribution:
    """Single-boson slice statistics from the birth-death integrator (reference for the expansion)."""
    return channel.ode_evolve(fock_distribution(1, dim), ChannelParams(slice_x, n_T), dim).dist
