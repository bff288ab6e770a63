"""Fock-diagonal states of a single bosonic mode and the channel parameters."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-10


class Parameter(enum.Enum):
    """The quantity being estimated."""

    GAMMA = "gamma"
    THERMAL_OCCUPATION = "nt"

    @classmethod
    def parse(cls, text: str) -> "Parameter":
        key = text.strip().lower()
        aliases = {
            "gamma": cls.GAMMA,
            "damping": cls.GAMMA,
            "nt": cls.THERMAL_OCCUPATION,
            "n_t": cls.THERMAL_OCCUPATION,
            "temperature": cls.THERMAL_OCCUPATION,
            "thermaloccupation": cls.THERMAL_OCCUPATION,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown parameter {text!r}; expected 'gamma' or 'nt'") from None


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class NumberDistribution:
    """Boson-number probabilities ``probs[n]`` for n < dim, plus the mass at n >= dim.

    The tail is carried rather than renormalized away so truncation error can be
    audited downstream.
    """

    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        probs = _frozen_array(self.probs)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a non-empty 1-D vector")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))
        if not np.all(np.isfinite(probs)):
            raise ValueError("probs contains non-finite entries")
        if np.any(probs < 0):
            raise ValueError(f"negative probability (min {probs.min():.3e})")
        if not self.tail_mass >= 0:
            raise ValueError(f"tail_mass must be >= 0, got {self.tail_mass}")
        total = math.fsum(probs) + self.tail_mass
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"distribution not normalized: sum + tail = {total!r}")

    @property
    def dim(self) -> int:
        return self.probs.size

    def padded(self, dim: int) -> np.ndarray:
        """Probabilities as a length-``dim`` vector; refuses to drop nonzero entries."""
        if dim >= self.dim:
            out = np.zeros(dim)
            out[: self.dim] = self.probs
            return out
        if np.any(self.probs[dim:] > 0):
            raise ValueError(f"cannot truncate distribution with support beyond dim={dim}")
        return np.array(self.probs[:dim])


def fock_distribution(m: int, dim: int) -> NumberDistribution:
    if m < 0:
        raise ValueError(f"Fock occupation must be >= 0, got {m}")
    if dim <= m:
        raise ValueError(f"dim={dim} too small to hold Fock state |{m}>; need dim > {m}")
    probs = np.zeros(dim)
    probs[m] = 1.0
    return NumberDistribution(probs, 0.0)


def thermal_distribution(mean: float, dim: int) -> NumberDistribution:
    """Bose-Einstein law ``mean**n / (1+mean)**(n+1)`` with its exact geometric tail."""
    if not mean >= 0 or not math.isfinite(mean):
        raise ValueError(f"thermal mean must be finite and >= 0, got {mean}")
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    if mean == 0:
        return fock_distribution(0, dim)
    ratio = mean / (1.0 + mean)
    n = np.arange(dim)
    probs = np.exp(n * math.log(ratio)) / (1.0 + mean)
    return NumberDistribution(probs, ratio**dim)


def mean_and_second_moment(d: NumberDistribution) -> tuple[float, float]:
    """First and second moments of the retained entries (``d.tail_mass`` is ignored)."""
    n = np.arange(d.dim, dtype=float)
    return math.fsum(n * d.probs), math.fsum(n * n * d.probs)


@dataclass(frozen=True)
class InputState:
    """A Fock-diagonal probe state: ``fock`` (value = m), ``thermal`` (value = mean) or ``vacuum``."""

    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fock", "thermal", "vacuum"):
            raise ValueError(f"unknown input kind {self.kind!r}")
        if self.kind == "fock":
            if self.value < 0 or int(self.value) != self.value:
                raise ValueError(f"Fock occupation must be a non-negative integer, got {self.value}")
            object.__setattr__(self, "value", int(self.value))
        elif self.kind == "thermal":
            if not (math.isfinite(self.value) and self.value >= 0):
                raise ValueError(f"thermal mean must be finite and >= 0, got {self.value}")
            object.__setattr__(self, "value", float(self.value))
        else:
            object.__setattr__(self, "value", 0)

    @classmethod
    def fock(cls, m: int) -> "InputState":
        return cls("fock", m)

    @classmethod
    def thermal(cls, mean: float) -> "InputState":
        return cls("thermal", mean)

    @classmethod
    def vacuum(cls) -> "InputState":
        return cls("vacuum")

    @classmethod
    def parse(cls, text: str) -> "InputState":
        """Parse ``fock:m``, ``thermal:mean`` or ``vacuum``."""
        kind, _, arg = text.strip().lower().partition(":")
        if kind == "vacuum" and not arg:
            return cls.vacuum()
        if kind == "fock" and arg:
            return cls.fock(int(arg))
        if kind == "thermal" and arg:
            return cls.thermal(float(arg))
        raise ValueError(f"cannot parse input state {text!r}; use fock:m, thermal:mean or vacuum")

    @property
    def is_number_state(self) -> bool:
        return self.kind in ("fock", "vacuum")

    @property
    def mean(self) -> float:
        return float(self.value)

    @property
    def variance(self) -> float:
        if self.kind == "thermal":
            return self.value * (self.value + 1.0)
        return 0.0

    def distribution(self, dim: int) -> NumberDistribution:
        if self.kind == "thermal":
            return thermal_distribution(self.value, dim)
        return fock_distribution(int(self.value), dim)

    def label(self) -> str:
        if self.kind == "vacuum":
            return "vacuum"
        if self.kind == "fock":
            return f"fock:{self.value}"
        return f"thermal:{self.value:g}"


@dataclass(frozen=True)
class ChannelParams:
    """Dimensionless damping exposure ``x = gamma*t`` and bath occupation ``n_T``.

    ``x = 0`` is allowed and describes the identity channel.
    """

    x: float
    n_T: float = 0.0
    _eta: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.x) and self.x >= 0):
            raise ValueError(f"damping exposure x must be finite and >= 0, got {self.x}")
        if not (math.isfinite(self.n_T) and self.n_T >= 0):
            raise ValueError(f"thermal occupation n_T must be finite and >= 0, got {self.n_T}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "n_T", float(self.n_T))
        object.__setattr__(self, "_eta", math.exp(-2.0 * self.x))

    @classmethod
    def from_eta(cls, eta: float, n_T: float = 0.0) -> "ChannelParams":
        if not 0 < eta <= 1:
            raise ValueError(f"transmissivity eta must lie in (0, 1], got {eta}")
        return cls(-0.5 * math.log(eta), n_T)

    def eta(self) -> float:
        return self._eta

    def one_minus_eta(self) -> float:
        """``1 - eta`` without cancellation at small x."""
        return -math.expm1(-2.0 * self.x)

    def replace(self, *, x: float | None = None, n_T: float | None = None) -> "ChannelParams":
        return ChannelParams(self.x if x is None else x, self.n_T if n_T is None else n_T)
