"""Point reports and parameter sweeps over the channel, as plain tabular data."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import bounds, fisher, sequential
from .bounds import Divergent
from .fockspace import ChannelParams, InputState, Parameter

QUANTITIES = (
    "exact_counting",
    "purification_bound",
    "sensitivity",
    "sequential",
    "steady_state_normalized",
)
AXES = ("nt", "eta", "slice_x")
STATIONARY_TOL = 1e-12


@dataclass(frozen=True)
class Settings:
    tail_tol: float = 1e-12
    p_floor: float = fisher.P_FLOOR
    min_dim: int = 16
    sequential_method: str = "expansion"

    def trunc(self) -> dict:
        return {"tail_tol": self.tail_tol, "min_dim": self.min_dim}


@dataclass(frozen=True)
class BoundReport:
    """Every applicable uncertainty for one parameter at one channel point.

    Damping values are relative (``dgamma/gamma``); temperature values are
    absolute. Absent quantities are ``None``; divergent ones are
    :class:`~lossy_sensing.bounds.Divergent`.
    """

    parameter: Parameter
    params: ChannelParams
    input: InputState
    purification_bound: float
    sensitivity_bound: float | None = None
    exact_counting: float | None = None
    sequential: float | None = None
    slice_x: float | None = None
    dim_used: int | None = None
    dropped_mass: float = 0.0
    derivative_method: str | None = None
    flags: tuple[str, ...] = ()

    @property
    def reliable(self) -> bool:
        return self.dropped_mass < fisher.DROPPED_MASS_TOL

    def ordering_violations(self, slack: float = 1e-9) -> list[str]:
        """Broken orderings among the present values (empty when all hold)."""
        out = []
        pb = self.purification_bound
        for name in ("sensitivity_bound", "exact_counting"):
            other = getattr(self, name)
            if other is None or bounds.is_divergent(pb):
                continue
            if self.parameter is Parameter.THERMAL_OCCUPATION and name == "sensitivity_bound":
                continue
            if pb > other * (1 + slack) + slack:
                out.append(f"purification_bound {pb!r} > {name} {other!r}")
        return out

    def quantities(self) -> dict:
        q = {
            "purification_bound": self.purification_bound,
            "sensitivity": self.sensitivity_bound,
            "exact_counting": self.exact_counting,
        }
        if self.parameter is Parameter.THERMAL_OCCUPATION and self.exact_counting is not None:
            q["steady_state_normalized"] = steady_state_normalized(self.exact_counting, self.params.n_T)
        if self.sequential is not None:
            q["sequential"] = self.sequential
        return q

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter.value,
            "units": "relative (dgamma/gamma)" if self.parameter is Parameter.GAMMA else "absolute (dn_T)",
            "params": {"x": self.params.x, "eta": self.params.eta(), "n_T": self.params.n_T},
            "input": self.input.label(),
            "slice_x": self.slice_x,
            "quantities": {k: tagged(v) for k, v in self.quantities().items()},
            "truncation": {
                "dim": self.dim_used,
                "dropped_mass": self.dropped_mass,
                "derivative_method": self.derivative_method,
                "reliable": self.reliable,
            },
            "flags": list(self.flags),
        }


def tagged(value) -> dict:
    """JSON form of a value: ``{"value": v, "reason": None}`` or a tagged null."""
    if value is None:
        return {"value": None, "reason": "not computed"}
    if bounds.is_divergent(value):
        return {"value": None, "reason": getattr(value, "reason", "divergent")}
    return {"value": _round12(value), "reason": None}


def _round12(v: float) -> float:
    return float(f"{v:.12g}")


def steady_state_normalized(value: float, n_T: float) -> float:
    if bounds.is_divergent(value):
        return value
    if n_T == 0:
        return Divergent("steady-state uncertainty vanishes at n_T = 0")
    return value / bounds.steady_state_temperature_uncertainty(n_T)


def exact_counting(
    parameter: Parameter, params: ChannelParams, state: InputState, settings: Settings = Settings()
) -> tuple[float, fisher.FisherResult | None]:
    """Counting-limited uncertainty, or a :class:`Divergent` with the reason it has none."""
    if params.x == 0:
        return Divergent("no interaction with the bath (x = 0)"), None
    if parameter is Parameter.GAMMA:
        if state.kind == "thermal" and abs(state.mean - params.n_T) <= STATIONARY_TOL * max(1.0, params.n_T):
            return Divergent("stationary input"), None
        if state.mean == 0 and params.n_T == 0:
            return Divergent("no information: vacuum input at zero temperature"), None
    elif params.n_T == 0:
        return Divergent("zero temperature is a boundary of the n_T domain"), None
    try:
        f = fisher.state_fisher(state, params, parameter, p_floor=settings.p_floor, **settings.trunc())
        delta = fisher.uncertainty_from_fisher(f)
    except fisher.NonIdentifiableError:
        return Divergent("Fisher information is zero"), None
    if parameter is Parameter.GAMMA:
        delta /= params.x
    return delta, f


def point_report(
    parameter: Parameter,
    params: ChannelParams,
    state: InputState,
    *,
    slice_x: float | None = None,
    settings: Settings = Settings(),
) -> BoundReport:
    N, var = state.mean, state.variance
    flags = []
    if parameter is Parameter.GAMMA:
        pb = bounds.damping_bound_finite_T(N, params)
        sens = bounds.damping_sensitivity(N, var, params)
    else:
        pb = bounds.temperature_bound(N, params)
        sens = bounds.error_propagation(parameter, N, var, params)
    exact, f = exact_counting(parameter, params, state, settings)
    seq = None
    if slice_x is not None:
        seq = sequential_value(parameter, params, slice_x, settings, flags)
    if f is not None and not f.reliable:
        flags.append("unreliable")
    return BoundReport(
        parameter=parameter,
        params=params,
        input=state,
        purification_bound=pb,
        sensitivity_bound=sens,
        exact_counting=exact,
        sequential=seq,
        slice_x=slice_x,
        dim_used=None if f is None else f.dim_used,
        dropped_mass=0.0 if f is None else f.dropped_mass,
        derivative_method=None if f is None else f.derivative_method.value,
        flags=tuple(flags),
    )


def sequential_value(parameter, params: ChannelParams, slice_x: float, settings: Settings, flags: list) -> float:
    if params.x == 0:
        return Divergent("no interaction with the bath (x = 0)")
    if slice_x > params.x:
        return Divergent("slice longer than the total exposure")
    spec = sequential.SequentialSpec(params.x, slice_x, params.n_T)
    if parameter is Parameter.GAMMA:
        if params.n_T != 0:
            return Divergent("sequential damping is modeled at n_T = 0 only")
        return sequential.sequential_damping_uncertainty(spec)
    if params.n_T == 0:
        return Divergent("zero temperature is a boundary of the n_T domain")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", sequential.ExpansionValidityWarning)
        try:
            value = sequential.sequential_temperature_uncertainty(spec, settings.sequential_method)
        except ValueError as exc:
            return Divergent(f"short-time expansion invalid: {exc}")
    if any(issubclass(w.category, sequential.ExpansionValidityWarning) for w in caught):
        flags.append("expansion_warning")
    return value


# --- sweeps -------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    parameter: Parameter
    axis: str
    start: float
    stop: float
    points: int
    input: InputState
    quantities: tuple[str, ...]
    eta: float | None = None
    n_T: float | None = None
    slice_x: float | None = None
    label: str = ""

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis: unknown axis {self.axis!r}; choose from {', '.join(AXES)}")
        if not self.start < self.stop:
            raise ValueError(f"range: start ({self.start}) must be below stop ({self.stop})")
        if self.points < 2:
            raise ValueError(f"range: need at least 2 points, got {self.points}")
        if not self.quantities:
            raise ValueError("quantities: at least one quantity is required")
        for q in self.quantities:
            if q not in QUANTITIES:
                raise ValueError(f"quantities: unknown quantity {q!r}; choose from {', '.join(QUANTITIES)}")
        if "steady_state_normalized" in self.quantities and self.parameter is not Parameter.THERMAL_OCCUPATION:
            raise ValueError("quantities: steady_state_normalized applies to parameter nt only")
        fixed = {"nt": self.n_T, "eta": self.eta, "slice_x": self.slice_x}
        if fixed[self.axis] is not None:
            raise ValueError(f"{self.axis}: the axis variable must not also be fixed")
        if self.axis != "eta" and self.eta is None:
            raise ValueError("eta: a fixed eta is required unless eta is the axis")
        if self.axis != "nt" and self.n_T is None:
            raise ValueError("nt: a fixed n_T is required unless n_T is the axis")
        if "sequential" in self.quantities and self.axis != "slice_x" and self.slice_x is None:
            raise ValueError("slice_x: the sequential quantity needs a fixed slice_x")
        if self.axis == "eta" and not (0 < self.start and self.stop <= 1):
            raise ValueError("range: eta must lie in (0, 1]")
        if self.axis == "slice_x" and not self.start > 0:
            raise ValueError("range: slice_x must be positive")
        if self.axis == "nt" and self.start < 0:
            raise ValueError("range: n_T must be non-negative")

    def grid(self) -> np.ndarray:
        # rounding keeps nominal grid values (e.g. n_T = 1) exact
        raw = np.linspace(self.start, self.stop, self.points)
        return np.array([_round12(v) for v in raw])

    def series_label(self) -> str:
        if self.label:
            return self.label
        parts = [self.input.label()]
        if self.eta is not None:
            parts.append(f"eta={self.eta:g}")
        if self.n_T is not None:
            parts.append(f"nt={self.n_T:g}")
        if self.slice_x is not None:
            parts.append(f"slice_x={self.slice_x:g}")
        return " ".join(parts)

    def point(self, v: float) -> tuple[ChannelParams, float | None]:
        eta = v if self.axis == "eta" else self.eta
        n_T = v if self.axis == "nt" else self.n_T
        slice_x = v if self.axis == "slice_x" else self.slice_x
        return ChannelParams.from_eta(eta, n_T), slice_x

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter.value,
            "axis": self.axis,
            "range": [self.start, self.stop, self.points],
            "input": self.input.label(),
            "quantities": list(self.quantities),
            "eta": self.eta,
            "nt": self.n_T,
            "slice_x": self.slice_x,
            "label": self.series_label(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        start, stop, points = d["range"]
        eta = d.get("eta")
        if "x" in d:
            if eta is not None:
                raise ValueError("give either eta or x, not both")
            eta = math.exp(-2.0 * float(d["x"]))
        return cls(
            parameter=Parameter.parse(d["parameter"]),
            axis=d["axis"],
            start=float(start),
            stop=float(stop),
            points=int(points),
            input=InputState.parse(d["input"]),
            quantities=tuple(d["quantities"]),
            eta=eta,
            n_T=d.get("nt"),
            slice_x=d.get("slice_x"),
            label=d.get("label", ""),
        )


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _row_for(spec: SweepSpec, v: float, settings: Settings) -> list:
    params, slice_x = spec.point(v)
    rep = point_report(
        spec.parameter,
        params,
        spec.input,
        slice_x=slice_x if "sequential" in spec.quantities else None,
        settings=settings,
    )
    qs = rep.quantities()
    values, flags = [], list(rep.flags)
    for q in spec.quantities:
        val = qs.get(q)
        if val is not None and bounds.is_divergent(val):
            flags.append(f"{q}:divergent({getattr(val, 'reason', 'divergent')})")
            val = None
        values.append(val)
    return [spec.series_label(), v, *values, rep.dim_used, rep.dropped_mass, ";".join(flags)]


def run_sweep(spec: SweepSpec, settings: Settings = Settings()) -> Table:
    """One row per grid point, in grid order; divergent cells are ``None`` and flagged."""
    return run_series([spec], settings)


def run_series(specs: Iterable[SweepSpec], settings: Settings = Settings(), metadata: dict | None = None) -> Table:
    specs = list(specs)
    axis, quantities = specs[0].axis, specs[0].quantities
    for s in specs[1:]:
        if s.axis != axis or s.quantities != quantities:
            raise ValueError("all series in one table must share axis and quantities")
    table = Table(
        columns=["series", axis, *quantities, "dim", "dropped_mass", "flags"],
        metadata={
            **(metadata or {}),
            "series": [s.to_dict() for s in specs],
            "settings": {
                "tail_tol": settings.tail_tol,
                "p_floor": settings.p_floor,
                "min_dim": settings.min_dim,
                "sequential_method": settings.sequential_method,
            },
            "units": "gamma: relative dgamma/gamma; nt: absolute dn_T",
        },
    )
    for s in specs:
        for v in s.grid():
            table.rows.append(_row_for(s, float(v), settings))
    return table


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        if math.isnan(value) or math.isinf(value):
            return ""
        return f"{value:.12g}"
    return str(value)
