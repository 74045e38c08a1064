"""Protocol sweeps, scaling fits, weak-limit extrapolation, negativity witness.

This module compares the two engines on an equal footing. A protocol
object fixes everything except the measurement strength (the detector
bias ``g`` classically, the coupling ``lam`` quantum mechanically);
:func:`sweep_metric` evaluates a named metric along a strength grid and
returns a tabular result that the fitting and extrapolation helpers
consume directly.

The headline contrast lives in the ``postselection_shift`` metric: how
much turning the detector on moves the probability of the postselected
outcome. The matched classical protocol pays a strength-independent
shift, while the quantum protocol pays one of order lam^2, vanishing in
the weak limit. ``weak_limit_extrapolate`` removes that quadratic error
from conditioned averages by Richardson extrapolation in lam^2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classical import ClassicalParams, conditional_mean, fc_match_params, joint_distribution
from .contextual import ContextualValues
from .errors import DomainError, ValidationError
from .quantum import (
    MeasurementModel,
    Postselection,
    TwoLevelState,
    conditional_mean_quantum,
    postselection_probability,
    quantum_disturbance,
    weak_value,
)

__all__ = [
    "ClassicalMatchedProtocol",
    "QuantumProtocol",
    "SweepResult",
    "PowerLawFit",
    "ProjectorWeakValues",
    "classical_postselection_shift",
    "quantum_postselection_shift",
    "sweep_metric",
    "metric_names",
    "fit_power_law",
    "richardson_extrapolate",
    "weak_limit_extrapolate",
    "projector_weak_values",
]


@dataclass(frozen=True)
class ClassicalMatchedProtocol:
    """Classical protocol tuned to mimic the weak value 1/cos(theta) at any bias."""

    theta: float

    def __post_init__(self):
        theta = float(self.theta)
        if not math.isfinite(theta):
            raise ValidationError(f"theta must be finite, got {theta!r}")
        object.__setattr__(self, "theta", theta)

    label = "classical_matched"
    parameter = "g"

    @property
    def target(self) -> float:
        c = math.cos(self.theta)
        if c <= 0.0:
            raise DomainError(f"target value undefined or divergent: cos(theta) = {c!r}")
        return 1.0 / c

    def params(self, g: float) -> ClassicalParams:
        return fc_match_params(self.theta, g)

    def fixed(self) -> dict:
        return {"theta": self.theta}


@dataclass(frozen=True)
class QuantumProtocol:
    """Quantum protocol: prepare with occupation p1, postselect at angle theta."""

    p1: float
    theta: float

    def __post_init__(self):
        p1 = float(self.p1)
        theta = float(self.theta)
        if not math.isfinite(p1) or not 0.0 <= p1 <= 1.0:
            raise ValidationError(f"p1 must be in [0, 1], got {p1!r}")
        if not math.isfinite(theta):
            raise ValidationError(f"theta must be finite, got {theta!r}")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "theta", theta)

    label = "quantum"
    parameter = "lambda"

    @property
    def preparation(self) -> TwoLevelState:
        return TwoLevelState.from_occupation(self.p1)

    @property
    def postselection(self) -> TwoLevelState:
        return Postselection(self.theta % (2.0 * math.pi)).state

    @property
    def target(self) -> float:
        return weak_value(self.preparation, self.postselection).real

    def fixed(self) -> dict:
        return {"p1": self.p1, "theta": self.theta}


def classical_postselection_shift(params: ClassicalParams) -> float:
    """How far the detector's disturbance moves the final box 2 probability.

    Compares P(final box 2) under ``params`` against the undisturbed
    protocol (q = q0 = 0), where the final box is the initial one.
    """
    disturbed = joint_distribution(params).p_box(2)
    return abs(disturbed - (1.0 - params.p1))


def quantum_postselection_shift(i: TwoLevelState, f: TwoLevelState, lam: float) -> float:
    """How far the coupling moves the postselection probability from its lam = 0 value."""
    model = MeasurementModel(lam)
    undisturbed = abs(complex(np.conj(f.vector) @ i.vector)) ** 2
    return abs(postselection_probability(i, model, f) - undisturbed)


def _eval_classical(protocol: ClassicalMatchedProtocol, metric: str, g: float) -> float:
    params = protocol.params(g)
    if metric == "conditional_mean":
        return conditional_mean(joint_distribution(params), ContextualValues.symmetric(g), 2)
    if metric == "conditional_mean_error":
        mean = conditional_mean(joint_distribution(params), ContextualValues.symmetric(g), 2)
        return abs(mean - protocol.target)
    if metric == "postselection_probability":
        return joint_distribution(params).p_box(2)
    if metric == "postselection_shift":
        return classical_postselection_shift(params)
    raise ValidationError(
        f"metric {metric!r} is not defined for the classical protocol; "
        f"choose from {sorted(_CLASSICAL_METRICS)}"
    )


def _eval_quantum(protocol: QuantumProtocol, metric: str, lam: float) -> float:
    i = protocol.preparation
    f = protocol.postselection
    model = MeasurementModel(lam)
    if metric == "conditional_mean":
        return conditional_mean_quantum(i, model, f)
    if metric == "conditional_mean_error":
        return abs(conditional_mean_quantum(i, model, f) - protocol.target)
    if metric == "postselection_probability":
        return postselection_probability(i, model, f)
    if metric == "postselection_shift":
        return quantum_postselection_shift(i, f, lam)
    if metric == "quantum_disturbance":
        return quantum_disturbance(i, model)
    raise ValidationError(
        f"metric {metric!r} is not defined for the quantum protocol; "
        f"choose from {sorted(_QUANTUM_METRICS)}"
    )


_CLASSICAL_METRICS = frozenset(
    {"conditional_mean", "conditional_mean_error", "postselection_probability", "postselection_shift"}
)
_QUANTUM_METRICS = _CLASSICAL_METRICS | {"quantum_disturbance"}


def metric_names(protocol) -> tuple:
    """Metric names available for the given protocol object."""
    if isinstance(protocol, ClassicalMatchedProtocol):
        return tuple(sorted(_CLASSICAL_METRICS))
    if isinstance(protocol, QuantumProtocol):
        return tuple(sorted(_QUANTUM_METRICS))
    raise ValidationError(f"unknown protocol object {protocol!r}")


@dataclass(frozen=True, eq=False)
class SweepResult:
    """One metric evaluated along a strictly monotone strength grid.

    ``stderrs`` is None for exact engines and carries one standard error
    per point for sampled data.
    """

    parameter: str
    strengths: np.ndarray
    values: np.ndarray
    protocol: str
    metric: str
    fixed: dict = field(default_factory=dict)
    stderrs: np.ndarray | None = None

    def __post_init__(self):
        s = np.asarray(self.strengths, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise ValidationError("strengths must be a nonempty 1-D grid")
        if v.shape != s.shape:
            raise ValidationError(
                f"values shape {v.shape} does not match strengths shape {s.shape}"
            )
        diffs = np.diff(s)
        if s.size > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValidationError("strengths must be strictly monotone")
        if not np.all(np.isfinite(s)) or not np.all(np.isfinite(v)):
            raise ValidationError("strengths and values must be finite")
        s.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "strengths", s)
        object.__setattr__(self, "values", v)
        if self.stderrs is not None:
            e = np.asarray(self.stderrs, dtype=float)
            if e.shape != s.shape or not np.all(np.isfinite(e)) or np.any(e < 0):
                raise ValidationError("stderrs must be finite nonnegative, one per point")
            e.flags.writeable = False
            object.__setattr__(self, "stderrs", e)

    def __len__(self):
        return int(self.strengths.size)


def sweep_metric(protocol, metric: str, strengths, workers: int | None = None) -> SweepResult:
    """Evaluate one metric at every strength on the grid.

    Parameters
    ----------
    protocol : ClassicalMatchedProtocol or QuantumProtocol
        The protocol family; its strength axis is ``g`` or ``lam``.
    metric : str
        One of :func:`metric_names` for the protocol.
    strengths : array_like
        Strictly monotone grid of strengths.
    workers : int, optional
        Evaluate grid points in a thread pool of this size. The result is
        identical for any worker count; points are returned in grid order.

    Raises
    ------
    ValidationError
        For an empty grid or an unknown metric name.
    DomainError
        If the metric is undefined at some grid point; the message names
        the offending point.
    """
    if isinstance(protocol, ClassicalMatchedProtocol):
        evaluate = _eval_classical
    elif isinstance(protocol, QuantumProtocol):
        evaluate = _eval_quantum
    else:
        raise ValidationError(f"unknown protocol object {protocol!r}")
    if metric not in metric_names(protocol):
        raise ValidationError(
            f"unknown metric {metric!r}; choose from {list(metric_names(protocol))}"
        )
    grid = np.asarray(strengths, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("strengths must be a nonempty 1-D grid")

    def point(x: float) -> float:
        x = float(x)
        try:
            return float(evaluate(protocol, metric, x))
        except DomainError as err:
            raise DomainError(f"{metric} undefined at {protocol.parameter} = {x!r}: {err}") from err

    if workers is None or workers <= 1:
        values = [point(x) for x in grid]
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            values = list(pool.map(point, grid))
    return SweepResult(
        parameter=protocol.parameter,
        strengths=grid,
        values=np.array(values),
        protocol=protocol.label,
        metric=metric,
        fixed=protocol.fixed(),
    )


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of values ~ prefactor * strength ** exponent."""

    exponent: float
    prefactor: float
    rms_residual: float


def fit_power_law(points: SweepResult) -> PowerLawFit:
    """Fit a power law by linear least squares in log-log coordinates.

    Requires at least three points with strictly positive strengths and
    values. ``rms_residual`` is reported in log space; a large value means
    the data is not actually a power law.
    """
    x = points.strengths
    y = points.values
    if x.size < 3:
        raise ValidationError(f"power-law fit needs at least 3 points, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValidationError("power-law fit requires strictly positive strengths and values")
    lx = np.log(x)
    ly = np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    residuals = ly - (slope * lx + intercept)
    return PowerLawFit(
        exponent=float(slope),
        prefactor=float(np.exp(intercept)),
        rms_residual=float(np.sqrt(np.mean(residuals**2))),
    )


def richardson_extrapolate(strengths, values) -> tuple:
    """Polynomial extrapolation of values(strength) to strength -> 0 in strength^2.

    Builds the Neville tableau in t = strength^2, appropriate when the
    leading error is even in the strength, and returns
    ``(limit, error_estimate)`` where the estimate is the change from the
    previous extrapolation order.
    """
    s = np.asarray(strengths, dtype=float)
    v = np.asarray(values, dtype=float)
    if s.ndim != 1 or s.shape != v.shape or s.size < 2:
        raise ValidationError("extrapolation needs two equal-length 1-D arrays, at least 2 points")
    if np.any(s <= 0) or not np.all(np.isfinite(s)) or not np.all(np.isfinite(v)):
        raise ValidationError("strengths must be positive and finite, values finite")
    order = np.argsort(s)[::-1]
    t = s[order] ** 2
    if np.any(np.diff(t) >= 0):
        raise ValidationError("strengths must be distinct")
    cur = v[order].astype(float)
    previous = cur[-1]
    k = s.size
    for m in range(1, k):
        nxt = np.empty(k - m)
        for idx in range(k - m):
            nxt[idx] = (t[idx] * cur[idx + 1] - t[idx + m] * cur[idx]) / (t[idx] - t[idx + m])
        previous = cur[-1]
        cur = nxt
    return float(cur[0]), float(abs(cur[0] - previous))


def weak_limit_extrapolate(points: SweepResult) -> float:
    """Extrapolate a sweep to zero strength, removing the quadratic error.

    Requires at least three grid points. Returns the Richardson limit; use
    :func:`richardson_extrapolate` directly when the error estimate is
    also wanted.
    """
    if len(points) < 3:
        raise ValidationError(f"weak-limit extrapolation needs at least 3 points, got {len(points)}")
    limit, _ = richardson_extrapolate(points.strengths, points.values)
    return limit


@dataclass(frozen=True)
class ProjectorWeakValues:
    """Weak values of the two box projectors and their negativity flag.

    The pair always sums to 1; ``negative`` is True when either real part
    dips below zero, the conditioned quasiprobability reading of an
    anomalous weak value.
    """

    w1: complex
    w2: complex
    negative: bool


def projector_weak_values(i: TwoLevelState, f: TwoLevelState) -> ProjectorWeakValues:
    """Weak values <f|b><b|i>/<f|i> of the box projectors, b = 1, 2."""
    ovl = complex(np.conj(f.vector) @ i.vector)
    if abs(ovl) <= 1e-14:
        raise DomainError("undefined weak value (zero overlap between preparation and postselection)")
    w1 = complex(np.conj(f.a1) * i.a1 / ovl)
    w2 = complex(np.conj(f.a2) * i.a2 / ovl)
    negative = min(w1.real, w2.real) < -1e-12
    return ProjectorWeakValues(w1=w1, w2=w2, negative=negative)
