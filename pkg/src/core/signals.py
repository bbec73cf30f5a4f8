"""
Signals Module

Time-dependent scalar parameters of the model (on-site energies, hopping
magnitude and phase, cavity mode drives) and their time integrals.

Three signal forms are supported, all with exact antiderivatives:
- Constant
- Sinusoid (sin or cos with angular frequency and phase offset)
- Sum of signals

Every propagator coefficient is built from integrals of these, so the
closed forms matter. Adaptive Simpson quadrature covers the one integral
without a closed form, the hopping phase integral with a time-dependent
phase.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Tuple, Union

import numpy as np

from .config import DEFAULT_CONFIG, NumericsConfig
from .errors import ConfigError, QuadratureNonConvergence

logger = logging.getLogger(__name__)

TimeLike = Union[float, np.ndarray]

_EPS = np.finfo(float).eps


class SignalKind(Enum):
    CONSTANT = "constant"
    SINUSOID = "sinusoid"
    SUM = "sum"


class Trig(Enum):
    SIN = "sin"
    COS = "cos"


# =============================================================================
# Signal Types
# =============================================================================

class Signal(ABC):
    """A real-valued function of time with an exact antiderivative."""

    kind: SignalKind

    def __call__(self, t: TimeLike) -> TimeLike:
        return self.eval(t)

    @abstractmethod
    def eval(self, t: TimeLike) -> TimeLike:
        """Value at t (scalar or numpy array of times)."""

    @abstractmethod
    def _integral(self, t0: float, t1: float) -> float:
        """Antiderivative difference for t0 <= t1."""

    @abstractmethod
    def scale(self, factor: float) -> "Signal":
        """Return factor * self."""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Tagged-record form used in scenario files."""

    @property
    @abstractmethod
    def is_constant(self) -> bool:
        """True when the signal does not depend on time."""

    def integrate(self, t0: float, t1: float) -> float:
        """Exact integral over [t0, t1]; reversed bounds flip the sign."""
        if t0 > t1:
            return -self._integral(t1, t0)
        return self._integral(t0, t1)

    def constant_value(self) -> float:
        """Value of a time-independent signal."""
        if not self.is_constant:
            raise ValueError(f"{self.kind.value} signal is time dependent")
        return float(self.eval(0.0))

    def __neg__(self) -> "Signal":
        return self.scale(-1.0)

    def __mul__(self, factor: float) -> "Signal":
        return self.scale(float(factor))

    __rmul__ = __mul__

    def __add__(self, other: "Signal") -> "Signal":
        left = self.terms if isinstance(self, Sum) else (self,)
        right = other.terms if isinstance(other, Sum) else (other,)
        return Sum(left + right)


@dataclass(frozen=True)
class Constant(Signal):
    """A time-independent value."""

    value: float
    kind: SignalKind = field(default=SignalKind.CONSTANT, init=False, repr=False)

    def eval(self, t: TimeLike) -> TimeLike:
        if np.ndim(t):
            return np.full(np.shape(t), self.value, dtype=float)
        return self.value

    def _integral(self, t0: float, t1: float) -> float:
        return self.value * (t1 - t0)

    def scale(self, factor: float) -> "Constant":
        return Constant(factor * self.value)

    @property
    def is_constant(self) -> bool:
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "value": self.value}


@dataclass(frozen=True)
class Sinusoid(Signal):
    """amplitude * fn(omega * t + phase)."""

    amplitude: float
    omega: float
    phase: float = 0.0
    fn: Trig = Trig.SIN
    kind: SignalKind = field(default=SignalKind.SINUSOID, init=False, repr=False)

    def _trig(self, x: TimeLike) -> TimeLike:
        return np.sin(x) if self.fn == Trig.SIN else np.cos(x)

    def eval(self, t: TimeLike) -> TimeLike:
        value = self.amplitude * self._trig(self.omega * np.asarray(t, dtype=float) + self.phase)
        return value if np.ndim(value) else float(value)

    def _integral(self, t0: float, t1: float) -> float:
        if self.omega == 0.0:
            return float(self.amplitude * self._trig(self.phase)) * (t1 - t0)
        a = self.omega * t0 + self.phase
        b = self.omega * t1 + self.phase
        ratio = self.amplitude / self.omega
        if self.fn == Trig.SIN:
            return float(ratio * (np.cos(a) - np.cos(b)))
        return float(ratio * (np.sin(b) - np.sin(a)))

    def scale(self, factor: float) -> "Sinusoid":
        return Sinusoid(factor * self.amplitude, self.omega, self.phase, self.fn)

    @property
    def is_constant(self) -> bool:
        return self.omega == 0.0 or self.amplitude == 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "amplitude": self.amplitude,
            "omega": self.omega,
            "phase": self.phase,
            "fn": self.fn.value
        }


@dataclass(frozen=True)
class Sum(Signal):
    """Ordered sum of signals."""

    terms: Tuple[Signal, ...]
    kind: SignalKind = field(default=SignalKind.SUM, init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def eval(self, t: TimeLike) -> TimeLike:
        total = 0.0
        for term in self.terms:
            total = total + term.eval(t)
        if np.ndim(t) and not np.ndim(total):
            return np.full(np.shape(t), total, dtype=float)
        return total

    def _integral(self, t0: float, t1: float) -> float:
        return sum((term._integral(t0, t1) for term in self.terms), 0.0)

    def scale(self, factor: float) -> "Sum":
        return Sum(tuple(term.scale(factor) for term in self.terms))

    @property
    def is_constant(self) -> bool:
        return all(term.is_constant for term in self.terms)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "terms": [term.to_dict() for term in self.terms]}


ZERO = Constant(0.0)


# =============================================================================
# Operations
# =============================================================================

def evaluate(s: Signal, t: TimeLike) -> TimeLike:
    """Value of a signal at t."""
    return s.eval(t)


def integrate(s: Signal, t0: float, t1: float) -> float:
    """Exact integral of a signal over [t0, t1]."""
    return s.integrate(t0, t1)


def quadrature(s: Signal, t0: float, t1: float, config: NumericsConfig = None) -> float:
    """Integral of a signal by adaptive Simpson on its values (cross-check of integrate)."""
    return float(adaptive_simpson(s.eval, t0, t1, config=config))


def integrate_hopping(
    ts_mag: Signal,
    alpha: Signal,
    t0: float,
    t1: float,
    config: NumericsConfig = None
) -> complex:
    """
    Integral of exp(i alpha(t)) |t_s(t)| over [t0, t1].

    A constant phase factors out and the result is exact; otherwise the
    complex integrand goes through adaptive Simpson.
    """
    if alpha.is_constant:
        return complex(np.exp(1j * alpha.constant_value()) * ts_mag.integrate(t0, t1))

    def integrand(t: float) -> complex:
        return ts_mag.eval(t) * np.exp(1j * alpha.eval(t))

    return complex(adaptive_simpson(integrand, t0, t1, config=config))


def adaptive_simpson(
    f: Callable[[float], Any],
    a: float,
    b: float,
    rel_tol: float = None,
    abs_tol: float = None,
    max_depth: int = None,
    config: NumericsConfig = None
) -> Any:
    """
    Adaptive Simpson's rule for real, complex or array-valued integrands.

    The interval is first split into 2**min_depth panels so that oscillatory
    integrands cannot fool the first error estimate. Each panel is then
    bisected until the Richardson error estimate meets its share of the
    tolerance.

    Args:
        f: Integrand.
        a: Lower bound.
        b: Upper bound.
        rel_tol: Tolerance relative to the integral of |f|.
        abs_tol: Absolute tolerance floor.
        max_depth: Maximum number of bisections of any panel.
        config: Optional numerics configuration.

    Returns:
        The integral, same type as f's values.

    Raises:
        QuadratureNonConvergence: If a panel needs more than max_depth bisections.
    """
    if config is None:
        config = DEFAULT_CONFIG
    rel_tol = config.quad_rel_tol if rel_tol is None else rel_tol
    abs_tol = config.quad_abs_tol if abs_tol is None else abs_tol
    max_depth = config.quad_max_depth if max_depth is None else max_depth

    if a == b:
        return 0.0 * f(a)
    if a > b:
        return -adaptive_simpson(f, b, a, rel_tol, abs_tol, max_depth, config)

    min_depth = min(config.quad_min_depth, max_depth)
    panels = 2 ** min_depth
    nodes = np.linspace(a, b, 2 * panels + 1)
    values = [f(x) for x in nodes]

    # Scale for the relative tolerance: composite Simpson of |f|
    h = (b - a) / panels
    magnitudes = [_magnitude(v) for v in values]
    scale = sum(
        h / 6.0 * (magnitudes[2 * k] + 4.0 * magnitudes[2 * k + 1] + magnitudes[2 * k + 2])
        for k in range(panels)
    )
    tol = max(abs_tol, rel_tol * scale)

    total = 0.0
    evaluations = len(values)
    for k in range(panels):
        fa, fm, fb = values[2 * k], values[2 * k + 1], values[2 * k + 2]
        left, right = nodes[2 * k], nodes[2 * k + 2]
        whole = h / 6.0 * (fa + 4.0 * fm + fb)
        part, count = _refine(f, left, right, fa, fm, fb, whole, tol / panels, min_depth, max_depth)
        total = total + part
        evaluations += count

    logger.debug("adaptive_simpson on [%g, %g]: %d evaluations", a, b, evaluations)
    return total


def _magnitude(value: Any) -> float:
    return float(np.max(np.abs(value)))


def _refine(
    f: Callable[[float], Any],
    a: float,
    b: float,
    fa: Any,
    fm: Any,
    fb: Any,
    whole: Any,
    tol: float,
    depth: int,
    max_depth: int
) -> Tuple[Any, int]:
    """Recursive bisection of one panel; returns (integral, evaluations)."""
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    h = b - a

    s_left = h / 12.0 * (fa + 4.0 * flm + fm)
    s_right = h / 12.0 * (fm + 4.0 * frm + fb)
    combined = s_left + s_right
    error = _magnitude(combined - whole)

    # Roundoff floor: tolerances below a few ulps of the panel value are unreachable
    floor = 64.0 * _EPS * _magnitude(combined)
    if error <= 15.0 * max(tol, floor):
        return combined + (combined - whole) / 15.0, 2

    if depth >= max_depth:
        raise QuadratureNonConvergence(
            f"adaptive Simpson did not converge on [{a:.17g}, {b:.17g}] "
            f"after {max_depth} bisections (error {error:.3e}, tolerance {tol:.3e})"
        )

    left, n_left = _refine(f, a, m, fa, flm, fm, s_left, tol / 2.0, depth + 1, max_depth)
    right, n_right = _refine(f, m, b, fm, frm, fb, s_right, tol / 2.0, depth + 1, max_depth)
    return left + right, 2 + n_left + n_right


# =============================================================================
# Serialization
# =============================================================================

def signal_from_dict(data: Any, path: str = "signal") -> Signal:
    """
    Build a signal from its tagged-record form.

    A bare number is accepted as shorthand for a constant.

    Raises:
        ConfigError: naming the offending field path.
    """
    if isinstance(data, bool):
        raise ConfigError("expected a signal record or a number, got a boolean", field=path)
    if isinstance(data, (int, float)):
        return Constant(float(data))
    if not isinstance(data, dict):
        raise ConfigError(f"expected a signal record, got {type(data).__name__}", field=path)

    kind = data.get("kind")
    if kind == SignalKind.CONSTANT.value:
        return Constant(_number(data, "value", path))
    if kind == SignalKind.SINUSOID.value:
        fn = data.get("fn", Trig.SIN.value)
        if fn not in (Trig.SIN.value, Trig.COS.value):
            raise ConfigError(f"fn must be 'sin' or 'cos', got {fn!r}", field=f"{path}.fn")
        return Sinusoid(
            amplitude=_number(data, "amplitude", path),
            omega=_number(data, "omega", path),
            phase=_number(data, "phase", path, default=0.0),
            fn=Trig(fn)
        )
    if kind == SignalKind.SUM.value:
        terms = data.get("terms")
        if not isinstance(terms, list):
            raise ConfigError("sum signal needs a 'terms' list", field=f"{path}.terms")
        return Sum(tuple(
            signal_from_dict(term, f"{path}.terms.{i}") for i, term in enumerate(terms)
        ))
    raise ConfigError(f"unknown signal kind {kind!r}", field=f"{path}.kind")


def _number(data: Dict[str, Any], key: str, path: str, default: float = None) -> float:
    value = data.get(key, default)
    if value is None:
        raise ConfigError("missing required number", field=f"{path}.{key}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=f"{path}.{key}")
    if not np.isfinite(value):
        raise ConfigError("value must be finite", field=f"{path}.{key}")
    return float(value)
