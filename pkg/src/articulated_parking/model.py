"""Kinematics of a two-body center-articulated robot.

The robot is described either in the Cartesian frame ``(x, y, psi, phi)``
(front-body position, front-body heading, body angle) or in error-vector
polar coordinates ``(e, theta1, theta2, phi)`` relative to a goal frame at
the origin:

* ``e``       distance from the robot to the goal,
* ``theta1``  direction of the vector pointing from the robot to the goal,
* ``theta2``  angle from that vector to the velocity direction,
  ``theta2 = wrap(theta1 - psi)``,
* ``phi``     body (articulation) angle.

With ``theta1 = atan2(-y, -x)`` both derivative functions below describe the
same motion; ``e_dot = -v cos(theta2)`` and ``theta1_dot = v sin(theta2) / e``
hold identically.

All angles are stored wrapped to ``(-pi, pi]``.  The derivative helpers
return plain 4-tuples in state field order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    ArticulationSingularityError,
    AtGoalSingularityError,
    InvalidInputError,
)

__all__ = [
    "E_SINGULAR",
    "CartesianState",
    "ControlCommand",
    "PolarState",
    "RobotGeometry",
    "articulation_factor",
    "cartesian_derivative",
    "cartesian_from_polar",
    "polar_derivative",
    "polar_from_cartesian",
    "wrap_angle",
]

#: Distance below which the polar angles are treated as undefined (m).
E_SINGULAR = 1e-9

_TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Map an angle to the half-open interval ``(-pi, pi]``.

    Raises:
        InvalidInputError: if ``a`` is NaN or infinite.
    """
    if not math.isfinite(a):
        raise InvalidInputError(f"angle must be finite, got {a!r}")
    r = math.remainder(a, _TWO_PI)
    if r <= -math.pi:
        return math.pi
    return r


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise InvalidInputError(f"{name} must be a finite number, got {value!r}")


@dataclass(frozen=True, slots=True)
class RobotGeometry:
    """Front and rear body lengths of the articulated robot (m).

    ``articulation_guard`` is the smallest admissible magnitude of
    ``l2 + l1*cos(phi)``; it defaults to ``1e-6 * (l1 + l2)``.
    """

    l1: float
    l2: float
    articulation_guard: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        _require_finite(l1=self.l1, l2=self.l2)
        if self.l1 <= 0 or self.l2 <= 0:
            raise InvalidInputError(
                f"body lengths must be positive, got l1={self.l1}, l2={self.l2}"
            )
        if self.articulation_guard is None:
            object.__setattr__(self, "articulation_guard", 1e-6 * (self.l1 + self.l2))
        elif not (math.isfinite(self.articulation_guard) and self.articulation_guard > 0):
            raise InvalidInputError("articulation_guard must be positive and finite")

    @property
    def singularity_reachable(self) -> bool:
        """True when some body angle makes ``l2 + l1*cos(phi)`` vanish."""
        return self.l2 <= self.l1


@dataclass(frozen=True, slots=True)
class CartesianState:
    x: float
    y: float
    psi: float
    phi: float

    def __post_init__(self) -> None:
        _require_finite(x=self.x, y=self.y, psi=self.psi, phi=self.phi)
        object.__setattr__(self, "psi", wrap_angle(self.psi))
        object.__setattr__(self, "phi", wrap_angle(self.phi))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.psi, self.phi)


@dataclass(frozen=True, slots=True)
class PolarState:
    e: float
    theta1: float
    theta2: float
    phi: float

    def __post_init__(self) -> None:
        _require_finite(e=self.e, theta1=self.theta1, theta2=self.theta2, phi=self.phi)
        if self.e < 0:
            raise InvalidInputError(f"distance e must be non-negative, got {self.e}")
        object.__setattr__(self, "theta1", wrap_angle(self.theta1))
        object.__setattr__(self, "theta2", wrap_angle(self.theta2))
        object.__setattr__(self, "phi", wrap_angle(self.phi))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.e, self.theta1, self.theta2, self.phi)


@dataclass(frozen=True, slots=True)
class ControlCommand:
    """Linear velocity ``v`` (m/s) and articulation rate ``omega`` (rad/s)."""

    v: float
    omega: float

    def __post_init__(self) -> None:
        _require_finite(v=self.v, omega=self.omega)


# Float-level kernels.  The simulator calls these directly in its inner loop;
# the public functions below validate and wrap them.


def _articulation(phi: float, l1: float, l2: float, guard: float) -> float:
    d = l2 + l1 * math.cos(phi)
    if not abs(d) >= guard:
        raise ArticulationSingularityError(
            f"l2 + l1*cos(phi) = {d:.3e} at phi={phi:.6f}: robot is fully folded"
        )
    return d


def _cartesian_rates(s, v, w, l1, l2, guard):
    psi, phi = s[2], s[3]
    d = l2 + l1 * math.cos(phi)
    if not abs(d) >= guard:
        _articulation(phi, l1, l2, guard)
    return (
        v * math.cos(psi),
        v * math.sin(psi),
        (math.sin(phi) * v + l2 * w) / d,
        w,
    )


def _polar_rates(p, v, w, l1, l2, guard):
    e, _, t2, phi = p
    if not e >= E_SINGULAR:
        raise AtGoalSingularityError(f"e = {e:.3e} is below the goal guard {E_SINGULAR}")
    d = _articulation(phi, l1, l2, guard)
    s2 = math.sin(t2)
    return (
        -v * math.cos(t2),
        v * s2 / e,
        (s2 / e - math.sin(phi) / d) * v - l2 / d * w,
        w,
    )


def _polar_tuple(x, y, psi, phi):
    e = math.hypot(x, y)
    if not e >= E_SINGULAR:
        raise AtGoalSingularityError(
            f"robot at ({x:.3e}, {y:.3e}) is within {E_SINGULAR} m of the goal"
        )
    t1 = math.atan2(-y, -x)
    return (e, t1, wrap_angle(t1 - psi), phi)


def _cartesian_tuple(e, t1, t2, phi):
    return (-e * math.cos(t1), -e * math.sin(t1), wrap_angle(t1 - t2), phi)


def articulation_factor(phi: float, geom: RobotGeometry) -> float:
    """Return ``l2 + l1*cos(phi)``, the denominator of the heading kinematics.

    Raises:
        ArticulationSingularityError: if its magnitude is below
            ``geom.articulation_guard``.
    """
    _require_finite(phi=phi)
    return _articulation(phi, geom.l1, geom.l2, geom.articulation_guard)


def polar_from_cartesian(s: CartesianState) -> PolarState:
    """Convert a Cartesian state to error-vector polar coordinates.

    Raises:
        AtGoalSingularityError: if the robot is within ``E_SINGULAR`` of the goal.
    """
    return PolarState(*_polar_tuple(s.x, s.y, s.psi, s.phi))


def cartesian_from_polar(p: PolarState) -> CartesianState:
    return CartesianState(*_cartesian_tuple(p.e, p.theta1, p.theta2, p.phi))


def cartesian_derivative(
    s: CartesianState, u: ControlCommand, geom: RobotGeometry
) -> tuple[float, float, float, float]:
    """Rates ``(x_dot, y_dot, psi_dot, phi_dot)`` of the Cartesian kinematics."""
    return _cartesian_rates(
        s.as_tuple(), u.v, u.omega, geom.l1, geom.l2, geom.articulation_guard
    )


def polar_derivative(
    p: PolarState, u: ControlCommand, geom: RobotGeometry
) -> tuple[float, float, float, float]:
    """Rates ``(e_dot, theta1_dot, theta2_dot, phi_dot)`` of the polar kinematics.

    Raises:
        AtGoalSingularityError: for ``e`` below ``E_SINGULAR``.
        ArticulationSingularityError: when the robot is folded onto itself.
    """
    return _polar_rates(
        p.as_tuple(), u.v, u.omega, geom.l1, geom.l2, geom.articulation_guard
    )
