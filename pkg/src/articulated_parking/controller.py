"""Lyapunov-based parking law for the articulated robot.

The candidate function

    V = 1/2 (l1 e^2 + l2 theta1^2 + l3 theta2^2 + l4 phi^2)

(with ``l1..l4`` the gains) has a time derivative that is affine in the
commands, ``V_dot = A v + B omega``.  Choosing ``v = -A`` and ``omega = -B``
gives ``V_dot = -(v^2 + omega^2) <= 0``.

When ``theta2`` and ``phi`` are both zero the law degenerates to
``v = lambda1 * e``, ``omega = 0`` and ``theta1`` can never change.
:func:`control_with_deadlock_handling` recognises that configuration and
first rotates the articulation joint away from zero.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

from .errors import AtGoalSingularityError, InvalidInputError
from .model import (
    E_SINGULAR,
    ControlCommand,
    PolarState,
    RobotGeometry,
    _articulation,
)

__all__ = [
    "ControllerConfig",
    "ControllerWarning",
    "Gains",
    "Mode",
    "closed_loop_vdot",
    "control_law",
    "control_with_deadlock_handling",
    "detect_deadlock",
    "lyapunov_value",
]


class ControllerWarning(UserWarning):
    pass


class Mode(str, enum.Enum):
    NORMAL = "NORMAL"
    KICK = "KICK"


@dataclass(frozen=True, slots=True)
class Gains:
    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 1.0
    lambda4: float = 0.01

    def __post_init__(self) -> None:
        for name in ("lambda1", "lambda2", "lambda3"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be positive, got {value!r}")
        if not (math.isfinite(self.lambda4) and self.lambda4 >= 0):
            raise InvalidInputError(f"lambda4 must be non-negative, got {self.lambda4!r}")
        if self.lambda4 == 0:
            warnings.warn(
                "lambda4 = 0 leaves the body angle uncontrolled; the robot may fold",
                ControllerWarning,
                stacklevel=3,
            )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.lambda1, self.lambda2, self.lambda3, self.lambda4)

    def scaled(self, c: float) -> Gains:
        return Gains(c * self.lambda1, c * self.lambda2, c * self.lambda3, c * self.lambda4)


@dataclass(frozen=True, slots=True)
class ControllerConfig:
    """Gains plus the parameters of the deadlock escape and optional saturation.

    Attributes:
        deadlock_eps: threshold under which ``theta2`` and ``phi`` count as zero.
        kick_omega: articulation rate used during the escape; its sign is
            chosen at run time, only the magnitude matters.
        kick_phi_target: the escape stops once ``|phi|`` reaches this value.
        deadlock_handling: set False to run the bare law even in deadlock.
        v_max, omega_max: symmetric clamps applied after the law, or None.
    """

    gains: Gains = field(default_factory=Gains)
    deadlock_eps: float = 1e-3
    kick_omega: float = 0.1
    kick_phi_target: float = 0.05
    deadlock_handling: bool = True
    v_max: float | None = None
    omega_max: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.deadlock_eps) and self.deadlock_eps > 0):
            raise InvalidInputError("deadlock_eps must be positive")
        if not math.isfinite(self.kick_omega) or self.kick_omega == 0:
            raise InvalidInputError("kick_omega must be finite and non-zero")
        if not (math.isfinite(self.kick_phi_target) and self.kick_phi_target > self.deadlock_eps):
            raise InvalidInputError("kick_phi_target must exceed deadlock_eps")
        for name in ("v_max", "omega_max"):
            limit = getattr(self, name)
            if limit is not None and not (math.isfinite(limit) and limit > 0):
                raise InvalidInputError(f"{name} must be positive when given, got {limit!r}")


def lyapunov_value(p: PolarState, g: Gains) -> float:
    return 0.5 * (
        g.lambda1 * p.e**2
        + g.lambda2 * p.theta1**2
        + g.lambda3 * p.theta2**2
        + g.lambda4 * p.phi**2
    )


def _law(p, gains, l1, l2, guard):
    e, t1, t2, phi = p
    if not e >= E_SINGULAR:
        raise AtGoalSingularityError(f"e = {e:.3e} is below the goal guard {E_SINGULAR}")
    k1, k2, k3, k4 = gains
    d = _articulation(phi, l1, l2, guard)
    v = -((k2 * t1 + k3 * t2) * math.sin(t2) / e - k1 * e * math.cos(t2) - k3 * t2 * math.sin(phi) / d)
    w = -(k4 * phi - l2 * k3 * t2 / d)
    return v, w


def _clamp(value: float, limit: float | None) -> float:
    if limit is None:
        return value
    return max(-limit, min(limit, value))


def control_law(
    p: PolarState, g: Gains, geom: RobotGeometry, cfg: ControllerConfig | None = None
) -> ControlCommand:
    """Evaluate the stabilising law at ``p``.

    Saturation limits are taken from ``cfg`` when one is given.

    Raises:
        AtGoalSingularityError: if ``p.e`` is below ``E_SINGULAR``.
        ArticulationSingularityError: if the robot is folded onto itself.
    """
    v, w = _law(p.as_tuple(), g.as_tuple(), geom.l1, geom.l2, geom.articulation_guard)
    if cfg is not None:
        v, w = _clamp(v, cfg.v_max), _clamp(w, cfg.omega_max)
    return ControlCommand(v, w)


def closed_loop_vdot(p: PolarState, g: Gains, geom: RobotGeometry) -> float:
    """Time derivative of V under the unsaturated law, ``-(v^2 + omega^2)``."""
    v, w = _law(p.as_tuple(), g.as_tuple(), geom.l1, geom.l2, geom.articulation_guard)
    return -(v * v + w * w)


def _is_deadlock(t1, t2, phi, eps):
    return abs(t2) < eps and abs(phi) < eps and abs(t1) >= eps


def detect_deadlock(p: PolarState, cfg: ControllerConfig) -> bool:
    """True when ``theta2`` and ``phi`` vanish but ``theta1`` does not."""
    return _is_deadlock(p.theta1, p.theta2, p.phi, cfg.deadlock_eps)


def _command(p, cfg, gains, l1, l2, guard, kicking):
    e, t1, t2, phi = p
    if cfg.deadlock_handling and (
        _is_deadlock(t1, t2, phi, cfg.deadlock_eps)
        or (kicking and abs(phi) < cfg.kick_phi_target)
    ):
        if not e >= E_SINGULAR:
            raise AtGoalSingularityError(f"e = {e:.3e} is below the goal guard {E_SINGULAR}")
        # omega > 0 drives theta2 negative, which then turns a positive theta1 down.
        w = math.copysign(abs(cfg.kick_omega), 1.0 if t1 >= 0 else -1.0)
        return 0.0, _clamp(w, cfg.omega_max), Mode.KICK
    v, w = _law(p, gains, l1, l2, guard)
    return _clamp(v, cfg.v_max), _clamp(w, cfg.omega_max), Mode.NORMAL


def control_with_deadlock_handling(
    p: PolarState,
    cfg: ControllerConfig,
    geom: RobotGeometry,
    kicking: bool = False,
) -> tuple[ControlCommand, Mode]:
    """Control law with the deadlock escape.

    In deadlock the command is a pure articulation rotation
    ``(0, +-|kick_omega|)`` signed like ``theta1``.  Pass ``kicking=True``
    when the previous command was a kick; the escape then continues until
    ``|phi| >= kick_phi_target`` even though the state has already left the
    deadlock band.
    """
    v, w, mode = _command(
        p.as_tuple(),
        cfg,
        cfg.gains.as_tuple(),
        geom.l1,
        geom.l2,
        geom.articulation_guard,
        kicking,
    )
    return ControlCommand(v, w), mode
