"""Bearing-only localisation from three beacons fixed in the goal frame.

The robot measures

* ``alpha``  the angle subtended between beacons A and B,
* ``beta``   the angle subtended between beacons C and B,
* ``gamma``  the signed angle from its heading to the line of sight to B.

Resection works in the two triangles OAB and OCB that share the side
``d = |OB|``.  ``zeta1`` is the interior angle at B of triangle OCB, and
``zeta3`` is the exterior angle of the beacon polyline at B measured on the
robot's side (zero for collinear beacons).  The law of sines in each
triangle gives

    a / sin(alpha) = d / sin(zeta1 + zeta3 - alpha)
    b / sin(beta)  = d / sin(beta + zeta1)

from which ``zeta1`` and then ``d`` follow in closed form.  The ray from B to
the robot is the ray from B to C rotated by ``zeta1`` towards the robot's
side, which fixes the position; the heading follows from ``gamma``.

Unsigned angles cannot tell on which side of the beacons the robot stands,
so :class:`BeaconArray` carries an ``approach_side``.  By default the robot is
assumed to come from the ``-x`` direction, as it does when parking at the
origin facing ``+x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateGeometryError,
    InconsistentMeasurementError,
    IndeterminateConfigurationError,
    InvalidInputError,
)
from .model import _polar_tuple, wrap_angle

__all__ = [
    "BeaconArray",
    "BearingMeasurement",
    "TriangulationSolution",
    "add_bearing_noise",
    "bearings_from_pose",
    "in_valid_region",
    "law_of_sines_residuals",
    "polar_config_from_pose",
    "pose_from_bearings",
    "solve_range",
    "solve_zeta1",
]

Point = tuple[float, float]
Pose = tuple[float, float, float]

_SIN_EPS = 1e-12
_INDETERMINATE_EPS = 1e-12
_RECHECK_TOL = 1e-6
_COINCIDENT = 1e-12


def _point(name: str, value) -> Point:
    try:
        x, y = (float(c) for c in value)
    except (TypeError, ValueError):
        raise InvalidInputError(f"beacon {name} must be an (x, y) pair, got {value!r}") from None
    if not (math.isfinite(x) and math.isfinite(y)):
        raise InvalidInputError(f"beacon {name} must be finite, got {value!r}")
    return (x, y)


def _cross(u: Point, v: Point) -> float:
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class BeaconArray:
    """Positions of beacons A, B, C and the geometry derived from them.

    ``phi_b`` is the direction of the ray from B through C.  ``approach_side``
    is +1 when the robot lies counter-clockwise of that ray (seen from B) and
    -1 otherwise; leave it as None to pick the side facing ``-x``.
    """

    A: Point
    B: Point
    C: Point
    approach_side: int | None = None
    a: float = field(init=False)
    b: float = field(init=False)
    zeta3: float = field(init=False)
    phi_b: float = field(init=False)
    h: float = field(init=False)

    def __post_init__(self) -> None:
        A, B, C = (_point(n, getattr(self, n)) for n in "ABC")
        a = math.dist(A, B)
        b = math.dist(C, B)
        if a <= 0 or b <= 0 or math.dist(A, C) <= 0:
            raise InvalidInputError("beacons A, B and C must be pairwise distinct")
        bc = (C[0] - B[0], C[1] - B[1])
        ba = (A[0] - B[0], A[1] - B[1])
        side = self.approach_side
        if side is None:
            turn = _cross(bc, (-1.0, 0.0))
            if turn == 0:
                raise InvalidInputError(
                    "beacon line BC is horizontal; approach_side must be given explicitly"
                )
            side = 1 if turn > 0 else -1
        elif side not in (1, -1):
            raise InvalidInputError(f"approach_side must be +1 or -1, got {side!r}")
        phi_b = math.atan2(bc[1], bc[0])
        # Angle ABC swept from BC towards the robot's side, in [0, 2pi).
        abc = (side * (math.atan2(ba[1], ba[0]) - phi_b)) % (2 * math.pi)
        for name, value in (("A", A), ("B", B), ("C", C), ("approach_side", side)):
            object.__setattr__(self, name, value)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "zeta3", math.pi - abc)
        object.__setattr__(self, "phi_b", phi_b)
        object.__setattr__(self, "h", B[1])

    def to_dict(self) -> dict:
        return {
            "A": list(self.A),
            "B": list(self.B),
            "C": list(self.C),
            "approach_side": self.approach_side,
        }


#: Collinear layout one metre ahead of the goal; the parking robot stays on
#: the ``-x`` side of it for the whole manoeuvre.
DEFAULT_BEACONS = ((1.0, 1.0), (1.0, 0.0), (1.0, -1.0))


@dataclass(frozen=True, slots=True)
class BearingMeasurement:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise InvalidInputError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True, slots=True)
class TriangulationSolution:
    zeta1: float
    d: float
    pose: Pose


def _subtended(o: Point, p: Point, q: Point) -> float:
    u = (p[0] - o[0], p[1] - o[1])
    v = (q[0] - o[0], q[1] - o[1])
    return math.atan2(abs(_cross(u, v)), u[0] * v[0] + u[1] * v[1])


def in_valid_region(pose: Pose, beacons: BeaconArray) -> bool:
    """True where the resection formulas hold for ``pose``.

    The robot must see B strictly between A and C, and the ray from B to the
    robot must lie inside angle CBA on the approach side.  For collinear
    beacons this is the whole open half-plane on the approach side.
    """
    o = (float(pose[0]), float(pose[1]))
    if min(math.dist(o, p) for p in (beacons.A, beacons.B, beacons.C)) <= _COINCIDENT:
        return False
    oa, ob, oc = ((p[0] - o[0], p[1] - o[1]) for p in (beacons.A, beacons.B, beacons.C))
    c1, c2 = _cross(oa, ob), _cross(ob, oc)
    if not c1 * c2 > 0:
        return False
    if _subtended(o, beacons.A, beacons.B) + _subtended(o, beacons.C, beacons.B) >= math.pi:
        return False
    bo = (-ob[0], -ob[1])
    turn = (beacons.approach_side * (math.atan2(bo[1], bo[0]) - beacons.phi_b)) % (2 * math.pi)
    return 0 < turn < math.pi - beacons.zeta3


def bearings_from_pose(pose: Pose, beacons: BeaconArray) -> BearingMeasurement:
    """Synthesise the bearings a robot at ``pose`` would measure.

    Raises:
        DegenerateGeometryError: if the robot sits on a beacon.
    """
    x, y, heading = (float(c) for c in pose)
    o = (x, y)
    for name in "ABC":
        if math.dist(o, getattr(beacons, name)) <= _COINCIDENT:
            raise DegenerateGeometryError(f"robot coincides with beacon {name}")
    B = beacons.B
    return BearingMeasurement(
        alpha=_subtended(o, beacons.A, B),
        beta=_subtended(o, beacons.C, B),
        gamma=wrap_angle(math.atan2(B[1] - y, B[0] - x) - heading),
    )


def _check_sines(m: BearingMeasurement) -> tuple[float, float]:
    sa, sb = math.sin(m.alpha), math.sin(m.beta)
    if abs(sa) < _SIN_EPS or abs(sb) < _SIN_EPS:
        raise DegenerateGeometryError(
            f"subtended angles alpha={m.alpha}, beta={m.beta} have vanishing sine"
        )
    return sa, sb


def solve_zeta1(m: BearingMeasurement, beacons: BeaconArray) -> float:
    """Interior angle at beacon B of triangle (robot, C, B), in ``(0, pi)``.

    Raises:
        DegenerateGeometryError: if ``sin(alpha)`` or ``sin(beta)`` vanishes,
            or the robot is on the line through B and C.
        IndeterminateConfigurationError: if the robot is on the beacons'
            circumcircle, where numerator and denominator both vanish.
    """
    sa, sb = _check_sines(m)
    a, b, z3 = beacons.a, beacons.b, beacons.zeta3
    num = b * sa * sb - a * sb * math.sin(z3 - m.alpha)
    den = a * sb * math.cos(z3 - m.alpha) - b * sa * math.cos(m.beta)
    if abs(num) < _INDETERMINATE_EPS and abs(den) < _INDETERMINATE_EPS:
        raise IndeterminateConfigurationError(
            "robot lies on the circle through the beacons; position is not unique"
        )
    # tan(zeta1) = num / den fixes zeta1 modulo pi; the interior angle is in (0, pi).
    zeta1 = math.atan2(num, den)
    if zeta1 < 0:
        zeta1 += math.pi
    if zeta1 == 0:
        raise DegenerateGeometryError("robot is on the line through beacons B and C")
    return zeta1


def solve_range(m: BearingMeasurement, zeta1: float, beacons: BeaconArray) -> float:
    """Distance from the robot to beacon B.

    Raises:
        DegenerateGeometryError: if ``sin(beta)`` vanishes.
        InconsistentMeasurementError: if the formula yields a non-positive range.
    """
    sb = math.sin(m.beta)
    if abs(sb) < _SIN_EPS:
        raise DegenerateGeometryError(f"beta={m.beta} has vanishing sine")
    d = beacons.b * math.sin(m.beta + zeta1) / sb
    if not d > 0:
        raise InconsistentMeasurementError(f"bearings imply non-positive range d={d}")
    return d


def law_of_sines_residuals(
    m: BearingMeasurement, zeta1: float, d: float, beacons: BeaconArray
) -> tuple[float, float]:
    """Residuals of the two law-of-sines relations, cross-multiplied.

    Returns ``(a sin(zeta1+zeta3-alpha) - d sin(alpha),
    b sin(beta+zeta1) - d sin(beta))``; both vanish at an exact solution.
    """
    r_ab = beacons.a * math.sin(zeta1 + beacons.zeta3 - m.alpha) - d * math.sin(m.alpha)
    r_cb = beacons.b * math.sin(m.beta + zeta1) - d * math.sin(m.beta)
    return r_ab, r_cb


def pose_from_bearings(m: BearingMeasurement, beacons: BeaconArray) -> TriangulationSolution:
    """Recover ``(x_r, y_r, theta_r)`` from the three bearings.

    The recovered pose is accepted only if it lies in the valid region (see
    :func:`in_valid_region`) and reproduces the measurement to within
    1e-6 rad; otherwise :class:`InconsistentMeasurementError` is raised.
    """
    zeta1 = solve_zeta1(m, beacons)
    d = solve_range(m, zeta1, beacons)
    # Direction from the robot to B: the B->C ray turned by zeta1 towards
    # the robot, then reversed.
    to_b = beacons.phi_b + beacons.approach_side * zeta1 + math.pi
    bx, by = beacons.B
    x_r = bx - d * math.cos(to_b)
    y_r = by - d * math.sin(to_b)
    theta_r = wrap_angle(to_b - m.gamma)
    pose = (x_r, y_r, theta_r)
    if not in_valid_region(pose, beacons):
        raise InconsistentMeasurementError(
            "bearings place the robot where B is not seen between A and C"
        )
    check = bearings_from_pose(pose, beacons)
    mismatch = max(
        abs(check.alpha - m.alpha),
        abs(check.beta - m.beta),
        abs(wrap_angle(check.gamma - m.gamma)),
    )
    if mismatch > _RECHECK_TOL:
        raise InconsistentMeasurementError(
            f"recovered pose reproduces the bearings only to {mismatch:.2e} rad"
        )
    return TriangulationSolution(zeta1=zeta1, d=d, pose=pose)


def polar_config_from_pose(sol: TriangulationSolution) -> tuple[float, float, float]:
    """``(e, theta1, theta2)`` of the recovered pose relative to the goal.

    The body angle is not observable from the beacons and is left to the
    caller.
    """
    x_r, y_r, theta_r = sol.pose
    e, t1, t2, _ = _polar_tuple(x_r, y_r, theta_r, 0.0)
    return e, t1, t2


def add_bearing_noise(
    m: BearingMeasurement, sigma: float, seed: int | np.random.Generator
) -> BearingMeasurement:
    """Perturb each bearing with independent Gaussian noise of std ``sigma``.

    ``seed`` may be an integer or an existing ``numpy.random.Generator``; the
    latter lets a caller draw a reproducible stream of noisy measurements.
    """
    if not (math.isfinite(sigma) and sigma >= 0):
        raise InvalidInputError(f"sigma must be non-negative, got {sigma!r}")
    if sigma == 0:
        return m
    rng = np.random.default_rng(seed)
    da, db, dg = rng.normal(0.0, sigma, size=3)
    return BearingMeasurement(
        alpha=m.alpha + float(da),
        beta=m.beta + float(db),
        gamma=wrap_angle(m.gamma + float(dg)),
    )
