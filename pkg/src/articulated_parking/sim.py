"""Closed-loop fixed-step simulation of the parking controller.

A run records one :class:`TrajectorySample` every ``dt`` seconds.  Between
two samples the controller is re-evaluated on ``substeps`` equal inner steps
of length ``dt / substeps`` and the command is held constant over each inner
step (zero-order hold).  Substepping is needed because the law contains
``sin(theta2) / e``: close to the goal the closed loop is stiff (its fastest
rate grows like ``theta1 / e**2``) and a single held command over 10 ms
makes the loop oscillate instead of settling.

Feedback is either the exact state or the output of beacon triangulation
from (optionally noisy) synthesised bearings.  The body angle is always
taken from the true state, as an on-board joint encoder would report it.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .controller import ControllerConfig, Mode, _command
from .errors import InconsistentMeasurementError, InvalidInputError, PositioningError, SingularityError
from .model import (
    E_SINGULAR,
    CartesianState,
    ControlCommand,
    PolarState,
    RobotGeometry,
    _cartesian_rates,
    _cartesian_tuple,
    _polar_rates,
    _polar_tuple,
    wrap_angle,
)
from .positioning import (
    DEFAULT_BEACONS,
    BeaconArray,
    add_bearing_noise,
    bearings_from_pose,
    in_valid_region,
    polar_config_from_pose,
    pose_from_bearings,
)

__all__ = [
    "BeaconFeedback",
    "Frame",
    "GroundTruth",
    "Integrator",
    "SimulationConfig",
    "StopReason",
    "Trajectory",
    "TrajectorySample",
    "euler_step",
    "rk4_step",
    "run_batch",
    "run_jobs",
    "run_scenario",
    "step_closed_loop",
]


class Integrator(str, enum.Enum):
    RK4 = "RK4"
    EULER = "EULER"


class Frame(str, enum.Enum):
    CARTESIAN = "CARTESIAN"
    POLAR = "POLAR"


class StopReason(str, enum.Enum):
    AT_GOAL = "AT_GOAL"
    TIME_BUDGET = "TIME_BUDGET"
    SINGULARITY = "SINGULARITY"
    FEEDBACK_FAILURE = "FEEDBACK_FAILURE"


@dataclass(frozen=True)
class GroundTruth:
    """Feed the controller the exact polar state."""


@dataclass(frozen=True)
class BeaconFeedback:
    """Feed the controller triangulated poses from synthesised bearings."""

    beacons: BeaconArray = field(default_factory=lambda: BeaconArray(*DEFAULT_BEACONS))
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise InvalidInputError(f"sigma must be non-negative, got {self.sigma!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InvalidInputError(f"seed must be a non-negative integer, got {self.seed!r}")


Feedback = Union[GroundTruth, BeaconFeedback]


@dataclass(frozen=True)
class SimulationConfig:
    """Step sizes, budgets and tolerances of a closed-loop run.

    ``max_substep`` bounds the inner control/integration step; the number
    of inner steps per sample is the smallest integer that respects it.
    """

    dt: float = 0.01
    t_max: float = 100.0
    e_tol: float = 0.01
    angle_tol: float = 0.05
    feedback: Feedback = field(default_factory=GroundTruth)
    integrator: Integrator = Integrator.RK4
    frame: Frame = Frame.CARTESIAN
    max_substep: float = 3.125e-4

    def __post_init__(self) -> None:
        object.__setattr__(self, "integrator", Integrator(self.integrator))
        object.__setattr__(self, "frame", Frame(self.frame))
        for name in ("dt", "t_max", "e_tol", "angle_tol", "max_substep"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be positive and finite, got {value!r}")
        if self.t_max < self.dt:
            raise InvalidInputError(f"t_max={self.t_max} is shorter than one step dt={self.dt}")
        if self.e_tol <= E_SINGULAR:
            raise InvalidInputError(f"e_tol must exceed the goal guard {E_SINGULAR}")
        if not isinstance(self.feedback, (GroundTruth, BeaconFeedback)):
            raise InvalidInputError(f"unsupported feedback {self.feedback!r}")

    @property
    def substeps(self) -> int:
        return max(1, math.ceil(self.dt / self.max_substep - 1e-9))


@dataclass(frozen=True)
class TrajectorySample:
    """State of a run at time ``t`` together with the command issued there.

    ``polar`` and ``V`` describe the true state; ``estimate`` is the polar
    state the controller was given, which differs from ``polar`` only under
    noisy beacon feedback.
    """

    index: int
    t: float
    cartesian: CartesianState
    polar: PolarState
    estimate: PolarState
    command: ControlCommand
    V: float
    mode: Mode


@dataclass
class Trajectory:
    samples: list[TrajectorySample]
    stop_reason: StopReason
    message: str = ""

    def __post_init__(self) -> None:
        if not self.samples:
            raise InvalidInputError("a trajectory needs at least one sample")

    @property
    def final(self) -> TrajectorySample:
        return self.samples[-1]

    def column(self, name: str) -> np.ndarray:
        """Values of one CSV column (e.g. ``"e"`` or ``"v"``) as an array."""
        getter = _COLUMNS[name]
        return np.array([getter(s) for s in self.samples])


_COLUMNS: dict[str, Callable[[TrajectorySample], float]] = {
    "t": lambda s: s.t,
    "x": lambda s: s.cartesian.x,
    "y": lambda s: s.cartesian.y,
    "psi": lambda s: s.cartesian.psi,
    "phi": lambda s: s.cartesian.phi,
    "e": lambda s: s.polar.e,
    "theta1": lambda s: s.polar.theta1,
    "theta2": lambda s: s.polar.theta2,
    "v": lambda s: s.command.v,
    "omega": lambda s: s.command.omega,
    "V": lambda s: s.V,
}


# Integration on plain tuples.  ``rates`` is one of the model kernels.


def _rk4(s, v, w, rates, l1, l2, guard, h):
    a0, a1, a2, a3 = s
    hh = 0.5 * h
    b0, b1, b2, b3 = rates(s, v, w, l1, l2, guard)
    c0, c1, c2, c3 = rates((a0 + hh * b0, a1 + hh * b1, a2 + hh * b2, a3 + hh * b3), v, w, l1, l2, guard)
    d0, d1, d2, d3 = rates((a0 + hh * c0, a1 + hh * c1, a2 + hh * c2, a3 + hh * c3), v, w, l1, l2, guard)
    f0, f1, f2, f3 = rates((a0 + h * d0, a1 + h * d1, a2 + h * d2, a3 + h * d3), v, w, l1, l2, guard)
    h6 = h / 6.0
    return (
        a0 + h6 * (b0 + 2.0 * c0 + 2.0 * d0 + f0),
        a1 + h6 * (b1 + 2.0 * c1 + 2.0 * d1 + f1),
        a2 + h6 * (b2 + 2.0 * c2 + 2.0 * d2 + f2),
        a3 + h6 * (b3 + 2.0 * c3 + 2.0 * d3 + f3),
    )


def _euler(s, v, w, rates, l1, l2, guard, h):
    k = rates(s, v, w, l1, l2, guard)
    return (s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2], s[3] + h * k[3])


def _wrap_cartesian(s):
    return (s[0], s[1], wrap_angle(s[2]), wrap_angle(s[3]))


def _wrap_polar(p):
    if not p[0] >= 0:
        raise SingularityError(f"integration carried e below zero ({p[0]:.3e})")
    return (p[0], wrap_angle(p[1]), wrap_angle(p[2]), wrap_angle(p[3]))


_FRAMES = {
    Frame.CARTESIAN: (_cartesian_rates, _wrap_cartesian),
    Frame.POLAR: (_polar_rates, _wrap_polar),
}
_METHODS = {Integrator.RK4: _rk4, Integrator.EULER: _euler}


def _step(state, command, geom, dt, method):
    if not (math.isfinite(dt) and dt > 0):
        raise InvalidInputError(f"dt must be positive, got {dt!r}")
    frame = Frame.CARTESIAN if isinstance(state, CartesianState) else Frame.POLAR
    rates, wrap = _FRAMES[frame]
    out = wrap(
        method(
            state.as_tuple(),
            command.v,
            command.omega,
            rates,
            geom.l1,
            geom.l2,
            geom.articulation_guard,
            dt,
        )
    )
    return type(state)(*out)


def rk4_step(state, command: ControlCommand, geom: RobotGeometry, dt: float):
    """Advance a :class:`CartesianState` or :class:`PolarState` by one RK4 step.

    The command is held constant across the step and the angles are wrapped
    afterwards.  A singularity met at any stage aborts the step.
    """
    return _step(state, command, geom, dt, _rk4)


def euler_step(state, command: ControlCommand, geom: RobotGeometry, dt: float):
    return _step(state, command, geom, dt, _euler)


class _Loop:
    """Per-run constants bound once so the inner loop stays on plain floats."""

    def __init__(self, cfg: SimulationConfig, ctrl: ControllerConfig, geom: RobotGeometry):
        self.cfg = cfg
        self.ctrl = ctrl
        self.gains = ctrl.gains.as_tuple()
        self.geom = geom
        self.l1, self.l2, self.guard = geom.l1, geom.l2, geom.articulation_guard
        self.polar_frame = cfg.frame is Frame.POLAR
        self.rates, self.wrap = _FRAMES[cfg.frame]
        self.method = _METHODS[cfg.integrator]
        self.h = cfg.dt / cfg.substeps
        fb = cfg.feedback
        self.beacons = fb.beacons if isinstance(fb, BeaconFeedback) else None
        self.sigma = fb.sigma if isinstance(fb, BeaconFeedback) else 0.0
        self.seed = fb.seed if isinstance(fb, BeaconFeedback) else 0

    def rng(self, index: int, stream: int) -> np.random.Generator | None:
        if self.sigma == 0:
            return None
        return np.random.default_rng([self.seed, index, stream])

    def truth(self, s):
        """True (cartesian, polar) tuples of the integrated state."""
        if self.polar_frame:
            return _cartesian_tuple(*s), s
        return s, _polar_tuple(*s)

    def feedback(self, cart, polar, rng):
        if self.beacons is None:
            return polar
        x, y, psi, phi = cart
        # Outside the valid region the bearings are still self-consistent but
        # resolve to a mirror image, so the failure must come from the truth.
        if not in_valid_region((x, y, psi), self.beacons):
            raise InconsistentMeasurementError(
                f"robot at ({x:.3f}, {y:.3f}) left the region where the beacons resolve its pose"
            )
        m = bearings_from_pose((x, y, psi), self.beacons)
        if rng is not None:
            m = add_bearing_noise(m, self.sigma, rng)
        e, t1, t2 = polar_config_from_pose(pose_from_bearings(m, self.beacons))
        return (e, t1, t2, phi)

    def command(self, fb, kicking):
        return _command(fb, self.ctrl, self.gains, self.l1, self.l2, self.guard, kicking)

    def sample(self, index, s, kicking):
        cart, polar = self.truth(s)
        fb = self.feedback(cart, polar, self.rng(index, 0))
        v, w, mode = self.command(fb, kicking)
        p = PolarState(*polar)
        return TrajectorySample(
            index=index,
            t=index * self.cfg.dt,
            cartesian=CartesianState(*cart),
            polar=p,
            estimate=PolarState(*fb),
            command=ControlCommand(v, w),
            V=_lyapunov(polar, self.gains),
            mode=mode,
        )

    def advance(self, sample: TrajectorySample) -> TrajectorySample:
        rates, wrap, method = self.rates, self.wrap, self.method
        l1, l2, guard, h = self.l1, self.l2, self.guard, self.h
        s = sample.polar.as_tuple() if self.polar_frame else sample.cartesian.as_tuple()
        v, w = sample.command.v, sample.command.omega
        kicking = sample.mode is Mode.KICK
        rng = self.rng(sample.index, 1)
        for j in range(self.cfg.substeps):
            if j:
                cart, polar = self.truth(s)
                v, w, mode = self.command(self.feedback(cart, polar, rng), kicking)
                kicking = mode is Mode.KICK
            s = wrap(method(s, v, w, rates, l1, l2, guard, h))
        return self.sample(sample.index + 1, s, kicking)

    def at_goal(self, sample: TrajectorySample) -> bool:
        est = sample.estimate
        return (
            est.e < self.cfg.e_tol
            and abs(est.theta1) < self.cfg.angle_tol
            and abs(est.theta2) < self.cfg.angle_tol
        )


def _lyapunov(p, gains):
    e, t1, t2, phi = p
    k1, k2, k3, k4 = gains
    return 0.5 * (k1 * e * e + k2 * t1 * t1 + k3 * t2 * t2 + k4 * phi * phi)


def step_closed_loop(
    sample: TrajectorySample,
    cfg: SimulationConfig,
    ctrl_cfg: ControllerConfig,
    geom: RobotGeometry,
) -> TrajectorySample:
    """Advance a run by one sample period ``cfg.dt``.

    ``sample.command`` is applied on the first inner step; the controller is
    re-evaluated on each later one.  Bearing noise is drawn from a generator
    seeded by ``(seed, sample.index)``, so the result depends only on the
    arguments.

    Raises:
        SingularityError: if the kinematics or the law become undefined.
        PositioningError: if beacon triangulation fails.
    """
    return _Loop(cfg, ctrl_cfg, geom).advance(sample)


def run_scenario(
    initial: PolarState,
    cfg: SimulationConfig | None = None,
    ctrl_cfg: ControllerConfig | None = None,
    geom: RobotGeometry | None = None,
) -> Trajectory:
    """Simulate one parking manoeuvre from ``initial`` until a stop condition.

    The run stops ``AT_GOAL`` once the fed-back ``e``, ``|theta1|`` and
    ``|theta2|`` are all inside tolerance; the body angle is not required to
    settle.  Singularities and triangulation failures end the run with the
    matching stop reason and the last good sample.

    Raises:
        InvalidInputError: if ``initial`` is within the goal guard, or the
            controller cannot be evaluated at the initial state.
    """
    cfg = cfg or SimulationConfig()
    ctrl_cfg = ctrl_cfg or ControllerConfig()
    geom = geom or RobotGeometry(0.1, 0.1)
    loop = _Loop(cfg, ctrl_cfg, geom)
    if initial.e < E_SINGULAR:
        raise InvalidInputError(f"initial distance e={initial.e} is inside the goal guard")
    start = initial.as_tuple() if loop.polar_frame else _cartesian_tuple(*initial.as_tuple())
    try:
        current = loop.sample(0, start, False)
    except (SingularityError, PositioningError) as exc:
        raise InvalidInputError(f"controller undefined at the initial state: {exc}") from exc

    samples = [current]
    n_max = math.floor(cfg.t_max / cfg.dt + 1e-9)
    reason, message = StopReason.TIME_BUDGET, ""
    while True:
        if loop.at_goal(current):
            reason = StopReason.AT_GOAL
            break
        if current.index >= n_max:
            break
        try:
            current = loop.advance(current)
        except SingularityError as exc:
            reason, message = StopReason.SINGULARITY, str(exc)
            break
        except PositioningError as exc:
            reason, message = StopReason.FEEDBACK_FAILURE, str(exc)
            break
        samples.append(current)
    return Trajectory(samples, reason, message)


Job = tuple[PolarState, SimulationConfig, ControllerConfig, RobotGeometry]


def _run_job(job: Job) -> Trajectory | Exception:
    try:
        return run_scenario(*job)
    except Exception as exc:  # isolate per-scenario failures
        return exc


def run_jobs(jobs: Sequence[Job], parallelism: int = 1) -> list[Trajectory | Exception]:
    """Run independent scenarios, each with its own configuration.

    Results come back in input order.  A scenario that raises contributes its
    exception object instead of a trajectory, so one bad entry never aborts
    the batch.
    """
    if parallelism < 1:
        raise InvalidInputError(f"parallelism must be at least 1, got {parallelism}")
    jobs = list(jobs)
    if parallelism == 1 or len(jobs) <= 1:
        return [_run_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(parallelism, len(jobs))) as pool:
        return list(pool.map(_run_job, jobs))


def run_batch(
    scenarios: Sequence[PolarState],
    cfg: SimulationConfig | None = None,
    ctrl_cfg: ControllerConfig | None = None,
    geom: RobotGeometry | None = None,
    parallelism: int = 1,
) -> list[Trajectory | Exception]:
    """Run several initial conditions under one configuration.

    Output order follows ``scenarios`` and is bitwise independent of
    ``parallelism``.
    """
    cfg = cfg or SimulationConfig()
    ctrl_cfg = ctrl_cfg or ControllerConfig()
    geom = geom or RobotGeometry(0.1, 0.1)
    return run_jobs([(p, cfg, ctrl_cfg, geom) for p in scenarios], parallelism)
