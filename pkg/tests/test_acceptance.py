"""Acceptance gate: nine end-to-end criteria at their stated tolerances.

Each test records a single ``PASS``/``FAIL`` line (shown in the
"acceptance criteria" section of the pytest summary) and then asserts.
Run just this gate with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time

import numpy as np
import pytest

from articulated_parking import (
    ArticulationSingularityError,
    AtGoalSingularityError,
    BeaconArray,
    BeaconFeedback,
    CartesianState,
    ControlCommand,
    ControllerConfig,
    Frame,
    Gains,
    Mode,
    PolarState,
    RobotGeometry,
    SimulationConfig,
    StopReason,
    bearings_from_pose,
    closed_loop_vdot,
    control_law,
    in_valid_region,
    law_of_sines_residuals,
    lyapunov_value,
    polar_derivative,
    polar_from_cartesian,
    pose_from_bearings,
    rk4_step,
    run_scenario,
    solve_range,
    solve_zeta1,
    BearingMeasurement,
)

from conftest import ACCEPTANCE_LINES, PARKING_STARTS

PI = math.pi
GEOM = RobotGeometry(0.1, 0.1)
GAINS = Gains(1.0, 1.0, 1.0, 0.01)
CTRL = ControllerConfig(GAINS)


def record(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"
    print(ACCEPTANCE_LINES[number])
    assert ok, detail


def _timed_runs():
    out = {}
    for name, start in PARKING_STARTS.items():
        t0 = time.perf_counter()
        traj = run_scenario(PolarState(*start), SimulationConfig(dt=0.01, t_max=100.0), CTRL, GEOM)
        out[name] = (traj, time.perf_counter() - t0)
    return out


@pytest.fixture(scope="module")
def timed_runs():
    return _timed_runs()


def test_1_scenario_reproduction(timed_runs):
    parts, ok = [], True
    for name, (traj, wall) in timed_runs.items():
        f = traj.final.polar
        good = (
            traj.stop_reason is StopReason.AT_GOAL
            and traj.final.t <= 100.0
            and f.e < 0.01
            and abs(f.theta1) < 0.05
            and abs(f.theta2) < 0.05
            and wall < 1.0
        )
        ok &= good
        parts.append(f"{name} {traj.stop_reason.value} t={traj.final.t:.2f}s wall={wall:.2f}s")
    record(1, "four parking scenarios reach the goal", ok, "; ".join(parts))


def _sign_changes(values: np.ndarray) -> int:
    signs = np.sign(values[values != 0])
    return int(np.count_nonzero(np.diff(signs)))


def test_2_backward_start_signature(timed_runs):
    traj, _ = timed_runs["backward"]
    v = traj.column("v")
    changes = _sign_changes(v)
    ok = v[0] == -5.0 and changes == 1
    record(2, "backward start", ok, f"v(0)={v[0]:.6f}, sign changes of v={changes}")


def test_3_lyapunov_monotonicity(timed_runs):
    worst, ok = [], True
    for name, (traj, _) in timed_runs.items():
        V = traj.column("V")
        normal = np.array([s.mode is Mode.NORMAL for s in traj.samples[:-1]])
        dV = np.diff(V)[normal]
        limit = 1e-6 * V[0]
        ok &= bool(np.all(dV <= limit))
        worst.append(f"{name} max dV/V0={dV.max() / V[0]:.2e}")
    record(3, "V non-increasing per step in NORMAL mode", ok, "; ".join(worst))


def test_4_vdot_identity():
    rng = np.random.default_rng(20240601)
    ratios = []
    for _ in range(100):
        p = PolarState(rng.uniform(0.5, 5.0), *rng.uniform(-PI + 0.1, PI - 0.1, 2), rng.uniform(-1.2, 1.2))
        u = control_law(p, GAINS, GEOM)
        target = closed_loop_vdot(p, GAINS, GEOM)
        V0 = lyapunov_value(p, GAINS)
        errs = [abs((lyapunov_value(rk4_step(p, u, GEOM, h), GAINS) - V0) / h - target) for h in (1e-3, 1e-4, 1e-5)]
        ratios += [errs[0] / errs[1], errs[1] / errs[2]]
    ratios = np.array(ratios)
    ok = bool(np.all(np.abs(ratios - 10) <= 2))
    record(4, "dV/dt = -(v^2 + omega^2), first-order finite differences", ok,
           f"error ratios in [{ratios.min():.3f}, {ratios.max():.3f}] over 100 states")


def test_5_frame_equivalence():
    start = PolarState(*PARKING_STARTS["forward"])
    finals = {}
    for frame in (Frame.CARTESIAN, Frame.POLAR):
        traj = run_scenario(start, SimulationConfig(dt=1e-3, frame=frame), CTRL, GEOM)
        finals[frame] = (traj.final.polar, len(traj.samples), traj.stop_reason)
    a, na, ra = finals[Frame.CARTESIAN]
    b, nb, rb = finals[Frame.POLAR]
    diff = max(abs(a.e - b.e), abs(a.theta1 - b.theta1), abs(a.theta2 - b.theta2))
    ok = diff < 1e-4 and ra is rb is StopReason.AT_GOAL
    record(5, "Cartesian and polar integration agree", ok,
           f"max final difference {diff:.2e} ({na} vs {nb} samples)")


LAYOUTS = (
    BeaconArray((0, 0.4), (0, 0.2), (0, 0)),
    BeaconArray((1, 1), (1, 0), (1, -1)),
    BeaconArray((0.5, 1.0), (1.0, 0.1), (0.4, -1.2)),
    BeaconArray((2, 2), (1, 0.5), (2.5, -1)),
)


def test_6_triangulation_round_trip():
    rng = np.random.default_rng(7)
    pose_err = resid = 0.0
    count = 0
    while count < 1000:
        layout = LAYOUTS[count % len(LAYOUTS)]
        pose = (rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(-PI, PI))
        if not in_valid_region(pose, layout):
            continue
        m = bearings_from_pose(pose, layout)
        sol = pose_from_bearings(m, layout)
        pose_err = max(
            pose_err,
            abs(sol.pose[0] - pose[0]),
            abs(sol.pose[1] - pose[1]),
            abs(math.remainder(sol.pose[2] - pose[2], 2 * PI)),
        )
        resid = max(resid, *map(abs, law_of_sines_residuals(m, sol.zeta1, sol.d, layout)))
        count += 1
    worked = BearingMeasurement(math.atan(0.2), math.atan(0.2), 0.0)
    z = solve_zeta1(worked, LAYOUTS[0])
    d = solve_range(worked, z, LAYOUTS[0])
    ok = pose_err < 1e-9 and resid < 1e-9 and abs(z - PI / 2) < 1e-12 and round(d, 6) == 1.0
    record(6, "triangulation round trip", ok,
           f"1000 poses: max pose error {pose_err:.1e}, max residual {resid:.1e}; worked case zeta1={z:.6f}, d={d:.6f}")


def test_7_deadlock_handling():
    start = PolarState(5.0, PI / 2, 0.0, 0.0)
    bare = run_scenario(start, ctrl_cfg=ControllerConfig(GAINS, deadlock_handling=False), geom=GEOM)
    drift = float(np.max(np.abs(bare.column("theta1") - PI / 2)))
    e = bare.column("e")
    shrinking = bool(np.all(np.diff(e) < 0)) and e[-1] < e[0]
    kicked = run_scenario(start, ctrl_cfg=CTRL, geom=GEOM)
    ok = drift < 1e-9 and shrinking and kicked.stop_reason is StopReason.AT_GOAL
    record(7, "deadlock", ok,
           f"no kick: max |theta1 - pi/2|={drift:.1e}, e {e[0]:.2f} -> {e[-1]:.2e} ({bare.stop_reason.value}); "
           f"kick: {kicked.stop_reason.value} at t={kicked.final.t:.2f}s")


def test_8_singularity_guards():
    checks = {}
    # Articulation: drive phi towards pi with equal body lengths.
    for label, state in (("cartesian", CartesianState(-1, 0.5, 0.2, 3.0)), ("polar", PolarState(2, 0.3, 0.2, 3.0))):
        finite, tripped = True, False
        try:
            for _ in range(10_000):
                state = rk4_step(state, ControlCommand(0.3, 1.0), GEOM, 1e-3)
                finite &= all(math.isfinite(c) for c in state.as_tuple())
        except ArticulationSingularityError:
            tripped = True
        checks[f"fold/{label}"] = tripped and finite
    # At goal: every entry point refuses e below the guard.
    near = PolarState(1e-10, 0.1, 0.1, 0.0)
    for label, call in (
        ("law", lambda: control_law(near, GAINS, GEOM)),
        ("rates", lambda: polar_derivative(near, ControlCommand(1, 0), GEOM)),
        ("convert", lambda: polar_from_cartesian(CartesianState(1e-10, 0, 0, 0))),
    ):
        try:
            call()
            checks[f"goal/{label}"] = False
        except AtGoalSingularityError:
            checks[f"goal/{label}"] = True
    ok = all(checks.values())
    record(8, "singularity guards", ok, ", ".join(f"{k}={'ok' if v else 'MISSED'}" for k, v in checks.items()))


def test_9_noise_robustness():
    cfg = SimulationConfig(feedback=BeaconFeedback(sigma=1e-3, seed=0))
    traj = run_scenario(PolarState(*PARKING_STARTS["forward"]), cfg, CTRL, GEOM)
    e = traj.column("e")
    ok = traj.stop_reason in (StopReason.AT_GOAL, StopReason.TIME_BUDGET) and e[-1] < 0.05
    record(9, "beacon feedback with 1e-3 rad noise (regression check)", ok,
           f"{traj.stop_reason.value} at t={traj.final.t:.2f}s, final e={e[-1]:.4f}, min e={e.min():.4f}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
