"""Parking control of a center-articulated mobile robot.

Kinematics in Cartesian and error-vector polar coordinates, a Lyapunov-based
parking law with a deadlock escape, bearing-only beacon triangulation, and a
fixed-step closed-loop simulator with CSV/SVG output and a CLI.
"""

from .controller import (
    ControllerConfig,
    ControllerWarning,
    Gains,
    Mode,
    closed_loop_vdot,
    control_law,
    control_with_deadlock_handling,
    detect_deadlock,
    lyapunov_value,
)
from .errors import (
    ArticulationSingularityError,
    AtGoalSingularityError,
    DegenerateGeometryError,
    InconsistentMeasurementError,
    IndeterminateConfigurationError,
    InvalidInputError,
    ParkingError,
    PositioningError,
    SingularityError,
)
from .model import (
    E_SINGULAR,
    CartesianState,
    ControlCommand,
    PolarState,
    RobotGeometry,
    articulation_factor,
    cartesian_derivative,
    cartesian_from_polar,
    polar_derivative,
    polar_from_cartesian,
    wrap_angle,
)
from .output import CSV_HEADER, read_trajectory_csv, render_trajectory_svg, write_trajectory_csv
from .positioning import (
    DEFAULT_BEACONS,
    BeaconArray,
    BearingMeasurement,
    TriangulationSolution,
    add_bearing_noise,
    bearings_from_pose,
    in_valid_region,
    law_of_sines_residuals,
    polar_config_from_pose,
    pose_from_bearings,
    solve_range,
    solve_zeta1,
)
from .scenario import ScenarioError, ScenarioFile, load_bundled, parse_scenario, parse_scenario_file
from .sim import (
    BeaconFeedback,
    Frame,
    GroundTruth,
    Integrator,
    SimulationConfig,
    StopReason,
    Trajectory,
    TrajectorySample,
    euler_step,
    rk4_step,
    run_batch,
    run_jobs,
    run_scenario,
    step_closed_loop,
)

__version__ = "0.1.0"
