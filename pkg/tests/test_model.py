"""Kinematics, frame conversions and state validation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from articulated_parking import (
    E_SINGULAR,
    ArticulationSingularityError,
    AtGoalSingularityError,
    CartesianState,
    ControlCommand,
    InvalidInputError,
    PolarState,
    RobotGeometry,
    articulation_factor,
    cartesian_derivative,
    cartesian_from_polar,
    polar_derivative,
    polar_from_cartesian,
    wrap_angle,
)

angles = st.floats(-math.pi + 1e-6, math.pi - 1e-6)
coords = st.floats(-50, 50).filter(lambda c: abs(c) > 1e-3)


class TestWrapAngle:
    @pytest.mark.parametrize(
        "raw, expected",
        [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi, math.pi), (2 * math.pi + 0.5, 0.5)],
    )
    def test_known_values(self, raw, expected):
        assert wrap_angle(raw) == pytest.approx(expected, abs=1e-15)

    @given(st.floats(-1e4, 1e4))
    def test_range_and_equivalence(self, a):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-9)
        assert math.sin(w) == pytest.approx(math.sin(a), abs=1e-9)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(InvalidInputError):
            wrap_angle(bad)


class TestStates:
    def test_polar_wraps_pi_to_upper_boundary(self):
        assert PolarState(5, -math.pi, 3.141592653589793, 0).theta1 == math.pi

    def test_negative_distance_rejected(self):
        with pytest.raises(InvalidInputError, match="non-negative"):
            PolarState(-0.1, 0, 0, 0)

    def test_nan_rejected(self):
        with pytest.raises(InvalidInputError):
            CartesianState(0.0, math.nan, 0.0, 0.0)

    def test_nonpositive_lengths_rejected(self):
        with pytest.raises(InvalidInputError):
            RobotGeometry(0.0, 0.1)

    def test_default_guard_scales_with_size(self):
        assert RobotGeometry(0.1, 0.3).articulation_guard == pytest.approx(4e-7)

    def test_singularity_reachable(self):
        assert RobotGeometry(0.2, 0.1).singularity_reachable
        assert not RobotGeometry(0.1, 0.2).singularity_reachable


class TestConversions:
    def test_demonstration_start_position(self):
        # (5, -pi/4, *, *) sits at distance 5 up and to the left of the goal.
        c = cartesian_from_polar(PolarState(5, -math.pi / 4, -math.pi / 4, 0))
        assert (c.x, c.y, c.psi) == pytest.approx((-3.5355339059, 3.5355339059, 0.0))

    def test_robot_behind_goal_on_axis(self):
        p = polar_from_cartesian(CartesianState(-2.0, 0.0, 0.0, 0.1))
        assert p.as_tuple() == pytest.approx((2.0, 0.0, 0.0, 0.1))

    def test_at_goal_is_singular(self):
        with pytest.raises(AtGoalSingularityError):
            polar_from_cartesian(CartesianState(E_SINGULAR / 2, 0, 0, 0))

    @given(coords, coords, angles, angles)
    def test_round_trip(self, x, y, psi, phi):
        back = cartesian_from_polar(polar_from_cartesian(CartesianState(x, y, psi, phi)))
        assert back.x == pytest.approx(x, abs=1e-9)
        assert back.y == pytest.approx(y, abs=1e-9)
        assert wrap_angle(back.psi - psi) == pytest.approx(0, abs=1e-9)
        assert back.phi == phi


class TestDerivatives:
    def test_polar_rates_against_symbolic_oracle(self):
        rates = polar_derivative(PolarState(1.5, 0.7, -0.4, 0.3), ControlCommand(0.7, -0.3), RobotGeometry(0.1, 0.1))
        expected = (-0.64474269580201956, -0.18172855974403690, -1.0862488080314731, -0.3)
        assert rates == pytest.approx(expected, rel=1e-13)

    def test_cartesian_rates_against_symbolic_oracle(self):
        rates = cartesian_derivative(
            CartesianState(0.0, 0.0, 0.5, -0.4), ControlCommand(0.7, -0.3), RobotGeometry(0.1, 0.2)
        )
        expected = (0.61430779332326090, 0.33559787702294210, -1.1386028579988181, -0.3)
        assert rates == pytest.approx(expected, rel=1e-13)

    @settings(max_examples=200)
    @given(coords, coords, angles, st.floats(-2.5, 2.5), st.floats(-2, 2), st.floats(-2, 2))
    def test_frames_describe_the_same_motion(self, x, y, psi, phi, v, w):
        """Chain rule: polar rates equal the Jacobian of the conversion times the Cartesian rates."""
        geom = RobotGeometry(0.1, 0.1)
        c = CartesianState(x, y, psi, phi)
        u = ControlCommand(v, w)
        xd, yd, psid, phid = cartesian_derivative(c, u, geom)
        e2 = x * x + y * y
        e_dot = (x * xd + y * yd) / math.sqrt(e2)
        t1_dot = (x * yd - y * xd) / e2
        expected = (e_dot, t1_dot, t1_dot - psid, phid)
        got = polar_derivative(polar_from_cartesian(c), u, geom)
        np.testing.assert_allclose(got, expected, rtol=1e-9, atol=1e-9)

    def test_folded_robot_is_singular(self):
        geom = RobotGeometry(0.1, 0.1)
        with pytest.raises(ArticulationSingularityError):
            articulation_factor(math.pi, geom)
        with pytest.raises(ArticulationSingularityError):
            cartesian_derivative(CartesianState(1, 1, 0, math.pi), ControlCommand(1, 0), geom)

    def test_polar_rates_guard_distance(self):
        with pytest.raises(AtGoalSingularityError):
            polar_derivative(PolarState(0.0, 0, 0, 0), ControlCommand(1, 0), RobotGeometry(0.1, 0.1))

    def test_articulation_factor_value(self):
        assert articulation_factor(math.pi / 3, RobotGeometry(0.2, 0.1)) == pytest.approx(0.2)
