import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fs2d.geometry import (IDENTITY, Pose2D, RigidMotion2D, Trajectory, compose, invert,
                           normalize_angle, relative_motion, transform_points)

coord = st.floats(-100, 100, allow_nan=False)
angle = st.floats(-10, 10, allow_nan=False)
motions = st.builds(RigidMotion2D, coord, coord, angle)


def close(a: RigidMotion2D, b: RigidMotion2D, tol=1e-9):
    return (abs(a.dx - b.dx) < tol and abs(a.dy - b.dy) < tol
            and abs(normalize_angle(a.theta - b.theta)) < tol)


@given(angle)
def test_normalize_angle_range(a):
    w = normalize_angle(a)
    assert -math.pi < w <= math.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)


def test_normalize_angle_pi():
    assert normalize_angle(math.pi) == math.pi
    assert normalize_angle(-math.pi) == math.pi


@settings(max_examples=200)
@given(motions)
def test_inverse(m):
    assert close(m.then(invert(m)), IDENTITY)
    assert close(invert(m).then(m), IDENTITY)


@settings(max_examples=200)
@given(motions, motions, motions)
def test_associative(a, b, c):
    assert close(a.then(b).then(c), a.then(b.then(c)), 1e-7)


@given(motions, motions)
def test_matches_homogeneous_matrices(a, b):
    np.testing.assert_allclose(a.then(b).matrix(), a.matrix() @ b.matrix(), atol=1e-9)


@given(motions)
def test_relative_motion_of_compose(m):
    p = Pose2D(3.0, -2.0, 0.4)
    assert close(relative_motion(p, compose(p, m)), m, 1e-8)


def test_transform_points():
    m = RigidMotion2D(1.0, 2.0, math.pi / 2)
    np.testing.assert_allclose(transform_points(m, np.array([[1.0, 0.0]])), [[1.0, 3.0]], atol=1e-12)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        RigidMotion2D(float("nan"), 0, 0)
    with pytest.raises(ValueError):
        Pose2D(0, float("inf"))


def test_trajectory_monotonic_time():
    t = Trajectory([Pose2D(timestamp=0.0)])
    t.append(Pose2D(timestamp=1.0))
    with pytest.raises(ValueError):
        t.append(Pose2D(timestamp=1.0))
    with pytest.raises(ValueError):
        Trajectory([Pose2D(timestamp=1.0), Pose2D(timestamp=0.5)])
    assert len(t) == 2 and t.positions().shape == (2, 2)


def test_compose_examples():
    origin = Pose2D(1.0, 2.0, 0.3)
    assert compose(origin, IDENTITY) == origin
    p = compose(Pose2D(0, 0, math.pi / 2), RigidMotion2D(1, 0, 0))
    assert (p.x, p.y, p.heading) == pytest.approx((0.0, 1.0, math.pi / 2), abs=1e-15)


def test_invert_examples():
    assert invert(IDENTITY) == IDENTITY
    assert invert(RigidMotion2D(1, 0, 0)) == RigidMotion2D(-1, 0, 0)


@settings(max_examples=100)
@given(motions)
def test_double_inverse_and_round_trip(m):
    assert close(invert(invert(m)), m)
    start = Pose2D(-4.0, 7.0, 2.0)
    back = compose(compose(start, m), invert(m))
    assert abs(back.x - start.x) < 1e-12 * max(1, abs(m.dx) + abs(m.dy))
    assert abs(normalize_angle(back.heading - start.heading)) < 1e-12
