import math

import numpy as np
import pytest

from fs2d.geometry import Pose2D, RigidMotion2D
from fs2d.synth import (MovingObject, NoiseSpec, SceneSpec, SensorSpec, Shape, add_ghost_beams,
                        path_clearance, random_structured_scene, salt_and_pepper, synth_scene)


def test_salt_and_pepper_fraction():
    rng = np.random.default_rng(0)
    out, mask = salt_and_pepper(np.full((400, 512), 0.3), 0.05, rng)
    frac = mask.mean()
    assert 0.045 <= frac <= 0.055
    assert set(np.unique(out[mask])) <= {0.0, 1.0}


def test_ghost_beams_are_full_range():
    out = add_ghost_beams(np.zeros((50, 30)), 2, np.random.default_rng(1))
    lit = np.flatnonzero(out.min(axis=1) > 0)
    assert 1 <= lit.size <= 2


def test_point_target_lands_at_range_and_bearing():
    spec = SceneSpec(static_targets=(Shape("point", 20.0, 20.0),))
    scan = synth_scene(spec, 1).scans[0]
    a, r = np.unravel_index(np.argmax(scan.intensities), scan.intensities.shape)
    assert scan.azimuth_angles[a] == pytest.approx(math.pi / 4, abs=2 * math.pi / 400)
    assert r * scan.range_resolution == pytest.approx(math.hypot(20, 20), abs=0.25)


def test_wall_occludes_point_behind_it():
    wall = Shape("wall", 10.0, 0.0, math.pi / 2, length=10.0)
    behind = Shape("point", 20.0, 0.0)
    scan = synth_scene(SceneSpec(static_targets=(wall, behind)), 1).scans[0]
    bins = scan.intensities[0]
    assert bins[int(10 / 0.25)] > 0.5
    assert bins[int(20 / 0.25)] < 1e-3


def test_ego_motion_truth_and_timestamps():
    m = RigidMotion2D(1.0, 0.5, 0.1)
    seq = synth_scene(SceneSpec(static_targets=(Shape("point", 5.0, 5.0),), ego_motion=m), 3)
    assert [s.timestamp for s in seq.scans] == [0.0, 0.25, 0.5]
    p = seq.truth.poses[1]
    assert (p.x, p.y, p.heading) == pytest.approx((1.0, 0.5, 0.1))


def test_moving_object_history():
    car = Shape("block", 10.0, 0.0, length=4.0, width=2.0)
    seq = synth_scene(SceneSpec(moving_objects=(MovingObject(car, RigidMotion2D(1.0, 0, 0)),)), 3)
    assert [p.x for p in seq.object_poses[0]] == [10.0, 11.0, 12.0]


def test_deterministic_under_seed():
    spec = SceneSpec(static_targets=(Shape("wall", 10, 5, 0.3, length=8),),
                     noise=NoiseSpec(0.05, 2, 0.01), seed=9)
    a, b = synth_scene(spec, 2), synth_scene(spec, 2)
    for x, y in zip(a.scans, b.scans):
        assert x == y


def test_validation():
    with pytest.raises(ValueError):
        Shape("blob")
    with pytest.raises(ValueError):
        NoiseSpec(salt_pepper_density=2)
    with pytest.raises(ValueError):
        SensorSpec(azimuth_count=1)
    with pytest.raises(ValueError):
        synth_scene(SceneSpec(), 0)


def test_far_mover_warns():
    far = MovingObject(Shape("point", 500.0, 0.0))
    with pytest.warns(UserWarning):
        synth_scene(SceneSpec(moving_objects=(far,)), 1)


def test_random_scene_keeps_clear_of_path():
    rng = np.random.default_rng(3)
    path = [(0.0, 0.0), (15.0, -4.0)]
    for s in random_structured_scene(rng, path=path, clearance=3.0):
        if s.kind != "point":
            assert path_clearance(s, path) >= 3.0
    assert Pose2D().x == 0.0


def test_static_scene_repeats_exactly():
    seq = synth_scene(SceneSpec(static_targets=(Shape("point", 12.0, -7.0),)), 3)
    assert seq.scans[0].intensities.tobytes() == seq.scans[2].intensities.tobytes()


def test_forward_motion_of_one_cell():
    from fs2d.grid import GridConfig, polar_to_cartesian
    from fs2d.spectral import argmax_shift, phase_correlate
    wall = Shape("wall", 20.0, 0.0, math.pi / 2, length=30.0)
    seq = synth_scene(SceneSpec(static_targets=(wall,), ego_motion=RigidMotion2D(0.75, 0, 0)), 3)
    cfg = GridConfig(cell_size=0.75)
    grids = [polar_to_cartesian(s, cfg).values for s in seq.scans]
    # the sensor advances along +x, so the wall comes one column closer per frame
    assert argmax_shift(phase_correlate(grids[0], grids[1])) == (0, -1)
    assert argmax_shift(phase_correlate(grids[1], grids[2])) == (0, -1)
