import math

import numpy as np
import pytest

from fs2d.dataset import (HEADER, FormatError, decode_polar_scan, encode_polar_scan,
                          export_trajectory, import_trajectory, load_ground_truth,
                          load_matrix_text, load_polar_scan, load_scan_directory,
                          load_scene_spec, save_ground_truth, save_matrix_text, save_polar_scan,
                          scene_spec_from_dict)
from fs2d.geometry import Pose2D, Trajectory
from fs2d.grid import PolarScan


def f32_scan(rng, a=16, r=20):
    az = 2 * np.pi * np.arange(a) / a
    inten = rng.uniform(0, 1, (a, r)).astype(np.float32).astype(np.float64)
    return PolarScan(az, inten, 0.25, 1.5)


def test_scan_round_trip(rng, tmp_path):
    scan = f32_scan(rng)
    save_polar_scan(scan, tmp_path / "a.fs2d")
    assert load_polar_scan(tmp_path / "a.fs2d") == scan
    assert len(encode_polar_scan(scan)) == HEADER.size + 8 * 16 + 4 * 16 * 20


def test_scan_decode_errors(rng):
    buf = encode_polar_scan(f32_scan(rng))
    with pytest.raises(FormatError, match="byte 0"):
        decode_polar_scan(b"X" + buf[1:])
    with pytest.raises(FormatError):
        decode_polar_scan(buf[:-4])
    with pytest.raises(FormatError):
        decode_polar_scan(buf[:10])
    bad = bytearray(buf)
    bad[-4:] = np.array([-1.0], "<f4").tobytes()
    with pytest.raises(FormatError, match="byte"):
        decode_polar_scan(bytes(bad))


def test_scan_directory(rng, tmp_path):
    for k in (2, 0, 1):
        save_polar_scan(f32_scan(rng), tmp_path / f"s{k}.fs2d")
    assert len(load_scan_directory(tmp_path)) == 3
    with pytest.raises(FileNotFoundError):
        load_scan_directory(tmp_path / "missing")


def test_trajectory_csv_round_trip(tmp_path):
    t = Trajectory([Pose2D(0.1, -2.0 / 3.0, 0.3, 0.0), Pose2D(1e-17, 5.0, -3.0, 0.25)],
                   [False, True])
    export_trajectory(t, tmp_path / "t.csv")
    back = import_trajectory(tmp_path / "t.csv")
    assert back.poses == t.poses and back.outliers == t.outliers


def test_trajectory_json(tmp_path):
    t = Trajectory([Pose2D(0, 0, 0, 0), Pose2D(1, 2, 0.1, 1)])
    export_trajectory(t, tmp_path / "t.json", fmt="json")
    assert '"LineString"' in (tmp_path / "t.json").read_text()
    with pytest.raises(ValueError):
        export_trajectory(t, tmp_path / "t.x", fmt="xml")


def test_ground_truth(tmp_path):
    poses = [Pose2D(1, 2, 0.5, 0.0), Pose2D(2, 3, 0.6, 0.25)]
    save_ground_truth(poses, tmp_path / "gt.csv")
    assert load_ground_truth(tmp_path / "gt.csv") == poses
    (tmp_path / "bad.csv").write_text("timestamp,x,y,heading\n0,1,2,3\n0,1,2,x\n")
    with pytest.raises(FormatError, match="line 3"):
        load_ground_truth(tmp_path / "bad.csv")
    (tmp_path / "order.csv").write_text("timestamp,x,y,heading\n1,1,2,3\n0,1,2,3\n")
    with pytest.raises(FormatError, match="line 3"):
        load_ground_truth(tmp_path / "order.csv")


def test_matrix_text(rng, tmp_path):
    m = rng.normal(size=(5, 7))
    save_matrix_text(m, tmp_path / "m.txt", "note")
    assert (tmp_path / "m.txt").read_text().startswith("# 5 7 note\n")
    np.testing.assert_array_equal(load_matrix_text(tmp_path / "m.txt"), m)


SCENE = """
seed = 3
frames = 4
[ego_motion]
dx = 1.0
theta = 0.01
[[static]]
kind = "wall"
x = 10.0
length = 5.0
[[moving]]
kind = "point"
x = 5.0
motion = { dx = 0.5 }
[[moving]]
kind = "block"
y = 8.0
length = 4.0
width = 2.0
motion = { dx = -0.5 }
"""


def test_scene_spec(tmp_path):
    (tmp_path / "s.toml").write_text(SCENE)
    spec, frames = load_scene_spec(tmp_path / "s.toml")
    assert frames == 4 and spec.seed == 3 and len(spec.moving_objects) == 2
    assert spec.ego_motion.dx == 1.0 and math.isclose(spec.ego_motion.theta, 0.01)


@pytest.mark.parametrize("doc,field", [({"sede": 1}, "sede"),
                                       ({"static": [{"kind": "wall", "lenght": 2}]}, "lenght"),
                                       ({"noise": {"density": 0.1}}, "density"),
                                       ({"moving": [{"kind": "point", "motion": {"dz": 1}}]}, "dz")])
def test_scene_spec_names_bad_field(doc, field):
    with pytest.raises(FormatError, match=field):
        scene_spec_from_dict(doc)


def test_scene_spec_bad_values():
    with pytest.raises(FormatError):
        scene_spec_from_dict({"static": [{"kind": "blob"}]})
    with pytest.raises(FormatError):
        scene_spec_from_dict({"frames": 0})


def test_hand_written_fixture(tmp_path):
    import struct
    head = b"FS2DSCAN" + struct.pack("<HHIdd", 1, 2, 4, 0.5, 12.25) + bytes(32)
    az = struct.pack("<2d", 0.0, math.pi)
    vals = [0.0, 1.0, 2.5, 0.25, 4.0, 0.5, 0.0, 8.0]
    path = tmp_path / "fixture.fs2d"
    path.write_bytes(head + az + struct.pack("<8f", *vals))
    scan = load_polar_scan(path)
    assert scan.range_resolution == 0.5 and scan.timestamp == 12.25
    assert list(scan.azimuth_angles) == [0.0, math.pi]
    assert scan.intensities.tolist() == [vals[:4], vals[4:]]


def test_truncated_payload_names_sizes(rng):
    buf = encode_polar_scan(f32_scan(rng))
    with pytest.raises(FormatError, match=f"expected {len(buf)} .* got {len(buf) - 3}"):
        decode_polar_scan(buf[:-3])


def test_ground_truth_fixture_and_empty(tmp_path):
    (tmp_path / "gt.csv").write_text("timestamp,x,y,heading\n0.0,1,2,0.1\n0.5,2,3,0.2\n1.0,3,4,0.3\n")
    recs = load_ground_truth(tmp_path / "gt.csv")
    assert [(r.timestamp, r.x, r.y, r.heading) for r in recs] == [
        (0.0, 1.0, 2.0, 0.1), (0.5, 2.0, 3.0, 0.2), (1.0, 3.0, 4.0, 0.3)]
    (tmp_path / "empty.csv").write_text("")
    assert load_ground_truth(tmp_path / "empty.csv") == []


def test_two_pose_export_layout(tmp_path):
    t = Trajectory([Pose2D(0, 0, 0, 0.0), Pose2D(1, 0, 0, 1.0)], [False, True])
    export_trajectory(t, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == 3 and lines[0] == "timestamp,x,y,heading,outlier"
    assert lines[1].endswith(",0") and lines[2].endswith(",1")
