"""File formats: native scans, ground truth, trajectories, scene specs, matrices.

Native scan file (little-endian)::

    offset  size  field
    0       8     magic b"FS2DSCAN"
    8       2     u16 format version (1)
    10      2     u16 azimuth_count A
    12      4     u32 range_bin_count R
    16      8     f64 range_resolution [m]
    24      8     f64 timestamp [s]
    32      32    reserved, zero
    64      8*A   f64 azimuth angles [rad], strictly ascending in [0, 2pi)
    64+8A   4*A*R f32 intensities, row-major (azimuth, range)

Intensities are stored as float32; a scan whose values are not representable
in float32 does not round-trip exactly.

Ground truth CSV: header ``timestamp,x,y,heading`` (seconds, meters, radians).
Trajectory CSV: header ``timestamp,x,y,heading,outlier`` with outlier as 0/1.
Floats are written with ``repr`` so they read back bit-identically.
"""
from __future__ import annotations

import csv
import json
import math
import struct
import sys
from pathlib import Path

import numpy as np

from .geometry import Pose2D, RigidMotion2D, Trajectory
from .grid import PolarScan
from .synth import MovingObject, NoiseSpec, SceneSpec, SensorSpec, Shape, random_structured_scene

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on older interpreters
    import tomli as tomllib

MAGIC = b"FS2DSCAN"
VERSION = 1
HEADER = struct.Struct("<8sHHIdd32x")
assert HEADER.size == 64

GT_HEADER = ["timestamp", "x", "y", "heading"]
TRAJ_HEADER = ["timestamp", "x", "y", "heading", "outlier"]


class FormatError(ValueError):
    """Malformed input file. ``offset`` is a byte offset or ``line`` a 1-based line."""

    def __init__(self, msg: str, offset: int | None = None, line: int | None = None):
        where = f" at byte {offset}" if offset is not None else f" at line {line}" if line else ""
        super().__init__(f"{msg}{where}")
        self.offset = offset
        self.line = line


# -- scans -------------------------------------------------------------------

def encode_polar_scan(scan: PolarScan) -> bytes:
    a, r = scan.intensities.shape
    if a > 0xFFFF or r > 0xFFFFFFFF:
        raise ValueError("scan dimensions exceed the header field widths")
    head = HEADER.pack(MAGIC, VERSION, a, r, scan.range_resolution, scan.timestamp)
    return (head + scan.azimuth_angles.astype("<f8").tobytes()
            + scan.intensities.astype("<f4").tobytes())


def decode_polar_scan(buf: bytes) -> PolarScan:
    if len(buf) < HEADER.size:
        raise FormatError(f"truncated header: expected {HEADER.size} bytes, got {len(buf)}", offset=len(buf))
    magic, version, a, r, res, ts = HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}", offset=8)
    if a == 0 or r == 0:
        raise FormatError("azimuth and range-bin counts must be positive", offset=10 if a == 0 else 12)
    if not (math.isfinite(res) and res > 0):
        raise FormatError(f"range resolution must be positive, got {res}", offset=16)
    if not math.isfinite(ts):
        raise FormatError("timestamp is not finite", offset=24)
    expected = HEADER.size + 8 * a + 4 * a * r
    if len(buf) != expected:
        raise FormatError(f"payload size mismatch: expected {expected} bytes in total for "
                          f"{a} x {r}, got {len(buf)}", offset=min(len(buf), expected))
    az = np.frombuffer(buf, "<f8", a, HEADER.size).astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(az) | (az < 0) | (az >= 2 * np.pi))
    if bad.size:
        raise FormatError(f"azimuth {bad[0]} out of [0, 2pi)", offset=HEADER.size + 8 * int(bad[0]))
    steps = np.flatnonzero(np.diff(az) <= 0)
    if steps.size:
        k = int(steps[0]) + 1
        raise FormatError(f"azimuths not strictly ascending at index {k}", offset=HEADER.size + 8 * k)
    off = HEADER.size + 8 * a
    inten = np.frombuffer(buf, "<f4", a * r, off).astype(np.float64).reshape(a, r)
    bad = np.flatnonzero(~np.isfinite(inten.ravel()) | (inten.ravel() < 0))
    if bad.size:
        raise FormatError("intensities must be finite and non-negative", offset=off + 4 * int(bad[0]))
    return PolarScan(az, inten, float(res), float(ts))


def save_polar_scan(scan: PolarScan, path) -> None:
    Path(path).write_bytes(encode_polar_scan(scan))


def load_polar_scan(path) -> PolarScan:
    return decode_polar_scan(Path(path).read_bytes())


def load_scan_directory(path) -> list:
    """All ``*.fs2d`` scans in a directory, sorted by file name."""
    files = sorted(Path(path).glob("*.fs2d"))
    if not files:
        raise FileNotFoundError(f"no *.fs2d scans in {path}")
    return [load_polar_scan(f) for f in files]


# -- CSV ---------------------------------------------------------------------

def _read_rows(path, header: list):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return []
    if [h.strip() for h in rows[0]] != header:
        raise FormatError(f"expected header {','.join(header)}", line=1)
    return [(n, row) for n, row in enumerate(rows[1:], start=2) if row]


def _floats(row, n: int, count: int):
    if len(row) != count:
        raise FormatError(f"expected {count} fields, got {len(row)}", line=n)
    try:
        vals = [float(v) for v in row]
    except ValueError as exc:
        raise FormatError(f"non-numeric field ({exc})", line=n) from None
    if not all(math.isfinite(v) for v in vals):
        raise FormatError("non-finite field", line=n)
    return vals


def load_ground_truth(path) -> list:
    """Poses from a ``timestamp,x,y,heading`` CSV, ascending in time."""
    out, last = [], -math.inf
    for n, row in _read_rows(path, GT_HEADER):
        t, x, y, h = _floats(row, n, 4)
        if t <= last:
            raise FormatError(f"timestamp {t!r} does not increase", line=n)
        last = t
        out.append(Pose2D(x, y, h, t))
    return out


def save_ground_truth(poses, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GT_HEADER)
        for p in poses:
            w.writerow([repr(p.timestamp), repr(p.x), repr(p.y), repr(p.heading)])


def export_trajectory(traj: Trajectory, path, fmt: str = "csv") -> None:
    """Write a trajectory as CSV or as a planar GeoJSON-like JSON document."""
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRAJ_HEADER)
            for p, o in zip(traj.poses, traj.outliers):
                w.writerow([repr(p.timestamp), repr(p.x), repr(p.y), repr(p.heading), int(bool(o))])
    elif fmt == "json":
        doc = {
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": [[p.x, p.y] for p in traj.poses]},
            "properties": {
                "frame": "planar",
                "units": {"x": "m", "y": "m", "heading": "rad", "timestamp": "s"},
                "timestamp": [p.timestamp for p in traj.poses],
                "heading": [p.heading for p in traj.poses],
                "outlier": [bool(o) for o in traj.outliers],
            },
        }
        Path(path).write_text(json.dumps(doc, indent=1) + "\n")
    else:
        raise ValueError("fmt must be 'csv' or 'json'")


def import_trajectory(path) -> Trajectory:
    poses, flags = [], []
    for n, row in _read_rows(path, TRAJ_HEADER):
        if len(row) != 5:
            raise FormatError(f"expected 5 fields, got {len(row)}", line=n)
        t, x, y, h = _floats(row[:4], n, 4)
        if row[4].strip() not in ("0", "1"):
            raise FormatError("outlier flag must be 0 or 1", line=n)
        poses.append(Pose2D(x, y, h, t))
        flags.append(row[4].strip() == "1")
    try:
        return Trajectory(poses, flags)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


# -- matrices ----------------------------------------------------------------

def save_matrix_text(values: np.ndarray, path, note: str = "") -> None:
    """Whitespace-separated rows after a one-line ``# rows cols note`` header."""
    v = np.atleast_2d(np.asarray(values, dtype=np.float64))
    head = f"{v.shape[0]} {v.shape[1]}" + (f" {note}" if note else "")
    np.savetxt(path, v, fmt="%.17g", header=head, comments="# ")


def load_matrix_text(path) -> np.ndarray:
    with open(path) as fh:
        first = fh.readline()
    if not first.startswith("#"):
        raise FormatError("missing matrix header", line=1)
    try:
        rows, cols = (int(v) for v in first[1:].split()[:2])
    except ValueError:
        raise FormatError("matrix header must start with row and column counts", line=1) from None
    v = np.loadtxt(path, ndmin=2)
    if v.shape != (rows, cols):
        raise FormatError(f"header says {rows} x {cols}, body is {v.shape[0]} x {v.shape[1]}")
    return v


# -- scene specs -------------------------------------------------------------

_SHAPE_KEYS = {"kind", "x", "y", "heading", "length", "width", "reflectivity"}
_MOTION_KEYS = {"dx", "dy", "theta"}


def _check_keys(table: dict, allowed: set, where: str) -> None:
    extra = sorted(set(table) - allowed)
    if extra:
        raise FormatError(f"unknown key(s) {', '.join(extra)} in {where}")


def _motion(table: dict, where: str) -> RigidMotion2D:
    _check_keys(table, _MOTION_KEYS, where)
    return RigidMotion2D(**table)


def _shape(table: dict, where: str) -> Shape:
    _check_keys(table, _SHAPE_KEYS, where)
    return Shape(**table)


def scene_spec_from_dict(doc: dict):
    """Build ``(SceneSpec, frame_count)`` from a parsed scene document.

    Top-level keys: ``seed``, ``frames``, ``point_spacing``, ``occlusion_depth``
    and the tables ``sensor``, ``noise``, ``ego_motion`` (dx, dy, theta),
    ``initial_pose`` (x, y, heading), ``clutter`` (walls, points, blocks,
    radius: a seeded random layout), plus arrays ``static`` of shapes and
    ``moving`` of shapes with a ``motion`` table. Angles are radians.
    """
    top = {"seed", "frames", "point_spacing", "occlusion_depth", "sensor", "noise", "ego_motion",
           "initial_pose", "clutter", "static", "moving"}
    _check_keys(doc, top, "scene")
    try:
        seed = int(doc.get("seed", 0))
        frames = int(doc.get("frames", 2))
        sensor = doc.get("sensor", {})
        _check_keys(sensor, set(SensorSpec.__dataclass_fields__), "[sensor]")
        noise = doc.get("noise", {})
        _check_keys(noise, set(NoiseSpec.__dataclass_fields__), "[noise]")
        pose = doc.get("initial_pose", {})
        _check_keys(pose, {"x", "y", "heading"}, "[initial_pose]")
        static = [_shape(t, f"static[{k}]") for k, t in enumerate(doc.get("static", []))]
        ego = _motion(doc.get("ego_motion", {}), "[ego_motion]")
        clutter = doc.get("clutter")
        if clutter is not None:
            _check_keys(clutter, {"walls", "points", "blocks", "radius"}, "[clutter]")
            rng = np.random.default_rng(seed)
            static += random_structured_scene(
                rng, n_walls=int(clutter.get("walls", 6)), n_points=int(clutter.get("points", 40)),
                n_blocks=int(clutter.get("blocks", 4)), radius=float(clutter.get("radius", 45.0)),
                path=[(pose.get("x", 0.0), pose.get("y", 0.0))])
        moving = []
        for k, t in enumerate(doc.get("moving", [])):
            t = dict(t)
            m = _motion(t.pop("motion", {}), f"moving[{k}].motion")
            moving.append(MovingObject(_shape(t, f"moving[{k}]"), m))
        spec = SceneSpec(static_targets=tuple(static), moving_objects=tuple(moving),
                         noise=NoiseSpec(**noise), sensor=SensorSpec(**sensor), ego_motion=ego,
                         initial_pose=Pose2D(**pose), seed=seed,
                         point_spacing=float(doc.get("point_spacing", 0.05)),
                         occlusion_depth=float(doc.get("occlusion_depth", 1.0)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"invalid scene: {exc}") from None
    if frames < 1:
        raise FormatError("frames must be >= 1")
    return spec, frames


def load_scene_spec(path):
    """Read a TOML scene description; see :func:`scene_spec_from_dict`."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise FormatError(f"invalid TOML: {exc}") from None
    return scene_spec_from_dict(doc)
