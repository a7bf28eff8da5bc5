"""Synthetic radar scenes with controlled noise and moving objects.

Shapes are sampled into dense surface points, transformed into the sensor
frame, and splatted into the polar matrix with a Gaussian beam/range
footprint. Per azimuth only the nearest surface (plus a small depth
tolerance) returns energy, so walls occlude what lies behind them.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import Pose2D, RigidMotion2D, Trajectory, compose, transform_points
from .grid import PolarScan

SHAPE_KINDS = ("point", "wall", "block")


@dataclass(frozen=True)
class Shape:
    """A reflector. ``x, y, heading`` place its center; walls use ``length``,
    blocks use ``length`` x ``width`` (along / across ``heading``)."""

    kind: str
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    length: float = 0.0
    width: float = 0.0
    reflectivity: float = 1.0

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.length < 0 or self.width < 0:
            raise ValueError("shape dimensions must be non-negative")
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ValueError("reflectivity must be in [0, 1]")

    @property
    def pose(self) -> Pose2D:
        return Pose2D(self.x, self.y, self.heading)

    def body_points(self, spacing: float):
        """Surface samples in the shape's own frame and the facet each belongs to.

        Returns ``(points (n, 2), facet (n,))``; facets are the straight pieces
        that can occlude (a wall, one block edge). Point targets use facet -1.
        """
        if self.kind == "point":
            return np.zeros((1, 2)), np.array([-1])
        if self.kind == "wall":
            n = max(int(math.ceil(self.length / spacing)), 1) + 1
            pts = np.column_stack([np.linspace(-self.length / 2, self.length / 2, n), np.zeros(n)])
            return pts, np.zeros(n, dtype=int)
        hl, hw = self.length / 2, self.width / 2
        corners = np.array([[-hl, -hw], [hl, -hw], [hl, hw], [-hl, hw], [-hl, -hw]])
        edges, facets = [], []
        for e, (p, q) in enumerate(zip(corners[:-1], corners[1:])):
            n = max(int(math.ceil(np.linalg.norm(q - p) / spacing)), 1)
            t = np.arange(n)[:, None] / n
            edges.append(p + t * (q - p))
            facets.append(np.full(n, e))
        return np.vstack(edges), np.concatenate(facets)


@dataclass(frozen=True)
class MovingObject:
    shape: Shape
    motion: RigidMotion2D = RigidMotion2D()


@dataclass(frozen=True)
class NoiseSpec:
    salt_pepper_density: float = 0.0
    ghost_beam_count: int = 0
    intensity_noise_sigma: float = 0.0
    ghost_intensity: float = 0.6

    def __post_init__(self):
        if not 0.0 <= self.salt_pepper_density <= 1.0:
            raise ValueError("salt_pepper_density must be in [0, 1]")
        if self.ghost_beam_count < 0:
            raise ValueError("ghost_beam_count must be >= 0")
        if self.intensity_noise_sigma < 0:
            raise ValueError("intensity_noise_sigma must be >= 0")


@dataclass(frozen=True)
class SensorSpec:
    max_range: float = 90.0
    azimuth_count: int = 400
    range_resolution: float = 0.25
    beam_sigma: float = 0.75
    range_sigma: float = 1.0
    scan_period: float = 0.25

    def __post_init__(self):
        if self.max_range <= 0 or self.range_resolution <= 0:
            raise ValueError("max_range and range_resolution must be positive")
        if self.azimuth_count < 2:
            raise ValueError("azimuth_count must be >= 2")
        if self.beam_sigma <= 0 or self.range_sigma <= 0 or self.scan_period <= 0:
            raise ValueError("beam_sigma, range_sigma and scan_period must be positive")

    @property
    def range_bin_count(self) -> int:
        return int(round(self.max_range / self.range_resolution)) + 1

    def azimuths(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.azimuth_count) / self.azimuth_count


@dataclass(frozen=True)
class SceneSpec:
    static_targets: tuple = ()
    moving_objects: tuple = ()
    noise: NoiseSpec = NoiseSpec()
    sensor: SensorSpec = SensorSpec()
    ego_motion: RigidMotion2D = RigidMotion2D()
    initial_pose: Pose2D = Pose2D()
    seed: int = 0
    point_spacing: float = 0.05
    occlusion_depth: float = 1.0


@dataclass
class SyntheticSequence:
    scans: list
    truth: Trajectory
    object_poses: list = field(default_factory=list)  # [object][frame] -> Pose2D


def salt_and_pepper(intensities: np.ndarray, density: float, rng, level: float = 1.0):
    """Saturate (``level``) or zero a ``density`` fraction of bins; returns ``(out, mask)``."""
    mask = rng.random(intensities.shape) < density
    salt = rng.random(intensities.shape) < 0.5
    out = intensities.copy()
    out[mask & salt] = level
    out[mask & ~salt] = 0.0
    return out, mask


def add_ghost_beams(intensities: np.ndarray, count: int, rng, level: float = 0.6) -> np.ndarray:
    """Full-range radial streaks at ``count`` random azimuth bins."""
    out = intensities.copy()
    na, nb = out.shape
    for _ in range(count):
        b = int(rng.integers(na))
        streak = level * rng.uniform(0.5, 1.0, nb)
        out[b] = np.maximum(out[b], streak)
    return out


def render_points(world_pts: np.ndarray, refl: np.ndarray, pose: Pose2D,
                  sensor: SensorSpec, occlusion_depth: float = 1.0,
                  facets: np.ndarray | None = None) -> np.ndarray:
    """Noise-free polar intensities of world-frame surface samples seen from ``pose``.

    A sample is hidden when a *different* facet returns from the same azimuth
    bin more than ``occlusion_depth`` meters closer. Facet ``-1`` never occludes.
    """
    na, nb = sensor.azimuth_count, sensor.range_bin_count
    out = np.zeros((na, nb))
    if len(world_pts) == 0:
        return out
    if facets is None:
        facets = np.full(len(world_pts), -1)
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    d = world_pts - np.array([pose.x, pose.y])
    px = c * d[:, 0] + s * d[:, 1]
    py = -s * d[:, 0] + c * d[:, 1]
    rng_m = np.hypot(px, py)
    reach = sensor.max_range + 3 * sensor.range_sigma * sensor.range_resolution
    keep = (rng_m <= reach) & (rng_m > 0)
    if not keep.any():
        return out
    px, py, rng_m, amp, fac = px[keep], py[keep], rng_m[keep], refl[keep], facets[keep]
    az_idx = np.mod(np.arctan2(py, px), 2 * np.pi) * na / (2 * np.pi)
    bin_idx = np.floor(az_idx + 0.5).astype(np.intp) % na

    visible = np.ones(len(rng_m), dtype=bool)
    occ = fac >= 0
    if occ.any():
        # nearest and second-nearest occluding facet per azimuth bin
        ids, local = np.unique(fac[occ], return_inverse=True)
        near = np.full((na, ids.size), np.inf)
        np.minimum.at(near, (bin_idx[occ], local), rng_m[occ])
        order = np.argsort(near, axis=1, kind="stable")
        first_id = ids[order[:, 0]]
        first = np.take_along_axis(near, order[:, :1], axis=1)[:, 0]
        second = (np.take_along_axis(near, order[:, 1:2], axis=1)[:, 0]
                  if ids.size > 1 else np.full(na, np.inf))
        blocker = np.where(first_id[bin_idx] == fac, second[bin_idx], first[bin_idx])
        visible = rng_m <= blocker + occlusion_depth
    kernels.splat_max(out, az_idx[visible], rng_m[visible] / sensor.range_resolution,
                      amp[visible], sensor.beam_sigma, sensor.range_sigma)
    return out


def _shape_samples(shape: Shape, pose: Pose2D, spacing: float, facet_base: int):
    body, facet = shape.body_points(spacing)
    pts = transform_points(pose.as_motion(), body)
    facet = np.where(facet >= 0, facet + facet_base, -1)
    return pts, np.full(len(pts), shape.reflectivity), facet


def synth_scene(spec: SceneSpec, frame_count: int) -> SyntheticSequence:
    """Render ``frame_count`` scans; deterministic for a given ``spec.seed``."""
    if frame_count < 1:
        raise ValueError("frame_count must be >= 1")
    rng = np.random.default_rng(spec.seed)
    sensor = spec.sensor
    # every occluding facet gets a scene-unique id; 4 slots per shape covers blocks
    static = [_shape_samples(s, s.pose, spec.point_spacing, 4 * k)
              for k, s in enumerate(spec.static_targets)]
    s_pts = np.vstack([p for p, _, _ in static]) if static else np.zeros((0, 2))
    s_refl = np.concatenate([r for _, r, _ in static]) if static else np.zeros(0)
    s_fac = np.concatenate([f for _, _, f in static]) if static else np.zeros(0, dtype=int)
    obj_base = 4 * len(spec.static_targets)

    pose = Pose2D(spec.initial_pose.x, spec.initial_pose.y, spec.initial_pose.heading, 0.0)
    obj_poses = [o.shape.pose for o in spec.moving_objects]
    for k, op in enumerate(obj_poses):
        if math.hypot(op.x - pose.x, op.y - pose.y) > sensor.max_range:
            warnings.warn(f"moving object {k} starts outside max_range; "
                          "it is rendered once it enters range", stacklevel=2)

    scans, poses = [], []
    history = [[] for _ in spec.moving_objects]
    azimuths = sensor.azimuths()
    for n in range(frame_count):
        t = n * sensor.scan_period
        pts, refl, fac = [s_pts], [s_refl], [s_fac]
        for k, obj in enumerate(spec.moving_objects):
            history[k].append(Pose2D(obj_poses[k].x, obj_poses[k].y, obj_poses[k].heading, t))
            p, r, f = _shape_samples(obj.shape, obj_poses[k], spec.point_spacing, obj_base + 4 * k)
            pts.append(p)
            refl.append(r)
            fac.append(f)
        inten = render_points(np.vstack(pts), np.concatenate(refl), pose, sensor,
                              spec.occlusion_depth, np.concatenate(fac))
        noise = spec.noise
        if noise.intensity_noise_sigma > 0:
            inten = np.maximum(inten + rng.normal(0.0, noise.intensity_noise_sigma, inten.shape), 0.0)
        if noise.ghost_beam_count > 0:
            inten = add_ghost_beams(inten, noise.ghost_beam_count, rng, noise.ghost_intensity)
        if noise.salt_pepper_density > 0:
            inten, _ = salt_and_pepper(inten, noise.salt_pepper_density, rng)
        # scans are stored as float32 on disk; keep memory and file identical
        inten = inten.astype(np.float32).astype(np.float64)
        scans.append(PolarScan(azimuths, inten, sensor.range_resolution, t))
        poses.append(Pose2D(pose.x, pose.y, pose.heading, t))
        pose = compose(pose, spec.ego_motion)
        obj_poses = [compose(op, o.motion) for op, o in zip(obj_poses, spec.moving_objects)]
    return SyntheticSequence(scans, Trajectory(poses), history)


def _segment_distance(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    t = np.zeros(len(pts)) if denom == 0 else np.clip((pts - a) @ ab / denom, 0.0, 1.0)
    return np.linalg.norm(pts - (a + t[:, None] * ab), axis=1)


def path_clearance(shape: Shape, path) -> float:
    """Smallest distance between the shape's surface and a sensor polyline."""
    pts, _ = shape.body_points(0.25)
    pts = transform_points(shape.pose.as_motion(), pts)
    path = np.atleast_2d(np.asarray(path, dtype=np.float64))
    if len(path) == 1:
        return float(np.linalg.norm(pts - path[0], axis=1).min())
    return float(min(_segment_distance(pts, a, b).min() for a, b in zip(path[:-1], path[1:])))


def random_structured_scene(rng, n_walls: int = 6, n_points: int = 40, n_blocks: int = 4,
                            radius: float = 45.0, path=((0.0, 0.0),),
                            clearance: float = 3.0, center=(0.0, 0.0)) -> list:
    """A cluttered, anisotropic static layout in a square of half-width ``radius``.

    Walls and blocks are re-drawn until they keep ``clearance`` meters from the
    sensor ``path`` (a polyline), so the sensor never drives through structure.
    """
    cx, cy = center

    def xy():
        return cx + rng.uniform(-radius, radius), cy + rng.uniform(-radius, radius)

    def draw(make):
        for _ in range(100):
            shape = make()
            if path_clearance(shape, path) >= clearance:
                return shape
        return None

    shapes = []
    for _ in range(n_walls):
        shapes.append(draw(lambda: Shape(
            "wall", *xy(), rng.uniform(-np.pi, np.pi),
            length=rng.uniform(8.0, 30.0), reflectivity=rng.uniform(0.5, 1.0))))
    for _ in range(n_blocks):
        shapes.append(draw(lambda: Shape(
            "block", *xy(), rng.uniform(-np.pi, np.pi),
            length=rng.uniform(3.0, 8.0), width=rng.uniform(2.0, 5.0),
            reflectivity=rng.uniform(0.5, 1.0))))
    for _ in range(n_points):
        shapes.append(Shape("point", *xy(),
                            reflectivity=rng.uniform(0.4, 1.0)))
    return [s for s in shapes if s is not None]
