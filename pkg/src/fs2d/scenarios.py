"""Seeded scene recipes used by the acceptance suite, the benchmark and ``fs2d synth``.

Each recipe draws everything from ``numpy.random.default_rng(seed)`` and
returns the rendered scans together with the ground truth they were made
from, so a seed fully identifies a trial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Pose2D, RigidMotion2D, compose
from .synth import (MovingObject, NoiseSpec, SceneSpec, Shape, SyntheticSequence, path_clearance,
                    random_structured_scene, synth_scene)

CELL = 0.75


@dataclass(frozen=True)
class PairTrial:
    scan_a: object
    scan_b: object
    motion: RigidMotion2D
    object_motion: RigidMotion2D | None = None  # apparent motion of the mover, if any
    object_share: float = 0.0


def random_motion(rng, max_xy: float = 20.0, max_deg: float = 45.0) -> RigidMotion2D:
    dx, dy = rng.uniform(-max_xy, max_xy, 2)
    return RigidMotion2D(dx, dy, math.radians(rng.uniform(-max_deg, max_deg)))


def _pair(spec: SceneSpec) -> SyntheticSequence:
    return synth_scene(spec, 2)


def _object_share(spec: SceneSpec) -> float:
    """Smallest fraction (over both frames) of return energy due to moving objects.

    A bin's mover contribution is what the movers add on top of the static
    scene; static returns they hide are not counted against them.
    """
    full = _pair(replace(spec, noise=NoiseSpec()))
    bare = _pair(replace(spec, noise=NoiseSpec(), moving_objects=()))
    shares = []
    for a, b in zip(full.scans, bare.scans):
        total = a.intensities.sum()
        added = np.maximum(a.intensities - b.intensities, 0.0).sum()
        shares.append(0.0 if total <= 0 else added / total)
    return float(min(shares))


def _world_to_body(shape: Shape, d) -> RigidMotion2D:
    # per-frame object motion is applied in the object's own frame
    c, s = math.cos(shape.heading), math.sin(shape.heading)
    return RigidMotion2D(c * d[0] + s * d[1], -s * d[0] + c * d[1], 0.0)


def static_pair(seed: int, noise: NoiseSpec = NoiseSpec(), max_xy: float = 20.0,
                max_deg: float = 45.0) -> PairTrial:
    """Cluttered static scene seen from two poses related by a random motion."""
    rng = np.random.default_rng(seed)
    m = random_motion(rng, max_xy, max_deg)
    scene = random_structured_scene(rng, path=[(0.0, 0.0), (m.dx, m.dy)])
    seq = _pair(SceneSpec(static_targets=tuple(scene), ego_motion=m, noise=noise, seed=seed))
    return PairTrial(seq.scans[0], seq.scans[1], m)


def rotation_pair(seed: int, max_xy: float = 2.0) -> PairTrial:
    """Rotation uniform on the full circle with a small translation."""
    rng = np.random.default_rng(seed)
    m = random_motion(rng, max_xy, 180.0)
    scene = random_structured_scene(rng, path=[(0.0, 0.0), (m.dx, m.dy)])
    seq = _pair(SceneSpec(static_targets=tuple(scene), ego_motion=m, seed=seed))
    return PairTrial(seq.scans[0], seq.scans[1], m)


def noisy_dynamic_pair(seed: int, density: float = 0.05, ghosts: int = 2,
                       max_share: float = 0.10, min_share: float = 0.01) -> PairTrial:
    """Static clutter plus one car-sized mover, salt-and-pepper noise and ghost beams.

    The car is re-placed until its returns are between ``min_share`` (it is
    visible) and ``max_share`` of the total in both frames.
    """
    rng = np.random.default_rng(seed)
    m = random_motion(rng)
    path = [(0.0, 0.0), (m.dx, m.dy)]
    scene = tuple(random_structured_scene(rng, path=path))
    noise = NoiseSpec(density, ghosts)
    for _ in range(200):
        car = Shape("block", *rng.uniform(-30.0, 30.0, 2), rng.uniform(-math.pi, math.pi),
                    length=4.5, width=1.8, reflectivity=0.9)
        if path_clearance(car, path) < 4.0:
            continue
        d = rng.uniform(-6.0, 6.0, 2)
        spec = SceneSpec(static_targets=scene, moving_objects=(MovingObject(car, _world_to_body(car, d)),),
                         ego_motion=m, noise=noise, seed=seed)
        share = _object_share(spec)
        if min_share <= share <= max_share:
            seq = _pair(spec)
            return PairTrial(seq.scans[0], seq.scans[1], m, RigidMotion2D(m.dx - d[0], m.dy - d[1], m.theta),
                             share)
    raise RuntimeError(f"seed {seed}: could not place a mover within the return budget")


def rigid_body(rng, x: float, y: float, heading: float, scatterers: int = 24,
               scale: float = 1.5) -> list:
    """A block, one wall alongside it and point scatterers, as one list of shapes."""
    c, s = math.cos(heading), math.sin(heading)
    half = np.array([4.0, 2.5]) * scale
    parts = [Shape("block", x, y, heading, length=6.0 * scale, width=2.5 * scale, reflectivity=1.0),
             Shape("wall", x - s * 4.0, y + c * 4.0, heading, length=rng.uniform(8.0, 12.0),
                   reflectivity=1.0)]
    for u, v in rng.uniform(-half, half, (scatterers, 2)):
        parts.append(Shape("point", x + c * u - s * v, y + s * u + c * v, heading, reflectivity=1.0))
    return parts


def two_body_pair(seed: int, min_share: float = 0.3, max_share: float = 0.5,
                  min_cells: float = 4.0) -> PairTrial:
    """Sparse static background plus one translating rigid body of comparable prominence.

    The body moves by ``d`` with ``max(|d_x|, |d_y|) >= min_cells`` cells and
    holds between ``min_share`` and ``max_share`` of the returns in both
    frames. Under whitened correlation a much weaker body rarely clears the
    default relative peak threshold. Its apparent motion, the ego-motion that
    would explain it if it were static, is ``ego - d``.
    """
    rng = np.random.default_rng(seed)
    m = random_motion(rng, 10.0, 30.0)
    path = [(0.0, 0.0), (m.dx, m.dy)]
    scene = tuple(random_structured_scene(rng, n_walls=2, n_points=10, n_blocks=1, path=path))
    for _ in range(300):
        r, bearing = rng.uniform(10.0, 30.0), rng.uniform(-math.pi, math.pi)
        parts = rigid_body(rng, r * math.cos(bearing), r * math.sin(bearing),
                           rng.uniform(-math.pi, math.pi))
        if min(path_clearance(p, path) for p in parts) < 4.0:
            continue
        d = rng.uniform(-8.0, 8.0, 2)
        if np.abs(d).max() < min_cells * CELL:
            continue
        movers = tuple(MovingObject(p, _world_to_body(p, d)) for p in parts)
        spec = SceneSpec(static_targets=scene, moving_objects=movers, ego_motion=m, seed=seed)
        share = _object_share(spec)
        if min_share <= share <= max_share:
            seq = _pair(spec)
            return PairTrial(seq.scans[0], seq.scans[1], m, RigidMotion2D(m.dx - d[0], m.dy - d[1], m.theta),
                             share)
    raise RuntimeError(f"seed {seed}: could not place a visible second body")


def structureless_pair(seed: int, sigma: float = 0.05) -> PairTrial:
    """Two sweeps of independent low-level intensity noise with no reflectors."""
    rng = np.random.default_rng(seed)
    m = random_motion(rng)
    seq = _pair(SceneSpec(noise=NoiseSpec(intensity_noise_sigma=sigma), ego_motion=m, seed=seed))
    return PairTrial(seq.scans[0], seq.scans[1], m)


def constant_motion_sequence(seed: int, frames: int = 50,
                             motion: RigidMotion2D = RigidMotion2D(1.0, 0.1, math.radians(0.8)),
                             noise: NoiseSpec = NoiseSpec()) -> SyntheticSequence:
    """A sensor driving with constant per-frame ``motion`` through static clutter."""
    rng = np.random.default_rng(seed)
    # trace the path first so the layout can keep clear of it
    pose, pts = Pose2D(), [(0.0, 0.0)]
    for _ in range(frames - 1):
        pose = compose(pose, motion)
        pts.append((pose.x, pose.y))
    center = np.mean(pts, axis=0)
    extent = float(np.max(np.abs(np.asarray(pts) - center))) + 45.0
    area = (extent / 45.0) ** 2     # keep the clutter density of a single-pair scene
    scene = random_structured_scene(rng, n_walls=round(6 * area), n_points=round(40 * area),
                                    n_blocks=round(4 * area), radius=extent, path=pts,
                                    center=tuple(center))
    return synth_scene(SceneSpec(static_targets=tuple(scene), ego_motion=motion, noise=noise,
                                 seed=seed), frames)
