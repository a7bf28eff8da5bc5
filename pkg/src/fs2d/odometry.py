"""Radar odometry by chaining pairwise registrations.

Scan ``i`` is registered with scan ``i + stride`` and the resulting motions
are folded onto the origin pose. Registrations may run concurrently; the fold
always consumes them in input order.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .geometry import IDENTITY, Pose2D, RigidMotion2D, Trajectory, compose, invert  # noqa: F401
from .registration import RegistrationConfig, register

PAIR_MODES = ("stride", "every")


class OdometryError(RuntimeError):
    """A pair could not be registered; ``pair_index`` and ``scans`` locate it."""

    def __init__(self, pair_index: int, scans: tuple, cause: Exception):
        super().__init__(f"registration of pair {pair_index} (scans {scans[0]} -> {scans[1]}) "
                         f"failed: {cause}")
        self.pair_index = pair_index
        self.scans = scans
        self.cause = cause


@dataclass
class OdometryRun:
    trajectory: Trajectory
    pairs: list                       # (i, j) scan indices, in registration order
    results: list                     # RegistrationResult per pair
    chained: list = field(default_factory=list)   # positions in ``pairs`` used for the chain


def odometry_pairs(scan_count: int, stride: int = 5, mode: str = "stride") -> list:
    """Scan index pairs to register.

    ``stride`` mode pairs ``(0, s), (s, 2s), ...``; ``every`` mode pairs
    ``(i, i + s)`` for every ``i``.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if mode not in PAIR_MODES:
        raise ValueError(f"mode must be one of {PAIR_MODES}")
    if scan_count < stride + 1:
        raise ValueError(f"need at least stride + 1 = {stride + 1} scans, got {scan_count}")
    step = stride if mode == "stride" else 1
    return [(i, i + stride) for i in range(0, scan_count - stride, step)]


def register_pairs(scans, pairs, cfg: RegistrationConfig = RegistrationConfig(),
                   jobs: int = 1) -> list:
    """Register every pair; results come back in ``pairs`` order."""
    def work(k):
        i, j = pairs[k]
        try:
            return register(scans[i], scans[j], cfg)
        except Exception as exc:  # annotate with the pair, keep the cause
            raise OdometryError(k, (i, j), exc) from exc

    if jobs <= 1:
        return [work(k) for k in range(len(pairs))]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, range(len(pairs))))


def chain_motions(motions, origin: Pose2D = Pose2D(), timestamps=None, outliers=None,
                  hold_outliers: bool = False) -> Trajectory:
    """Fold motions onto ``origin``.

    With ``hold_outliers`` a flagged motion is replaced by the previous one
    (constant-velocity hold); the flag is kept either way.
    """
    motions = list(motions)
    outliers = [False] * len(motions) if outliers is None else list(outliers)
    if timestamps is None:
        timestamps = [origin.timestamp + k for k in range(len(motions) + 1)]
    if len(timestamps) != len(motions) + 1 or len(outliers) != len(motions):
        raise ValueError("need one timestamp per pose and one outlier flag per motion")
    traj = Trajectory([Pose2D(origin.x, origin.y, origin.heading, timestamps[0])], [False])
    pose, prev = traj.poses[0], None
    for m, flagged, t in zip(motions, outliers, timestamps[1:]):
        if hold_outliers and flagged and prev is not None:
            m = prev
        pose = compose(pose, m, timestamp=t)
        traj.append(pose, flagged)
        prev = m
    return traj


def run_odometry_detailed(scan_source, stride: int = 5,
                          cfg: RegistrationConfig = RegistrationConfig(),
                          origin: Pose2D | None = None, hold_outliers: bool = False,
                          jobs: int = 1, mode: str = "stride") -> OdometryRun:
    scans = list(scan_source)
    pairs = odometry_pairs(len(scans), stride, mode)
    results = register_pairs(scans, pairs, cfg, jobs)
    chained = [k for k, (i, _) in enumerate(pairs) if i % stride == 0]
    stamps = [scans[0].timestamp] + [scans[pairs[k][1]].timestamp for k in chained]
    if origin is None:
        origin = Pose2D(timestamp=scans[0].timestamp)
    traj = chain_motions([results[k].ego_motion for k in chained], origin, stamps,
                         [results[k].is_outlier for k in chained], hold_outliers)
    return OdometryRun(traj, pairs, results, chained)


def run_odometry(scan_source, stride: int = 5, cfg: RegistrationConfig = RegistrationConfig(),
                 origin: Pose2D | None = None, hold_outliers: bool = False, jobs: int = 1,
                 mode: str = "stride") -> Trajectory:
    """Trajectory with ``floor((N - 1) / stride) + 1`` poses for ``N`` scans.

    In ``every`` mode all overlapping pairs are registered (see
    :func:`run_odometry_detailed` for the per-pair results) but the trajectory
    still chains the non-overlapping ones.
    """
    return run_odometry_detailed(scan_source, stride, cfg, origin, hold_outliers, jobs, mode).trajectory
