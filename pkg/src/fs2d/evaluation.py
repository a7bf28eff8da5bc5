"""Error statistics of estimated motions against ground truth.

Outliers are the pairs whose registration flagged itself (confidence below
the threshold); by default they are counted but left out of both averages.
An error-threshold rule is available for sensitivity studies. Sums use
``math.fsum`` so aggregates do not depend on pair order.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import Pose2D, RigidMotion2D, normalize_angle, relative_motion

OUTLIER_RULES = ("confidence", "error")

# E|U| for U uniform on the unit square centred at 0: (sqrt(2) + asinh(1)) / 6
UNIT_CELL_MEAN_OFFSET = (math.sqrt(2.0) + math.asinh(1.0)) / 6.0


@dataclass(frozen=True)
class EvalConfig:
    outlier_rule: str = "confidence"
    error_threshold_deg: float = 5.0
    exclude_outliers: bool = True
    cell_size: float = 0.75
    stride: int = 5
    tau: float = 1.5

    def __post_init__(self):
        if self.outlier_rule not in OUTLIER_RULES:
            raise ValueError(f"outlier_rule must be one of {OUTLIER_RULES}")
        if self.error_threshold_deg <= 0 or self.cell_size <= 0:
            raise ValueError("error_threshold_deg and cell_size must be positive")


@dataclass(frozen=True)
class PairRecord:
    index: int
    rotation_error_deg: float
    translation_error_m: float
    flagged: bool
    confidence: float


@dataclass
class EvaluationReport:
    pair_count: int
    avg_rotation_error: float          # degrees, over the inclusion set
    rotation_outlier_fraction: float
    avg_translation_error: float       # meters, over the same set
    records: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    discretization: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pair_count": self.pair_count,
            "avg_rotation_error_deg": self.avg_rotation_error,
            "rotation_outlier_fraction": self.rotation_outlier_fraction,
            "avg_translation_error_m": self.avg_translation_error,
            "config": self.config,
            "discretization": self.discretization,
            "pairs": [{k: _finite(v) for k, v in asdict(r).items()} for r in self.records],
        }

    def to_json(self) -> str:
        doc = self.to_dict()
        for key in ("avg_rotation_error_deg", "avg_translation_error_m"):
            doc[key] = _finite(doc[key])
        return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"

    def to_table(self) -> str:
        d = self.discretization
        lines = [
            f"pairs                          {self.pair_count}",
            f"outlier fraction               {self.rotation_outlier_fraction:.4f}",
            f"avg rotation error [deg]       {self.avg_rotation_error:.4f}",
            f"avg translation error [m]      {self.avg_translation_error:.4f}",
            f"discretization mean (MC) [m]   {d.get('expected_mean_m', float('nan')):.4f}",
            f"half-diagonal bound [m]        {d.get('half_diagonal_bound_m', float('nan')):.4f}",
            "inclusion rule                 "
            + ("inliers only" if self.config.get("exclude_outliers", True) else "all pairs"),
        ]
        return "\n".join(lines) + "\n"


def _finite(v):
    # JSON has no NaN; unknown values are written as null
    return None if isinstance(v, float) and not math.isfinite(v) else v


def pair_errors(est: RigidMotion2D, truth: RigidMotion2D) -> tuple:
    """``(rotation error [deg] in [0, 180], translation error [m])``, both in scan A's frame."""
    rot = abs(math.degrees(normalize_angle(est.theta - truth.theta)))
    return rot, math.hypot(est.dx - truth.dx, est.dy - truth.dy)


def discretization_mean(cell_size: float, samples: int = 100_000, seed: int = 0) -> float:
    """Monte-Carlo mean distance from a uniform sub-cell offset to the cell center."""
    u = np.random.default_rng(seed).uniform(-0.5, 0.5, (samples, 2))
    return float(np.hypot(u[:, 0], u[:, 1]).mean() * cell_size)


def discretization_summary(cell_size: float) -> dict:
    return {
        "expected_mean_m": discretization_mean(cell_size),
        "expected_mean_closed_form_m": UNIT_CELL_MEAN_OFFSET * cell_size,
        "half_diagonal_bound_m": math.sqrt(2.0) / 2.0 * cell_size,
        "note": "mean is the expectation for uniform sub-cell offsets; the half-diagonal is the worst case",
    }


def evaluate(results, truth_motions, cfg: EvalConfig = EvalConfig()) -> EvaluationReport:
    """Aggregate per-pair errors.

    ``results`` holds objects with ``ego_motion``, ``is_outlier`` and
    ``confidence`` (e.g. :class:`~fs2d.registration.RegistrationResult`).
    """
    results, truth_motions = list(results), list(truth_motions)
    if len(results) != len(truth_motions):
        raise ValueError(f"{len(results)} results but {len(truth_motions)} ground-truth motions")
    records = []
    for k, (res, truth) in enumerate(zip(results, truth_motions)):
        rot, trans = pair_errors(res.ego_motion, truth)
        if cfg.outlier_rule == "confidence":
            flagged = bool(res.is_outlier)
        else:
            flagged = rot > cfg.error_threshold_deg
        records.append(PairRecord(k, rot, trans, flagged, float(res.confidence)))
    used = [r for r in records if not (cfg.exclude_outliers and r.flagged)]
    n = len(records)

    def mean(vals):
        return math.fsum(vals) / len(vals) if vals else float("nan")

    return EvaluationReport(
        pair_count=n,
        avg_rotation_error=mean([r.rotation_error_deg for r in used]),
        rotation_outlier_fraction=(sum(r.flagged for r in records) / n) if n else 0.0,
        avg_translation_error=mean([r.translation_error_m for r in used]),
        records=records,
        config=asdict(cfg),
        discretization=discretization_summary(cfg.cell_size),
    )


@dataclass(frozen=True)
class _Estimate:
    ego_motion: RigidMotion2D
    is_outlier: bool
    confidence: float = float("nan")


def trajectory_estimates(traj) -> list:
    """Consecutive-pose motions of an estimated trajectory, flagged as recorded."""
    return [_Estimate(relative_motion(a, b), bool(f))
            for a, b, f in zip(traj.poses, traj.poses[1:], traj.outliers[1:])]


def pose_at(records, t: float, scan_period: float) -> Pose2D:
    """Ground-truth pose at time ``t``.

    Uses the nearest record, or linear interpolation between the bracketing
    records when ``t`` lies strictly between them and the nearest one is more
    than 1e-9 s away but within one ``scan_period``.
    """
    if not records:
        raise ValueError("no ground-truth records")
    ts = np.array([r.timestamp for r in records])
    k = int(np.searchsorted(ts, t))
    cands = [i for i in (k - 1, k) if 0 <= i < len(ts)]
    near = min(cands, key=lambda i: (abs(ts[i] - t), i))
    gap = abs(ts[near] - t)
    if gap <= 1e-9:
        return records[near]
    if gap > scan_period:
        raise ValueError(f"no ground truth within one scan period of t={t}")
    if 0 < k < len(ts):
        a, b = records[k - 1], records[k]
        w = (t - a.timestamp) / (b.timestamp - a.timestamp)
        dh = normalize_angle(b.heading - a.heading)
        return Pose2D(a.x + w * (b.x - a.x), a.y + w * (b.y - a.y), a.heading + w * dh, t)
    return records[near]


def truth_motions(records, timestamps, pairs, scan_period: float) -> list:
    """Relative ground-truth motion for every ``(i, j)`` scan index pair."""
    return [relative_motion(pose_at(records, timestamps[i], scan_period),
                            pose_at(records, timestamps[j], scan_period)) for i, j in pairs]
