"""Planar radar scan registration from Fourier spectra.

Rotation is read from the magnitude spectra correlated on the sphere,
translation from phase correlation, and every distinct correlation peak is
reported as a motion hypothesis. Chaining pairwise results gives odometry.
"""
from .geometry import IDENTITY, Pose2D, RigidMotion2D, Trajectory, compose, invert, relative_motion
from .grid import CartesianGrid, GridConfig, PolarScan, polar_to_cartesian, preprocess
from .kernels import BACKEND
from .odometry import OdometryError, run_odometry, run_odometry_detailed
from .registration import (GeometryMismatchError, MotionHypothesis, RegistrationConfig,
                           RegistrationResult, extract_peaks, register, register_grids)
from .rotation import NoStructureError, RotationEstimate, estimate_rotation
from .spectral import dft2, magnitude, phase_correlate

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CartesianGrid", "GeometryMismatchError", "GridConfig", "IDENTITY",
    "MotionHypothesis", "NoStructureError", "OdometryError", "PolarScan", "Pose2D",
    "RegistrationConfig", "RegistrationResult", "RigidMotion2D", "RotationEstimate",
    "Trajectory", "compose", "dft2", "estimate_rotation", "extract_peaks", "invert",
    "magnitude", "phase_correlate", "polar_to_cartesian", "preprocess", "register",
    "register_grids", "relative_motion", "run_odometry", "run_odometry_detailed",
]
