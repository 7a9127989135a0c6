"""Calibration quality and movement metrics."""

from dataclasses import dataclass

import numpy as np

from . import kinematics as kin
from .so3 import rotation_angle

DEFAULT_EVAL_SIZE = 1000


@dataclass(frozen=True, eq=False)
class EvalSet:
    configs: np.ndarray  # (N, n) joint angles, rad

    @classmethod
    def uniform(cls, limits, rng, size=DEFAULT_EVAL_SIZE):
        limits = np.asarray(limits, dtype=float)
        u = rng.uniform(size=(size, limits.shape[0]))
        return cls(kin.denormalize(u, limits))


def _end_transforms(table, evals, tool=None):
    return kin.chain_matrix(table.params, table.base_transform, evals.configs, tool)


def avg_position_error(est, truth, evals, tool=None):
    """Mean euclidean hand position error over the set, in mm."""
    if est.params.shape != truth.params.shape:
        raise ValueError("tables differ in size")
    p = _end_transforms(truth, evals, tool)[:, :3, 3]
    p_hat = _end_transforms(est, evals, tool)[:, :3, 3]
    return 1000.0 * float(np.mean(np.linalg.norm(p - p_hat, axis=1)))


def rotation_distance(O, O_hat):
    """Geodesic angle between two rotations, in degrees.

    Equals sqrt(||logm(O^T O_hat)||_F^2 / 2), read directly from the
    rotation angle of the relative rotation.
    """
    rel = np.swapaxes(np.asarray(O, dtype=float), -1, -2) @ np.asarray(O_hat, dtype=float)
    return np.degrees(rotation_angle(rel))


def avg_orientation_error(est, truth, evals, tool=None):
    if est.params.shape != truth.params.shape:
        raise ValueError("tables differ in size")
    O = _end_transforms(truth, evals, tool)[:, :3, :3]
    O_hat = _end_transforms(est, evals, tool)[:, :3, :3]
    return float(np.mean(rotation_distance(O, O_hat)))


def accumulated_movement(history):
    """Sum of l1 joint steps along the history, in degrees."""
    angles = np.array([h.angles if isinstance(h, kin.JointConfig) else h for h in history], dtype=float)
    if angles.shape[0] == 0:
        raise ValueError("history is empty")
    return float(np.degrees(np.abs(np.diff(angles, axis=0)).sum()))


def discarded_count(detections):
    """Number of discarded samples in one run's per-iteration detection flags."""
    return int(sum(1 for d in detections if not d))


def aggregate_counts(counts):
    """(mean, population stddev) over repetitions."""
    counts = np.asarray(counts, dtype=float)
    if counts.size == 0:
        return float("nan"), float("nan")
    return float(counts.mean()), float(counts.std())
