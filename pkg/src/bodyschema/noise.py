"""Pose-dependent marker measurement noise.

Variance grows with the squared camera distance and with the squared
deviation of the viewing angle from 45 degrees.
"""

from dataclasses import dataclass

import numpy as np

VARIANCE_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class CameraModel:
    position: np.ndarray
    optical_axis: np.ndarray
    fov_half_angle: float = 35.0  # deg

    def __post_init__(self):
        axis = np.array(self.optical_axis, dtype=float).reshape(3)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
            raise ValueError("optical_axis must be a unit vector")
        if not 0.0 < self.fov_half_angle < 90.0:
            raise ValueError("fov_half_angle must lie in (0, 90) deg")
        object.__setattr__(self, "position", np.array(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "optical_axis", axis)

    @classmethod
    def looking_at(cls, position, target, fov_half_angle=30.0):
        position = np.asarray(position, dtype=float)
        axis = np.asarray(target, dtype=float) - position
        return cls(position, axis / np.linalg.norm(axis), fov_half_angle)

    def off_axis_angle(self, point):
        """Angle (deg) between the optical axis and the ray to ``point``."""
        v = np.asarray(point, dtype=float) - self.position
        c = np.dot(v, self.optical_axis) / np.linalg.norm(v)
        return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


@dataclass(frozen=True)
class NoiseParams:
    noise_a: float = 2e-5  # variance per m^2
    noise_b: float = 2.5e-7  # variance per deg^2
    constant_sigma2: float = 5e-6  # used in constant-noise mode

    def __post_init__(self):
        if min(self.noise_a, self.noise_b, self.constant_sigma2) < 0:
            raise ValueError("noise parameters must be nonnegative")


def camera_geometry(camera, marker):
    """Distance r (m) and view angle phi (deg) between camera and a marker Pose.

    phi is measured between the marker's outward normal (its local +z axis)
    and the unit vector from the marker centre to the camera.
    """
    return marker_geometry(camera, marker.position, marker.orientation[:, 2])


def marker_geometry(camera, marker_position, marker_normal):
    to_cam = camera.position - np.asarray(marker_position, dtype=float)
    r = float(np.linalg.norm(to_cam))
    if r == 0.0:
        raise ValueError("marker coincides with the camera position")
    c = np.dot(marker_normal, to_cam) / (r * np.linalg.norm(marker_normal))
    return r, float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


def predict_variance(r, phi, params):
    return params.noise_a * r**2 + params.noise_b * (phi - 45.0) ** 2


def to_cov(sigma2, dim=6):
    return max(float(sigma2), VARIANCE_FLOOR) * np.eye(dim)
