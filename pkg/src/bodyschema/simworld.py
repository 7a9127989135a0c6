"""Simulated ground truth: true arm, hand markers, camera and detector.

Stands in for the robot and the fiducial detector. A marker is detected
when it faces the camera closely enough, lies inside the field of view and
the hand is in front of the robot. Detected poses are corrupted with
zero-mean Gaussian noise whose variance follows the pose-dependent model.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kinematics as kin
from . import noise as noise_mod
from .estimator import MarkerObservation, Measurement
from .selection import NoiseMode
from .so3 import exp_so3, log_so3

LINEAR_WIDTH = 0.046  # m
ANGULAR_WIDTH = np.radians(54.0)


@dataclass(frozen=True, eq=False)
class MarkerSpec:
    name: str
    offset: np.ndarray  # hand frame -> marker frame; marker normal is its +z

    def __post_init__(self):
        T = np.array(self.offset, dtype=float)
        if T.shape != (4, 4):
            raise ValueError("marker offset must be a 4x4 transform")
        R = T[:3, :3]
        if np.linalg.norm(R.T @ R - np.eye(3)) > 1e-9 or np.linalg.det(R) <= 0:
            raise ValueError(f"marker {self.name}: offset rotation is not orthonormal")
        object.__setattr__(self, "offset", T)


@dataclass(frozen=True)
class VisibilityRule:
    max_view_angle: float = 80.0  # deg
    require_frontal_workspace: bool = True

    def __post_init__(self):
        if not 0.0 < self.max_view_angle <= 90.0:
            raise ValueError("max_view_angle must lie in (0, 90]")


class NoDetection:
    """No marker was detected; the sample is discarded."""

    def __repr__(self):
        return "NoDetection()"

    def __bool__(self):
        return False


NO_DETECTION = NoDetection()


@dataclass(eq=False)
class GroundTruth:
    true_table: kin.DhTable
    limits: np.ndarray
    markers: tuple
    camera: noise_mod.CameraModel
    noise: noise_mod.NoiseParams
    visibility: VisibilityRule = VisibilityRule()
    seed: int = 0
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.limits = np.asarray(self.limits, dtype=float)
        self.markers = tuple(self.markers)
        self.rng = np.random.default_rng(self.seed)

    def observation_model(self):
        return MarkerObservation(self.true_table.base_transform, tuple(m.offset for m in self.markers))

    def marker_transforms(self, angles):
        hand = kin.chain_matrix(self.true_table.params, self.true_table.base_transform, angles)
        return hand, [hand @ m.offset for m in self.markers]


def is_visible(marker_pose, camera, rule, hand_position):
    r, phi = noise_mod.camera_geometry(camera, marker_pose)
    if phi > rule.max_view_angle:
        return False
    if camera.off_axis_angle(marker_pose.position) > camera.fov_half_angle:
        return False
    if rule.require_frontal_workspace and hand_position[0] >= 0.0:
        return False
    return True


def sample_observation(world, theta, mode=NoiseMode.PDN):
    """Noisy marker observation at ``theta`` or :data:`NO_DETECTION`.

    The visible marker with the lower predicted variance is reported. Noise
    is drawn in the filter's residual coordinates: position offset and a
    left-multiplied rotation. One 6-vector of normals is drawn per call
    either way, so both noise modes see the same random stream.
    """
    angles = theta.angles if isinstance(theta, kin.JointConfig) else np.asarray(theta, dtype=float)
    std_normal = world.rng.standard_normal(6)
    hand, transforms = world.marker_transforms(angles)
    best = None
    for i, T in enumerate(transforms):
        pose = kin.Pose.from_matrix(T)
        if not is_visible(pose, world.camera, world.visibility, hand[:3, 3]):
            continue
        r, phi = noise_mod.camera_geometry(world.camera, pose)
        s2 = noise_mod.predict_variance(r, phi, world.noise)
        if best is None or s2 < best[1]:
            best = (i, s2, T)
    if best is None:
        return NO_DETECTION
    i, s2, T = best
    eps = np.sqrt(s2) * std_normal
    position = T[:3, 3] + eps[:3]
    orientation = exp_so3(eps[3:]) @ T[:3, :3]
    z = np.concatenate([position, log_so3(orientation)])
    R_var = world.noise.constant_sigma2 if mode is NoiseMode.CN else s2
    return Measurement(z, noise_mod.to_cov(R_var), angles, marker=i)


def perturb_initial_estimate(truth, rng, linear_width=LINEAR_WIDTH, angular_width=ANGULAR_WIDTH):
    """Uniform draw centred on the true table: +-width/2 per parameter."""
    x = truth.to_vector().reshape(-1, kin.PARAMS_PER_JOINT).copy()
    half = np.array([linear_width, linear_width, angular_width, angular_width]) / 2.0
    x += rng.uniform(-1.0, 1.0, size=x.shape) * half
    return kin.DhTable(x, truth.base_transform)


def initial_variances(n_joints, linear_width=LINEAR_WIDTH, angular_width=ANGULAR_WIDTH):
    """Per-parameter variance of the uniform initialisation (width^2 / 12)."""
    row = np.array([linear_width, linear_width, angular_width, angular_width]) ** 2 / 12.0
    return np.tile(row, n_joints)


def default_markers(palm_offset=0.02):
    """Palm and back-of-hand markers, normals along -/+ hand y."""
    palm = kin.rigid_transform((0.0, -palm_offset, 0.0), (np.pi / 2, 0.0, 0.0))
    back = kin.rigid_transform((0.0, palm_offset, 0.0), (-np.pi / 2, 0.0, 0.0))
    return (MarkerSpec("palm", palm), MarkerSpec("back", back))
