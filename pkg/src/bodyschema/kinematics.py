"""Classic Denavit-Hartenberg kinematics for serial arms.

Each joint contributes ``RotZ(q + theta_off) @ TransZ(d) @ TransX(a) @ RotX(alpha)``.
The estimated parameter vector is the DH table flattened row-major as
``(a, d, alpha, theta_off)`` per joint.
"""

from dataclasses import dataclass, field

import numpy as np

from . import so3

PARAMS_PER_JOINT = 4
LINEAR = (0, 1)  # a, d
ANGULAR = (2, 3)  # alpha, theta_off
FD_STEP = 1e-6


@dataclass(frozen=True)
class DhRow:
    a: float
    d: float
    alpha: float
    theta_off: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.a, self.d, self.alpha, self.theta_off])):
            raise ValueError(f"non-finite DH row {self}")


@dataclass(frozen=True, eq=False)
class DhTable:
    """Per-joint DH rows plus the fixed world-to-first-joint transform."""

    params: np.ndarray  # (n, 4)
    base_transform: np.ndarray = field(default_factory=lambda: np.eye(4))

    def __post_init__(self):
        params = np.array(self.params, dtype=float).reshape(-1, PARAMS_PER_JOINT)
        base = np.array(self.base_transform, dtype=float)
        if not np.all(np.isfinite(params)):
            raise ValueError("DH parameters must be finite")
        if base.shape != (4, 4) or not so3.is_rotation(base[:3, :3], 1e-9):
            raise ValueError("base_transform must be a 4x4 rigid transform")
        params.setflags(write=False)
        base.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "base_transform", base)

    @classmethod
    def from_rows(cls, rows, base_transform=None):
        params = [[r.a, r.d, r.alpha, r.theta_off] for r in rows]
        return cls(np.array(params, dtype=float), np.eye(4) if base_transform is None else base_transform)

    @classmethod
    def from_vector(cls, x, base_transform=None):
        return cls(np.asarray(x, dtype=float).reshape(-1, PARAMS_PER_JOINT),
                   np.eye(4) if base_transform is None else base_transform)

    @property
    def n_joints(self):
        return self.params.shape[0]

    @property
    def rows(self):
        return [DhRow(*map(float, p)) for p in self.params]

    def to_vector(self):
        return self.params.reshape(-1).copy()

    def with_vector(self, x):
        return DhTable.from_vector(x, self.base_transform)

    def to_text(self):
        """One line per joint: ``a d alpha theta_off`` (m, rad)."""
        return "\n".join(" ".join(repr(float(v)) for v in row) for row in self.params)

    @classmethod
    def from_text(cls, text, base_transform=None):
        rows = [line.split() for line in text.strip().splitlines() if line.strip()]
        if any(len(r) != PARAMS_PER_JOINT for r in rows):
            raise ValueError("each DH row needs exactly 4 values: a d alpha theta_off")
        return cls(np.array(rows, dtype=float), np.eye(4) if base_transform is None else base_transform)

    def __eq__(self, other):
        if not isinstance(other, DhTable):
            return NotImplemented
        return (np.array_equal(self.params, other.params)
                and np.array_equal(self.base_transform, other.base_transform))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class JointConfig:
    angles: np.ndarray
    limits: np.ndarray  # (n, 2) [min, max] in rad

    def __post_init__(self):
        angles = np.array(self.angles, dtype=float).reshape(-1)
        limits = np.array(self.limits, dtype=float).reshape(-1, 2)
        if limits.shape[0] != angles.shape[0]:
            raise ValueError("one [min, max] pair per joint is required")
        if np.any(limits[:, 0] >= limits[:, 1]):
            raise ValueError("joint limits need min < max")
        if np.any(angles < limits[:, 0]) or np.any(angles > limits[:, 1]):
            raise ValueError(f"joint angles {angles} outside limits")
        angles.setflags(write=False)
        limits.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "limits", limits)

    @property
    def n_joints(self):
        return self.angles.shape[0]

    def normalized(self):
        return normalize(self.angles, self.limits)

    @classmethod
    def from_normalized(cls, u, limits):
        return cls(denormalize(u, limits), limits)


def normalize(angles, limits):
    limits = np.asarray(limits, dtype=float)
    return (np.asarray(angles, dtype=float) - limits[:, 0]) / (limits[:, 1] - limits[:, 0])


def denormalize(u, limits):
    limits = np.asarray(limits, dtype=float)
    q = limits[:, 0] + np.asarray(u, dtype=float) * (limits[:, 1] - limits[:, 0])
    return np.clip(q, limits[:, 0], limits[:, 1])


@dataclass(frozen=True, eq=False)
class Pose:
    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        position = np.array(self.position, dtype=float).reshape(3)
        orientation = np.array(self.orientation, dtype=float)
        if not so3.is_rotation(orientation, 1e-9):
            raise ValueError("orientation must be a proper rotation matrix")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "orientation", orientation)

    @classmethod
    def from_matrix(cls, T):
        T = np.asarray(T, dtype=float)
        return cls(T[:3, 3], T[:3, :3])

    def as_matrix(self):
        T = np.eye(4)
        T[:3, :3] = self.orientation
        T[:3, 3] = self.position
        return T


def dh_matrices(params, angles):
    """Stacked DH transforms. ``params`` (..., 4), ``angles`` (...) -> (..., 4, 4)."""
    params = np.asarray(params, dtype=float)
    a, d, alpha, off = params[..., 0], params[..., 1], params[..., 2], params[..., 3]
    q = np.asarray(angles, dtype=float) + off
    cq, sq = np.cos(q), np.sin(q)
    ca, sa = np.cos(alpha), np.sin(alpha)
    T = np.zeros(q.shape + (4, 4))
    T[..., 0, 0] = cq
    T[..., 0, 1] = -sq * ca
    T[..., 0, 2] = sq * sa
    T[..., 0, 3] = a * cq
    T[..., 1, 0] = sq
    T[..., 1, 1] = cq * ca
    T[..., 1, 2] = -cq * sa
    T[..., 1, 3] = a * sq
    T[..., 2, 1] = sa
    T[..., 2, 2] = ca
    T[..., 2, 3] = d
    T[..., 3, 3] = 1.0
    return T


def dh_transform(row, joint_angle):
    """Homogeneous transform of one DH row at the given joint angle."""
    return dh_matrices(np.array([row.a, row.d, row.alpha, row.theta_off]), joint_angle)


def chain_matrix(params, base, angles, tool=None):
    """End transform(s) of the chain; batches over leading axes of params/angles.

    ``params`` (..., n, 4), ``angles`` (..., n).
    """
    Ts = dh_matrices(params, angles)
    out = np.broadcast_to(np.asarray(base, dtype=float), Ts.shape[:-3] + (4, 4))
    for j in range(Ts.shape[-3]):
        out = out @ Ts[..., j, :, :]
    if tool is not None:
        out = out @ tool
    return out


def _angles_of(table, theta):
    angles = theta.angles if isinstance(theta, JointConfig) else np.asarray(theta, dtype=float)
    if angles.shape[-1] != table.n_joints:
        raise ValueError(f"table has {table.n_joints} joints, configuration has {angles.shape[-1]}")
    return angles


def forward_kinematics(table, theta, tool=None):
    """Pose of the last frame (optionally composed with a fixed ``tool`` offset)."""
    angles = _angles_of(table, theta)
    return Pose.from_matrix(chain_matrix(table.params, table.base_transform, angles, tool))


def pose_to_obs(pose):
    """6-vector: position then principal rotation vector."""
    return np.concatenate([pose.position, so3.log_so3(pose.orientation)])


def matrix_to_obs(T):
    T = np.asarray(T, dtype=float)
    return np.concatenate([T[..., :3, 3], so3.log_so3(T[..., :3, :3])], axis=-1)


def obs_to_pose(z):
    z = np.asarray(z, dtype=float)
    return Pose(z[:3], so3.exp_so3(z[3:]))


class ChainExpansion:
    """Joint transforms of one chain at fixed angles with cached prefix/suffix products.

    Gives the end transform and finite-difference Jacobians for any tool
    offset without recomputing the chain.
    """

    def __init__(self, params, base, angles):
        self.params = np.asarray(params, dtype=float)
        self.angles = np.asarray(angles, dtype=float)
        Ts = dh_matrices(self.params, self.angles)
        n = Ts.shape[0]
        prefix = np.empty((n + 1, 4, 4))
        prefix[0] = base
        for j in range(n):
            prefix[j + 1] = prefix[j] @ Ts[j]
        suffix = np.empty((n + 1, 4, 4))  # suffix[j] = T_j ... T_{n-1}
        suffix[n] = np.eye(4)
        for j in range(n - 1, -1, -1):
            suffix[j] = Ts[j] @ suffix[j + 1]
        self.prefix = prefix
        self.suffix = suffix

    @property
    def end(self):
        return self.prefix[-1]

    def perturbed(self, step, tool=None):
        """End transforms with each flattened parameter at +step and -step, (2, p, 4, 4)."""
        n = self.params.shape[0]
        shift = np.eye(PARAMS_PER_JOINT) * step
        pert = self.params[None, :, None, :] + np.stack([shift, -shift])[:, None, :, :]
        Tp = dh_matrices(pert, np.broadcast_to(self.angles[None, :, None], pert.shape[:-1]))
        post = self.suffix[1:] if tool is None else self.suffix[1:] @ tool
        out = self.prefix[:n, None] @ Tp @ post[:, None]
        return out.reshape(2, n * PARAMS_PER_JOINT, 4, 4)

    def jacobian(self, tool=None, step=FD_STEP):
        plus, minus = self.perturbed(step, tool)
        dp = plus[:, :3, 3] - minus[:, :3, 3]
        rel = plus[:, :3, :3] @ np.swapaxes(minus[:, :3, :3], -1, -2)
        return np.concatenate([dp, _small_log(rel)], axis=-1).T / (2.0 * step)


def _small_log(R):
    """Rotation vectors of near-identity rotations (angle well below pi/2)."""
    s = 0.5 * so3.vee(R - np.swapaxes(R, -1, -2))
    sin_t = np.linalg.norm(s, axis=-1)
    theta = np.arcsin(np.minimum(sin_t, 1.0))
    scale = np.ones_like(theta)
    big = sin_t > 1e-12
    scale[big] = theta[big] / sin_t[big]
    return s * scale[:, None]


def perturbed_chain(params, base, angles, step, tool=None):
    """End transforms with each flattened DH parameter shifted by +step and -step.

    Returns (plus, minus), each (p, 4, 4).
    """
    plus, minus = ChainExpansion(params, base, angles).perturbed(step, tool)
    return plus, minus


def tangent_difference(T_a, T_b):
    """6-vector difference T_a ⊖ T_b: position subtraction, left rotation log."""
    dp = T_a[..., :3, 3] - T_b[..., :3, 3]
    dr = so3.log_so3(T_a[..., :3, :3] @ np.swapaxes(T_b[..., :3, :3], -1, -2))
    return np.concatenate([dp, dr], axis=-1)


def jacobian_from_params(params, base, angles, tool=None, step=FD_STEP):
    return ChainExpansion(params, base, angles).jacobian(tool, step)


def observation_jacobian(table, theta, tool=None, step=FD_STEP):
    """6 x 4n derivative of the observed pose w.r.t. the flattened DH vector.

    Central differences. Orientation rows are taken in the world-frame
    tangent space, the same coordinates as the filter's innovation.
    """
    angles = _angles_of(table, theta)
    return jacobian_from_params(table.params, table.base_transform, angles, tool, step)


def rigid_transform(position=(0.0, 0.0, 0.0), rotvec=(0.0, 0.0, 0.0)):
    T = np.eye(4)
    T[:3, :3] = so3.exp_so3(np.asarray(rotvec, dtype=float))
    T[:3, 3] = position
    return T
