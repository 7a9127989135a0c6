"""Rotation helpers: exp/log maps between rotation vectors and SO(3).

All functions accept a single 3-vector / 3x3 matrix or a stack of them
along leading axes.
"""

import numpy as np

# below this angle the small-angle series is used for the log map
_SMALL = 1e-8
# above pi - _NEAR_PI the axis is read from the symmetric part
_NEAR_PI = 1e-3


def hat(w):
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def vee(m):
    m = np.asarray(m, dtype=float)
    return np.stack([m[..., 2, 1], m[..., 0, 2], m[..., 1, 0]], axis=-1)


def rot_x(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def exp_so3(w):
    """Rodrigues formula, rotation vector -> rotation matrix."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w, axis=-1)[..., None, None]
    K = hat(w)
    small = theta < 1e-6
    th = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(th) / th)
    b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(th)) / th**2)
    return np.eye(3) + a * K + b * (K @ K)


def rotation_angle(R):
    """Geodesic angle of R from the identity, in [0, pi]."""
    R = np.asarray(R, dtype=float)
    s = 0.5 * np.linalg.norm(vee(R - np.swapaxes(R, -1, -2)), axis=-1)
    c = 0.5 * (np.trace(R, axis1=-2, axis2=-1) - 1.0)
    return np.arctan2(s, c)


def log_so3(R):
    """Principal rotation vector of R (norm in [0, pi]).

    At exactly pi the axis sign is fixed so that its first nonzero
    component is positive.
    """
    R = np.asarray(R, dtype=float)
    lead = R.shape[:-2]
    R = R.reshape(-1, 3, 3)
    skew = vee(R - np.swapaxes(R, -1, -2))  # 2 sin(theta) n
    theta = rotation_angle(R)
    out = np.empty((R.shape[0], 3))

    generic = (theta >= _SMALL) & (theta <= np.pi - _NEAR_PI)
    if generic.any():
        t = theta[generic]
        out[generic] = skew[generic] * (t / (2.0 * np.sin(t)))[:, None]

    small = theta < _SMALL
    if small.any():
        out[small] = 0.5 * skew[small]

    near = theta > np.pi - _NEAR_PI
    for i in np.flatnonzero(near):
        t = theta[i]
        B = 0.5 * (R[i] + R[i].T) - np.cos(t) * np.eye(3)  # (1 - cos t) n n^T
        k = int(np.argmax(np.diag(B)))
        n = B[:, k] / np.sqrt(B[k, k] * (1.0 - np.cos(t)))
        n /= np.linalg.norm(n)
        proj = n @ skew[i]
        if abs(proj) > 1e-12:
            if proj < 0:
                n = -n
        else:
            nz = n[np.abs(n) > 1e-12]
            if nz.size and nz[0] < 0:
                n = -n
        out[i] = t * n

    return out.reshape(lead + (3,))


def is_rotation(R, tol=1e-9):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return np.linalg.norm(R.T @ R - np.eye(3)) <= tol and np.linalg.det(R) > 0
