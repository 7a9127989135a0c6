"""Extended Kalman filter over a constant parameter vector.

The state model is a random walk (``x_{k+1} = x_k + w_k``), so prediction
only inflates the covariance. Observation models supply the prediction,
its Jacobian and a residual operator; see :class:`MarkerObservation`.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kinematics as kin
from .so3 import exp_so3, log_so3


class SingularInnovation(np.linalg.LinAlgError):
    """Innovation covariance S is not positive definite; the update was skipped."""


@dataclass(frozen=True, eq=False)
class EkfState:
    x_hat: np.ndarray
    P: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        x = np.array(self.x_hat, dtype=float).reshape(-1)
        P = np.array(self.P, dtype=float)
        Q = np.array(self.Q, dtype=float)
        p = x.shape[0]
        if P.shape != (p, p) or Q.shape != (p, p):
            raise ValueError(f"P and Q must be {p}x{p}")
        for arr in (x, P, Q):
            arr.setflags(write=False)
        object.__setattr__(self, "x_hat", x)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)

    @property
    def dim(self):
        return self.x_hat.shape[0]

    def trace(self):
        return float(np.trace(self.P))


@dataclass(frozen=True, eq=False)
class Measurement:
    z: np.ndarray
    R: np.ndarray
    theta: np.ndarray  # joint angles (rad) at which z was taken
    marker: int = 0

    def __post_init__(self):
        z = np.array(self.z, dtype=float).reshape(-1)
        R = np.array(self.R, dtype=float)
        if R.shape != (z.shape[0], z.shape[0]):
            raise ValueError("R must be square with the dimension of z")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "theta", np.asarray(
            self.theta.angles if isinstance(self.theta, kin.JointConfig) else self.theta, dtype=float))


@dataclass(frozen=True, eq=False)
class MarkerObservation:
    """Pose of a marker rigidly attached to the end of a DH chain.

    ``tools`` holds one hand-to-marker transform per marker; the
    measurement's ``marker`` index picks which one produced z.
    """

    base_transform: np.ndarray
    tools: tuple = field(default_factory=lambda: (np.eye(4),))

    def transform(self, x, theta, marker=0):
        params = np.asarray(x, dtype=float).reshape(-1, kin.PARAMS_PER_JOINT)
        return kin.chain_matrix(params, self.base_transform, theta, self.tools[marker])

    def observe(self, x, theta, marker=0):
        return kin.matrix_to_obs(self.transform(x, theta, marker))

    def jacobian(self, x, theta, marker=0):
        params = np.asarray(x, dtype=float).reshape(-1, kin.PARAMS_PER_JOINT)
        return kin.jacobian_from_params(params, self.base_transform, theta, self.tools[marker])

    def residual(self, z, z_pred):
        """z ⊖ z_pred: position difference and log(O_meas O_pred^T)."""
        z = np.asarray(z, dtype=float)
        z_pred = np.asarray(z_pred, dtype=float)
        rot = log_so3(exp_so3(z[3:]) @ exp_so3(z_pred[3:]).T)
        return np.concatenate([z[:3] - z_pred[:3], rot])


def initial_state(x0, variances, q=1e-10):
    x0 = np.asarray(x0, dtype=float)
    variances = np.broadcast_to(np.asarray(variances, dtype=float), x0.shape)
    q = np.broadcast_to(np.asarray(q, dtype=float), x0.shape)  # scalar or per-parameter
    return EkfState(x0, np.diag(variances), np.diag(q))


def predict(state):
    return EkfState(state.x_hat, state.P + state.Q, state.Q)


def _innovation_factor(P, H, R):
    S = H @ P @ H.T + R
    S = 0.5 * (S + S.T)
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise SingularInnovation("innovation covariance is not positive definite") from exc
    return S, L


def update(state, meas, model):
    """Measurement update at the predicted state.

    Raises :class:`SingularInnovation` (and leaves nothing changed) when S
    cannot be factored.
    """
    x, P = state.x_hat, state.P
    H = model.jacobian(x, meas.theta, meas.marker)
    z_pred = model.observe(x, meas.theta, meas.marker)
    innovation = model.residual(meas.z, z_pred)
    S, L = _innovation_factor(P, H, meas.R)
    # K = P H^T S^-1 via the Cholesky factor
    PHt = P @ H.T
    K = np.linalg.solve(L.T, np.linalg.solve(L, PHt.T)).T
    x_new = x + K @ innovation
    P_new = P - K @ S @ K.T
    P_new = 0.5 * (P_new + P_new.T)
    return EkfState(x_new, P_new, state.Q)


def posterior_trace(P_pred, H, R):
    """tr(P - K S K^T) without forming K."""
    _, L = _innovation_factor(P_pred, H, R)
    A = np.linalg.solve(L, H @ P_pred)
    return float(np.trace(P_pred) - np.sum(A * A))


def hypothetical_posterior_trace(state, theta, R_pred, model, marker=0):
    """Trace of the covariance after a predict+update at ``theta``; no data needed."""
    angles = theta.angles if isinstance(theta, kin.JointConfig) else theta
    H = model.jacobian(state.x_hat, angles, marker)
    return posterior_trace(state.P + state.Q, H, R_pred)
