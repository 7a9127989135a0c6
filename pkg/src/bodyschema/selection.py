"""Joint-configuration selection: random, A-optimal and movement-aware variants.

The active-learning cost is the expected trace of the parameter covariance
after observing the better-conditioned marker at a candidate configuration,
divided by the predicted detection probability, plus an arctan penalty on
hand positions behind the robot (positive x).
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import direct
from . import estimator as ekf_mod
from . import kinematics as kin
from . import noise as noise_mod
from .occlusion import success_mean

SINGULAR_COST = 1e12


class NoiseMode(str, enum.Enum):
    PDN = "pdn"  # pose-dependent noise
    CN = "cn"  # constant noise


class Method(str, enum.Enum):
    RANDOM = "r"
    AL = "al"
    UCSAL = "ucsal"
    CCSAL = "ccsal"


@dataclass(frozen=True)
class CostParams:
    penalty_a: float = 1e-5
    penalty_b: float = 100.0  # 1/m
    gamma: float = 7e-4
    delta: float = 0.3

    def __post_init__(self):
        if self.penalty_a <= 0 or self.penalty_b <= 0:
            raise ValueError("penalty_a and penalty_b must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")


@dataclass(frozen=True)
class SelectionMethod:
    kind: Method
    params: CostParams = CostParams()


@dataclass(frozen=True, eq=False)
class Sensor:
    """What the learner knows about how observations are produced."""

    model: ekf_mod.MarkerObservation
    camera: noise_mod.CameraModel
    noise: noise_mod.NoiseParams
    mode: NoiseMode = NoiseMode.PDN

    def marker_variances(self, x, angles):
        """Predicted sigma^2 per marker at estimate x, plus the chain expansion."""
        params = np.asarray(x, dtype=float).reshape(-1, kin.PARAMS_PER_JOINT)
        chain = kin.ChainExpansion(params, self.model.base_transform, angles)
        hand = chain.end
        out = []
        for tool in self.model.tools:
            T = hand @ tool
            r, phi = noise_mod.marker_geometry(self.camera, T[:3, 3], T[:3, 2])
            out.append(noise_mod.predict_variance(r, phi, self.noise))
        return out, chain

    def covariance(self, sigma2):
        if self.mode is NoiseMode.CN:
            return noise_mod.to_cov(self.noise.constant_sigma2)
        return noise_mod.to_cov(sigma2)


@dataclass(frozen=True)
class Selection:
    theta: kin.JointConfig
    cost: float  # objective value the selector minimized
    full_cost: float
    evals: int
    step_l1: float  # normalized l1 distance from the previous configuration


def _base_cost_and_hand(angles, ekf, sensor):
    sigmas, chain = sensor.marker_variances(ekf.x_hat, angles)
    marker = int(np.argmin(sigmas))
    R = sensor.covariance(sigmas[marker])
    H = chain.jacobian(sensor.model.tools[marker])
    try:
        c0 = ekf_mod.posterior_trace(ekf.P + ekf.Q, H, R)
    except ekf_mod.SingularInnovation:
        c0 = SINGULAR_COST
    return c0, chain.end


def base_cost(theta, ekf, sensor):
    """Expected posterior covariance trace after sampling at ``theta``."""
    angles = theta.angles if isinstance(theta, kin.JointConfig) else np.asarray(theta, dtype=float)
    return _base_cost_and_hand(angles, ekf, sensor)[0]


def full_cost(theta, ekf, sensor, memory, limits, params):
    angles = theta.angles if isinstance(theta, kin.JointConfig) else np.asarray(theta, dtype=float)
    c0, hand = _base_cost_and_hand(angles, ekf, sensor)
    if c0 >= SINGULAR_COST:
        return SINGULAR_COST
    eta = success_mean(kin.normalize(angles, limits), memory)
    return c0 / eta + params.penalty_a * np.arctan(params.penalty_b * hand[0, 3])


def select_next(method, theta_prev, ekf, sensor, memory, budget, rng=None, epsilon=1e-4):
    """Next joint configuration for ``method`` (a SelectionMethod)."""
    limits = theta_prev.limits
    u_prev = theta_prev.normalized()
    params = method.params
    n = theta_prev.n_joints

    if method.kind is Method.RANDOM:
        if rng is None:
            raise ValueError("random selection needs an rng")
        u = rng.uniform(size=n)
        theta = kin.JointConfig.from_normalized(u, limits)
        c = full_cost(theta, ekf, sensor, memory, limits, params)
        return Selection(theta, c, c, 0, float(np.abs(theta.normalized() - u_prev).sum()))

    def cost_at(u):
        return full_cost(kin.denormalize(u, limits), ekf, sensor, memory, limits, params)

    if method.kind is Method.UCSAL:
        gamma = params.gamma

        def objective(u):
            return cost_at(u) + gamma * float(np.abs(u - u_prev).sum())
    else:
        objective = cost_at

    if method.kind is Method.CCSAL:
        box = direct.SearchBox(np.maximum(u_prev - params.delta, 0.0),
                               np.minimum(u_prev + params.delta, 1.0))
    else:
        box = direct.SearchBox(np.zeros(n), np.ones(n))

    res = direct.minimize(objective, box, direct.DirectConfig(budget, epsilon))
    theta = kin.JointConfig(kin.denormalize(res.x_best, limits), limits)
    fc = res.f_best if method.kind is not Method.UCSAL else cost_at(res.x_best)
    return Selection(theta, res.f_best, fc, res.evals_used,
                     float(np.abs(res.x_best - u_prev).sum()))
