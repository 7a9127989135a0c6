"""Shipped example arm: an iCub-like 7-DoF right arm.

Torso joints are held at zero and folded into the base transform, so only
the seven arm joints are estimated. Values follow the published iCub DH
layout closely enough to give a humanoid-shaped workspace; they are an
example, not calibrated robot data.
"""

import numpy as np

from .kinematics import DhTable, chain_matrix

_TORSO = np.array([
    [0.032, 0.0, np.pi / 2, 0.0],
    [0.0, -0.0055, np.pi / 2, -np.pi / 2],
    [-0.0233647, -0.1433, -np.pi / 2, np.radians(105.0)],
])

# world x points backwards, z up; the reach workspace lies mostly at x < 0
_ROOT = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
])

ICUB_RIGHT_ARM = np.array([
    [0.0, -0.10774, np.pi / 2, -np.pi / 2],
    [0.0, 0.0, -np.pi / 2, -np.pi / 2],
    [-0.015, -0.15228, -np.pi / 2, np.radians(-105.0)],
    [0.015, 0.0, np.pi / 2, 0.0],
    [0.0, -0.1373, np.pi / 2, -np.pi / 2],
    [0.0, 0.0, np.pi / 2, np.pi / 2],
    [-0.0625, 0.016, 0.0, np.pi],
])

ICUB_RIGHT_ARM_LIMITS_DEG = np.array([
    [-95.0, 10.0],
    [0.0, 160.8],
    [-37.0, 80.0],
    [15.5, 106.0],
    [-60.0, 60.0],
    [-80.0, 25.0],
    [-20.0, 25.0],
])


def icub_base_transform():
    return chain_matrix(_TORSO, _ROOT, np.zeros(3))


def icub_right_arm():
    """(DhTable, joint limits in rad) for the example arm."""
    return DhTable(ICUB_RIGHT_ARM.copy(), icub_base_transform()), np.radians(ICUB_RIGHT_ARM_LIMITS_DEG)
