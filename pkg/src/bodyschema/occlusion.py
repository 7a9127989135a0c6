"""Kernel-smoothed Beta model of marker visibility over joint space.

Past attempts at normalized configurations carry success/failure counts.
Counts are diffused to a query configuration with a squared-exponential
kernel and added to a Beta prior; the posterior mean is the predicted
detection probability.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

MATCH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AttemptRecord:
    theta_norm: np.ndarray
    successes: int = 0
    failures: int = 0

    def __post_init__(self):
        u = np.array(self.theta_norm, dtype=float).reshape(-1)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise ValueError("theta_norm must lie in [0, 1]^n")
        if self.successes < 0 or self.failures < 0:
            raise ValueError("counts must be nonnegative")
        u.setflags(write=False)
        object.__setattr__(self, "theta_norm", u)


@dataclass(frozen=True, eq=False)
class OcclusionMemory:
    records: tuple = ()
    prior_a0: float = 1.0
    prior_b0: float = 1.0
    length_scale: float = 0.15

    def __post_init__(self):
        if self.prior_a0 <= 0 or self.prior_b0 <= 0:
            raise ValueError("Beta prior pseudo-counts must be positive")
        if self.length_scale <= 0:
            raise ValueError("length_scale must be positive")
        object.__setattr__(self, "records", tuple(self.records))

    @cached_property
    def _arrays(self):
        if not self.records:
            return None
        points = np.stack([r.theta_norm for r in self.records])
        counts = np.array([[r.successes, r.failures] for r in self.records], dtype=float)
        return points, counts


def kernel(theta_star, theta_k, length_scale):
    diff = np.asarray(theta_star, dtype=float) - np.asarray(theta_k, dtype=float)
    return np.exp(-np.sum(diff * diff, axis=-1) / (2.0 * length_scale**2))


def posterior(theta_star, memory):
    """Beta parameters (alpha, beta) at ``theta_star``."""
    arrays = memory._arrays
    if arrays is None:
        return memory.prior_a0, memory.prior_b0
    points, counts = arrays
    w = kernel(theta_star, points, memory.length_scale)
    s, u = w @ counts
    return float(s + memory.prior_a0), float(u + memory.prior_b0)


def success_mean(theta_star, memory):
    alpha, beta = posterior(theta_star, memory)
    return alpha / (alpha + beta)


def record_attempt(memory, theta_norm, success):
    """New memory with one more success or failure at ``theta_norm``."""
    u = np.asarray(theta_norm, dtype=float)
    records = list(memory.records)
    for i, rec in enumerate(records):
        if rec.theta_norm.shape == u.shape and np.all(np.abs(rec.theta_norm - u) <= MATCH_TOL):
            records[i] = replace(rec, successes=rec.successes + int(success),
                                 failures=rec.failures + int(not success))
            break
    else:
        records.append(AttemptRecord(u, int(success), int(not success)))
    return replace(memory, records=tuple(records))


def memory_rows(memory):
    """Flat rows (index, S, U, theta_norm...) for CSV dumps."""
    return [[i, r.successes, r.failures, *map(float, r.theta_norm)] for i, r in enumerate(memory.records)]
