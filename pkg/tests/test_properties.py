"""Property-based checks of the invariants each module promises."""

from dataclasses import replace

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from bodyschema import config
from bodyschema import direct
from bodyschema import estimator as E
from bodyschema import kinematics as kin
from bodyschema import metrics
from bodyschema import noise
from bodyschema import occlusion as occ
from bodyschema import so3

finite = st.floats(-10, 10, allow_nan=False)
unit = st.floats(0, 1, allow_nan=False)


def vectors(n, elements=finite):
    return hnp.arrays(np.float64, n, elements=elements)


@given(vectors(3, st.floats(-1.8, 1.8)))
def test_exp_log_round_trip(w):
    assume(np.linalg.norm(w) < np.pi - 1e-3)
    np.testing.assert_allclose(so3.log_so3(so3.exp_so3(w)), w, atol=1e-9)
    assert abs(so3.rotation_angle(so3.exp_so3(w)) - np.linalg.norm(w)) < 1e-9


@given(vectors(3), vectors(3), vectors(3))
def test_rotation_distance_triangle(a, b, c):
    A, B, C = so3.exp_so3(a), so3.exp_so3(b), so3.exp_so3(c)
    ab, bc, ac = metrics.rotation_distance(A, B), metrics.rotation_distance(B, C), metrics.rotation_distance(A, C)
    assert ac <= ab + bc + 1e-7
    assert 0 <= ab <= 180
    assert abs(ab - metrics.rotation_distance(B, A)) < 1e-9


@given(hnp.arrays(np.float64, (5, 4), elements=st.floats(-3, 3)), vectors(5, st.floats(-np.pi, np.pi)))
def test_fk_orientation_is_rotation(params, q):
    R = kin.forward_kinematics(kin.DhTable(params), q).orientation
    assert np.linalg.norm(R.T @ R - np.eye(3)) <= 1e-9
    assert abs(np.linalg.det(R) - 1) <= 1e-9


@given(st.floats(0, 3), st.floats(0, 3), st.floats(0, 180), st.floats(1e-6, 1e-2), st.floats(0, 1e-4))
def test_variance_monotone_in_r_and_minimal_at_45(r1, r2, phi, a, b):
    p = noise.NoiseParams(a, b)
    lo, hi = sorted((r1, r2))
    assert noise.predict_variance(lo, phi, p) <= noise.predict_variance(hi, phi, p)
    assert noise.predict_variance(lo, 45.0, p) <= noise.predict_variance(lo, phi, p)


records = st.lists(st.tuples(vectors(3, unit), st.integers(0, 5), st.integers(0, 5)), max_size=8)
priors = st.floats(0.1, 5)


def _memory(recs, a0=1.0, b0=1.0, ell=0.15):
    return occ.OcclusionMemory(tuple(occ.AttemptRecord(*r) for r in recs), a0, b0, ell)


@given(records, vectors(3, unit), priors, priors)
def test_success_mean_open_interval(recs, u, a0, b0):
    eta = occ.success_mean(u, _memory(recs, a0, b0))
    assert 0 < eta < 1


@given(records, vectors(3, unit), vectors(3, unit))
def test_success_and_failure_move_mean_monotonically(recs, u, at):
    mem = _memory(recs)
    base = occ.success_mean(u, mem)
    assert occ.success_mean(u, occ.record_attempt(mem, at, True)) >= base - 1e-15
    assert occ.success_mean(u, occ.record_attempt(mem, at, False)) <= base + 1e-15


@given(records, vectors(3, unit), vectors(3, st.floats(-0.05, 0.05)), st.floats(0.05, 0.5))
def test_success_mean_is_lipschitz(recs, u, du, ell):
    mem = _memory(recs, ell=ell)
    total = sum(s + f for _, s, f in recs)
    L = np.exp(-0.5) * total / (ell * (mem.prior_a0 + mem.prior_b0))
    diff = abs(occ.success_mean(u + du, mem) - occ.success_mean(u, mem))
    assert diff <= L * np.linalg.norm(du) + 1e-12


@given(vectors(2, st.floats(-1, 1)), vectors(2, st.floats(0.1, 2)), st.integers(1, 80),
       vectors(2, st.floats(-3, 3)))
def test_direct_feasible_and_consistent(lo, width, budget, c):
    box = direct.SearchBox(lo, lo + width)
    res = direct.minimize(lambda x: float(np.sum((x - c) ** 2)), box, direct.DirectConfig(budget))
    pts = np.array(res.points)
    assert np.all(pts >= box.lower) and np.all(pts <= box.upper)
    assert res.evals_used == len(res.values) <= budget
    assert res.f_best == min(res.values)


@given(hnp.arrays(np.int64, 3, elements=st.integers(0, 4)))
def test_trisect_partitions_volume(levels):
    parent = direct.HyperRect(np.full(3, 0.5), levels, 0.0)
    kids = direct.trisect(parent, lambda u: float(u.sum()))
    assert abs(sum(k.volume for k in kids) - parent.volume) <= 1e-12
    assert len(kids) == 1 + 2 * int(np.sum(levels == levels.min()))


@given(st.integers(1, 5), st.integers(1, 4), st.data())
def test_update_keeps_covariance_psd_and_shrinks_trace(p, m, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    A = rng.standard_normal((p, p))
    P = A @ A.T + 1e-3 * np.eye(p)
    H = rng.standard_normal((m, p))
    R = np.eye(m) * data.draw(st.floats(1e-4, 10))

    class Affine:
        def observe(self, x, theta, marker=0):
            return H @ x

        def jacobian(self, x, theta, marker=0):
            return H

        def residual(self, z, z_pred):
            return z - z_pred

    s = E.update(E.EkfState(np.zeros(p), P, np.zeros((p, p))), E.Measurement(np.ones(m), R, np.zeros(0)), Affine())
    assert np.allclose(s.P, s.P.T)
    assert np.linalg.eigvalsh(s.P).min() >= -1e-9
    assert s.trace() <= np.trace(P) + 1e-12
    assert abs(E.posterior_trace(P, H, R) - s.trace()) <= 1e-9 * max(1.0, np.trace(P))


@given(st.lists(vectors(3, st.floats(-3, 3)), min_size=2, max_size=6), st.integers(0, 4), vectors(3, st.floats(-3, 3)))
def test_movement_triangle_inequality(history, at, extra):
    at = min(at, len(history) - 1)
    longer = history[:at] + [extra] + history[at:]
    assert metrics.accumulated_movement(longer) >= metrics.accumulated_movement(history) - 1e-9


@given(st.floats(1e-12, 1.0), st.floats(1e-9, 1e-2), st.integers(1, 500), st.sampled_from(["al", "r"]))
def test_config_round_trip(gamma, q, budget, method):
    cfg = config.ExperimentConfig(methods=(method,))
    cfg = replace(cfg, selection=replace(cfg.selection, gamma=gamma, budget=budget),
                  estimator=replace(cfg.estimator, process_noise=q))
    assert config.loads(config.dumps(cfg)) == cfg
