"""Experiment loop: select, move, sample, update; repeated over seeded runs."""

import csv
import logging
import os
import platform
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import config as config_mod
from . import estimator as ekf
from . import kinematics as kin
from . import metrics
from . import simworld
from .occlusion import record_attempt
from .selection import Method, NoiseMode, Sensor, select_next

log = logging.getLogger(__name__)

# spawn-key domains for np.random.SeedSequence
_INIT, _METHOD, _EVAL = 0, 1, 2

METRIC_COLUMNS = ["run_id", "method", "iteration", "pos_err_mm", "rot_err_deg",
                  "cum_move_deg", "discarded_so_far"]
SELECTION_COLUMNS = ["run_id", "method", "iteration", "cost", "step_l1", "detected", "marker",
                     "sigma2"]
METRICS = ["pos_err_mm", "rot_err_deg", "cum_move_deg", "discarded_so_far"]


def method_label(method, mode):
    mode = NoiseMode(mode)
    label = Method(method).value.upper()
    return label if mode is NoiseMode.PDN else f"{label}-CN"


def _method_code(method):
    return zlib.crc32(Method(method).value.encode())


def init_seed(master, rep):
    return np.random.SeedSequence(master, spawn_key=(_INIT, rep))


def method_seed(master, method, rep):
    # noise mode is deliberately not part of the key: CN and PDN runs see the same draws
    return np.random.SeedSequence(master, spawn_key=(_METHOD, rep, _method_code(method)))


def eval_seed(master, rep, iteration):
    return np.random.SeedSequence(master, spawn_key=(_EVAL, rep, iteration))


@dataclass
class IterationRow:
    iteration: int
    theta: np.ndarray  # rad
    cost: float
    step_l1: float
    detected: bool
    marker: int  # -1 when nothing was detected
    sigma2: float
    x_hat: np.ndarray
    p_diag: np.ndarray
    pos_err_mm: float
    rot_err_deg: float
    cum_move_deg: float
    discarded_so_far: int


@dataclass
class RunRecord:
    method: str
    mode: str
    rep: int
    theta0: np.ndarray
    initial_pos_err_mm: float
    initial_rot_err_deg: float
    rows: list = field(default_factory=list)
    failed_updates: int = 0

    @property
    def label(self):
        return method_label(self.method, self.mode)

    @property
    def run_id(self):
        return f"{self.label}-{self.rep:03d}"

    def discarded(self):
        return metrics.discarded_count(r.detected for r in self.rows)


def run_single(cfg, method, rep, mode="pdn"):
    """One calibration run of ``iterations`` steps for one method and repetition."""
    mode = NoiseMode(mode)
    table, limits = cfg.arm()
    init_rng = np.random.default_rng(init_seed(cfg.master_seed, rep))
    run_rng = np.random.default_rng(method_seed(cfg.master_seed, method, rep))

    est_cfg = cfg.estimator
    ang_width = np.radians(est_cfg.angular_width_deg)
    start = simworld.perturb_initial_estimate(table, init_rng, est_cfg.linear_width, ang_width)
    theta = kin.JointConfig.from_normalized(init_rng.uniform(size=table.n_joints), limits)

    world = cfg.build_world(int(run_rng.integers(2**63)))
    model = world.observation_model()
    sensor = Sensor(model, world.camera, world.noise, mode)
    state = ekf.initial_state(
        start.to_vector(),
        simworld.initial_variances(table.n_joints, est_cfg.linear_width, ang_width),
        est_cfg.process_noise)
    memory = cfg.empty_memory()
    sel_method = cfg.selection_method(method)

    def errors(x, iteration):
        evals = metrics.EvalSet.uniform(limits, np.random.default_rng(eval_seed(cfg.master_seed, rep, iteration)),
                                        cfg.eval_size)
        est = table.with_vector(x)
        return metrics.avg_position_error(est, table, evals), metrics.avg_orientation_error(est, table, evals)

    pos0, rot0 = errors(state.x_hat, 0)
    record = RunRecord(method, mode.value, rep, theta.angles.copy(), pos0, rot0)
    history = [theta]
    discarded = 0
    for k in range(1, cfg.iterations + 1):
        sel = select_next(sel_method, theta, state, sensor, memory, cfg.selection.budget,
                          rng=run_rng, epsilon=cfg.selection.epsilon)
        theta = sel.theta
        history.append(theta)
        meas = simworld.sample_observation(world, theta, mode)
        u = theta.normalized()
        if meas:
            memory = record_attempt(memory, u, True)
            predicted = ekf.predict(state)
            try:
                state = ekf.update(predicted, meas, model)
            except ekf.SingularInnovation:
                record.failed_updates += 1
                log.warning("%s iteration %d: singular innovation, update skipped", record.run_id, k)
                state = predicted
        else:
            memory = record_attempt(memory, u, False)
            discarded += 1
        pos, rot = errors(state.x_hat, k)
        record.rows.append(IterationRow(
            k, theta.angles.copy(), sel.cost, sel.step_l1, bool(meas),
            meas.marker if meas else -1, float(meas.R[0, 0]) if meas else float("nan"),
            state.x_hat.copy(), np.diag(state.P).copy(), pos, rot,
            metrics.accumulated_movement(history), discarded))
    return record


@dataclass
class MethodAggregate:
    label: str
    runs: int
    mean: dict  # metric -> (iterations,) array
    std: dict
    discarded_mean: float
    discarded_std: float
    failed_runs: int = 0


def _run_job(args):
    cfg, method, rep, mode = args
    try:
        return run_single(cfg, method, rep, mode)
    except Exception as exc:  # reported per run, aggregation continues
        log.error("run %s rep %d (%s) failed: %s", method, rep, mode, exc)
        return (method, rep, mode, repr(exc))


def jobs(cfg):
    return [(cfg, m, rep, mode) for rep in range(cfg.repetitions) for mode in cfg.noise_modes
            for m in cfg.methods]


def run_suite(cfg, progress=None):
    """Run every (method, noise mode, repetition) and aggregate per method label."""
    cfg.validate()
    todo = jobs(cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_job, todo, chunksize=1))
    else:
        results = []
        for i, job in enumerate(todo):
            results.append(_run_job(job))
            if progress:
                progress(i + 1, len(todo))
    records = [r for r in results if isinstance(r, RunRecord)]
    failures = [r for r in results if not isinstance(r, RunRecord)]
    return aggregate(cfg, records, failures), records


def aggregate(cfg, records, failures=()):
    out = {}
    labels = [method_label(m, mode) for mode in cfg.noise_modes for m in cfg.methods]
    for label in labels:
        runs = sorted((r for r in records if r.label == label), key=lambda r: r.rep)
        failed = sum(1 for f in failures if method_label(f[0], f[2]) == label)
        if not runs:
            continue
        table = {m: np.array([[getattr(row, m) for row in r.rows] for r in runs], dtype=float)
                 for m in METRICS}
        d_mean, d_std = metrics.aggregate_counts([r.discarded() for r in runs])
        out[label] = MethodAggregate(
            label, len(runs),
            {m: v.mean(axis=0) for m, v in table.items()},
            {m: v.std(axis=0) for m, v in table.items()},
            d_mean, d_std, failed)
    return out


def _fmt(x):
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _write_csv(path, header, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def summary_rows(aggregates):
    al = aggregates.get("AL")
    al_move = al.mean["cum_move_deg"][-1] if al is not None else float("nan")
    rows = []
    for label, agg in aggregates.items():
        move = agg.mean["cum_move_deg"][-1]
        rows.append([label, agg.runs, agg.failed_runs,
                     agg.mean["pos_err_mm"][-1], agg.std["pos_err_mm"][-1],
                     agg.mean["rot_err_deg"][-1], agg.std["rot_err_deg"][-1],
                     move, move / al_move if al is not None else float("nan"),
                     agg.discarded_mean, agg.discarded_std])
    return rows


SUMMARY_COLUMNS = ["method", "runs", "failed_runs", "pos_err_mm", "pos_err_std", "rot_err_deg",
                   "rot_err_std", "cum_move_deg", "move_ratio_vs_al", "discarded_mean",
                   "discarded_std"]


def manifest_text(cfg):
    seeds = {}
    for rep in range(cfg.repetitions):
        seeds[f"init_rep{rep}"] = init_seed(cfg.master_seed, rep).generate_state(2).tolist()
        for m in cfg.methods:
            seeds[f"{m}_rep{rep}"] = method_seed(cfg.master_seed, m, rep).generate_state(2).tolist()
    versions = {"bodyschema": __version__, "numpy": np.__version__,
                "python": platform.python_version()}
    return config_mod.dumps(cfg, {"seeds": seeds, "versions": versions})


def emit_outputs(cfg, aggregates, records, out_dir=None):
    """Write per-run, per-method, summary and manifest files; returns their paths."""
    out_dir = out_dir or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    records = sorted(records, key=lambda r: (cfg.noise_modes.index(r.mode), cfg.methods.index(r.method), r.rep))
    p = os.path.join(out_dir, "runs.csv")
    _write_csv(p, METRIC_COLUMNS, [[r.run_id, r.label, row.iteration, row.pos_err_mm, row.rot_err_deg,
                                    row.cum_move_deg, row.discarded_so_far]
                                   for r in records for row in r.rows])
    paths.append(p)

    p = os.path.join(out_dir, "selections.csv")
    n = max((len(r.theta0) for r in records), default=0)
    header = SELECTION_COLUMNS + [f"theta{j}_deg" for j in range(n)]
    _write_csv(p, header, [[r.run_id, r.label, row.iteration, row.cost, row.step_l1, int(row.detected),
                            row.marker, row.sigma2, *np.degrees(row.theta)]
                           for r in records for row in r.rows])
    paths.append(p)

    p = os.path.join(out_dir, "estimates.csv")
    dim = max((len(r.rows[0].x_hat) for r in records if r.rows), default=0)
    header = ["run_id", "method", "iteration"] + [f"x{j}" for j in range(dim)] + [f"p{j}" for j in range(dim)]
    _write_csv(p, header, [[r.run_id, r.label, row.iteration, *row.x_hat, *row.p_diag]
                           for r in records for row in r.rows])
    paths.append(p)

    for label, agg in aggregates.items():
        p = os.path.join(out_dir, f"iterations_{label.lower()}.csv")
        header = ["iteration"] + [c for m in METRICS for c in (f"{m}_mean", f"{m}_std")]
        rows = [[k + 1] + [v for m in METRICS for v in (agg.mean[m][k], agg.std[m][k])]
                for k in range(len(agg.mean["pos_err_mm"]))]
        _write_csv(p, header, rows)
        paths.append(p)

    p = os.path.join(out_dir, "summary.csv")
    _write_csv(p, SUMMARY_COLUMNS, summary_rows(aggregates))
    paths.append(p)

    p = os.path.join(out_dir, "manifest.ini")
    with open(p, "w", encoding="utf-8") as fh:
        fh.write(manifest_text(cfg))
    paths.append(p)
    return paths
