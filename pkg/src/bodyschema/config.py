"""Experiment configuration: dataclasses plus a sectioned key=value file format.

The file is INI-style (``configparser``). Unknown keys are rejected so that
typos do not silently fall back to defaults. Multi-row values (the DH
table, joint limits) are written one row per line.
"""

import configparser
import io
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import arms
from . import kinematics as kin
from . import noise as noise_mod
from . import simworld
from .occlusion import OcclusionMemory
from .selection import CostParams, Method, NoiseMode, SelectionMethod


@dataclass(frozen=True)
class WorldConfig:
    arm: str = "icub"  # "icub" or "custom" (then dh_table/limits are used)
    dh_table: str = ""
    base_transform: str = ""
    joint_limits_deg: str = ""
    camera_position: tuple = (-0.08, 0.0, 0.37)
    camera_target: tuple = (-0.25, -0.2, 0.15)
    fov_half_angle: float = 35.0
    marker_offset: float = 0.02
    max_view_angle: float = 80.0
    require_frontal_workspace: bool = True


@dataclass(frozen=True)
class NoiseConfig:
    noise_a: float = 2e-5
    noise_b: float = 2.5e-7
    constant_sigma2: float = 5e-6


@dataclass(frozen=True)
class EstimatorConfig:
    process_noise: float = 2e-5  # per step, m^2 or rad^2
    linear_width: float = simworld.LINEAR_WIDTH
    angular_width_deg: float = 54.0


@dataclass(frozen=True)
class OcclusionConfig:
    prior_a0: float = 1.0
    prior_b0: float = 1.0
    length_scale: float = 0.15


@dataclass(frozen=True)
class SelectionConfig:
    penalty_a: float = 1e-5
    penalty_b: float = 100.0
    gamma: float = 7e-4
    delta: float = 0.3
    budget: int = 200
    epsilon: float = 1e-4


@dataclass(frozen=True)
class ExperimentConfig:
    world: WorldConfig = WorldConfig()
    noise: NoiseConfig = NoiseConfig()
    estimator: EstimatorConfig = EstimatorConfig()
    occlusion: OcclusionConfig = OcclusionConfig()
    selection: SelectionConfig = SelectionConfig()
    methods: tuple = ("r", "al", "ucsal", "ccsal")
    noise_modes: tuple = ("pdn",)
    iterations: int = 50
    repetitions: int = 50
    eval_size: int = 1000
    master_seed: int = 0
    output_dir: str = "results"
    workers: int = 1

    def validate(self):
        if self.iterations < 1 or self.repetitions < 1:
            raise ValueError("iterations and repetitions must be at least 1")
        if self.eval_size < 1:
            raise ValueError("eval_size must be at least 1")
        for m in self.methods:
            Method(m)
        for mode in self.noise_modes:
            NoiseMode(mode)
        self.cost_params()
        self.build_world(0)
        return self

    # builders -------------------------------------------------------------

    def arm(self):
        w = self.world
        if w.arm == "icub":
            return arms.icub_right_arm()
        if w.arm != "custom":
            raise ValueError(f"unknown arm {w.arm!r}")
        base = np.eye(4)
        if w.base_transform.strip():
            base = np.array(w.base_transform.split(), dtype=float).reshape(4, 4)
        table = kin.DhTable.from_text(w.dh_table, base)
        limits = np.radians(np.array([r.split() for r in w.joint_limits_deg.strip().splitlines()], dtype=float))
        if limits.shape != (table.n_joints, 2):
            raise ValueError("joint_limits_deg needs one 'min max' line per DH row")
        return table, limits

    def camera(self):
        w = self.world
        return noise_mod.CameraModel.looking_at(w.camera_position, w.camera_target, w.fov_half_angle)

    def noise_params(self):
        n = self.noise
        return noise_mod.NoiseParams(n.noise_a, n.noise_b, n.constant_sigma2)

    def build_world(self, seed):
        table, limits = self.arm()
        return simworld.GroundTruth(
            table, limits, simworld.default_markers(self.world.marker_offset), self.camera(),
            self.noise_params(),
            simworld.VisibilityRule(self.world.max_view_angle, self.world.require_frontal_workspace),
            seed=seed)

    def cost_params(self):
        s = self.selection
        return CostParams(s.penalty_a, s.penalty_b, s.gamma, s.delta)

    def selection_method(self, name):
        return SelectionMethod(Method(name), self.cost_params())

    def empty_memory(self):
        o = self.occlusion
        return OcclusionMemory((), o.prior_a0, o.prior_b0, o.length_scale)


_SECTIONS = {
    "world": WorldConfig,
    "noise": NoiseConfig,
    "estimator": EstimatorConfig,
    "occlusion": OcclusionConfig,
    "selection": SelectionConfig,
}
_EXPERIMENT_KEYS = ("methods", "noise_modes", "iterations", "repetitions", "eval_size",
                    "master_seed", "output_dir", "workers")


def _parse(value, default):
    if isinstance(default, bool):
        lowered = value.strip().lower()
        if lowered not in ("true", "false", "yes", "no", "1", "0"):
            raise ValueError(f"not a boolean: {value!r}")
        return lowered in ("true", "yes", "1")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    if isinstance(default, tuple):
        parts = [p for p in value.replace(",", " ").split() if p]
        if default and isinstance(default[0], float):
            return tuple(float(p) for p in parts)
        return tuple(parts)
    return value.strip()


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, str) and "\n" in value:
        return "\n" + value.strip()
    return str(value)


def loads(text):
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(text)
    cfg = ExperimentConfig()
    for section in parser.sections():
        if section == "experiment":
            updates = {}
            for key, value in parser.items(section):
                if key not in _EXPERIMENT_KEYS:
                    raise ValueError(f"unknown key [experiment] {key}")
                updates[key] = _parse(value, getattr(cfg, key))
            cfg = replace(cfg, **updates)
        elif section in _SECTIONS:
            current = getattr(cfg, section)
            known = {f.name for f in fields(current)}
            updates = {}
            for key, value in parser.items(section):
                if key not in known:
                    raise ValueError(f"unknown key [{section}] {key}")
                updates[key] = _parse(value, getattr(current, key))
            cfg = replace(cfg, **{section: replace(current, **updates)})
        else:
            raise ValueError(f"unknown section [{section}]")
    return cfg


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(cfg, extra=None):
    """Serialize ``cfg``; ``extra`` maps section -> {key: value} (e.g. resolved seeds)."""
    parser = configparser.ConfigParser(interpolation=None)
    parser["experiment"] = {k: _format(getattr(cfg, k)) for k in _EXPERIMENT_KEYS}
    for name in _SECTIONS:
        section = getattr(cfg, name)
        parser[name] = {f.name: _format(getattr(section, f.name)) for f in fields(section)}
    for name, values in (extra or {}).items():
        parser[name] = {k: str(v) for k, v in values.items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def loads_manifest(text):
    """Config from a manifest, ignoring the informational sections."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(text)
    for extra in ("seeds", "versions"):
        parser.remove_section(extra)
    buf = io.StringIO()
    parser.write(buf)
    return loads(buf.getvalue())
