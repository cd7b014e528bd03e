"""Experiment harness: configs, multi-seed runs, CSV logs, aggregation, presets."""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field

import numpy as np

from . import questions as qmod
from .ane import AnEConfig, AnECuriosity
from .baselines import IcmCuriosity, NoCuriosity, RndCuriosity
from .ppo import Trainer, TrainerConfig
from .scene import GoalSpec, SceneEnv

TASKS = ("dense", "sparse")
METHODS = ("ppo", "icm", "rnd", "ane")

METRIC_COLUMNS = (
    "rollout_index", "env_steps", "mean_extrinsic_return",
    "success_rate", "mean_intrinsic", "replacements",
)

CURIOSITY_COLUMNS = (
    "rollout_index", "total_intrinsic", "replacements_count", "reservoir_remaining",
)

# the dense object-alignment goal: green anchor, cyan queried, front relation
DEFAULT_DENSE_GOAL = "There is a green rubber sphere; are there any rubber cyan balls in front of it?"


@dataclass
class ExperimentConfig:
    task: str = "sparse"
    method: str = "ane"
    hop: int = 2
    n_questions: int = 1
    alpha: float = 0.6
    seeds: tuple = (0, 1, 2)
    extrinsic_enabled: bool = True
    max_steps: int = 100
    vertical_tolerance: float = 0.15
    obs_mode: str = "state_vector"
    outdir: str = "runs"
    label: str = ""
    question_file: str | None = None  # custom AnE question pool, one per line
    trainer: TrainerConfig = field(default_factory=TrainerConfig)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.hop not in qmod.HOPS:
            raise ValueError(f"hop must be one of {qmod.HOPS}, got {self.hop!r}")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.method == "ane" and not 0.5 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0.5, 1], got {self.alpha}")
        if not self.label:
            self.label = self.method

    def goal(self) -> GoalSpec:
        if self.task == "dense":
            return GoalSpec("dense_relation", qmod.parse_question(DEFAULT_DENSE_GOAL))
        return GoalSpec("sparse_ordering")


_EXPERIMENT_KEYS = {
    "task": str, "method": str, "hop": int, "n_questions": int, "alpha": float,
    "seeds": lambda s: tuple(int(x) for x in s.split(",")),
    "extrinsic_enabled": lambda s: s.lower() in ("1", "true", "yes"),
    "outdir": str, "label": str, "question_file": str,
}
_ENV_KEYS = {
    "max_steps": int, "vertical_tolerance": float, "obs_mode": str,
}
_TRAINER_KEYS = {
    "rollouts": int, "epochs": int, "rollout_length": int, "gamma": float,
    "gae_lambda": float, "clip_ratio": float, "learning_rate": float,
    "entropy_coef": float, "value_coef": float, "intrinsic_scale": float,
    "normalize_advantages": lambda s: s.lower() in ("1", "true", "yes"),
    "checkpoint_interval": int,
}
_ANE_KEYS = {"n_questions": int, "alpha": float, "hop": int}


def parse_config(path: str | None = None, flags: dict | None = None) -> ExperimentConfig:
    """Build a config from an INI file and/or flag overrides (flags win)."""
    values: dict = {}
    trainer_values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ValueError(f"cannot read config file {path!r}")
        for section, keys, sink in (
            ("experiment", _EXPERIMENT_KEYS, values),
            ("env", _ENV_KEYS, values),
            ("ane", _ANE_KEYS, values),
            ("trainer", _TRAINER_KEYS, trainer_values),
        ):
            if not parser.has_section(section):
                continue
            for key, raw in parser.items(section):
                if key not in keys:
                    raise ValueError(f"unknown key {key!r} in section [{section}]")
                try:
                    sink[key] = keys[key](raw)
                except ValueError as exc:
                    raise ValueError(f"bad value for [{section}] {key}: {raw!r}") from exc
    for key, value in (flags or {}).items():
        if value is None:
            continue
        if key in _TRAINER_KEYS:
            trainer_values[key] = value
        elif key in _EXPERIMENT_KEYS or key in _ENV_KEYS or key in _ANE_KEYS:
            values[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    trainer = TrainerConfig(**trainer_values)
    return ExperimentConfig(trainer=trainer, **values)


def echo_config(config: ExperimentConfig, path: str):
    parser = configparser.ConfigParser()
    parser["experiment"] = {
        "task": config.task, "method": config.method,
        "seeds": ",".join(str(s) for s in config.seeds),
        "extrinsic_enabled": str(config.extrinsic_enabled),
        "outdir": config.outdir, "label": config.label,
    }
    parser["env"] = {
        "max_steps": str(config.max_steps),
        "vertical_tolerance": str(config.vertical_tolerance),
        "obs_mode": config.obs_mode,
    }
    parser["ane"] = {
        "n_questions": str(config.n_questions),
        "alpha": str(config.alpha),
        "hop": str(config.hop),
    }
    parser["trainer"] = {
        k: str(v) for k, v in dataclasses.asdict(config.trainer).items()
        if k not in ("hidden", "checkpoint_path")
    }
    with open(path, "w") as fh:
        parser.write(fh)


def build_curiosity(config: ExperimentConfig, env: SceneEnv, seed: int):
    if config.method == "ppo":
        return NoCuriosity()
    if config.method == "icm":
        return IcmCuriosity(env.obs_dim, env.action_count, seed=seed)
    if config.method == "rnd":
        return RndCuriosity(env.obs_dim, seed=seed)
    ane_cfg = AnEConfig(n=config.n_questions, alpha=config.alpha, hop=config.hop)
    pool = None
    if config.question_file:
        pool = qmod.load_question_file(config.question_file)
    return AnECuriosity(env, ane_cfg, K=config.trainer.rollout_length, seed=seed,
                        question_pool=pool)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".10g")


def run_single_seed(config: ExperimentConfig, seed: int, outdir: str):
    """One deterministic training run; writes metrics, curiosity, timing CSVs."""
    goal = config.goal()
    env = SceneEnv(
        goal, seed=seed, max_steps=config.max_steps,
        obs_mode=config.obs_mode, vertical_tolerance=config.vertical_tolerance,
    )
    trainer_cfg = config.trainer
    if not config.extrinsic_enabled:
        trainer_cfg = dataclasses.replace(trainer_cfg, extrinsic_enabled=False)
    curiosity = build_curiosity(config, env, seed)
    trainer = Trainer(env, trainer_cfg, curiosity, seed=seed)

    metrics_path = os.path.join(outdir, f"seed{seed}_metrics.csv")
    timing_path = os.path.join(outdir, f"seed{seed}_timing.csv")
    curiosity_path = os.path.join(outdir, f"seed{seed}_curiosity.csv")
    with open(metrics_path, "w", newline="") as mfh, \
            open(timing_path, "w", newline="") as tfh, \
            open(curiosity_path, "w", newline="") as cfh:
        mfh.write(",".join(METRIC_COLUMNS) + "\n")
        tfh.write("rollout_index,wall_clock_seconds\n")
        cfh.write(",".join(CURIOSITY_COLUMNS) + "\n")

        def on_rollout(row, batch, extras):
            mfh.write(",".join([
                _fmt(row.rollout_index), _fmt(row.env_steps),
                _fmt(row.mean_extrinsic_return), _fmt(row.success_rate),
                _fmt(row.mean_intrinsic), _fmt(row.replacements),
            ]) + "\n")
            tfh.write(f"{row.rollout_index},{row.wall_clock:.6f}\n")
            cfh.write(",".join([
                _fmt(row.rollout_index), _fmt(float(batch.intrinsic.sum())),
                _fmt(extras.get("replacements", 0)),
                _fmt(extras.get("reservoir_remaining", 0)),
            ]) + "\n")

        trainer.fit(on_rollout=on_rollout)
    return metrics_path


def run_experiment(config: ExperimentConfig, outdir: str | None = None):
    """Run every seed independently; a failing seed does not stop the rest."""
    outdir = outdir or config.outdir
    os.makedirs(outdir, exist_ok=True)
    echo_config(config, os.path.join(outdir, "config.ini"))
    paths = []
    failures = {}
    for seed in config.seeds:
        try:
            paths.append(run_single_seed(config, seed, outdir))
        except Exception as exc:  # noqa: BLE001 - record and continue
            failures[seed] = repr(exc)
    if failures:
        with open(os.path.join(outdir, "failures.txt"), "w") as fh:
            for seed, msg in sorted(failures.items()):
                fh.write(f"seed {seed}: {msg}\n")
    return paths, failures


def read_metrics_csv(path: str) -> dict:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}


def aggregate(paths):
    """Pointwise mean and population std per metric across seed logs."""
    if not paths:
        raise ValueError("no logs to aggregate")
    logs = [read_metrics_csv(p) for p in paths]
    index = logs[0]["rollout_index"]
    for p, log_ in zip(paths[1:], logs[1:]):
        if len(log_["rollout_index"]) != len(index) or \
                not np.array_equal(log_["rollout_index"], index):
            raise ValueError(
                f"misaligned rollout indices: {paths[0]} vs {p}"
            )
    out = {"rollout_index": index, "env_steps": logs[0]["env_steps"]}
    for name in METRIC_COLUMNS[2:]:
        stack = np.stack([log_[name] for log_ in logs])
        out[name] = (stack.mean(axis=0), stack.std(axis=0))
    return out


def preset_suite(name: str, outdir: str = "runs", seeds: tuple = (0, 1, 2),
                 rollouts: int = 2000) -> list:
    """Experiment lists mirroring the four study layouts."""
    def make(task, method, hop=2, n=1, extrinsic=True, label=None, K=128):
        trainer = TrainerConfig(
            rollouts=rollouts, rollout_length=K,
            epochs=4 if method == "rnd" else 3,
        )
        label = label or f"{method}"
        return ExperimentConfig(
            task=task, method=method, hop=hop, n_questions=n, seeds=seeds,
            extrinsic_enabled=extrinsic, label=label, trainer=trainer,
            outdir=os.path.join(outdir, f"{name}_{task}_{label}"),
        )

    if name == "sparsity":
        return [make(task, m) for task in TASKS for m in METHODS]
    if name == "complexity":
        # hop-1 has only 80 questions, fewer than n*K at K=128; shorten
        # those rollouts so the active set fits the enumerable pool
        return [
            make(task, "ane", hop=h, label=f"ane_hop{h}", K=64 if h == 1 else 128)
            for task in TASKS for h in qmod.HOPS
        ]
    if name == "density":
        return [
            make(task, "ane", n=n, label=f"ane_n{n}")
            for task in TASKS for n in (1, 2, 4)
        ]
    if name == "pure":
        return [
            make("sparse", m, extrinsic=False, label=f"{m}_pure")
            for m in ("icm", "rnd", "ane")
        ]
    raise ValueError(f"unknown preset {name!r}; choose sparsity/complexity/density/pure")
