"""Ask-and-explore curiosity lab: push world, question engine, PPO baselines."""

from .ane import AnEConfig, AnECuriosity
from .baselines import IcmCuriosity, NoCuriosity, RndCuriosity
from .harness import ExperimentConfig, aggregate, preset_suite, run_experiment
from .ppo import Trainer, TrainerConfig
from .questions import Question, answer, enumerate_questions, parse_question, render_question
from .scene import Action, GoalSpec, Scene, SceneEnv, decode_action

__all__ = [
    "AnEConfig", "AnECuriosity", "IcmCuriosity", "NoCuriosity", "RndCuriosity",
    "ExperimentConfig", "aggregate", "preset_suite", "run_experiment",
    "Trainer", "TrainerConfig",
    "Question", "answer", "enumerate_questions", "parse_question", "render_question",
    "Action", "GoalSpec", "Scene", "SceneEnv", "decode_action",
]

__version__ = "0.1.0"
