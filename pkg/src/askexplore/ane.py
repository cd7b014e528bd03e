"""Answer-flip curiosity: reservoir of questions, per-step active slots,
flip counters, and threshold-based question replacement.

The intrinsic reward for a transition is the number of active questions
whose answer differs between the scenes before and after the action.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import questions as qmod
from .scene import Scene

log = logging.getLogger(__name__)


@dataclass
class AnEConfig:
    n: int = 1            # questions queried per step
    alpha: float = 0.6    # flip-frequency ceiling before replacement
    hop: int = 2
    M: int | None = None  # reservoir size; None = full enumeration for the hop

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.5 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0.5, 1], got {self.alpha}")
        if self.hop not in qmod.HOPS:
            raise ValueError(f"hop must be one of {qmod.HOPS}")

    def reservoir_size(self) -> int:
        return qmod.QUESTION_COUNTS[self.hop] if self.M is None else self.M


@dataclass
class Reservoir:
    questions: list          # ordered pool; replacements pop from the front
    flip_counters: dict      # question -> flips observed while active
    capacity: int

    def remaining(self) -> int:
        return len(self.questions)


@dataclass
class ActiveSet:
    slots: list              # K lists of n questions each
    n: int
    K: int

    def all_questions(self):
        return [q for slot in self.slots for q in slot]


@dataclass
class StepCuriosityResult:
    intrinsic_reward: int
    flipped: list            # per-question booleans
    replacements: list = field(default_factory=list)  # (old, new) pairs


def init_reservoir(env, config: AnEConfig, seed: int) -> Reservoir:
    """Fill the pool by describing freshly reset scenes until `M` questions seen.

    Spatial questions are enumerable independent of the scene, so validation
    happens up front; the reset loop still follows the collection protocol.
    """
    total = qmod.QUESTION_COUNTS[config.hop]
    M = config.reservoir_size()
    if M > total:
        raise ValueError(
            f"reservoir size {M} exceeds the {total} enumerable hop-{config.hop} questions"
        )
    rng = np.random.default_rng(seed)
    pool: list = []
    seen = set()
    counters: dict = {}
    while len(pool) < M:
        env.reset(seed=int(rng.integers(0, 2**63 - 1)))
        for q, _ans in qmod.describe_scene(env.scene, config.hop):
            if q not in seen:
                seen.add(q)
                pool.append(q)
                counters[q] = 0
                if len(pool) == M:
                    break
    return Reservoir(questions=pool, flip_counters=counters, capacity=M)


def init_active_set(reservoir: Reservoir, n: int, K: int,
                    rng: np.random.Generator) -> ActiveSet:
    """Draw n*K questions uniformly without replacement into K slots of n."""
    need = n * K
    if reservoir.remaining() < need:
        raise ValueError(
            f"reservoir holds {reservoir.remaining()} questions, need {need} (n*K)"
        )
    order = rng.permutation(len(reservoir.questions))[:need]
    drawn = [reservoir.questions[i] for i in order]
    keep = set(order.tolist())
    reservoir.questions = [
        q for i, q in enumerate(reservoir.questions) if i not in keep
    ]
    slots = [drawn[i * n:(i + 1) * n] for i in range(K)]
    return ActiveSet(slots=slots, n=n, K=K)


def begin_rollout(active_set: ActiveSet, rng: np.random.Generator) -> ActiveSet:
    """Shuffle slot order uniformly; slot contents stay grouped."""
    order = rng.permutation(active_set.K)
    active_set.slots = [active_set.slots[i] for i in order]
    return active_set


def step_intrinsic(scene_before: Scene, scene_after: Scene,
                   slot_questions) -> StepCuriosityResult:
    """Count answer flips across the transition for this step's questions."""
    flipped = [
        qmod.answer(scene_before, q) != qmod.answer(scene_after, q)
        for q in slot_questions
    ]
    return StepCuriosityResult(intrinsic_reward=sum(flipped), flipped=flipped)


def apply_replacement(active_set: ActiveSet, reservoir: Reservoir, slot_index: int,
                      flipped, beta: int, alpha: float):
    """Bump flip counters; retire any question whose flip rate reaches alpha.

    `beta` is the 1-based rollout counter: each active question is sampled
    once per rollout, so C[q]/beta is its per-sample flip frequency.
    Retired questions are swapped for the reservoir's front question and
    never return to the pool. With an empty reservoir the question stays
    and its counter resets.
    """
    if beta < 1:
        raise ValueError("beta is a 1-based rollout counter")
    slot = active_set.slots[slot_index]
    replacements = []
    for k, did_flip in enumerate(flipped):
        if not did_flip:
            continue
        q = slot[k]
        reservoir.flip_counters[q] = reservoir.flip_counters.get(q, 0) + 1
        if reservoir.flip_counters[q] / beta >= alpha:
            if reservoir.questions:
                new_q = reservoir.questions.pop(0)
                slot[k] = new_q
                reservoir.flip_counters.setdefault(new_q, 0)
                replacements.append((q, new_q))
            else:
                reservoir.flip_counters[q] = 0
                log.warning(
                    "reservoir exhausted; keeping question and resetting its counter"
                )
    return replacements


class AnECuriosity:
    """Trainer-facing wrapper wiring the reservoir machinery into rollouts."""

    name = "ane"

    def __init__(self, env, config: AnEConfig, K: int, seed: int,
                 question_pool=None):
        self.config = config
        self.K = K
        self.rng = np.random.default_rng(seed)
        if question_pool is not None:
            pool = list(question_pool)
            if len(set(pool)) != len(pool):
                raise ValueError("question pool contains duplicates")
            self.reservoir = Reservoir(
                questions=pool,
                flip_counters={q: 0 for q in pool},
                capacity=len(pool),
            )
        else:
            self.reservoir = init_reservoir(env, config, seed)
        self.active_set = init_active_set(self.reservoir, config.n, K, self.rng)
        self.beta = 0
        self.retired = 0
        self.rollout_replacements = 0

    def begin_rollout(self, beta: int):
        self.beta = beta
        self.rollout_replacements = 0
        begin_rollout(self.active_set, self.rng)

    def step_reward(self, obs, action, obs_next, scene, scene_next, j: int) -> float:
        result = step_intrinsic(scene, scene_next, self.active_set.slots[j])
        reps = apply_replacement(
            self.active_set, self.reservoir, j, result.flipped,
            self.beta, self.config.alpha,
        )
        self.retired += len(reps)
        self.rollout_replacements += len(reps)
        return float(result.intrinsic_reward)

    def update(self, batch):
        pass

    def log_extras(self):
        return {
            "replacements": self.rollout_replacements,
            "reservoir_remaining": self.reservoir.remaining(),
        }
