"""Deterministic 2D push world: 5 colored spheres in a square arena.

40 discrete actions (5 objects x 8 compass directions). Pushes translate
the chosen object; blockers are displaced along the push direction so
discs never interpenetrate. All arithmetic is fixed-order float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

COLORS = ("cyan", "purple", "green", "blue", "red")
MATERIALS = ("rubber", "metal")
DIRECTIONS = ("E", "NE", "N", "NW", "W", "SW", "S", "SE")

_SQ = math.sqrt(0.5)
DIRECTION_VECTORS = {
    "E": (1.0, 0.0),
    "NE": (_SQ, _SQ),
    "N": (0.0, 1.0),
    "NW": (-_SQ, _SQ),
    "W": (-1.0, 0.0),
    "SW": (-_SQ, -_SQ),
    "S": (0.0, -1.0),
    "SE": (_SQ, -_SQ),
}

ARENA_HALF = 1.0
OBJECT_RADIUS = 0.1
PUSH_DISTANCE = 0.15
SEPARATION_EPS = 1e-9

COLOR_RGB = {
    "cyan": (0, 255, 255),
    "purple": (160, 32, 240),
    "green": (0, 160, 0),
    "blue": (0, 0, 255),
    "red": (255, 0, 0),
}

N_OBJECTS = len(COLORS)
N_ACTIONS = N_OBJECTS * len(DIRECTIONS)


class PlacementError(RuntimeError):
    """Scene generation could not place non-overlapping objects."""


@dataclass(frozen=True)
class ObjectState:
    color: str
    material: str
    x: float
    y: float


@dataclass(frozen=True)
class Scene:
    objects: tuple  # 5 ObjectState in canonical color order
    step_count: int = 0

    def positions(self) -> np.ndarray:
        return np.array([[o.x, o.y] for o in self.objects])

    def find(self, color: str, material: str | None = None):
        """Object of the given color, or None if the material does not match."""
        obj = self.objects[COLORS.index(color)]
        if material is not None and obj.material != material:
            return None
        return obj


@dataclass(frozen=True)
class Action:
    object_index: int
    direction: str

    @property
    def flat_index(self) -> int:
        return self.object_index * 8 + DIRECTIONS.index(self.direction)


@dataclass(frozen=True)
class GoalSpec:
    kind: str  # "dense_relation" | "sparse_ordering"
    relation_question: object | None = None  # one-hop Question (dense only)

    def __post_init__(self):
        if self.kind not in ("dense_relation", "sparse_ordering"):
            raise ValueError(f"unknown goal kind {self.kind!r}")
        if self.kind == "dense_relation":
            if self.relation_question is None or self.relation_question.hops != 1:
                raise ValueError("dense_relation goal needs a one-hop question")
        elif self.relation_question is not None:
            raise ValueError("sparse_ordering goal carries no question")


def decode_action(index: int) -> Action:
    if not 0 <= index < N_ACTIONS:
        raise ValueError(f"action index {index} outside [0, {N_ACTIONS})")
    return Action(index // 8, DIRECTIONS[index % 8])


def encode_action(action: Action) -> int:
    return action.flat_index


def _clamp(v: float) -> float:
    lo = -(ARENA_HALF - OBJECT_RADIUS)
    hi = ARENA_HALF - OBJECT_RADIUS
    return lo if v < lo else hi if v > hi else v


def reset(goal: GoalSpec, seed: int, max_attempts: int = 10_000) -> Scene:
    """Place the 5 spheres uniformly at random without overlap.

    For dense goals, re-place until the goal question evaluates false.
    Deterministic given `seed`.
    """
    from .questions import answer  # local import avoids a module cycle

    rng = np.random.default_rng(seed)
    lo = -(ARENA_HALF - OBJECT_RADIUS)
    hi = ARENA_HALF - OBJECT_RADIUS
    min_sep = 2.0 * OBJECT_RADIUS
    attempts = 0
    while True:
        placed = []
        while len(placed) < N_OBJECTS:
            attempts += 1
            if attempts > max_attempts:
                raise PlacementError(
                    f"could not place {N_OBJECTS} objects in {max_attempts} attempts"
                )
            x = rng.uniform(lo, hi)
            y = rng.uniform(lo, hi)
            if all((x - px) ** 2 + (y - py) ** 2 >= min_sep * min_sep for px, py in placed):
                placed.append((x, y))
        scene = Scene(
            objects=tuple(
                ObjectState(color, "rubber", x, y)
                for color, (x, y) in zip(COLORS, placed)
            ),
            step_count=0,
        )
        if goal.kind != "dense_relation":
            return scene
        if not answer(scene, goal.relation_question):
            return scene


def _advance_to_separation(w_dot_u: float, w_sq: float) -> float:
    """Distance to move a blocker along +u so its center sits 2r from the pusher.

    w = blocker - pusher before the move; solves |w + t*u| = 2r for t >= 0.
    """
    target_sq = (2.0 * OBJECT_RADIUS) ** 2
    disc = w_dot_u * w_dot_u + target_sq - w_sq
    if disc < 0.0:
        disc = 0.0
    return -w_dot_u + math.sqrt(disc)


def step(scene: Scene, action: Action) -> Scene:
    """Push one object; displace blockers transitively along the push direction."""
    ux, uy = DIRECTION_VECTORS[action.direction]
    pos = [[o.x, o.y] for o in scene.objects]
    i0 = action.object_index
    pos[i0][0] += PUSH_DISTANCE * ux
    pos[i0][1] += PUSH_DISTANCE * uy

    min_sep = 2.0 * OBJECT_RADIUS
    min_sep_sq = min_sep * min_sep

    moved = {i0}
    queue = [i0]
    pops = 0
    while queue and len(moved) < N_OBJECTS and pops < 64:
        pops += 1
        i = queue.pop(0)
        xi, yi = pos[i]
        for j in range(N_OBJECTS):
            if j == i:
                continue
            wx = pos[j][0] - xi
            wy = pos[j][1] - yi
            w_sq = wx * wx + wy * wy
            if w_sq < min_sep_sq - SEPARATION_EPS:
                t = _advance_to_separation(wx * ux + wy * uy, w_sq)
                pos[j][0] += t * ux
                pos[j][1] += t * uy
                if j not in moved:
                    moved.add(j)
                    queue.append(j)
                else:
                    queue.append(j)

    for p in pos:
        p[0] = _clamp(p[0])
        p[1] = _clamp(p[1])

    # clamping at a wall can re-create overlap; settle by backing the
    # trailing object (smaller projection on u) away from the push direction
    for _ in range(50):
        settled = True
        for i in range(N_OBJECTS):
            for j in range(i + 1, N_OBJECTS):
                wx = pos[j][0] - pos[i][0]
                wy = pos[j][1] - pos[i][1]
                w_sq = wx * wx + wy * wy
                if w_sq >= min_sep_sq - SEPARATION_EPS:
                    continue
                settled = False
                proj_i = pos[i][0] * ux + pos[i][1] * uy
                proj_j = pos[j][0] * ux + pos[j][1] * uy
                if proj_i <= proj_j:
                    back, anchor = i, j
                    wx, wy = -wx, -wy
                else:
                    back, anchor = j, i
                # move `back` along -u until 2r from `anchor`
                w_dot_u = wx * ux + wy * uy
                disc = w_dot_u * w_dot_u + min_sep_sq - w_sq
                if disc < 0.0:
                    disc = 0.0
                t = w_dot_u + math.sqrt(disc)
                pos[back][0] = _clamp(pos[back][0] - t * ux)
                pos[back][1] = _clamp(pos[back][1] - t * uy)
        if settled:
            break

    return Scene(
        objects=tuple(
            replace(o, x=p[0], y=p[1]) for o, p in zip(scene.objects, pos)
        ),
        step_count=scene.step_count + 1,
    )


def observe(scene: Scene, mode: str = "state_vector"):
    """Observation of the scene; `mode` is `state_vector` or `image`."""
    if mode == "state_vector":
        out = np.empty(2 * N_OBJECTS)
        for i, o in enumerate(scene.objects):
            out[2 * i] = o.x
            out[2 * i + 1] = o.y
        return out
    if mode == "image":
        return rasterize(scene)
    raise ValueError(f"unknown observation mode {mode!r}")


def rasterize(scene: Scene, size: int = 64) -> np.ndarray:
    """Filled color discs on a white background, (size, size, 3) uint8."""
    img = np.full((size, size, 3), 255, dtype=np.uint8)
    yy, xx = np.mgrid[0:size, 0:size]
    scale = size / (2.0 * ARENA_HALF)
    r_px = OBJECT_RADIUS * scale
    for o in scene.objects:
        cx = (o.x + ARENA_HALF) * scale
        cy = (o.y + ARENA_HALF) * scale
        mask = (xx + 0.5 - cx) ** 2 + (yy + 0.5 - cy) ** 2 <= r_px * r_px
        img[mask] = COLOR_RGB[o.color]
    return img


def dense_reward(scene_after: Scene, goal: GoalSpec):
    """(+1, done) when the goal relation question has become true."""
    from .questions import answer

    if goal.kind != "dense_relation":
        raise ValueError("dense_reward requires a dense_relation goal")
    if answer(scene_after, goal.relation_question):
        return 1.0, True
    return 0.0, False


def sparse_reward(scene_after: Scene, vertical_tolerance: float = 0.15):
    """(+10, done) when colors are strictly ordered left-to-right and rows align.

    Order: cyan < purple < green < blue < red by x; every y within
    `vertical_tolerance` of the median y.
    """
    xs = [o.x for o in scene_after.objects]
    if not all(xs[i] < xs[i + 1] for i in range(N_OBJECTS - 1)):
        return 0.0, False
    ys = sorted(o.y for o in scene_after.objects)
    med = ys[N_OBJECTS // 2]
    if all(abs(o.y - med) <= vertical_tolerance for o in scene_after.objects):
        return 10.0, True
    return 0.0, False


def episode_done(scene: Scene, reward_done: bool, max_steps: int) -> bool:
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    return reward_done or scene.step_count >= max_steps


def serialize_scene(scene: Scene) -> str:
    """One line per object: `color material x y` with 6-decimal coordinates."""
    return "\n".join(
        f"{o.color} {o.material} {o.x:.6f} {o.y:.6f}" for o in scene.objects
    )


def parse_scene(text: str) -> Scene:
    objects = []
    for line in text.strip().splitlines():
        color, material, x, y = line.split()
        if color not in COLORS:
            raise ValueError(f"unknown color {color!r}")
        if material not in MATERIALS:
            raise ValueError(f"unknown material {material!r}")
        objects.append(ObjectState(color, material, float(x), float(y)))
    if tuple(o.color for o in objects) != COLORS:
        raise ValueError("objects must appear in canonical color order")
    return Scene(objects=tuple(objects), step_count=0)


class SceneEnv:
    """Episode wrapper: goal, reward, termination, observation.

    Single-threaded by design; run independent instances for parallel work.
    """

    def __init__(self, goal: GoalSpec, seed: int = 0, max_steps: int = 100,
                 obs_mode: str = "state_vector", vertical_tolerance: float = 0.15):
        self.goal = goal
        self.max_steps = max_steps
        self.obs_mode = obs_mode
        self.vertical_tolerance = vertical_tolerance
        self._rng = np.random.default_rng(seed)
        self.scene = None

    @property
    def action_count(self) -> int:
        return N_ACTIONS

    @property
    def obs_dim(self) -> int:
        return 2 * N_OBJECTS if self.obs_mode == "state_vector" else 64 * 64 * 3

    def reset(self, seed: int | None = None):
        if seed is None:
            seed = int(self._rng.integers(0, 2**63 - 1))
        self.scene = reset(self.goal, seed)
        return observe(self.scene, self.obs_mode)

    def step(self, action_index: int):
        action = decode_action(action_index)
        self.scene = step(self.scene, action)
        if self.goal.kind == "dense_relation":
            reward, success = dense_reward(self.scene, self.goal)
        else:
            reward, success = sparse_reward(self.scene, self.vertical_tolerance)
        done = episode_done(self.scene, success, self.max_steps)
        obs = observe(self.scene, self.obs_mode)
        return obs, reward, done, {"success": success}
