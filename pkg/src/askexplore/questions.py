"""h-hop spatial questions: grammar, enumeration, rendering, parsing, answering.

A question is a chain of h relational atoms over h+1 distinct colors;
its answer in a scene is the conjunction of the atoms. Relations compare
coordinates strictly: left/right on x, front/behind on y (front = smaller y).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .scene import COLORS, MATERIALS, Scene

RELATIONS = ("left_of", "right_of", "in_front_of", "behind")

RELATION_TEXT = {
    "left_of": "left of",
    "right_of": "right of",
    "in_front_of": "in front of",
    "behind": "behind",
}
_TEXT_RELATION = {v: k for k, v in RELATION_TEXT.items()}

HOPS = (1, 2, 3)

QUESTION_COUNTS = {1: 80, 2: 960, 3: 7680}


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class LexicalError(ParseError):
    """Unknown color, material, or relation token."""


@dataclass(frozen=True)
class ObjectRef:
    color: str
    material: str


@dataclass(frozen=True)
class RelationAtom:
    subject_ref: ObjectRef
    object_ref: ObjectRef
    relation: str

    def __post_init__(self):
        if self.subject_ref.color == self.object_ref.color:
            raise ValueError("atom subject and object colors must differ")
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")


@dataclass(frozen=True)
class Question:
    hops: int
    atoms: tuple  # h RelationAtoms; atom i's object_ref is atom i+1's subject_ref

    def __post_init__(self):
        if self.hops not in HOPS:
            raise ValueError(f"hops must be one of {HOPS}")
        if len(self.atoms) != self.hops:
            raise ValueError("atom count must equal hop count")
        colors = [self.atoms[0].subject_ref.color] + [a.object_ref.color for a in self.atoms]
        if len(set(colors)) != self.hops + 1:
            raise ValueError("question must reference h+1 distinct colors")
        for a, b in zip(self.atoms, self.atoms[1:]):
            if a.object_ref != b.subject_ref:
                raise ValueError("atoms must chain object_ref -> subject_ref")

    @property
    def surface_form(self) -> str:
        return render_question(self)


def relation_holds(scene: Scene, subject_color: str, object_color: str, relation: str) -> bool:
    """Strict coordinate comparison between two colors in the scene."""
    if subject_color not in COLORS or object_color not in COLORS:
        raise LookupError(f"color not in scene: {subject_color!r}/{object_color!r}")
    a = scene.objects[COLORS.index(subject_color)]
    b = scene.objects[COLORS.index(object_color)]
    if relation == "left_of":
        return a.x < b.x
    if relation == "right_of":
        return a.x > b.x
    if relation == "in_front_of":
        return a.y < b.y
    if relation == "behind":
        return a.y > b.y
    raise ValueError(f"unknown relation {relation!r}")


def answer(scene: Scene, q: Question) -> bool:
    """Ground-truth labeling: true iff every atom holds; total over inputs."""
    for atom in q.atoms:
        subj = scene.find(atom.subject_ref.color, atom.subject_ref.material)
        obj = scene.find(atom.object_ref.color, atom.object_ref.material)
        if subj is None or obj is None:
            return False
        if not relation_holds(scene, atom.subject_ref.color, atom.object_ref.color, atom.relation):
            return False
    return True


def enumerate_questions(hop: int, material: str = "rubber"):
    """All distinct h-atom chains over ordered (h+1)-tuples of distinct colors.

    Deterministic order; sizes 80 / 960 / 7680 for hops 1 / 2 / 3.
    """
    if hop not in HOPS:
        raise ValueError(f"hop must be one of {HOPS}, got {hop!r}")
    out = []
    for colors in itertools.permutations(COLORS, hop + 1):
        refs = [ObjectRef(c, material) for c in colors]
        for rels in itertools.product(RELATIONS, repeat=hop):
            atoms = tuple(
                RelationAtom(refs[i], refs[i + 1], rels[i]) for i in range(hop)
            )
            out.append(Question(hops=hop, atoms=atoms))
    return out


def render_question(q: Question) -> str:
    """Canonical surface text; head clause plus one chained clause per extra hop."""
    a0 = q.atoms[0]
    parts = [
        f"There is a {a0.subject_ref.color} {a0.subject_ref.material} sphere; "
        f"are there any {a0.object_ref.material} {a0.object_ref.color} balls "
        f"{RELATION_TEXT[a0.relation]} it"
    ]
    for atom in q.atoms[1:]:
        parts.append(
            f"; and any {atom.object_ref.material} {atom.object_ref.color} balls "
            f"{RELATION_TEXT[atom.relation]} the {atom.subject_ref.color} ball"
        )
    return "".join(parts) + "?"


class _Scanner:
    def __init__(self, text: str):
        self.text = " ".join(text.split())
        self.pos = 0

    def expect(self, literal: str):
        if not self.text.startswith(literal, self.pos):
            raise ParseError(f"expected {literal!r}", self.pos)
        self.pos += len(literal)

    def word(self) -> str:
        end = self.pos
        while end < len(self.text) and (self.text[end].isalpha() or self.text[end] == "_"):
            end += 1
        if end == self.pos:
            raise ParseError("expected a word", self.pos)
        token = self.text[self.pos:end]
        self.pos = end
        return token

    def color(self) -> str:
        start = self.pos
        token = self.word()
        if token not in COLORS:
            raise LexicalError(f"unknown color {token!r}", start)
        return token

    def material(self) -> str:
        start = self.pos
        token = self.word()
        if token not in MATERIALS:
            raise LexicalError(f"unknown material {token!r}", start)
        return token

    def relation(self) -> str:
        start = self.pos
        for text, name in _TEXT_RELATION.items():
            if self.text.startswith(text, self.pos):
                self.pos += len(text)
                return name
        raise LexicalError("unknown relation", start)

    def done(self) -> bool:
        return self.pos == len(self.text)


def parse_question(text: str) -> Question:
    """Parse a canonical question string back to its AST (whitespace-normalized)."""
    s = _Scanner(text)
    s.expect("There is a ")
    c0 = s.color()
    s.expect(" ")
    m0 = s.material()
    s.expect(" sphere; are there any ")
    m1 = s.material()
    s.expect(" ")
    c1 = s.color()
    s.expect(" balls ")
    rel = s.relation()
    s.expect(" it")
    atoms = [RelationAtom(ObjectRef(c0, m0), ObjectRef(c1, m1), rel)]
    while not s.text.startswith("?", s.pos):
        s.expect("; and any ")
        m = s.material()
        s.expect(" ")
        c = s.color()
        s.expect(" balls ")
        rel = s.relation()
        s.expect(" the ")
        anchor = s.color()
        s.expect(" ball")
        prev = atoms[-1].object_ref
        if anchor != prev.color:
            raise ParseError(
                f"chained clause anchors {anchor!r}, expected {prev.color!r}", s.pos
            )
        atoms.append(RelationAtom(prev, ObjectRef(c, m), rel))
    s.expect("?")
    if not s.done():
        raise ParseError("trailing text after question", s.pos)
    try:
        return Question(hops=len(atoms), atoms=tuple(atoms))
    except ValueError as exc:
        raise ParseError(str(exc), s.pos) from exc


def describe_scene(scene: Scene, hop: int):
    """Every enumerable question of the hop class paired with its answer."""
    return [(q, answer(scene, q)) for q in enumerate_questions(hop)]


def load_question_file(path):
    """One canonical question per line, UTF-8; blank lines ignored."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(parse_question(line))
    return out


def save_question_file(path, questions):
    with open(path, "w", encoding="utf-8") as fh:
        for q in questions:
            fh.write(render_question(q) + "\n")
