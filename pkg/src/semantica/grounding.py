"""Command parsing and referential-expression grounding.

The grammar covers motion and query commands:

    goto  := ("go"|"move") (("near"|"to"))? refexpr
    check := "check" "whether" inphrase? refexpr "is" attribute
    refexpr := "the" ordinal? concept_word sidephrase? inphrase?
    sidephrase := "on" "the" ("left"|"right")
    inphrase := "in" "the" area_word

Concept and area words resolve through a lexicon (longest surface match
first, so multi-word entries like "living room" work). Grounding walks
the registered instances: filter by area, filter by side of the area's
principal axis, then pick by ordinal; when nothing matches, the
taxonomy's default location supplies a fallback area.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParseError, SchemaViolation, UnknownConceptWord
from .geometry import Pose2D
from .world import WorldModel

GOTO = "goto"
CHECK = "check"
NEAR = "near"
AT = "at"
LEFT = "left"
RIGHT = "right"

ORDINALS = {
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9, "tenth": 10,
}

_PUNCT = ",.;:!?\"'"


class Lexicon:
    """Surface word(s) -> concept/area name, with multi-word entries."""

    def __init__(self, entries: dict[str, str]):
        self.entries = {" ".join(k.lower().split()): v for k, v in entries.items()}
        self._max_words = max((len(k.split()) for k in self.entries), default=1)

    @staticmethod
    def load(path) -> "Lexicon":
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
        if not isinstance(doc, dict):
            raise SchemaViolation("lexicon must be a JSON object of word -> name")
        return Lexicon(doc)

    def match(self, tokens: list[str], start: int) -> Optional[tuple[str, str, int]]:
        """Longest entry matching tokens[start:]; (surface, name, n_tokens)."""
        for n in range(min(self._max_words, len(tokens) - start), 0, -1):
            surface = " ".join(tokens[start:start + n])
            if surface in self.entries:
                return surface, self.entries[surface], n
        return None


@dataclass(frozen=True)
class RefExpr:
    concept_word: str
    ordinal: Optional[int] = None
    side: Optional[str] = None
    area_word: Optional[str] = None
    raw: str = ""


@dataclass(frozen=True)
class Command:
    verb: str
    reference: RefExpr
    relation: Optional[str] = None          # goto only
    query_attribute: Optional[str] = None   # check only


def tokenize(utterance: str) -> list[str]:
    return [t.strip(_PUNCT) for t in utterance.lower().split() if t.strip(_PUNCT)]


class _Cursor:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0  # 0-based; ParseError positions are 1-based

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, *expected: str) -> str:
        tok = self.peek()
        if tok is None or (expected and tok not in expected):
            raise ParseError(self.pos + 1, " or ".join(repr(e) for e in expected) or "a word")
        self.pos += 1
        return tok

    def done(self) -> bool:
        return self.pos >= len(self.tokens)


def parse_command(utterance: str, lexicon: Lexicon) -> Command:
    """Deterministic parse of an utterance, or ParseError with position."""
    tokens = tokenize(utterance)
    if not tokens:
        raise ParseError(1, "a command")
    cur = _Cursor(tokens)
    head = cur.take("go", "move", "check")
    if head == "check":
        cur.take("whether")
        area = None
        if cur.peek() == "in":
            area = _parse_inphrase(cur, lexicon)
        ref = _parse_refexpr(cur, lexicon, utterance, area)
        cur.take("is")
        attribute = cur.take()
        if not cur.done():
            raise ParseError(cur.pos + 1, "end of command")
        return Command(verb=CHECK, reference=ref, query_attribute=attribute)

    relation = NEAR
    if cur.peek() in ("near", "to"):
        relation = NEAR if cur.take() == "near" else AT
    ref = _parse_refexpr(cur, lexicon, utterance, None)
    if not cur.done():
        raise ParseError(cur.pos + 1, "end of command")
    return Command(verb=GOTO, reference=ref, relation=relation)


def _parse_inphrase(cur: _Cursor, lexicon: Lexicon) -> str:
    cur.take("in")
    cur.take("the")
    hit = lexicon.match(cur.tokens, cur.pos)
    if hit is None:
        raise ParseError(cur.pos + 1, "an area word")
    surface, _, n = hit
    cur.pos += n
    return surface

def _parse_refexpr(cur: _Cursor, lexicon: Lexicon, raw: str,
                   area: Optional[str]) -> RefExpr:
    cur.take("the")
    ordinal = None
    if cur.peek() in ORDINALS:
        ordinal = ORDINALS[cur.take()]
    hit = lexicon.match(cur.tokens, cur.pos)
    if hit is None:
        raise ParseError(cur.pos + 1, "a concept word")
    concept_word, _, n = hit
    cur.pos += n
    side = None
    if cur.peek() == "on":
        cur.take("on")
        cur.take("the")
        side = cur.take(LEFT, RIGHT)
    if cur.peek() == "in":
        area = _parse_inphrase(cur, lexicon)
    return RefExpr(concept_word=concept_word, ordinal=ordinal, side=side,
                   area_word=area, raw=raw)


# ---------------------------------------------------------------------------
# grounding
# ---------------------------------------------------------------------------

REFERENT = "referent"
FALLBACK_AREA = "fallback_area"
AMBIGUOUS = "ambiguous"
UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class GroundingResult:
    kind: str
    referent: Optional[str] = None
    area_concept: Optional[str] = None
    candidates: tuple[str, ...] = ()

    @property
    def resolved(self) -> bool:
        return self.kind in (REFERENT, FALLBACK_AREA)


def _candidate_cells(world: WorldModel, label: str) -> list[int]:
    """Cells tied to a candidate: the ones its footprint stamped, else the
    cell under its stored position."""
    cm = world.require_cellmap()
    cells = cm.cells_with_label(label)
    if cells:
        return cells
    sig = world.store.get(label)
    if sig.position is not None:
        cid = cm.cell_of_world(sig.position.x, sig.position.y)
        if cid >= 0:
            return [cid]
    return []


def _area_labels_for_concept(world: WorldModel, concept: str) -> set[str]:
    """Region labels whose signature concept descends from `concept`."""
    cm = world.require_cellmap()
    present = set(cm.region_labels)
    out = set()
    for sig in world.store.all():
        if sig.label in present and world.kb.is_a(sig.concept, concept):
            out.add(sig.label)
    return out


def _principal_axis(world: WorldModel, region_labels: set[str],
                    robot_pose: Optional[Pose2D]) -> tuple[np.ndarray, np.ndarray]:
    """(axis direction, base point) for ordering and side tests.

    The axis is the dominant eigenvector of the area's cell-centroid
    scatter, oriented away from the entry static node nearest the robot
    (or away from the robot itself when the area has no doors).
    """
    cm = world.require_cellmap()
    centroids = []
    for cell in cm.cells:
        if cm.region_labels[cm.region_of_cell(cell.id)] in region_labels:
            centroids.append(cm.cell_centroid(cell.id))
    pts = np.array(centroids)
    mean = pts.mean(axis=0)
    if len(pts) == 1:
        axis = np.array([1.0, 0.0])
    elif len(pts) == 2:
        axis = pts[1] - pts[0]
    else:
        scatter = (pts - mean).T @ (pts - mean)
        w, v = np.linalg.eigh(scatter)
        axis = v[:, int(np.argmax(w))]
    n = np.linalg.norm(axis)
    axis = axis / n if n > 0 else np.array([1.0, 0.0])

    anchor = None
    if world.topo is not None:
        statics = [node for node in world.topo.static_nodes()
                   if node.area_label in region_labels]
        if statics:
            if robot_pose is not None:
                statics.sort(key=lambda s: (math.hypot(s.position.x - robot_pose.x,
                                                       s.position.y - robot_pose.y), s.id))
            anchor = np.array([statics[0].position.x, statics[0].position.y])
    if anchor is None and robot_pose is not None:
        anchor = np.array([robot_pose.x, robot_pose.y])
    if anchor is not None:
        d = float(axis @ (mean - anchor))
        if d < 0 or (d == 0 and tuple(axis) < (0.0, 0.0)):
            axis = -axis
    elif tuple(axis) < (0.0, 0.0):
        axis = -axis
    if anchor is None:
        anchor = mean
    return axis, anchor


def ground(ref: RefExpr, world: WorldModel, lexicon: Lexicon,
           robot_pose: Optional[Pose2D] = None) -> GroundingResult:
    """Resolve a referential expression against the world model.

    World knowledge shadows domain knowledge: the default-location
    fallback fires only when no registered instance survives filtering.
    """
    hit = lexicon.entries.get(ref.concept_word)
    if hit is None or hit not in world.kb:
        raise UnknownConceptWord(f"no concept for {ref.concept_word!r}")
    concept = hit
    candidates = [s.label for s in world.store.instances_of(concept)]

    if ref.area_word is not None:
        area_name = lexicon.entries.get(ref.area_word)
        if area_name is None or area_name not in world.kb:
            raise UnknownConceptWord(f"no area concept for {ref.area_word!r}")
        targets = _area_labels_for_concept(world, area_name)
        cm = world.require_cellmap()
        kept = []
        for label in candidates:
            areas = set()
            for cid in _candidate_cells(world, label):
                areas.add(cm.region_labels[cm.region_of_cell(cid)])
            if areas & targets:
                kept.append(label)
        candidates = kept

    if ref.side is not None or ref.ordinal is not None:
        region_labels = _axis_region_labels(ref, world, lexicon, robot_pose)
        if region_labels:
            axis, anchor = _principal_axis(world, region_labels, robot_pose)
            scored = []
            for label in candidates:
                sig = world.store.get(label)
                if sig.position is None:
                    continue
                rel = np.array([sig.position.x, sig.position.y]) - anchor
                proj = float(axis @ rel)
                perp = float(-axis[1] * rel[0] + axis[0] * rel[1])
                scored.append((proj, label, perp))
            if ref.side == LEFT:
                scored = [s for s in scored if s[2] > 0]
            elif ref.side == RIGHT:
                scored = [s for s in scored if s[2] < 0]
            scored.sort(key=lambda s: (s[0], s[1]))
            candidates = [label for _, label, _ in scored]
        if ref.ordinal is not None:
            if ref.ordinal > len(candidates):
                return GroundingResult(kind=UNRESOLVED, candidates=tuple(candidates))
            return GroundingResult(kind=REFERENT, referent=candidates[ref.ordinal - 1])

    if len(candidates) == 1:
        return GroundingResult(kind=REFERENT, referent=candidates[0])
    if len(candidates) > 1:
        return GroundingResult(kind=AMBIGUOUS, candidates=tuple(sorted(candidates)))
    fallback = world.kb.default_location(concept)
    if fallback is not None:
        return GroundingResult(kind=FALLBACK_AREA, area_concept=fallback)
    return GroundingResult(kind=UNRESOLVED)


def _axis_region_labels(ref: RefExpr, world: WorldModel, lexicon: Lexicon,
                        robot_pose: Optional[Pose2D]) -> set[str]:
    """Area labels whose cells define the ordering frame."""
    if ref.area_word is not None:
        area_name = lexicon.entries.get(ref.area_word)
        if area_name is not None and area_name in world.kb:
            labels = _area_labels_for_concept(world, area_name)
            if labels:
                return labels
    if robot_pose is not None:
        cm = world.require_cellmap()
        cid = cm.cell_of_world(robot_pose.x, robot_pose.y)
        if cid >= 0:
            return {cm.region_labels[cm.region_of_cell(cid)]}
    return set()
