"""Tagging sessions: event validation, pose-graph assembly, finalization.

A session is an ordered stream of odometry readings and tag events on a
shared seq timeline. Tags name an object/door/area, give its pose
relative to the robot, and (for objects and doors) its measured
dimensions, which are checked for coherence against the taxonomy's
nominal dimensions before the tag is accepted.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Union

import numpy as np

from .errors import LabelConceptConflict, NonMonotoneSeq, SchemaViolation, UnknownConcept
from .geometry import Pose2D
from .knowledge import DIM_KEYS, ConceptKB, InstanceStore, check_label
from .posegraph import ODOM_INFORMATION, OBJECT_INFORMATION, OptimizeResult, PoseGraph

OBJECT_TAG = "object"
AREA_TAG = "area"
DOOR_TAG = "door"
TAG_KINDS = (OBJECT_TAG, AREA_TAG, DOOR_TAG)

SCHEMA_VERSION = 1

DEFAULT_TOLERANCE = 0.25


@dataclass(frozen=True)
class TagEvent:
    seq: int
    kind: str
    label: str
    concept: str
    robot_pose: Pose2D                 # odometry-frame robot pose at tag time
    relative_pose: Pose2D              # tagged thing in the robot frame
    dims: Optional[tuple[float, float, float]] = None
    properties: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in TAG_KINDS:
            raise SchemaViolation(f"unknown tag kind {self.kind!r}")
        check_label(self.label)
        if self.kind in (OBJECT_TAG, DOOR_TAG):
            if self.dims is None or any(d <= 0 for d in self.dims):
                raise SchemaViolation(f"{self.label}: object/door tags need positive dims")


@dataclass(frozen=True)
class OdomRecord:
    seq: int
    pose: Pose2D


SessionRecord = Union[TagEvent, OdomRecord]


@dataclass(frozen=True)
class Validation:
    accepted: bool
    reason: Optional[str] = None
    warning: Optional[str] = None


def validate_tag(event: TagEvent, kb: ConceptKB, tolerance: float = DEFAULT_TOLERANCE) -> Validation:
    """Dimensional-coherence check against the concept's nominal dims.

    Each measured dimension must lie within `tolerance` (fractional) of
    the nominal value inherited through the taxonomy. Area tags carry no
    dims and always pass. A concept without nominal dims yields an
    accept with a warning: the check is an aid, not a gate.
    """
    if not 0.0 < tolerance < 1.0:
        raise SchemaViolation(f"tolerance {tolerance} must be in (0, 1)")
    kb.require(event.concept)
    if event.kind == AREA_TAG:
        return Validation(accepted=True)
    nominal = kb.nominal_dims(event.concept)
    if all(n is None for n in nominal):
        return Validation(accepted=True, warning=f"no nominal dims for {event.concept}")
    warning = None
    for name, measured, nom in zip(DIM_KEYS, event.dims, nominal):
        if nom is None:
            warning = f"no nominal {name} for {event.concept}"
            continue
        if abs(measured - nom) > tolerance * nom:
            return Validation(accepted=False, reason=f"dimension {name} out of tolerance")
    return Validation(accepted=True, warning=warning)


@dataclass
class ProvisionalSignature:
    label: str
    concept: str
    dims: Optional[tuple[float, float, float]]
    properties: dict = field(default_factory=dict)
    kind: str = OBJECT_TAG


@dataclass
class AreaTagSite:
    """An accepted area tag pinned to the pose node it was uttered from."""

    label: str
    concept: str
    pose_node: int
    relative_pose: Pose2D
    properties: dict = field(default_factory=dict)


@dataclass
class IngestResult:
    graph: PoseGraph
    provisional: dict[str, ProvisionalSignature]
    area_tags: list[AreaTagSite]
    accepted: list[TagEvent]
    rejected: list[tuple[TagEvent, str]]
    warnings: list[str]


@dataclass
class SessionResult:
    accepted: list[tuple[TagEvent, Any]]
    rejected: list[tuple[TagEvent, str]]
    optimized_graph: PoseGraph
    chi2_trace: list[float]

    @property
    def final_chi2(self) -> float:
        return self.chi2_trace[-1]


@dataclass
class AcquisitionConfig:
    tolerance: float = DEFAULT_TOLERANCE
    odom_information: np.ndarray = field(default_factory=lambda: ODOM_INFORMATION.copy())
    object_information: np.ndarray = field(default_factory=lambda: OBJECT_INFORMATION.copy())
    pose_match_eps: float = 1e-9  # reported odometry closer than this reuses the pose node


def ingest_session(records: Iterable[SessionRecord], kb: ConceptKB,
                   config: AcquisitionConfig | None = None) -> IngestResult:
    """Fold an ordered record stream into a pose graph.

    Every odometry reading appends a pose node chained to the previous
    one; a tag whose reported robot pose differs from the current node's
    reading also opens a new node, so live streams that never send
    explicit odometry records still build the same graph their exported
    log replays to. Accepted object/door tags add an object node on
    first sighting and one observation edge per tag.
    """
    cfg = config or AcquisitionConfig()
    records = list(records)
    if not records:
        raise SchemaViolation("empty session")

    last_seq = None
    for r in records:
        if last_seq is not None and r.seq <= last_seq:
            raise NonMonotoneSeq(f"seq {r.seq} after {last_seq}")
        last_seq = r.seq

    graph = PoseGraph()
    provisional: dict[str, ProvisionalSignature] = {}
    area_tags: list[AreaTagSite] = []
    accepted: list[TagEvent] = []
    rejected: list[tuple[TagEvent, str]] = []
    warnings: list[str] = []

    current_reading: Optional[Pose2D] = None
    current_node = -1

    def advance_to(reading: Pose2D) -> None:
        nonlocal current_reading, current_node
        if current_node < 0:
            current_node = graph.add_pose(reading)
            current_reading = reading
            return
        delta = reading.relative_to(current_reading)
        if max(abs(delta.x), abs(delta.y), abs(delta.theta)) <= cfg.pose_match_eps:
            return
        new_node = graph.add_pose(reading)
        graph.add_odom_edge(current_node, new_node, delta, cfg.odom_information)
        current_node, current_reading = new_node, reading

    for record in records:
        if isinstance(record, OdomRecord):
            advance_to(record.pose)
            continue
        event = record
        kb.require(event.concept)
        verdict = validate_tag(event, kb, cfg.tolerance)
        if verdict.warning:
            warnings.append(f"seq {event.seq}: {verdict.warning}")
        if not verdict.accepted:
            rejected.append((event, verdict.reason))
            continue
        advance_to(event.robot_pose)
        if event.kind == AREA_TAG:
            area_tags.append(AreaTagSite(event.label, event.concept, current_node,
                                         event.relative_pose, dict(event.properties)))
            accepted.append(event)
            continue
        existing = provisional.get(event.label)
        if existing is not None and existing.concept != event.concept:
            raise LabelConceptConflict(
                f"label {event.label!r} tagged as {existing.concept} and {event.concept}")
        if existing is None:
            provisional[event.label] = ProvisionalSignature(
                label=event.label, concept=event.concept, dims=event.dims,
                properties=dict(event.properties), kind=event.kind)
            estimate = graph.pose_of(current_node).compose(event.relative_pose)
            graph.add_object(event.label, estimate)
        else:
            existing.properties.update(event.properties)
        graph.add_object_edge(current_node, event.label, event.relative_pose,
                              cfg.object_information)
        accepted.append(event)

    return IngestResult(graph=graph, provisional=provisional, area_tags=area_tags,
                        accepted=accepted, rejected=rejected, warnings=warnings)


def finalize_signatures(result: OptimizeResult, provisional: dict[str, ProvisionalSignature],
                        store: InstanceStore) -> list[str]:
    """Register the optimized object poses as instance signatures.

    Returns the registered labels in graph insertion order.
    """
    graph = result.graph
    registered = []
    for label in graph.object_labels:
        prov = provisional[label]
        store.register(label, prov.concept, properties=dict(prov.properties),
                       position=graph.object_pose(label), dims=prov.dims)
        registered.append(label)
    return registered


def resolve_area_tags(result: OptimizeResult, area_tags: list[AreaTagSite]
                      ) -> list[tuple[AreaTagSite, Pose2D]]:
    """World positions of area tags under the optimized trajectory."""
    out = []
    for site in area_tags:
        pose = result.graph.pose_of(site.pose_node).compose(site.relative_pose)
        out.append((site, pose))
    return out


# -- JSON Lines session log --

def _pose_to_list(p: Pose2D) -> list[float]:
    return [p.x, p.y, p.theta]


def record_to_json(record: SessionRecord) -> dict:
    if isinstance(record, OdomRecord):
        return {"v": SCHEMA_VERSION, "type": "odom", "seq": record.seq,
                "pose": _pose_to_list(record.pose)}
    doc = {
        "v": SCHEMA_VERSION,
        "type": "tag",
        "seq": record.seq,
        "kind": record.kind,
        "label": record.label,
        "concept": record.concept,
        "robot_pose": _pose_to_list(record.robot_pose),
        "relative_pose": _pose_to_list(record.relative_pose),
    }
    if record.dims is not None:
        doc["dims"] = list(record.dims)
    if record.properties:
        doc["properties"] = record.properties
    return doc


def record_from_json(doc: dict) -> SessionRecord:
    if not isinstance(doc, dict):
        raise SchemaViolation(f"session record must be an object, got {type(doc).__name__}")
    if doc.get("v") != SCHEMA_VERSION:
        raise SchemaViolation(f"unsupported session schema version {doc.get('v')!r}")
    kind = doc.get("type")
    try:
        if kind == "odom":
            return OdomRecord(seq=int(doc["seq"]), pose=Pose2D(*doc["pose"]))
        if kind == "tag":
            dims = doc.get("dims")
            return TagEvent(
                seq=int(doc["seq"]),
                kind=doc["kind"],
                label=doc["label"],
                concept=doc["concept"],
                robot_pose=Pose2D(*doc["robot_pose"]),
                relative_pose=Pose2D(*doc["relative_pose"]),
                dims=tuple(float(d) for d in dims) if dims is not None else None,
                properties=doc.get("properties", {}),
            )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaViolation(f"malformed session record {doc!r}: {e}") from e
    raise SchemaViolation(f"unknown session record type {kind!r}")


def load_session_log(path) -> list[SessionRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaViolation(f"{path}:{line_no}: not JSON: {e}") from e
            records.append(record_from_json(doc))
    return records


def save_session_log(records: Iterable[SessionRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record_to_json(record), sort_keys=True) + "\n")
