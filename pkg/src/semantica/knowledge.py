"""Labels, concepts, instance signatures, and the conceptual knowledge base.

The environment-specific store (instance signatures) and the a priori
taxonomy (ConceptKB) are kept independent: registering an instance never
checks it against concept defaults, so a fridge tagged in the living
room is stored without complaint even though the taxonomy says fridges
belong in kitchens.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .errors import CyclicIsa, DuplicateLabel, SchemaViolation, UnknownConcept, UnknownLabel
from .geometry import Pose2D

LABEL_RE = re.compile(r"^[a-z][a-z0-9_]*$")
CONCEPT_RE = re.compile(r"^[A-Z][A-Za-z0-9]*$")

TOP_CLASSES = ("Areas", "StructuralElements", "Objects")

DIM_KEYS = ("height", "width", "length")


def check_label(text: str) -> str:
    if not isinstance(text, str) or not LABEL_RE.match(text):
        raise SchemaViolation(f"invalid label {text!r}: want lowercase [a-z][a-z0-9_]*")
    return text


def check_concept_name(name: str) -> str:
    if not isinstance(name, str) or not CONCEPT_RE.match(name):
        raise SchemaViolation(f"invalid concept name {name!r}: want capitalized identifier")
    return name


class ConceptKB:
    """Taxonomy of concepts with is-a links, properties, and default locations.

    The is-a relation forms a forest rooted at the three top classes
    (Areas, StructuralElements, Objects). Properties attached to a
    concept are inherited by its descendants unless shadowed.
    """

    def __init__(self):
        self._isa: dict[str, Optional[str]] = {}
        self._properties: dict[str, dict[str, Any]] = {}
        self._default_location: dict[str, str] = {}
        for top in TOP_CLASSES:
            self._isa[top] = None
            self._properties[top] = {}

    # -- construction --

    def add_concept(self, name: str, isa: Optional[str] = None,
                    properties: Optional[dict] = None,
                    default_location: Optional[str] = None) -> None:
        check_concept_name(name)
        if name in self._isa and name not in TOP_CLASSES:
            raise SchemaViolation(f"concept {name} declared twice")
        if name in TOP_CLASSES:
            if isa is not None:
                raise SchemaViolation(f"top class {name} cannot have a parent")
        elif isa is None:
            raise SchemaViolation(f"concept {name} needs an is-a parent")
        self._isa[name] = isa
        self._properties[name] = dict(properties or {})
        if default_location is not None:
            self._default_location[name] = default_location

    def validate(self) -> None:
        """Check parent existence, acyclicity, rooting, and default targets."""
        for name, parent in self._isa.items():
            if parent is not None and parent not in self._isa:
                raise SchemaViolation(f"{name} is-a unknown concept {parent}")
        for name in self._isa:
            seen = set()
            cur: Optional[str] = name
            while cur is not None:
                if cur in seen:
                    raise CyclicIsa(f"is-a cycle through {cur}")
                seen.add(cur)
                cur = self._isa[cur]
            root = self.root_of(name)
            if root not in TOP_CLASSES:
                raise SchemaViolation(f"{name} does not reach a top class (got {root})")
        for name, target in self._default_location.items():
            if target not in self._isa:
                raise SchemaViolation(f"default location {target} of {name} unknown")
            if self.root_of(target) != "Areas":
                raise SchemaViolation(f"default location {target} of {name} is not an area")

    # -- queries --

    def __contains__(self, name: str) -> bool:
        return name in self._isa

    @property
    def concepts(self) -> list[str]:
        return sorted(self._isa)

    def require(self, name: str) -> str:
        if name not in self._isa:
            raise UnknownConcept(f"concept {name!r} not in knowledge base")
        return name

    def parent(self, name: str) -> Optional[str]:
        self.require(name)
        return self._isa[name]

    def ancestors(self, name: str) -> list[str]:
        """Chain of is-a parents from `name` (exclusive) up to its root."""
        self.require(name)
        out = []
        cur = self._isa[name]
        while cur is not None:
            out.append(cur)
            cur = self._isa[cur]
        return out

    def root_of(self, name: str) -> str:
        cur = name
        while self._isa.get(cur) is not None:
            cur = self._isa[cur]
        return cur

    def is_a(self, name: str, ancestor: str) -> bool:
        """True when `name` equals `ancestor` or descends from it."""
        self.require(name)
        cur: Optional[str] = name
        while cur is not None:
            if cur == ancestor:
                return True
            cur = self._isa[cur]
        return False

    def descendants(self, name: str) -> list[str]:
        self.require(name)
        return sorted(c for c in self._isa if self.is_a(c, name))

    def concept_property(self, name: str, attribute: str) -> Any:
        """Property value on the concept or its nearest ancestor, else None."""
        self.require(name)
        cur: Optional[str] = name
        while cur is not None:
            if attribute in self._properties[cur]:
                return self._properties[cur][attribute]
            cur = self._isa[cur]
        return None

    def own_properties(self, name: str) -> dict[str, Any]:
        self.require(name)
        return dict(self._properties[name])

    def nominal_dims(self, name: str) -> tuple[Optional[float], Optional[float], Optional[float]]:
        """Inherited (height, width, length); entries are None when absent."""
        return tuple(self.concept_property(name, k) for k in DIM_KEYS)  # type: ignore[return-value]

    def default_location(self, name: str) -> Optional[str]:
        """Nearest default-location link walking up the is-a chain."""
        self.require(name)
        cur: Optional[str] = name
        while cur is not None:
            if cur in self._default_location:
                return self._default_location[cur]
            cur = self._isa[cur]
        return None

    def own_default_location(self, name: str) -> Optional[str]:
        return self._default_location.get(name)


# -- KB documents --

def kb_from_document(doc: dict) -> ConceptKB:
    """Build and validate a ConceptKB from its JSON document form."""
    if not isinstance(doc, dict) or "concepts" not in doc:
        raise SchemaViolation("KB document must be an object with a 'concepts' list")
    entries = doc["concepts"]
    if not isinstance(entries, list):
        raise SchemaViolation("'concepts' must be a list")
    kb = ConceptKB()
    for entry in entries:
        if not isinstance(entry, dict) or "name" not in entry:
            raise SchemaViolation(f"malformed concept entry: {entry!r}")
        name = entry["name"]
        if name == entry.get("isa"):
            raise CyclicIsa(f"{name} is-a itself")
        if name in TOP_CLASSES:
            continue
        kb.add_concept(
            name,
            isa=entry.get("isa"),
            properties=entry.get("properties"),
            default_location=entry.get("default_location"),
        )
    kb.validate()
    return kb


def kb_to_document(kb: ConceptKB) -> dict:
    concepts = []
    for name in kb.concepts:
        if name in TOP_CLASSES:
            continue
        entry: dict[str, Any] = {"name": name, "isa": kb.parent(name)}
        props = kb.own_properties(name)
        if props:
            entry["properties"] = props
        default = kb.own_default_location(name)
        if default is not None:
            entry["default_location"] = default
        concepts.append(entry)
    return {"concepts": concepts}


def load_kb(path) -> ConceptKB:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaViolation(f"KB file is not valid JSON: {e}") from e
    return kb_from_document(doc)


def save_kb(kb: ConceptKB, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(kb_to_document(kb), f, indent=2, sort_keys=True)
        f.write("\n")


# -- instance signatures --

@dataclass
class InstanceSignature:
    """One named thing in the environment: label, concept, properties.

    `properties` holds attribute-value pairs; `position` and `dims`
    are kept as typed fields since nearly everything uses them.
    """

    label: str
    concept: str
    position: Optional[Pose2D] = None
    dims: Optional[tuple[float, float, float]] = None
    properties: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        check_label(self.label)
        if self.position is not None and not self.position.is_finite:
            raise SchemaViolation(f"{self.label}: position must be finite")
        if self.dims is not None:
            self.dims = tuple(float(d) for d in self.dims)  # type: ignore[assignment]


class InstanceStore:
    """Signature database keyed by label, bound to one ConceptKB."""

    def __init__(self, kb: ConceptKB):
        self.kb = kb
        self._by_label: dict[str, InstanceSignature] = {}

    def __len__(self) -> int:
        return len(self._by_label)

    def __contains__(self, label: str) -> bool:
        return label in self._by_label

    def labels(self) -> list[str]:
        return sorted(self._by_label)

    def register(self, label: str, concept: str,
                 properties: Optional[dict] = None,
                 position: Optional[Pose2D] = None,
                 dims=None) -> InstanceSignature:
        """Store a new signature.

        World knowledge is allowed to contradict the taxonomy's default
        locations, so no consistency check happens here.
        """
        self.kb.require(concept)
        if label in self._by_label:
            raise DuplicateLabel(f"label {label!r} already registered")
        props = dict(properties or {})
        if position is None and "position" in props:
            position = props.pop("position")
        if dims is None and "dims" in props:
            dims = props.pop("dims")
        sig = InstanceSignature(label=label, concept=concept, position=position,
                                dims=tuple(dims) if dims else None, properties=props)
        self._by_label[label] = sig
        return sig

    def get(self, label: str) -> InstanceSignature:
        if label not in self._by_label:
            raise UnknownLabel(f"no signature for label {label!r}")
        return self._by_label[label]

    def all(self) -> list[InstanceSignature]:
        return [self._by_label[k] for k in sorted(self._by_label)]

    def instances_of(self, concept: str) -> list[InstanceSignature]:
        """Signatures whose concept is `concept` or a descendant of it."""
        self.kb.require(concept)
        return [s for s in self.all() if self.kb.is_a(s.concept, concept)]

    def effective_property(self, label: str, attribute: str) -> Any:
        """Instance value, else inherited concept value, else None."""
        sig = self.get(label)
        if attribute == "position":
            return sig.position
        if attribute == "dims":
            return sig.dims
        if attribute in sig.properties:
            return sig.properties[attribute]
        return self.kb.concept_property(sig.concept, attribute)
