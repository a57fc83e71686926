"""Exception types raised across the package."""


class SemanticaError(Exception):
    """Base class for all errors raised by this package."""


# --- knowledge store ---

class DuplicateLabel(SemanticaError):
    pass


class UnknownConcept(SemanticaError):
    pass


class UnknownLabel(SemanticaError):
    pass


class SchemaViolation(SemanticaError):
    pass


class CyclicIsa(SchemaViolation):
    pass


# --- occupancy grid ---

class BadImageFormat(SemanticaError):
    pass


class MissingMetadata(SemanticaError):
    pass


class NonPositiveResolution(SemanticaError):
    pass


class OutOfBounds(SemanticaError):
    pass


# --- tagging sessions / pose graph ---

class NonMonotoneSeq(SemanticaError):
    pass


class LabelConceptConflict(SemanticaError):
    pass


class DisconnectedGraph(SemanticaError):
    pass


class SingularSystem(SemanticaError):
    pass


# --- cell map ---

class NoFreeSpace(SemanticaError):
    pass


class ObjectOutOfMap(SemanticaError):
    pass


class AreaTagInOccupiedSpace(SemanticaError):
    pass


# --- topological graph ---

class NoFreePoseInRegion(SemanticaError):
    pass


# --- command interface ---

class ParseError(SemanticaError):
    """Utterance rejected by the command grammar.

    `position` is the 1-based index of the offending token; `expected`
    describes what the grammar wanted to see there.
    """

    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"parse error at token {position}: expected {expected}")


class UnknownConceptWord(SemanticaError):
    pass


class NoRoute(SemanticaError):
    pass


class RobotOutsideMap(SemanticaError):
    pass


# --- persistence / service ---

class LayerNotBuilt(SemanticaError):
    pass
