"""Layered environment knowledge for indoor robots.

Builds instance signatures, a variable-size cell map, and a topological
navigation graph on top of an occupancy grid plus human tagging events,
then grounds natural-language commands against the result.
"""

__version__ = "0.1.0"

from .geometry import Footprint, Pose2D, footprint_of, normalize_angle
from .knowledge import (
    ConceptKB,
    InstanceSignature,
    InstanceStore,
    kb_from_document,
    kb_to_document,
    load_kb,
    save_kb,
)
from .grid import FREE, OCCUPIED, UNKNOWN, OccupancyGrid, grid_from_image, load_grid, save_grid
from .acquisition import (
    AcquisitionConfig,
    OdomRecord,
    TagEvent,
    finalize_signatures,
    ingest_session,
    load_session_log,
    save_session_log,
    validate_tag,
)
from .posegraph import OptimizeConfig, PoseGraph, chi2, from_g2o, gauss_newton_step, optimize, to_g2o
from .hough import HoughConfig, WallLine, detect_walls
from .cellmap import (
    CellMap,
    CellMapConfig,
    add_objects,
    build_connect,
    cellmap_to_json,
    compute_cells,
    label_areas,
    overlay_pgm_bytes,
)
from .topograph import TopoConfig, TopologicalGraph, build_topology, instantiate_dynamic, to_dot
from .grounding import Command, GroundingResult, Lexicon, RefExpr, ground, parse_command
from .planner import BehaviorSequence, answer_check, plan_route, shortest_path
from .pipeline import BuildConfig, build_world
from .world import WorldModel, canonical_json, load_world, save_world

__all__ = [
    "Footprint", "Pose2D", "footprint_of", "normalize_angle",
    "ConceptKB", "InstanceSignature", "InstanceStore",
    "kb_from_document", "kb_to_document", "load_kb", "save_kb",
    "FREE", "OCCUPIED", "UNKNOWN", "OccupancyGrid", "grid_from_image", "load_grid", "save_grid",
    "AcquisitionConfig", "OdomRecord", "TagEvent", "finalize_signatures",
    "ingest_session", "load_session_log", "save_session_log", "validate_tag",
    "OptimizeConfig", "PoseGraph", "chi2", "from_g2o", "gauss_newton_step", "optimize", "to_g2o",
    "HoughConfig", "WallLine", "detect_walls",
    "CellMap", "CellMapConfig", "add_objects", "build_connect", "cellmap_to_json",
    "compute_cells", "label_areas", "overlay_pgm_bytes",
    "TopoConfig", "TopologicalGraph", "build_topology", "instantiate_dynamic", "to_dot",
    "Command", "GroundingResult", "Lexicon", "RefExpr", "ground", "parse_command",
    "BehaviorSequence", "answer_check", "plan_route", "shortest_path",
    "BuildConfig", "build_world",
    "WorldModel", "canonical_json", "load_world", "save_world",
]
