"""The aggregated world model and its canonical JSON document form.

Documents are emitted with sorted keys and 9-significant-digit floats so
identical worlds serialize to identical bytes; save -> load -> save is a
fixed point.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .cellmap import Cell, CellMap, CellMapConfig
from .errors import LayerNotBuilt, SchemaViolation
from .geometry import Pose2D
from .grid import FREE, OCCUPIED, UNKNOWN, OccupancyGrid
from .hough import WallLine
from .knowledge import ConceptKB, InstanceSignature, InstanceStore, kb_from_document, kb_to_document
from .topograph import TopoEdge, TopoNode, TopologicalGraph

DOCUMENT_VERSION = 1

_CELL_CHARS = {int(FREE): ".", int(OCCUPIED): "#", int(UNKNOWN): "?"}
_CHAR_CELLS = {v: k for k, v in _CELL_CHARS.items()}


@dataclass
class WorldModel:
    kb: ConceptKB
    grid: OccupancyGrid
    store: InstanceStore
    kb_ref: str = "kb"
    map_ref: Optional[dict] = None
    cellmap: Optional[CellMap] = None
    topo: Optional[TopologicalGraph] = None
    session_meta: dict = field(default_factory=dict)

    def require_cellmap(self) -> CellMap:
        if self.cellmap is None or self.cellmap.region_of is None:
            raise LayerNotBuilt("cell map not built")
        return self.cellmap

    def require_topo(self) -> TopologicalGraph:
        if self.topo is None:
            raise LayerNotBuilt("topological graph not built")
        return self.topo

    def door_signatures(self) -> list[InstanceSignature]:
        """Signatures treated as doors: concept under Door when the KB
        defines it, otherwise any structural element."""
        root = "Door" if "Door" in self.kb else "StructuralElements"
        return [s for s in self.store.all()
                if self.kb.is_a(s.concept, root) and s.position is not None and s.dims]

    def structural_signatures(self) -> list[InstanceSignature]:
        return [s for s in self.store.all()
                if self.kb.is_a(s.concept, "StructuralElements")
                and s.position is not None and s.dims]


# ---------------------------------------------------------------------------
# canonical JSON
# ---------------------------------------------------------------------------


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise SchemaViolation(f"non-finite float {x!r} in document")
    text = format(x, ".9g")
    if "." not in text and "e" not in text and "E" not in text:
        text += ".0"  # keep float-ness through a JSON round trip
    return text


def canonical_json(obj: Any) -> str:
    """Deterministic JSON: sorted keys, fixed float formatting."""
    out: list[str] = []
    _write(obj, out)
    return "".join(out)


def _write(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, (np.floating,)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, (np.integer,)):
        out.append(str(int(obj)))
    elif isinstance(obj, dict):
        out.append("{")
        for k, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise SchemaViolation(f"non-string document key {key!r}")
            if k:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _write(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, item in enumerate(obj):
            if k:
                out.append(",")
            _write(item, out)
        out.append("]")
    else:
        raise SchemaViolation(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# document conversion
# ---------------------------------------------------------------------------


def _pose_doc(p: Pose2D) -> list[float]:
    return [p.x, p.y, p.theta]


def _grid_doc(grid: OccupancyGrid) -> dict:
    rows = ["".join(_CELL_CHARS[int(v)] for v in row) for row in grid.cells]
    return {
        "width": grid.width,
        "height": grid.height,
        "resolution": grid.resolution,
        "origin": _pose_doc(grid.origin),
        "rows": rows,
    }


def _grid_from_doc(doc: dict) -> OccupancyGrid:
    try:
        rows = doc["rows"]
        cells = np.array([[_CHAR_CELLS[ch] for ch in row] for row in rows], dtype=np.uint8)
        return OccupancyGrid(cells=cells, resolution=float(doc["resolution"]),
                             origin=Pose2D(*doc["origin"]))
    except (KeyError, TypeError) as e:
        raise SchemaViolation(f"bad grid document: {e}") from e


def _signature_doc(sig: InstanceSignature) -> dict:
    return {
        "label": sig.label,
        "concept": sig.concept,
        "position": _pose_doc(sig.position) if sig.position else None,
        "dims": list(sig.dims) if sig.dims else None,
        "properties": sig.properties,
    }


def _cellmap_doc(cm: CellMap) -> dict:
    from .cellmap import cell_runs
    cells = []
    for cell in cm.cells:
        cells.append({
            "id": cell.id,
            "labels": sorted(cell.labels),
            "runs": cell_runs(cm, cell.id),
        })
    doc = {
        "config": {
            "min_cell_size": cm.config.min_cell_size,
            "support_radius_factor": cm.config.support_radius_factor,
            "support_dist_factor": cm.config.support_dist_factor,
            "split_area_ratio": cm.config.split_area_ratio,
            "seal_margin_factor": cm.config.seal_margin_factor,
            "band_factor": cm.config.band_factor,
            "merge_coverage": cm.config.merge_coverage,
        },
        "lines": [{"rho": l.rho, "theta": l.theta, "support": l.support,
                   "extent": [list(l.extent[0]), list(l.extent[1])]} for l in cm.lines],
        "cells": cells,
        "connect": sorted([list(e) for e in cm.connect]),
        "sealed": sorted([list(e) for e in cm.sealed]),
    }
    if cm.region_of is not None:
        doc["region_of"] = [int(r) for r in cm.region_of]
        doc["region_labels"] = list(cm.region_labels)
    return doc


def _cellmap_from_doc(doc: dict, grid: OccupancyGrid) -> CellMap:
    cfg = CellMapConfig(**doc["config"])
    lines = [WallLine(rho=float(l["rho"]), theta=float(l["theta"]),
                      support=int(l["support"]),
                      extent=(tuple(l["extent"][0]), tuple(l["extent"][1])))
             for l in doc["lines"]]
    cell_index = np.full(grid.cells.shape, -1, dtype=np.int32)
    for cell in doc["cells"]:
        for row, c0, c1 in cell["runs"]:
            cell_index[row, c0:c1] = cell["id"]
    cm = CellMap(grid=grid, lines=lines, cell_index=cell_index, config=cfg)
    for cell_doc in doc["cells"]:
        cm.cells[cell_doc["id"]].labels = set(cell_doc["labels"])
    cm.connect = {tuple(e) for e in doc["connect"]}
    cm.sealed = {tuple(e) for e in doc["sealed"]}
    if "region_of" in doc:
        cm.region_of = np.array(doc["region_of"], dtype=np.int64)
        cm.region_labels = list(doc["region_labels"])
    return cm


def _topo_doc(topo: TopologicalGraph) -> dict:
    return {
        "nodes": [{
            "id": n.id,
            "kind": n.kind,
            "area": n.area_label,
            "pose": _pose_doc(n.position),
            "door": n.door_label,
        } for _, n in sorted(topo.nodes.items())],
        "edges": [{
            "a": e.a,
            "b": e.b,
            "behavior": e.behavior,
            "cost": e.cost,
            "door": e.door_label,
        } for e in sorted(topo.edges, key=lambda e: (e.a, e.b, e.behavior))],
    }


def _topo_from_doc(doc: dict) -> TopologicalGraph:
    topo = TopologicalGraph()
    for n in doc["nodes"]:
        topo.add_node(TopoNode(id=n["id"], kind=n["kind"], area_label=n["area"],
                               position=Pose2D(*n["pose"]), door_label=n["door"]))
    for e in doc["edges"]:
        topo.edges.append(TopoEdge(a=e["a"], b=e["b"], behavior=e["behavior"],
                                   cost=float(e["cost"]), door_label=e["door"]))
    return topo


def world_to_document(world: WorldModel) -> dict:
    return {
        "version": DOCUMENT_VERSION,
        "kb_ref": world.kb_ref,
        "kb": kb_to_document(world.kb),
        "map_ref": world.map_ref,
        "grid": _grid_doc(world.grid),
        "signatures": [_signature_doc(s) for s in world.store.all()],
        "cell_map": _cellmap_doc(world.cellmap) if world.cellmap is not None else None,
        "topo_graph": _topo_doc(world.topo) if world.topo is not None else None,
        "session_meta": world.session_meta,
    }


def world_from_document(doc: dict) -> WorldModel:
    if not isinstance(doc, dict) or doc.get("version") != DOCUMENT_VERSION:
        raise SchemaViolation(f"unsupported world document version {doc.get('version')!r}")
    kb = kb_from_document(doc["kb"])
    grid = _grid_from_doc(doc["grid"])
    store = InstanceStore(kb)
    for s in doc["signatures"]:
        store.register(
            s["label"], s["concept"],
            properties=s.get("properties", {}),
            position=Pose2D(*s["position"]) if s.get("position") else None,
            dims=tuple(s["dims"]) if s.get("dims") else None,
        )
    world = WorldModel(kb=kb, grid=grid, store=store, kb_ref=doc.get("kb_ref", "kb"),
                       map_ref=doc.get("map_ref"), session_meta=doc.get("session_meta", {}))
    if doc.get("cell_map"):
        world.cellmap = _cellmap_from_doc(doc["cell_map"], grid)
    if doc.get("topo_graph"):
        world.topo = _topo_from_doc(doc["topo_graph"])
    return world


def save_world(world: WorldModel, path) -> None:
    text = canonical_json(world_to_document(world)) + "\n"
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def load_world(path) -> WorldModel:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaViolation(f"{path}: not valid JSON: {e}") from e
    return world_from_document(doc)
