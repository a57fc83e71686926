"""Topological navigation graph over the labeled cell map.

One dynamic node per area (instantiated to a metric pose only at plan
time), one static node half a meter in front of each side of every
door, Reach edges inside rooms, CrossDoor edges through doorways.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .cellmap import CellMap
from .errors import NoFreePoseInRegion, SchemaViolation
from .geometry import Pose2D, footprint_of
from .knowledge import InstanceSignature, InstanceStore

REACH = "Reach"
CROSS_DOOR = "CrossDoor"

STATIC = "static"
DYNAMIC = "dynamic"


@dataclass(frozen=True)
class TopoConfig:
    door_offset: float = 0.5  # m in front of the door plane


@dataclass(frozen=True)
class TopoNode:
    id: str
    kind: str
    area_label: str
    position: Pose2D
    door_label: Optional[str] = None  # static nodes only


@dataclass(frozen=True)
class TopoEdge:
    a: str
    b: str
    behavior: str
    cost: float
    door_label: Optional[str] = None

    def other(self, node_id: str) -> str:
        return self.b if node_id == self.a else self.a


@dataclass
class TopologicalGraph:
    nodes: dict[str, TopoNode] = field(default_factory=dict)
    edges: list[TopoEdge] = field(default_factory=list)

    def add_node(self, node: TopoNode) -> None:
        self.nodes[node.id] = node

    def add_edge(self, a: str, b: str, behavior: str, door_label: Optional[str] = None) -> None:
        pa, pb = self.nodes[a].position, self.nodes[b].position
        cost = math.hypot(pa.x - pb.x, pa.y - pb.y)
        self.edges.append(TopoEdge(a=a, b=b, behavior=behavior, cost=cost,
                                   door_label=door_label))

    def dynamic_for_area(self, area_label: str) -> TopoNode:
        node = self.nodes.get(f"d_{area_label}")
        if node is None:
            raise SchemaViolation(f"no dynamic node for area {area_label!r}")
        return node

    def dynamic_nodes(self) -> list[TopoNode]:
        return [n for _, n in sorted(self.nodes.items()) if n.kind == DYNAMIC]

    def static_nodes(self) -> list[TopoNode]:
        return [n for _, n in sorted(self.nodes.items()) if n.kind == STATIC]

    def neighbors(self, node_id: str) -> list[TopoEdge]:
        return [e for e in self.edges if node_id in (e.a, e.b)]


def _nearest_free_cell_in_region(cellmap: CellMap, region: int,
                                 x: float, y: float) -> tuple[float, float]:
    """Free cell center in the region closest to (x, y); row-major ties."""
    mask = cellmap.region_cells_mask(region)
    ij = np.argwhere(mask)
    if len(ij) == 0:
        raise NoFreePoseInRegion(f"region {region} has no free cells")
    res = cellmap.grid.resolution
    cx = cellmap.grid.origin.x + (ij[:, 1] + 0.5) * res
    cy = cellmap.grid.origin.y + (ij[:, 0] + 0.5) * res
    d2 = (cx - x) ** 2 + (cy - y) ** 2
    best = int(np.lexsort((ij[:, 1], ij[:, 0], d2))[0])
    return float(cx[best]), float(cy[best])


def _region_centroid_pose(cellmap: CellMap, labels_regions: list[int]) -> Pose2D:
    """Centroid of the union of regions, nudged into free space."""
    masks = [cellmap.region_cells_mask(r) for r in labels_regions]
    mask = np.logical_or.reduce(masks)
    ij = np.argwhere(mask)
    res = cellmap.grid.resolution
    x = cellmap.grid.origin.x + (ij[:, 1].mean() + 0.5) * res
    y = cellmap.grid.origin.y + (ij[:, 0].mean() + 0.5) * res
    cid = cellmap.cell_of_world(float(x), float(y))
    if cid < 0 or cellmap.region_of_cell(cid) not in labels_regions:
        x, y = _nearest_free_cell_in_region(cellmap, labels_regions[0], float(x), float(y))
    return Pose2D(float(x), float(y), 0.0)


def build_topology(cellmap: CellMap, doors: Iterable[InstanceSignature],
                   config: TopoConfig | None = None) -> TopologicalGraph:
    """Create the dynamic/static node graph from the labeled cell map.

    Doors adjacent to fewer than two regions contribute no static nodes
    (a warning is emitted); everything else follows the construction:
    dynamic node per area, two static nodes per door at `door_offset`
    along the door normal, Reach edges to room nodes, CrossDoor across.
    """
    cfg = config or TopoConfig()
    if cellmap.region_of is None:
        raise SchemaViolation("label_areas must run before build_topology")
    graph = TopologicalGraph()

    area_regions: dict[str, list[int]] = {}
    for region, label in enumerate(cellmap.region_labels):
        area_regions.setdefault(label, []).append(region)
    for label in sorted(area_regions):
        graph.add_node(TopoNode(id=f"d_{label}", kind=DYNAMIC, area_label=label,
                                position=_region_centroid_pose(cellmap, area_regions[label])))

    xs, ys = cellmap.grid.cell_centers()
    for door in sorted(doors, key=lambda s: s.label):
        if door.position is None or door.dims is None:
            continue
        fp = footprint_of(door.position, door.dims)
        inside = fp.contains(xs, ys, margin=cellmap.grid.resolution)
        ids, counts = np.unique(cellmap.cell_index[inside & (cellmap.cell_index >= 0)],
                                return_counts=True)
        by_region: dict[int, int] = {}
        for cid, cnt in zip(ids.tolist(), counts.tolist()):
            region = cellmap.region_of_cell(int(cid))
            by_region[region] = by_region.get(region, 0) + int(cnt)
        if len(by_region) < 2:
            warnings.warn(f"door {door.label!r} is not between two regions; skipped")
            continue
        ranked = sorted(by_region.items(), key=lambda kv: (-kv[1], kv[0]))
        regions = sorted(r for r, _ in ranked[:2])

        hx, hy = math.cos(door.position.theta), math.sin(door.position.theta)
        static_ids = []
        for region in regions:
            area = cellmap.region_labels[region]
            placed = None
            for sign in (1.0, -1.0):
                px = door.position.x + sign * cfg.door_offset * hx
                py = door.position.y + sign * cfg.door_offset * hy
                cid = cellmap.cell_of_world(px, py)
                if cid >= 0 and cellmap.region_of_cell(cid) == region:
                    placed = (px, py)
                    break
            if placed is None:
                placed = _nearest_free_cell_in_region(cellmap, region,
                                                      door.position.x, door.position.y)
            theta = math.atan2(door.position.y - placed[1], door.position.x - placed[0])
            node_id = f"s_{door.label}_{area}"
            graph.add_node(TopoNode(id=node_id, kind=STATIC, area_label=area,
                                    position=Pose2D(placed[0], placed[1], theta),
                                    door_label=door.label))
            graph.add_edge(node_id, f"d_{area}", REACH)
            static_ids.append(node_id)
        graph.add_edge(static_ids[0], static_ids[1], CROSS_DOOR, door_label=door.label)

    graph.edges.sort(key=lambda e: (e.a, e.b, e.behavior))
    return graph


def instantiate_dynamic(node: TopoNode, hint: Optional[str], cellmap: CellMap,
                        store: InstanceStore) -> Pose2D:
    """Resolve a dynamic node to a metric pose.

    With an object-label hint, the pose is the free cell center in the
    node's area nearest the object's footprint (excluding cells under
    it), heading toward the object; without one, the area centroid.
    """
    if node.kind != DYNAMIC:
        raise SchemaViolation(f"{node.id} is not a dynamic node")
    regions = [r for r, lbl in enumerate(cellmap.region_labels) if lbl == node.area_label]
    if hint is None or hint not in store:
        return _region_centroid_pose(cellmap, regions)
    sig = store.get(hint)
    if sig.position is None:
        return _region_centroid_pose(cellmap, regions)
    if sig.dims is None:
        x, y = _nearest_free_cell_in_region(cellmap, regions[0], sig.position.x, sig.position.y)
        theta = math.atan2(sig.position.y - y, sig.position.x - x)
        return Pose2D(x, y, theta)

    fp = footprint_of(sig.position, sig.dims)
    mask = np.logical_or.reduce([cellmap.region_cells_mask(r) for r in regions])
    ij = np.argwhere(mask)
    res = cellmap.grid.resolution
    cx = cellmap.grid.origin.x + (ij[:, 1] + 0.5) * res
    cy = cellmap.grid.origin.y + (ij[:, 0] + 0.5) * res
    # the hint must touch the area: its footprint, slightly dilated, has to
    # overlap the region's cells
    if not fp.contains(cx, cy, margin=2.0 * res).any():
        raise NoFreePoseInRegion(f"{hint!r} does not touch area {node.area_label!r}")
    dist = np.array([fp.distance(x, y) for x, y in zip(cx.tolist(), cy.tolist())])
    outside = dist > 0
    if not outside.any():
        raise NoFreePoseInRegion(f"no free pose next to {hint!r} in {node.area_label!r}")
    sel = np.flatnonzero(outside)
    order = np.lexsort((ij[sel, 1], ij[sel, 0], dist[sel]))
    best = int(sel[order[0]])
    x, y = float(cx[best]), float(cy[best])
    theta = math.atan2(sig.position.y - y, sig.position.x - x)
    return Pose2D(x, y, theta)


def to_dot(graph: TopologicalGraph) -> str:
    """Graphviz rendering with byte-stable ordering."""
    lines = ["graph topo {"]
    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        shape = "box" if node.kind == STATIC else "ellipse"
        style = ' style="filled" fillcolor="gray25" fontcolor="white"' if node.kind == STATIC \
            else ' style="filled" fillcolor="gray90"'
        lines.append(f'  "{node_id}" [shape={shape}{style} label="{node_id}\\n{node.area_label}"];')
    for edge in sorted(graph.edges, key=lambda e: (e.a, e.b, e.behavior)):
        attrs = f'label="{edge.behavior}"'
        if edge.door_label:
            attrs = f'label="{edge.behavior}({edge.door_label})"'
        lines.append(f'  "{edge.a}" -- "{edge.b}" [{attrs}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
