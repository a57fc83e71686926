"""End-to-end world construction from a map and a tagging session."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .acquisition import (
    AcquisitionConfig,
    SessionRecord,
    SessionResult,
    finalize_signatures,
    ingest_session,
    resolve_area_tags,
)
from .cellmap import CellMapConfig, add_objects, build_connect, compute_cells, label_areas
from .grid import OccupancyGrid
from .hough import HoughConfig, detect_walls
from .knowledge import ConceptKB, InstanceStore
from .posegraph import OptimizeConfig, optimize
from .topograph import TopoConfig, build_topology
from .world import WorldModel


@dataclass
class BuildConfig:
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    optimizer: OptimizeConfig = field(default_factory=OptimizeConfig)
    hough: HoughConfig = field(default_factory=HoughConfig)
    cellmap: CellMapConfig = field(default_factory=CellMapConfig)
    topo: TopoConfig = field(default_factory=TopoConfig)


def build_world(grid: OccupancyGrid, records: Iterable[SessionRecord], kb: ConceptKB,
                config: BuildConfig | None = None, kb_ref: str = "kb",
                map_ref: dict | None = None) -> tuple[WorldModel, SessionResult]:
    """Run the full construction: ingest and validate the session, fuse the
    pose graph, register signatures, then derive the cell map and the
    topological graph."""
    cfg = config or BuildConfig()

    ingest = ingest_session(records, kb, cfg.acquisition)
    optimized = optimize(ingest.graph, cfg.optimizer)

    store = InstanceStore(kb)
    finalize_signatures(optimized, ingest.provisional, store)
    area_sites = resolve_area_tags(optimized, ingest.area_tags)
    for site, pose in area_sites:
        if site.label not in store:
            store.register(site.label, site.concept, properties=dict(site.properties),
                           position=pose)

    world = WorldModel(kb=kb, grid=grid, store=store, kb_ref=kb_ref, map_ref=map_ref)

    walls = detect_walls(grid, cfg.hough)
    cellmap = compute_cells(grid, walls, cfg.cellmap)
    placeable = [s for s in store.all() if s.position is not None and s.dims]
    add_objects(cellmap, placeable)
    build_connect(cellmap)
    label_areas(cellmap, world.structural_signatures(),
                [(site.label, pose) for site, pose in area_sites])
    world.cellmap = cellmap

    world.topo = build_topology(cellmap, world.door_signatures(), cfg.topo)

    result = SessionResult(
        accepted=[(e, store.get(e.label) if e.label in store else None)
                  for e in ingest.accepted],
        rejected=ingest.rejected,
        optimized_graph=optimized.graph,
        chi2_trace=optimized.chi2_trace,
    )
    world.session_meta = {
        "events": len(ingest.accepted) + len(ingest.rejected),
        "accepted": len(ingest.accepted),
        "rejected": len(ingest.rejected),
        "final_chi2": optimized.final_chi2,
        "initial_chi2": optimized.initial_chi2,
        "iterations": optimized.iterations,
        "warnings": ingest.warnings,
    }
    return world, result
