// Pure derivations from API payloads to drawable shapes. No geometry is
// computed here beyond coordinate conversion: the layers arrive fully
// formed from the server.

import type { CellMapDoc, GridDoc, PlanDoc, Pose, TopoDoc } from "./types.js";

export interface Transform {
  scale: number;
  toCanvas(x: number, y: number): [number, number];
  toWorld(px: number, py: number): [number, number];
}

/** World <-> canvas mapping; canvas y runs down, world y runs up. */
export function makeTransform(grid: GridDoc, canvasWidth: number, canvasHeight: number): Transform {
  const worldW = grid.width * grid.resolution;
  const worldH = grid.height * grid.resolution;
  const scale = Math.min(canvasWidth / worldW, canvasHeight / worldH);
  const ox = grid.origin[0];
  const oy = grid.origin[1];
  return {
    scale,
    toCanvas: (x, y) => [(x - ox) * scale, canvasHeight - (y - oy) * scale],
    toWorld: (px, py) => [px / scale + ox, (canvasHeight - py) / scale + oy],
  };
}

/** Deterministic, distinct color per region id. */
export function regionColor(region: number, total: number): string {
  const hue = Math.round((360 * region) / Math.max(1, total));
  return `hsl(${hue}, 55%, 70%)`;
}

export interface RegionShape {
  cellId: number;
  region: number;
  label: string;
  color: string;
  polygon: [number, number][];
}

export function cellShapes(cellmap: CellMapDoc): RegionShape[] {
  const regions = cellmap.regions ?? [];
  const labelOf = new Map(regions.map((r) => [r.id, r.label]));
  const total = regions.length;
  return cellmap.cells.map((cell) => {
    const region = cell.region ?? 0;
    return {
      cellId: cell.id,
      region,
      label: labelOf.get(region) ?? `region${region}`,
      color: regionColor(region, total),
      polygon: cell.polygon,
    };
  });
}

export function renderedRegionCount(cellmap: CellMapDoc): number {
  return new Set(cellShapes(cellmap).map((s) => s.region)).size;
}

export interface NodeShape {
  id: string;
  kind: "static" | "dynamic";
  area: string;
  world: [number, number];
  fill: string; // static nodes dark, dynamic light
}

export interface EdgeShape {
  from: [number, number];
  to: [number, number];
  behavior: string;
  door: string | null;
}

export function topoShapes(topo: TopoDoc): { nodes: NodeShape[]; edges: EdgeShape[] } {
  const byId = new Map(topo.nodes.map((n) => [n.id, n]));
  const nodes = topo.nodes.map((n) => ({
    id: n.id,
    kind: n.kind,
    area: n.area,
    world: [n.pose[0], n.pose[1]] as [number, number],
    fill: n.kind === "static" ? "#30343a" : "#e8e4d8",
  }));
  const edges = topo.edges.map((e) => {
    const a = byId.get(e.a)!;
    const b = byId.get(e.b)!;
    return {
      from: [a.pose[0], a.pose[1]] as [number, number],
      to: [b.pose[0], b.pose[1]] as [number, number],
      behavior: e.behavior,
      door: e.door,
    };
  });
  return { nodes, edges };
}

export function renderedNodeCounts(topo: TopoDoc): { dynamic: number; static: number } {
  const { nodes } = topoShapes(topo);
  return {
    dynamic: nodes.filter((n) => n.kind === "dynamic").length,
    static: nodes.filter((n) => n.kind === "static").length,
  };
}

/** Waypoints the plan animation visits, in execution order. */
export function planWaypoints(plan: PlanDoc, topo: TopoDoc): { node: string; world: [number, number] }[] {
  const byId = new Map(topo.nodes.map((n) => [n.id, n]));
  const start = byId.get(plan.start_node);
  const points: { node: string; world: [number, number] }[] = [];
  if (start) {
    points.push({ node: start.id, world: [start.pose[0], start.pose[1]] });
  }
  for (const step of plan.steps) {
    points.push({ node: step.node, world: [step.pose[0], step.pose[1]] });
  }
  return points;
}

/** Grayscale pixels of the occupancy grid, canvas orientation. */
export function gridPixels(grid: GridDoc): Uint8ClampedArray {
  const { width, height, rows } = grid;
  const out = new Uint8ClampedArray(width * height * 4);
  for (let row = 0; row < height; row += 1) {
    const line = rows[row];
    const canvasRow = height - 1 - row; // world row 0 is the bottom
    for (let col = 0; col < width; col += 1) {
      const ch = line[col];
      const value = ch === "." ? 245 : ch === "#" ? 20 : 128;
      const k = (canvasRow * width + col) * 4;
      out[k] = out[k + 1] = out[k + 2] = value;
      out[k + 3] = 255;
    }
  }
  return out;
}
