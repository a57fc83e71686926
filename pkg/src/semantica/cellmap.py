"""Variable-size cell decomposition of free space with labels and adjacency.

Detected wall lines cut the map into arrangement faces; faces separated
only where a line has no wall support (phantom stretches) merge back, so
open areas end up as few wide cells while walled zones stay finely cut.
Object footprints then stamp labels onto cells - splitting oversized
cells first so labels stay spatially tight - and door-aware region
filling assigns every cell exactly one area label.

Cells are raster-canonical: `cell_index` maps every free grid cell to
its cell id, and all geometry (extents, polygons, adjacency) derives
from that array.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import AreaTagInOccupiedSpace, NoFreeSpace, ObjectOutOfMap, SchemaViolation
from .geometry import Footprint, Pose2D, footprint_of
from .grid import OccupancyGrid
from .hough import WallLine
from .knowledge import InstanceSignature

MAX_LINES = 62  # sign vectors are packed into a uint64 bitmask


@dataclass(frozen=True)
class CellMapConfig:
    min_cell_size: float = 0.25        # m; thinner faces merge into a neighbor
    support_radius_factor: float = 2.0  # x resolution; along-line wall gap tolerance
    support_dist_factor: float = 1.0    # x resolution; occupied cell to line distance
    split_area_ratio: float = 4.0       # cell splits when larger than ratio x footprint
    seal_margin_factor: float = 1.0     # x resolution; door footprint dilation
    band_factor: float = 2.5            # x resolution; face-to-line interface band
    merge_coverage: float = 0.2         # min wall coverage for a cut to be real


@dataclass
class Cell:
    id: int
    labels: set[str] = field(default_factory=set)


@dataclass
class Crossing:
    """One shared boundary unit between two adjacent free grid cells."""

    flat_p: int
    flat_q: int
    mid_x: float
    mid_y: float
    wall_supported: bool


class CellMap:
    def __init__(self, grid: OccupancyGrid, lines: list[WallLine],
                 cell_index: np.ndarray, config: CellMapConfig):
        self.grid = grid
        self.lines = lines
        self.cell_index = cell_index  # (H, W) int32, -1 outside free space
        self.config = config
        ids = np.unique(cell_index[cell_index >= 0])
        self.cells: list[Cell] = [Cell(id=int(i)) for i in ids]
        self.connect: set[tuple[int, int]] = set()
        self.region_of: Optional[np.ndarray] = None   # cell id -> region id
        self.region_labels: list[str] = []
        self.sealed: set[tuple[int, int]] = set()
        self._crossings: Optional[list[Crossing]] = None

    # -- basic queries --

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    def f(self, cell_id: int) -> set[str]:
        """The label set of a cell (the map f: Cell -> 2^Label)."""
        return self.cells[cell_id].labels

    def cell_area(self, cell_id: int) -> float:
        count = int((self.cell_index == cell_id).sum())
        return count * self.grid.resolution ** 2

    def cell_of_world(self, x: float, y: float) -> int:
        """Cell id at a world point, -1 when outside free space."""
        try:
            i, j = self.grid.world_to_cell(x, y)
        except Exception:
            return -1
        return int(self.cell_index[i, j])

    def cell_cells(self, cell_id: int) -> np.ndarray:
        """(N, 2) array of (row, col) grid indices belonging to the cell."""
        return np.argwhere(self.cell_index == cell_id)

    def cell_centroid(self, cell_id: int) -> tuple[float, float]:
        ij = self.cell_cells(cell_id)
        res = self.grid.resolution
        x = self.grid.origin.x + (ij[:, 1].mean() + 0.5) * res
        y = self.grid.origin.y + (ij[:, 0].mean() + 0.5) * res
        return float(x), float(y)

    def cells_with_label(self, label: str) -> list[int]:
        return [c.id for c in self.cells if label in c.labels]

    def region_of_cell(self, cell_id: int) -> int:
        if self.region_of is None:
            raise SchemaViolation("areas not labeled yet")
        return int(self.region_of[cell_id])

    def region_cells_mask(self, region: int) -> np.ndarray:
        ids = [c.id for c in self.cells if self.region_of[c.id] == region]
        return np.isin(self.cell_index, ids)

    def area_label_of_cell(self, cell_id: int) -> str:
        return self.region_labels[self.region_of_cell(cell_id)]

    # -- crossings (adjacent free-cell pairs on cell boundaries) --

    def boundary_crossings(self) -> list[Crossing]:
        if self._crossings is None:
            self._crossings = _compute_crossings(self.grid, self.lines,
                                                 self.cell_index, self.config)
        return self._crossings

    def invalidate(self) -> None:
        self._crossings = None


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------


def _line_support_tables(grid: OccupancyGrid, lines: list[WallLine],
                         config: CellMapConfig) -> list[np.ndarray]:
    """Sorted along-line projections of each line's supporting wall cells."""
    ii, jj = np.nonzero(grid.occupied_mask())
    xs = grid.origin.x + (jj + 0.5) * grid.resolution
    ys = grid.origin.y + (ii + 0.5) * grid.resolution
    tables = []
    tol = config.support_dist_factor * grid.resolution
    for line in lines:
        d = np.abs(xs * math.cos(line.theta) + ys * math.sin(line.theta) - line.rho)
        sel = d <= tol
        proj = -xs[sel] * math.sin(line.theta) + ys[sel] * math.cos(line.theta)
        tables.append(np.sort(proj))
    return tables


def _locally_supported(table: np.ndarray, s: float, radius: float) -> bool:
    """Is any supporting wall cell within `radius` along the line of s?"""

    if len(table) == 0:
        return False
    k = int(np.searchsorted(table, s))
    if k < len(table) and abs(table[k] - s) <= radius:
        return True
    return k > 0 and abs(table[k - 1] - s) <= radius


def _sign_masks(grid: OccupancyGrid, lines: list[WallLine]) -> np.ndarray:
    xs, ys = grid.cell_centers()
    masks = np.zeros(grid.cells.shape, dtype=np.uint64)
    for k, line in enumerate(lines):
        d = xs * math.cos(line.theta) + ys * math.sin(line.theta) - line.rho
        masks |= (d >= 0).astype(np.uint64) << np.uint64(k)
    return masks


def _adjacent_free_pairs(free: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flat-index pairs of 4-adjacent free cells (right and up neighbors)."""
    h, w = free.shape
    flat = np.arange(h * w).reshape(h, w)
    pairs_a, pairs_b = [], []
    horiz = free[:, :-1] & free[:, 1:]
    pairs_a.append(flat[:, :-1][horiz])
    pairs_b.append(flat[:, 1:][horiz])
    vert = free[:-1, :] & free[1:, :]
    pairs_a.append(flat[:-1, :][vert])
    pairs_b.append(flat[1:, :][vert])
    return np.concatenate(pairs_a), np.concatenate(pairs_b)


def compute_cells(grid: OccupancyGrid, walls: list[WallLine],
                  config: CellMapConfig | None = None) -> CellMap:
    """Cut free space into cells along wall lines, then heal phantom cuts.

    Adjacent faces merge back when every line separating them is a
    phantom cut there: the wall inliers of the line cover almost none of
    the pair's shared interface span. Faces thinner than `min_cell_size`
    merge into their widest neighbor.
    """
    config = config or CellMapConfig()
    free = grid.free_mask()
    if not free.any():
        raise NoFreeSpace("map has no free cells")
    lines = list(walls)[:MAX_LINES]
    h, w = free.shape
    res = grid.resolution

    masks = _sign_masks(grid, lines)
    pa, pb = _adjacent_free_pairs(free)
    flat_masks = masks.ravel()
    same = flat_masks[pa] == flat_masks[pb]

    # faces: connected components over equal-sign adjacency
    n = h * w
    m = coo_matrix((np.ones(same.sum()), (pa[same], pb[same])), shape=(n, n))
    _, comp = connected_components(m, directed=False)
    comp = np.where(free.ravel(), comp, -1)

    merge_parent = _phantom_merge(grid, lines, comp, flat_masks, free,
                                  pa[~same], pb[~same], config)
    comp = np.where(comp >= 0, merge_parent[comp], -1)

    comp = _merge_slivers(comp, free, pa, pb, h, w, res, config)

    cell_index = _renumber(comp, h, w)
    return CellMap(grid=grid, lines=lines, cell_index=cell_index, config=config)


def _crossing_supported(fp: int, fq: int, flat_masks, xs, ys, w, lines, tables, radius) -> bool:
    diff = int(flat_masks[fp]) ^ int(flat_masks[fq])
    if diff == 0:
        return False
    mx = (xs[fp % w] + xs[fq % w]) / 2.0
    my = (ys[fp // w] + ys[fq // w]) / 2.0
    k = 0
    while diff:
        if diff & 1:
            line = lines[k]
            s = -mx * math.sin(line.theta) + my * math.cos(line.theta)
            if _locally_supported(tables[k], s, radius):
                return True
        diff >>= 1
        k += 1
    return False


def _phantom_merge(grid, lines, comp, flat_masks, free, diff_a, diff_b,
                   config) -> np.ndarray:
    """Union faces across cuts whose separating lines carry no wall there.

    A line is real for a face pair when its wall inliers cover at least
    `merge_coverage` of the pair's interface span along the line; a
    doorway gap in a long wall therefore never merges its rooms, while a
    line that only clips the far side of another wall does.
    """
    n_faces = int(comp.max()) + 1
    res = grid.resolution
    parent = np.arange(n_faces)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if len(diff_a) == 0 or not lines:
        return parent

    # face sign masks (constant within a face)
    face_mask = np.zeros(n_faces, dtype=np.uint64)
    flat_comp = comp
    first_members = {}
    for idx in np.flatnonzero(flat_comp >= 0):
        fid = int(flat_comp[idx])
        if fid not in first_members:
            first_members[fid] = idx
            face_mask[fid] = flat_masks[idx]

    # per line: projection span of each face's band cells, and wall bins
    xs, ys = grid.cell_centers()
    occ_ii, occ_jj = np.nonzero(grid.occupied_mask())
    occ_x = grid.origin.x + (occ_jj + 0.5) * res
    occ_y = grid.origin.y + (occ_ii + 0.5) * res
    band = config.band_factor * res
    tol = config.support_dist_factor * res
    spans: list[dict[int, tuple[float, float]]] = []
    wall_bins: list[np.ndarray] = []
    comp_grid = comp.reshape(grid.cells.shape)
    for line in lines:
        c, s = math.cos(line.theta), math.sin(line.theta)
        d = xs * c + ys * s - line.rho
        near = free & (np.abs(d) <= band)
        proj = -xs * s + ys * c
        span: dict[int, tuple[float, float]] = {}
        for fid, p in zip(comp_grid[near].tolist(), proj[near].tolist()):
            if fid < 0:
                continue
            lo, hi = span.get(fid, (p, p))
            span[fid] = (min(lo, p), max(hi, p))
        spans.append(span)
        od = np.abs(occ_x * c + occ_y * s - line.rho)
        keep = od <= tol
        bins = np.unique(np.floor((-occ_x[keep] * s + occ_y[keep] * c) / res).astype(np.int64))
        wall_bins.append(bins)

    pairs = set()
    for idx in range(len(diff_a)):
        fa, fb = int(flat_comp[diff_a[idx]]), int(flat_comp[diff_b[idx]])
        pairs.add((min(fa, fb), max(fa, fb)))

    for fa, fb in sorted(pairs):
        diff = int(face_mask[fa]) ^ int(face_mask[fb])
        real_cut = False
        k = 0
        while diff:
            if diff & 1:
                span_a = spans[k].get(fa)
                span_b = spans[k].get(fb)
                if span_a and span_b:
                    lo = max(span_a[0], span_b[0])
                    hi = min(span_a[1], span_b[1])
                    if hi > lo:
                        b0 = math.floor(lo / res)
                        b1 = math.floor(hi / res)
                        total = b1 - b0 + 1
                        covered = int(np.count_nonzero(
                            (wall_bins[k] >= b0) & (wall_bins[k] <= b1)))
                        if covered / total >= config.merge_coverage:
                            real_cut = True
                            break
            diff >>= 1
            k += 1
        if not real_cut:
            ra, rb = find(fa), find(fb)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return np.array([find(i) for i in range(n_faces)])


def _merge_slivers(comp, free, pa, pb, h, w, res, config) -> np.ndarray:
    """Fold faces thinner than min_cell_size into their widest neighbor."""
    min_cells = config.min_cell_size / res
    for _ in range(100):
        ids = np.unique(comp[comp >= 0])
        rows = np.repeat(np.arange(h), w)
        cols = np.tile(np.arange(w), h)
        thin = set()
        for fid in ids:
            sel = comp == fid
            rmin, rmax = rows[sel].min(), rows[sel].max()
            cmin, cmax = cols[sel].min(), cols[sel].max()
            if min(rmax - rmin + 1, cmax - cmin + 1) < min_cells:
                thin.add(int(fid))
        if not thin:
            return comp
        neighbor_counts: dict[tuple[int, int], int] = {}
        for a, b in zip(comp[pa], comp[pb]):
            if a != b:
                neighbor_counts[(int(a), int(b))] = neighbor_counts.get((int(a), int(b)), 0) + 1
                neighbor_counts[(int(b), int(a))] = neighbor_counts.get((int(b), int(a)), 0) + 1
        changed = False
        for fid in sorted(thin):
            options = [(cnt, -other) for (fa, other), cnt in neighbor_counts.items() if fa == fid]
            if not options:
                continue
            _, negother = max(options)
            comp = np.where(comp == fid, -negother, comp)
            changed = True
            break  # one merge per pass keeps neighbor counts honest
        if not changed:
            return comp
    return comp


def _renumber(comp, h, w) -> np.ndarray:
    """Cell ids ordered by each face's first (row-major) grid cell."""
    flat = comp
    seen: dict[int, int] = {}
    for idx in np.flatnonzero(flat >= 0):
        fid = int(flat[idx])
        if fid not in seen:
            seen[fid] = len(seen)
    out = np.full(h * w, -1, dtype=np.int32)
    for fid, new in seen.items():
        out[flat == fid] = new
    return out.reshape(h, w)


def _compute_crossings(grid, lines, cell_index, config) -> list[Crossing]:
    free = cell_index >= 0
    h, w = free.shape
    res = grid.resolution
    pa, pb = _adjacent_free_pairs(free)
    flat_cells = cell_index.ravel()
    across = flat_cells[pa] != flat_cells[pb]
    pa, pb = pa[across], pb[across]
    masks = _sign_masks(grid, lines).ravel()
    tables = _line_support_tables(grid, lines, config)
    radius = config.support_radius_factor * res
    xs = grid.origin.x + (np.arange(w) + 0.5) * res
    ys = grid.origin.y + (np.arange(h) + 0.5) * res
    out = []
    for fp, fq in zip(pa.tolist(), pb.tolist()):
        mx = (xs[fp % w] + xs[fq % w]) / 2.0
        my = (ys[fp // w] + ys[fq // w]) / 2.0
        supported = _crossing_supported(fp, fq, masks, xs, ys, w, lines, tables, radius)
        out.append(Crossing(flat_p=fp, flat_q=fq, mid_x=float(mx), mid_y=float(my),
                            wall_supported=supported))
    return out


# ---------------------------------------------------------------------------
# object addition
# ---------------------------------------------------------------------------


def add_objects(cellmap: CellMap, signatures: Iterable[InstanceSignature]) -> None:
    """Stamp object labels onto the cells their footprints overlap.

    A cell more than `split_area_ratio` times larger than the footprint
    is first split along the footprint's edge lines so the label lands
    on a snug sub-cell.
    """
    grid = cellmap.grid
    xs, ys = grid.cell_centers()
    in_map = grid.cells != 2  # free or occupied
    for sig in sorted(signatures, key=lambda s: s.label):
        if sig.position is None or sig.dims is None:
            continue
        fp = footprint_of(sig.position, sig.dims)
        inside = fp.contains(xs, ys)
        if not (inside & in_map).any():
            raise ObjectOutOfMap(f"{sig.label}: footprint outside the mapped area")
        overlapping = np.unique(cellmap.cell_index[inside & (cellmap.cell_index >= 0)])
        for cid in overlapping.tolist():
            if cellmap.cell_area(cid) > cellmap.config.split_area_ratio * fp.area:
                _split_cell(cellmap, cid, fp)
        # recompute after splits, then label
        inside_ids = np.unique(cellmap.cell_index[inside & (cellmap.cell_index >= 0)])
        for cid in inside_ids.tolist():
            cellmap.cells[cid].labels.add(sig.label)
    cellmap.invalidate()


def _split_cell(cellmap: CellMap, cell_id: int, fp: Footprint) -> None:
    """Split one cell along the footprint's four edge lines."""
    grid = cellmap.grid
    sel = cellmap.cell_index == cell_id
    ij = np.argwhere(sel)
    res = grid.resolution
    cx = grid.origin.x + (ij[:, 1] + 0.5) * res
    cy = grid.origin.y + (ij[:, 0] + 0.5) * res
    c, s = math.cos(fp.center.theta), math.sin(fp.center.theta)
    u = c * (cx - fp.center.x) + s * (cy - fp.center.y)
    v = -s * (cx - fp.center.x) + c * (cy - fp.center.y)
    code = ((u >= -fp.length / 2).astype(int)
            + ((u > fp.length / 2).astype(int) << 1)
            + ((v >= -fp.width / 2).astype(int) << 2)
            + ((v > fp.width / 2).astype(int) << 3))
    if len(np.unique(code)) <= 1:
        return
    # connected components of equal-code cells within this cell
    h, w = cellmap.cell_index.shape
    code_grid = np.full((h, w), -1, dtype=np.int64)
    code_grid[sel] = code
    pa, pb = _adjacent_free_pairs(sel)
    flat_code = code_grid.ravel()
    same = flat_code[pa] == flat_code[pb]
    n = h * w
    m = coo_matrix((np.ones(same.sum()), (pa[same], pb[same])), shape=(n, n))
    _, comp = connected_components(m, directed=False)
    comp = np.where(sel.ravel(), comp, -1)

    pieces: dict[int, int] = {}
    order = []
    for idx in np.flatnonzero(comp >= 0):
        pid = int(comp[idx])
        if pid not in pieces:
            pieces[pid] = len(order)
            order.append(pid)
    if len(order) <= 1:
        return
    old_labels = cellmap.cells[cell_id].labels
    flat_index = cellmap.cell_index.ravel()
    for rank, pid in enumerate(order):
        new_id = cell_id if rank == 0 else len(cellmap.cells)
        if rank > 0:
            cellmap.cells.append(Cell(id=new_id, labels=set(old_labels)))
        flat_index[comp == pid] = new_id
    cellmap.cell_index = flat_index.reshape(h, w)
    cellmap.invalidate()


# ---------------------------------------------------------------------------
# connectivity and area labeling
# ---------------------------------------------------------------------------


def build_connect(cellmap: CellMap) -> set[tuple[int, int]]:
    """Adjacency between cells whose shared boundary is passable.

    Two cells connect when at least one boundary crossing is not covered
    by a supported stretch of a wall line.
    """
    connect: set[tuple[int, int]] = set()
    flat_cells = cellmap.cell_index.ravel()
    for crossing in cellmap.boundary_crossings():
        if crossing.wall_supported:
            continue
        a, b = int(flat_cells[crossing.flat_p]), int(flat_cells[crossing.flat_q])
        if a != b:
            connect.add((min(a, b), max(a, b)))
    cellmap.connect = connect
    return connect


def label_areas(cellmap: CellMap, structural: Iterable[InstanceSignature],
                area_tags: Iterable[tuple[str, Pose2D]],
                auto_prefix: str = "room") -> None:
    """Partition cells into regions by sealing doorways, then label them.

    A structural footprint seals every cell-graph edge whose boundary it
    covers; region filling then runs over the unsealed adjacency. Cells
    lying entirely under a footprint (the doorway throat) do not form
    regions of their own: they are folded into the neighboring region
    they share the most boundary with. Tagged regions take the tag's
    label, the rest get `room1`, `room2`, ... in row-major seed order.
    """
    if not cellmap.connect:
        build_connect(cellmap)
    grid = cellmap.grid
    margin = cellmap.config.seal_margin_factor * grid.resolution
    flat_cells = cellmap.cell_index.ravel()
    n = cellmap.num_cells

    # group crossings per connect edge
    per_edge: dict[tuple[int, int], list[Crossing]] = {}
    for crossing in cellmap.boundary_crossings():
        if crossing.wall_supported:
            continue
        a, b = int(flat_cells[crossing.flat_p]), int(flat_cells[crossing.flat_q])
        if a == b:
            continue
        per_edge.setdefault((min(a, b), max(a, b)), []).append(crossing)

    footprints = [footprint_of(s.position, s.dims)
                  for s in sorted(structural, key=lambda s: s.label)
                  if s.position is not None and s.dims is not None]

    sealed: set[tuple[int, int]] = set()
    for fp in footprints:
        for edge, crossings in per_edge.items():
            if edge in sealed:
                continue
            if all(bool(fp.contains(c.mid_x, c.mid_y, margin=margin)) for c in crossings):
                sealed.add(edge)

    # throat cells: all grid cells under some (dilated) footprint
    throat = np.zeros(n, dtype=bool)
    if footprints:
        xs, ys = grid.cell_centers()
        covered = np.zeros(grid.cells.shape, dtype=bool)
        for fp in footprints:
            covered |= fp.contains(xs, ys, margin=margin)
        for cell in cellmap.cells:
            sel = cellmap.cell_index == cell.id
            throat[cell.id] = bool(covered[sel].all())

    # region filling over the unsealed connectivity
    open_edges = [e for e in cellmap.connect if e not in sealed]
    if open_edges:
        rows = [e[0] for e in open_edges]
        cols = [e[1] for e in open_edges]
        m = coo_matrix((np.ones(len(open_edges)), (rows, cols)), shape=(n, n))
        _, comp = connected_components(m, directed=False)
    else:
        comp = np.arange(n)

    comp = _absorb_throat_components(cellmap, comp, throat, per_edge)

    # stable region ids by row-major seed
    seeds: dict[int, int] = {}
    for idx in np.flatnonzero(flat_cells >= 0):
        region = int(comp[flat_cells[idx]])
        if region not in seeds:
            seeds[region] = len(seeds)
    region_of = np.array([seeds[int(comp[c.id])] for c in cellmap.cells])

    labels_by_region: dict[int, str] = {}
    for label, pose in area_tags:
        cid = cellmap.cell_of_world(pose.x, pose.y)
        if cid < 0:
            raise AreaTagInOccupiedSpace(f"area tag {label!r} at ({pose.x:.2f}, {pose.y:.2f})")
        region = int(region_of[cid])
        labels_by_region.setdefault(region, label)

    region_labels = []
    auto = 0
    for region in range(len(seeds)):
        if region in labels_by_region:
            region_labels.append(labels_by_region[region])
        else:
            auto += 1
            region_labels.append(f"{auto_prefix}{auto}")

    for cell in cellmap.cells:
        cell.labels.add(region_labels[int(region_of[cell.id])])
    cellmap.region_of = region_of
    cellmap.region_labels = region_labels
    cellmap.sealed = sealed


def _absorb_throat_components(cellmap: CellMap, comp: np.ndarray, throat: np.ndarray,
                              per_edge: dict[tuple[int, int], list[Crossing]]) -> np.ndarray:
    """Fold components made entirely of under-footprint cells into the
    neighboring proper region with the largest shared boundary."""
    comp = comp.copy()
    for _ in range(len(cellmap.cells)):
        throat_comps = set()
        proper_comps = set()
        for cell in cellmap.cells:
            (throat_comps if throat[cell.id] else proper_comps).add(int(comp[cell.id]))
        throat_comps -= proper_comps
        if not throat_comps:
            return comp
        merged = False
        for tc in sorted(throat_comps):
            counts: dict[int, int] = {}
            for (a, b), crossings in per_edge.items():
                ca, cb = int(comp[a]), int(comp[b])
                if ca == tc and cb != tc:
                    counts[cb] = counts.get(cb, 0) + len(crossings)
                elif cb == tc and ca != tc:
                    counts[ca] = counts.get(ca, 0) + len(crossings)
            proper = {c: cnt for c, cnt in counts.items() if c in proper_comps}
            pool = proper or counts
            if not pool:
                continue
            target = sorted(pool.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
            comp[comp == tc] = target
            merged = True
            break
        if not merged:
            return comp
    return comp


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def cell_runs(cellmap: CellMap, cell_id: int) -> list[list[int]]:
    """Row-wise runs [row, col_start, col_end_exclusive] of a cell."""
    runs = []
    sel = cellmap.cell_index == cell_id
    for i in np.flatnonzero(sel.any(axis=1)):
        cols = np.flatnonzero(sel[i])
        start = int(cols[0])
        prev = start
        for c in cols[1:].tolist():
            if c != prev + 1:
                runs.append([int(i), start, prev + 1])
                start = c
            prev = c
        runs.append([int(i), start, prev + 1])
    return runs


def cell_polygon(cellmap: CellMap, cell_id: int) -> list[tuple[float, float]]:
    """Outer boundary polygon of a cell in world coordinates."""
    sel = cellmap.cell_index == cell_id
    edges: dict[tuple[int, int], tuple[int, int]] = {}
    for i, j in np.argwhere(sel).tolist():
        for (a, b), (di, dj) in (
            (((j, i), (j + 1, i)), (-1, 0)),          # bottom
            (((j + 1, i), (j + 1, i + 1)), (0, 1)),   # right
            (((j + 1, i + 1), (j, i + 1)), (1, 0)),   # top
            (((j, i + 1), (j, i)), (0, -1)),          # left
        ):
            ni, nj = i + di, j + dj
            inside = (0 <= ni < sel.shape[0] and 0 <= nj < sel.shape[1] and sel[ni, nj])
            if not inside:
                edges[a] = b
    loops = []
    remaining = dict(edges)
    while remaining:
        start = min(remaining)
        loop = [start]
        cur = remaining.pop(start)
        while cur != start:
            loop.append(cur)
            cur = remaining.pop(cur)
        loops.append(loop)
    outer = max(loops, key=lambda lp: abs(_signed_area(lp)))
    pruned = _prune_collinear(outer)
    res = cellmap.grid.resolution
    ox, oy = cellmap.grid.origin.x, cellmap.grid.origin.y
    return [(ox + vx * res, oy + vy * res) for vx, vy in pruned]


def _signed_area(loop) -> float:
    total = 0.0
    for (x1, y1), (x2, y2) in zip(loop, loop[1:] + loop[:1]):
        total += x1 * y2 - x2 * y1
    return total / 2.0


def _prune_collinear(loop):
    out = []
    n = len(loop)
    for k in range(n):
        x0, y0 = loop[k - 1]
        x1, y1 = loop[k]
        x2, y2 = loop[(k + 1) % n]
        if (x1 - x0) * (y2 - y1) != (y1 - y0) * (x2 - x1):
            out.append(loop[k])
    return out


def cellmap_to_json(cellmap: CellMap) -> dict:
    cells = []
    for cell in cellmap.cells:
        entry = {
            "id": cell.id,
            "labels": sorted(cell.labels),
            "polygon": [[x, y] for x, y in cell_polygon(cellmap, cell.id)],
            "runs": cell_runs(cellmap, cell.id),
        }
        if cellmap.region_of is not None:
            entry["region"] = int(cellmap.region_of[cell.id])
        cells.append(entry)
    doc = {
        "resolution": cellmap.grid.resolution,
        "cells": cells,
        "connect": sorted([list(e) for e in cellmap.connect]),
    }
    if cellmap.region_of is not None:
        doc["regions"] = [{"id": r, "label": lbl} for r, lbl in enumerate(cellmap.region_labels)]
    return doc


def overlay_pgm_bytes(cellmap: CellMap) -> bytes:
    """Visual PGM: occupied black, unknown dark gray, one gray band per region."""
    grid = cellmap.grid
    img = np.full(grid.cells.shape, 16, dtype=np.uint8)
    img[grid.cells == 0] = 255
    img[grid.cells == 1] = 0
    if cellmap.region_of is not None:
        n = max(1, len(cellmap.region_labels))
        for cell in cellmap.cells:
            region = int(cellmap.region_of[cell.id])
            value = 64 + (160 * region) // max(1, n - 1) if n > 1 else 160
            img[cellmap.cell_index == cell.id] = value
    img = img[::-1]
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode()
    return header + img.tobytes()
