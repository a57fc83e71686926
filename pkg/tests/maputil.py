"""Map-construction helpers and grid-level oracles shared across tests."""
import math
from collections import deque

import numpy as np

from semantica.geometry import Pose2D
from semantica.grid import FREE, OCCUPIED, OccupancyGrid


def blank_grid(width_m=5.0, height_m=5.0, resolution=0.05):
    h, w = round(height_m / resolution), round(width_m / resolution)
    cells = np.full((h, w), FREE, dtype=np.uint8)
    return cells


def draw_wall(cells, resolution, rho, theta, smin, smax, thickness=None):
    """Rasterize a wall segment along s = -x sin(theta) + y cos(theta)."""
    thickness = thickness if thickness is not None else resolution / 2
    h, w = cells.shape
    ys = (np.arange(h)[:, None] + 0.5) * resolution
    xs = (np.arange(w)[None, :] + 0.5) * resolution
    d = np.abs(xs * math.cos(theta) + ys * math.sin(theta) - rho)
    s = -xs * math.sin(theta) + ys * math.cos(theta)
    cells[(d <= thickness) & (s >= smin) & (s <= smax)] = OCCUPIED


def to_grid(cells, resolution=0.05):
    return OccupancyGrid(cells=cells, resolution=resolution, origin=Pose2D(0, 0, 0))


def two_room_world(tags=(("kitchen", (1.0, 1.0)), ("living_room", (4.0, 4.0)))):
    """5x5 m map split by a vertical wall at x=2.5 with a 0.9 m doorway.

    Returns (grid, cellmap, door_signature); the cell map is fully built
    (objects added, connectivity, area labels).
    """
    from semantica.cellmap import add_objects, build_connect, compute_cells, label_areas
    from semantica.hough import detect_walls
    from semantica.knowledge import InstanceSignature

    resolution = 0.05
    cells = blank_grid(5.0, 5.0, resolution)
    draw_wall(cells, resolution, 2.525, 0.0, 0.0, 2.05)
    draw_wall(cells, resolution, 2.525, 0.0, 2.95, 5.0)
    grid = to_grid(cells, resolution)
    door = InstanceSignature(label="door1", concept="Door",
                             position=Pose2D(2.525, 2.5, 0.0), dims=(2.0, 0.9, 0.3))
    cm = compute_cells(grid, detect_walls(grid))
    add_objects(cm, [door])
    build_connect(cm)
    label_areas(cm, [door], [(label, Pose2D(x, y, 0)) for label, (x, y) in tags])
    return grid, cm, door


def flood_fill_components(free_mask) -> np.ndarray:
    """Independent 4-adjacency component labeling by BFS; -1 outside."""
    h, w = free_mask.shape
    comp = np.full((h, w), -1, dtype=np.int64)
    next_id = 0
    for si in range(h):
        for sj in range(w):
            if not free_mask[si, sj] or comp[si, sj] >= 0:
                continue
            queue = deque([(si, sj)])
            comp[si, sj] = next_id
            while queue:
                i, j = queue.popleft()
                for ni, nj in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)):
                    if 0 <= ni < h and 0 <= nj < w and free_mask[ni, nj] and comp[ni, nj] < 0:
                        comp[ni, nj] = next_id
                        queue.append((ni, nj))
            next_id += 1
    return comp
