"""Occupancy grid storage and the PGM+YAML map file convention.

Cells are tri-state (free / occupied / unknown). The array is indexed
(row, col) with row 0 at the world-frame bottom; PGM images put row 0
at the top, so loading flips vertically. Unknown is treated as
non-free everywhere downstream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import BadImageFormat, MissingMetadata, NonPositiveResolution, OutOfBounds
from .geometry import Pose2D

FREE = np.uint8(0)
OCCUPIED = np.uint8(1)
UNKNOWN = np.uint8(2)

DEFAULT_OCCUPIED_THRESH = 0.65
DEFAULT_FREE_THRESH = 0.196


@dataclass(frozen=True)
class OccupancyGrid:
    """Tri-state grid with world anchoring.

    `origin` is the pose of the outer corner of cell (0, 0); cell (i, j)
    spans world x in [origin.x + j*res, origin.x + (j+1)*res] and
    similarly for y.
    """

    cells: np.ndarray  # (height, width) uint8 of FREE/OCCUPIED/UNKNOWN
    resolution: float
    origin: Pose2D

    def __post_init__(self):
        if self.resolution <= 0:
            raise NonPositiveResolution(f"resolution {self.resolution} must be > 0")
        if self.cells.ndim != 2 or self.cells.size == 0:
            raise BadImageFormat("grid must be a non-empty 2D array")
        self.cells.setflags(write=False)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) in world coordinates."""
        return (self.origin.x, self.origin.y,
                self.origin.x + self.width * self.resolution,
                self.origin.y + self.height * self.resolution)

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise OutOfBounds(f"non-finite world point ({x}, {y})")
        j = math.floor((x - self.origin.x) / self.resolution)
        i = math.floor((y - self.origin.y) / self.resolution)
        if not (0 <= i < self.height and 0 <= j < self.width):
            raise OutOfBounds(f"({x}, {y}) outside the map")
        return i, j

    def cell_to_world(self, i: int, j: int) -> tuple[float, float]:
        """World coordinates of the center of cell (i, j)."""
        if not (0 <= i < self.height and 0 <= j < self.width):
            raise OutOfBounds(f"cell ({i}, {j}) outside the grid")
        return (self.origin.x + (j + 0.5) * self.resolution,
                self.origin.y + (i + 0.5) * self.resolution)

    def contains_world(self, x: float, y: float) -> bool:
        xmin, ymin, xmax, ymax = self.extent
        return xmin <= x < xmax and ymin <= y < ymax

    def free_mask(self) -> np.ndarray:
        return self.cells == FREE

    def occupied_mask(self) -> np.ndarray:
        return self.cells == OCCUPIED

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(xs, ys) center-coordinate arrays, shaped like `cells`."""
        js = np.arange(self.width)
        is_ = np.arange(self.height)
        xs = self.origin.x + (js + 0.5) * self.resolution
        ys = self.origin.y + (is_ + 0.5) * self.resolution
        return np.meshgrid(xs, ys)


# -- PGM parsing --

def _read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:2] not in (b"P2", b"P5"):
        raise BadImageFormat(f"{path}: not a PGM file (magic {data[:2]!r})")
    magic = data[:2].decode()

    # Header tokens may be separated by whitespace and '#' comments.
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise BadImageFormat(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as e:
        raise BadImageFormat(f"{path}: bad PGM header {tokens!r}") from e
    if maxval <= 0 or maxval > 255:
        raise BadImageFormat(f"{path}: only 8-bit PGM supported (maxval {maxval})")

    if magic == "P5":
        pos += 1  # single whitespace after maxval
        raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
        if raster.size != width * height:
            raise BadImageFormat(f"{path}: raster shorter than {width}x{height}")
    else:
        try:
            values = [int(t) for t in data[pos:].split()]
        except ValueError as e:
            raise BadImageFormat(f"{path}: bad ASCII raster") from e
        if len(values) != width * height:
            raise BadImageFormat(f"{path}: expected {width * height} samples, got {len(values)}")
        raster = np.array(values, dtype=np.uint8)
    return raster.reshape(height, width)


def grid_from_image(image: np.ndarray, resolution: float, origin: Pose2D,
                    occupied_thresh: float = DEFAULT_OCCUPIED_THRESH,
                    free_thresh: float = DEFAULT_FREE_THRESH,
                    negate: bool = False) -> OccupancyGrid:
    """Classify 8-bit pixels into the tri-state grid.

    Occupancy of a pixel p is (255-p)/255 (or p/255 when negated);
    >= occupied_thresh means occupied, <= free_thresh means free,
    anything between is unknown. Image row 0 is the top of the map.
    """
    if resolution <= 0:
        raise NonPositiveResolution(f"resolution {resolution} must be > 0")
    img = image.astype(np.float64)
    occ = img / 255.0 if negate else (255.0 - img) / 255.0
    cells = np.full(img.shape, UNKNOWN, dtype=np.uint8)
    cells[occ >= occupied_thresh] = OCCUPIED
    cells[occ <= free_thresh] = FREE
    return OccupancyGrid(cells=cells[::-1].copy(), resolution=resolution, origin=origin)


def load_grid(image_path, metadata_path=None) -> OccupancyGrid:
    """Load a map from a PGM image plus its YAML metadata.

    If `metadata_path` is omitted, the image path with a .yaml suffix is
    used. Metadata must supply `resolution` and `origin: [x, y, theta]`;
    thresholds and `negate` are optional.
    """
    image_path = Path(image_path)
    if metadata_path is None:
        metadata_path = image_path.with_suffix(".yaml")
    metadata_path = Path(metadata_path)
    if not metadata_path.exists():
        raise MissingMetadata(f"metadata file {metadata_path} not found")
    with open(metadata_path, "r", encoding="utf-8") as f:
        meta = yaml.safe_load(f)
    if not isinstance(meta, dict):
        raise MissingMetadata(f"{metadata_path}: expected a mapping")
    try:
        resolution = float(meta["resolution"])
        origin_list = meta["origin"]
    except KeyError as e:
        raise MissingMetadata(f"{metadata_path}: missing key {e}") from e
    origin = Pose2D(float(origin_list[0]), float(origin_list[1]),
                    float(origin_list[2]) if len(origin_list) > 2 else 0.0)
    image = _read_pgm(image_path)
    return grid_from_image(
        image,
        resolution=resolution,
        origin=origin,
        occupied_thresh=float(meta.get("occupied_thresh", DEFAULT_OCCUPIED_THRESH)),
        free_thresh=float(meta.get("free_thresh", DEFAULT_FREE_THRESH)),
        negate=bool(int(meta.get("negate", 0))),
    )


def grid_to_pgm_bytes(grid: OccupancyGrid) -> bytes:
    """Render the tri-state grid back to binary PGM: occupied 0, free 255,
    unknown 128. Reloading with default thresholds reproduces the same
    tri-state content bit-exactly."""
    img = np.full(grid.cells.shape, 128, dtype=np.uint8)
    img[grid.cells == FREE] = 255
    img[grid.cells == OCCUPIED] = 0
    img = img[::-1]  # back to image orientation, row 0 on top
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode()
    return header + img.tobytes()


def save_grid(grid: OccupancyGrid, image_path, metadata_path=None) -> None:
    image_path = Path(image_path)
    if metadata_path is None:
        metadata_path = image_path.with_suffix(".yaml")
    Path(image_path).write_bytes(grid_to_pgm_bytes(grid))
    meta = {
        "image": image_path.name,
        "resolution": grid.resolution,
        "origin": [grid.origin.x, grid.origin.y, grid.origin.theta],
        "negate": 0,
        "occupied_thresh": DEFAULT_OCCUPIED_THRESH,
        "free_thresh": DEFAULT_FREE_THRESH,
    }
    with open(metadata_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(meta, f, default_flow_style=False, sort_keys=False)
