import numpy as np
import pytest

from semantica.errors import BadImageFormat, MissingMetadata, NonPositiveResolution, OutOfBounds
from semantica.geometry import Pose2D
from semantica.grid import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    OccupancyGrid,
    grid_from_image,
    grid_to_pgm_bytes,
    load_grid,
    save_grid,
)


def write_map(tmp_path, image: np.ndarray, resolution=0.05, origin=(0.0, 0.0, 0.0), **meta):
    h, w = image.shape
    pgm = tmp_path / "map.pgm"
    pgm.write_bytes(f"P5\n{w} {h}\n255\n".encode() + image.astype(np.uint8).tobytes())
    lines = [f"image: map.pgm", f"resolution: {resolution}",
             f"origin: [{origin[0]}, {origin[1]}, {origin[2]}]"]
    for k, v in meta.items():
        lines.append(f"{k}: {v}")
    (tmp_path / "map.yaml").write_text("\n".join(lines) + "\n")
    return pgm


class TestLoading:
    def test_physical_extent(self, tmp_path):
        img = np.full((200, 200), 255, dtype=np.uint8)
        pgm = write_map(tmp_path, img, resolution=0.05)
        grid = load_grid(pgm)
        xmin, ymin, xmax, ymax = grid.extent
        assert (xmax - xmin, ymax - ymin) == (pytest.approx(10.0), pytest.approx(10.0))

    def test_threshold_classification(self, tmp_path):
        img = np.array([[0, 254, 128]], dtype=np.uint8)
        pgm = write_map(tmp_path, img)
        grid = load_grid(pgm)
        # defaults: occ 0.65, free 0.196; (255-p)/255 against them
        assert grid.cells[0, 0] == OCCUPIED
        assert grid.cells[0, 1] == FREE
        assert (255 - 128) / 255 == pytest.approx(0.498039, abs=1e-6)
        assert grid.cells[0, 2] == UNKNOWN

    def test_image_row0_is_top(self, tmp_path):
        img = np.full((4, 3), 255, dtype=np.uint8)
        img[0, :] = 0  # top row of the image
        pgm = write_map(tmp_path, img)
        grid = load_grid(pgm)
        # grid row 0 is the world bottom, so the occupied band is the last row
        assert np.all(grid.cells[-1] == OCCUPIED)
        assert np.all(grid.cells[0] == FREE)

    def test_negate(self, tmp_path):
        img = np.array([[255, 0]], dtype=np.uint8)
        pgm = write_map(tmp_path, img, negate=1)
        grid = load_grid(pgm)
        assert grid.cells[0, 0] == OCCUPIED
        assert grid.cells[0, 1] == FREE

    def test_ascii_pgm(self, tmp_path):
        pgm = tmp_path / "map.pgm"
        pgm.write_text("P2\n# a comment\n2 2\n255\n0 255\n255 128\n")
        (tmp_path / "map.yaml").write_text("resolution: 0.1\norigin: [0, 0, 0]\n")
        grid = load_grid(pgm)
        assert grid.cells[1, 0] == OCCUPIED  # image top-left
        assert grid.cells[0, 1] == UNKNOWN

    def test_missing_metadata(self, tmp_path):
        pgm = tmp_path / "map.pgm"
        pgm.write_bytes(b"P5\n1 1\n255\n\x00")
        with pytest.raises(MissingMetadata):
            load_grid(pgm)

    def test_bad_magic(self, tmp_path):
        pgm = write_map(tmp_path, np.zeros((1, 1), dtype=np.uint8))
        pgm.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
        with pytest.raises(BadImageFormat):
            load_grid(pgm)

    def test_nonpositive_resolution(self, tmp_path):
        pgm = write_map(tmp_path, np.zeros((1, 1), dtype=np.uint8), resolution=0)
        with pytest.raises(NonPositiveResolution):
            load_grid(pgm)

    def test_deterministic(self, tmp_path):
        img = (np.arange(64, dtype=np.uint8) * 4).reshape(8, 8)
        pgm = write_map(tmp_path, img)
        a = load_grid(pgm)
        b = load_grid(pgm)
        assert np.array_equal(a.cells, b.cells)


class TestTransforms:
    def grid(self, origin=(0.0, 0.0, 0.0)):
        return OccupancyGrid(cells=np.zeros((200, 200), dtype=np.uint8),
                             resolution=0.05, origin=Pose2D(*origin))

    def test_round_trip_to_cell_center(self):
        g = self.grid()
        i, j = g.world_to_cell(0.025, 0.025)
        assert (i, j) == (0, 0)
        assert g.cell_to_world(i, j) == (pytest.approx(0.025), pytest.approx(0.025))

    def test_out_of_bounds(self):
        g = self.grid()
        with pytest.raises(OutOfBounds):
            g.world_to_cell(-1.0, -1.0)

    def test_negative_origin(self):
        g = self.grid(origin=(-5.0, -5.0, 0.0))
        assert g.world_to_cell(0.0, 0.0) == (100, 100)

    def test_distinct_cells_distinct_centers(self):
        g = self.grid()
        centers = {g.cell_to_world(i, j) for i in range(0, 200, 17) for j in range(0, 200, 17)}
        assert len(centers) == len(range(0, 200, 17)) ** 2

    def test_any_inbounds_point_maps_to_its_center(self):
        g = self.grid(origin=(-1.0, 2.0, 0.0))
        rng = np.random.default_rng(7)
        for _ in range(50):
            x = rng.uniform(-1.0, -1.0 + 10.0)
            y = rng.uniform(2.0, 2.0 + 10.0)
            i, j = g.world_to_cell(x, y)
            cx, cy = g.cell_to_world(i, j)
            assert abs(cx - x) <= 0.025 + 1e-12
            assert abs(cy - y) <= 0.025 + 1e-12


class TestExport:
    def test_tri_state_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        cells = rng.integers(0, 3, size=(31, 17)).astype(np.uint8)
        grid = OccupancyGrid(cells=cells, resolution=0.05, origin=Pose2D(0, 0, 0))
        out_pgm = tmp_path / "out.pgm"
        save_grid(grid, out_pgm)
        back = load_grid(out_pgm)
        assert np.array_equal(back.cells, grid.cells)
        # byte-stable export
        assert grid_to_pgm_bytes(back) == grid_to_pgm_bytes(grid)
