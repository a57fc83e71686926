import math

import numpy as np
import pytest

from maputil import blank_grid, draw_wall, flood_fill_components, to_grid

from semantica.cellmap import (
    CellMapConfig,
    add_objects,
    build_connect,
    cell_polygon,
    cell_runs,
    cellmap_to_json,
    compute_cells,
    label_areas,
    overlay_pgm_bytes,
)
from semantica.errors import AreaTagInOccupiedSpace, NoFreeSpace, ObjectOutOfMap
from semantica.geometry import Pose2D
from semantica.grid import FREE, OCCUPIED
from semantica.hough import WallLine, detect_walls
from semantica.knowledge import InstanceSignature

RES = 0.05


def line(rho, theta, support=100, extent=((0, 0), (0, 0))):
    return WallLine(rho=rho, theta=theta, support=support, extent=extent)


def two_room_map(gap=None):
    """5x5 m map, full-height vertical wall at x=2.5, optional door gap in s=y."""
    cells = blank_grid(5.0, 5.0, RES)
    if gap is None:
        draw_wall(cells, RES, 2.525, 0.0, 0.0, 5.0)
    else:
        draw_wall(cells, RES, 2.525, 0.0, 0.0, gap[0])
        draw_wall(cells, RES, 2.525, 0.0, gap[1], 5.0)
    return to_grid(cells, RES)


class TestComputeCells:
    def test_empty_map_single_cell(self):
        grid = to_grid(blank_grid())
        cm = compute_cells(grid, [])
        assert cm.num_cells == 1
        assert np.all(cm.cell_index[grid.free_mask()] == 0)

    def test_no_free_space(self):
        cells = blank_grid()
        cells[:] = OCCUPIED
        with pytest.raises(NoFreeSpace):
            compute_cells(to_grid(cells), [])

    def test_bisecting_wall_two_cells(self):
        grid = two_room_map()
        cm = compute_cells(grid, detect_walls(grid))
        assert cm.num_cells == 2

    def test_wall_with_gap_stays_two_cells_connected(self):
        grid = two_room_map(gap=(2.0, 3.0))  # 1 m doorway
        cm = compute_cells(grid, detect_walls(grid))
        assert cm.num_cells == 2
        connect = build_connect(cm)
        assert (0, 1) in connect
        # free space is a single component through the gap
        oracle = flood_fill_components(grid.free_mask())
        assert oracle.max() == 0

    def test_phantom_line_heals_into_one_cell(self):
        # a line with no wall support anywhere must not split the map
        grid = to_grid(blank_grid())
        cm = compute_cells(grid, [line(2.5, 0.0)])
        assert cm.num_cells == 1

    def test_corridor_cells_wider_than_room_cells(self):
        # horizontal wall at y=3 with vertical walls only above it:
        # the corridor below stays one wide cell, rooms above split
        cells = blank_grid(10.0, 8.0, RES)
        draw_wall(cells, RES, 3.025, math.pi / 2, -10.0, 0.0)
        draw_wall(cells, RES, 5.025, 0.0, 3.0, 8.0)
        grid = to_grid(cells, RES)
        cm = compute_cells(grid, detect_walls(grid))
        assert cm.num_cells == 3
        corridor = cm.cell_of_world(5.0, 1.5)
        room_a = cm.cell_of_world(2.5, 5.5)
        room_b = cm.cell_of_world(7.5, 5.5)
        assert len({corridor, room_a, room_b}) == 3
        assert cm.cell_area(corridor) > cm.cell_area(room_a)
        assert cm.cell_area(corridor) > cm.cell_area(room_b)

    def test_every_free_cell_in_exactly_one_cell(self):
        grid = two_room_map(gap=(2.0, 3.0))
        cm = compute_cells(grid, detect_walls(grid))
        free = grid.free_mask()
        assert np.all(cm.cell_index[free] >= 0)
        assert np.all(cm.cell_index[~free] == -1)
        total = sum(cm.cell_area(c.id) for c in cm.cells)
        assert total == pytest.approx(free.sum() * RES ** 2)

    def test_deterministic(self):
        grid = two_room_map(gap=(2.0, 3.0))
        walls = detect_walls(grid)
        a = compute_cells(grid, walls)
        b = compute_cells(grid, walls)
        assert np.array_equal(a.cell_index, b.cell_index)


class TestConnect:
    def test_phantom_split_cells_connected(self):
        # hand-made split along an unsupported line: cells stay connected
        grid = to_grid(blank_grid())
        cm = compute_cells(grid, [])
        # force a second cell by splitting manually via an object later;
        # here: unsupported line via direct construction
        cm2 = compute_cells(grid, [line(2.5, 0.0)])
        assert cm2.num_cells == 1  # healed, nothing to connect

    def test_supported_wall_blocks_connect(self):
        grid = two_room_map()  # no gap
        cm = compute_cells(grid, detect_walls(grid))
        connect = build_connect(cm)
        assert connect == set()

    def test_connect_symmetric_irreflexive(self):
        grid = two_room_map(gap=(2.0, 3.0))
        cm = compute_cells(grid, detect_walls(grid))
        for a, b in build_connect(cm):
            assert a < b


class TestAddObjects:
    def test_small_cell_gains_label_without_split(self):
        cells = blank_grid(1.0, 1.0, RES)
        grid = to_grid(cells, RES)
        cm = compute_cells(grid, [])
        sig = InstanceSignature(label="fridge1", concept="Fridge",
                                position=Pose2D(0.5, 0.5, 0.0), dims=(1.8, 0.7, 0.7))
        add_objects(cm, [sig])
        assert cm.num_cells == 1
        assert "fridge1" in cm.cells[0].labels

    def test_large_cell_splits_tightly(self):
        grid = to_grid(blank_grid(5.0, 5.0, RES))
        cm = compute_cells(grid, [])
        sig = InstanceSignature(label="box1", concept="Table",
                                position=Pose2D(2.5, 2.5, 0.0), dims=(0.75, 0.6, 0.7))
        add_objects(cm, [sig])
        assert cm.num_cells > 1
        labeled = cm.cells_with_label("box1")
        assert len(labeled) == 1
        area = cm.cell_area(labeled[0])
        # snug: labeled sub-cell is close to the footprint area
        assert area <= 4 * 0.6 * 0.7

    def test_footprint_straddling_two_cells_labels_both(self):
        grid = two_room_map(gap=(2.0, 3.0))
        cm = compute_cells(grid, detect_walls(grid))
        sig = InstanceSignature(label="mat1", concept="Table",
                                position=Pose2D(2.525, 2.5, 0.0), dims=(0.02, 0.8, 0.8))
        add_objects(cm, [sig])
        labeled = cm.cells_with_label("mat1")
        regions = {tuple(sorted(cm.cell_cells(c)[:, 1]))[0] < 50 for c in labeled}
        assert len(labeled) >= 2

    def test_object_out_of_map(self):
        grid = to_grid(blank_grid(2.0, 2.0, RES))
        cm = compute_cells(grid, [])
        sig = InstanceSignature(label="ghost1", concept="Table",
                                position=Pose2D(10.0, 10.0, 0.0), dims=(1.0, 0.5, 0.5))
        with pytest.raises(ObjectOutOfMap):
            add_objects(cm, [sig])


def door_sig(label, x, y, theta):
    return InstanceSignature(label=label, concept="Door",
                             position=Pose2D(x, y, theta), dims=(2.0, 0.9, 0.3))


class TestLabelAreas:
    def test_single_region_auto_label(self):
        grid = to_grid(blank_grid())
        cm = compute_cells(grid, [])
        build_connect(cm)
        label_areas(cm, [], [])
        assert cm.region_labels == ["room1"]
        assert cm.cells[0].labels == {"room1"}

    def test_two_rooms_sealed_by_door(self):
        grid = two_room_map(gap=(2.05, 2.95))  # 0.9 m doorway centered at y=2.5
        cm = compute_cells(grid, detect_walls(grid))
        add_objects(cm, [door_sig("door1", 2.525, 2.5, 0.0)])
        build_connect(cm)
        tags = [("kitchen", Pose2D(1.0, 1.0, 0)), ("living_room", Pose2D(4.0, 4.0, 0))]
        label_areas(cm, [door_sig("door1", 2.525, 2.5, 0.0)], tags)
        assert sorted(cm.region_labels) == ["kitchen", "living_room"]
        assert cm.area_label_of_cell(cm.cell_of_world(1.0, 1.0)) == "kitchen"
        assert cm.area_label_of_cell(cm.cell_of_world(4.0, 4.0)) == "living_room"
        # every cell carries exactly its area label plus any object labels
        for cell in cm.cells:
            areas = cell.labels & set(cm.region_labels)
            assert len(areas) == 1

    def test_agrees_with_grid_flood_fill_oracle(self):
        grid = two_room_map(gap=(2.05, 2.95))
        cm = compute_cells(grid, detect_walls(grid))
        door = door_sig("door1", 2.525, 2.5, 0.0)
        add_objects(cm, [door])
        build_connect(cm)
        label_areas(cm, [door], [])
        # oracle: remove dilated door footprint from free space, flood fill
        free = grid.free_mask().copy()
        xs, ys = grid.cell_centers()
        from semantica.geometry import footprint_of
        fp = footprint_of(door.position, door.dims)
        free[fp.contains(xs, ys, margin=RES)] = False
        oracle = flood_fill_components(free)
        assert oracle.max() + 1 == len(cm.region_labels)
        # interior agreement (cells not in the dilated footprint band)
        h, w = free.shape
        mapping = {}
        for i in range(h):
            for j in range(w):
                if not free[i, j]:
                    continue
                cid = cm.cell_index[i, j]
                if cid < 0:
                    continue
                region = int(cm.region_of[cid])
                comp = int(oracle[i, j])
                mapping.setdefault(comp, region)
                assert mapping[comp] == region

    def test_unsealing_restores_free_space_components(self):
        grid = two_room_map(gap=(2.05, 2.95))
        cm = compute_cells(grid, detect_walls(grid))
        door = door_sig("door1", 2.525, 2.5, 0.0)
        add_objects(cm, [door])
        build_connect(cm)
        label_areas(cm, [door], [])
        assert len(cm.region_labels) == 2
        # dropping the seals re-merges regions to free-space components
        import networkx  # noqa: F401  (not used; keep oracle below dependency-free)
        parent = {c.id: c.id for c in cm.cells}

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b in cm.connect:
            parent[find(a)] = find(b)
        components = {find(c.id) for c in cm.cells}
        assert len(components) == flood_fill_components(grid.free_mask()).max() + 1

    def test_area_tag_in_occupied_space(self):
        grid = two_room_map()
        cm = compute_cells(grid, detect_walls(grid))
        build_connect(cm)
        with pytest.raises(AreaTagInOccupiedSpace):
            label_areas(cm, [], [("vault", Pose2D(2.525, 2.5, 0))])

    def test_untagged_regions_get_room_numbers(self):
        grid = two_room_map()  # fully separated rooms, no door, no tags
        cm = compute_cells(grid, detect_walls(grid))
        build_connect(cm)
        label_areas(cm, [], [])
        assert cm.region_labels == ["room1", "room2"]


class TestExports:
    def test_runs_reconstruct_cells(self):
        grid = two_room_map(gap=(2.0, 3.0))
        cm = compute_cells(grid, detect_walls(grid))
        rebuilt = np.full(cm.cell_index.shape, -1, dtype=np.int32)
        for cell in cm.cells:
            for row, c0, c1 in cell_runs(cm, cell.id):
                rebuilt[row, c0:c1] = cell.id
        assert np.array_equal(rebuilt, cm.cell_index)

    def test_polygon_of_rectangular_cell(self):
        grid = to_grid(blank_grid(2.0, 1.0, RES))
        cm = compute_cells(grid, [])
        poly = cell_polygon(cm, 0)
        assert len(poly) == 4
        xs = sorted({round(p[0], 6) for p in poly})
        ys = sorted({round(p[1], 6) for p in poly})
        assert xs == [0.0, 2.0]
        assert ys == [0.0, 1.0]

    def test_json_and_overlay(self):
        grid = two_room_map(gap=(2.05, 2.95))
        cm = compute_cells(grid, detect_walls(grid))
        door = door_sig("door1", 2.525, 2.5, 0.0)
        add_objects(cm, [door])
        build_connect(cm)
        label_areas(cm, [door], [("kitchen", Pose2D(1.0, 1.0, 0))])
        doc = cellmap_to_json(cm)
        assert {c["id"] for c in doc["cells"]} == {c.id for c in cm.cells}
        data = overlay_pgm_bytes(cm)
        assert data.startswith(b"P5")
        # one distinct gray band per region
        img = np.frombuffer(data.split(b"255\n", 1)[1], dtype=np.uint8)
        free_values = set(img.tolist()) - {0, 16, 255}
        assert len(free_values) == len(cm.region_labels)
