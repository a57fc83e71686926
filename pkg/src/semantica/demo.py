"""The shipped demo home: map, tagging session, lexicon, command corpus.

A 10 x 8 m flat: a corridor along the south side and three rooms
(kitchen, living room, bedroom) behind three doors. Three windows sit
in the wall between corridor and rooms, one in the south facade. The
demo session drives the robot down the corridor and through each door,
tagging 12 objects/doors (the fridge twice, to exercise fusion), one
rejected object, and 4 areas.

Everything is generated deterministically from a fixed seed; the files
under `semantica/data/` are the frozen output of `write_demo_data`.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .acquisition import OdomRecord, SessionRecord, TagEvent, record_to_json
from .geometry import Pose2D
from .grid import FREE, OCCUPIED, OccupancyGrid, save_grid
from .knowledge import load_kb
from .pipeline import BuildConfig, build_world
from .world import WorldModel

RESOLUTION = 0.05
WIDTH_M, HEIGHT_M = 10.0, 8.0

WALL = 0.10  # wall thickness, m

# interior wall between corridor (south) and rooms (north)
CORRIDOR_TOP = 2.90
ROOMS_BOTTOM = 3.00
DOOR_GAPS = {"door1": (1.30, 2.20), "door2": (4.55, 5.45), "door3": (7.80, 8.70)}
ROOM_SPLITS = ((3.45, 3.55), (6.45, 6.55))  # vertical walls above the corridor

SEED = 20240817

# label, concept, true pose, dims (h, w, l), extra properties
DEMO_OBJECTS = [
    ("door1", "Door", Pose2D(1.75, 2.95, math.pi / 2), (2.0, 0.9, 0.3), {}),
    ("door2", "Door", Pose2D(5.00, 2.95, math.pi / 2), (2.0, 0.9, 0.3), {}),
    ("door3", "Door", Pose2D(8.25, 2.95, math.pi / 2), (2.0, 0.9, 0.3), {}),
    ("window1", "Window", Pose2D(2.70, 2.95, -math.pi / 2), (1.2, 0.8, 0.3), {"open": False}),
    ("window2", "Window", Pose2D(4.00, 2.95, -math.pi / 2), (1.2, 0.8, 0.3), {"open": False}),
    ("window3", "Window", Pose2D(6.00, 2.95, -math.pi / 2), (1.2, 0.8, 0.3), {"open": False}),
    ("window4", "Window", Pose2D(7.80, 0.05, math.pi / 2), (1.2, 0.8, 0.3), {"open": True}),
    ("fridge1", "Fridge", Pose2D(0.55, 7.45, 0.0), (1.8, 0.7, 0.7),
     {"open": False, "color": "white"}),
    ("table1", "Table", Pose2D(5.00, 5.50, 0.0), (0.75, 1.4, 0.8), {}),
    ("couch1", "Couch", Pose2D(5.00, 7.35, math.pi / 2), (0.85, 2.0, 0.9), {}),
    ("tv1", "Tv", Pose2D(6.20, 5.50, math.pi), (0.6, 1.0, 0.2), {"on": False}),
    ("bed1", "Bed", Pose2D(7.70, 6.80, 0.0), (0.55, 1.6, 2.0), {}),
]

DEMO_AREAS = [
    ("corridor", "Corridor", (1.20, 1.20)),
    ("kitchen", "Kitchen", (1.00, 4.50)),
    ("living_room", "LivingRoom", (4.50, 5.00)),
    ("bedroom", "Bedroom", (8.80, 5.00)),
]

HOME_POSE = Pose2D(0.70, 1.50, 0.0)  # default robot pose, corridor west end


def demo_grid() -> OccupancyGrid:
    h = round(HEIGHT_M / RESOLUTION)
    w = round(WIDTH_M / RESOLUTION)
    cells = np.full((h, w), FREE, dtype=np.uint8)
    ys = (np.arange(h)[:, None] + 0.5) * RESOLUTION
    xs = (np.arange(w)[None, :] + 0.5) * RESOLUTION

    def fill(x0, x1, y0, y1):
        cells[(xs >= x0) & (xs <= x1) & (ys >= y0) & (ys <= y1)] = OCCUPIED

    # facade
    fill(0.0, WALL, 0.0, HEIGHT_M)
    fill(WIDTH_M - WALL, WIDTH_M, 0.0, HEIGHT_M)
    fill(0.0, WIDTH_M, 0.0, WALL)
    fill(0.0, WIDTH_M, HEIGHT_M - WALL, HEIGHT_M)
    # corridor / rooms wall with door gaps
    gaps = sorted(DOOR_GAPS.values())
    x = 0.0
    for gx0, gx1 in gaps + [(WIDTH_M, WIDTH_M)]:
        fill(x, gx0, CORRIDOR_TOP, ROOMS_BOTTOM)
        x = gx1
    # room separators
    for sx0, sx1 in ROOM_SPLITS:
        fill(sx0, sx1, CORRIDOR_TOP, HEIGHT_M)
    return OccupancyGrid(cells=cells, resolution=RESOLUTION, origin=Pose2D(0, 0, 0))


# waypoints of the acquisition run and what gets tagged at each
_RUN = [
    (Pose2D(0.70, 1.50, 0.0), ["area:corridor"]),
    (Pose2D(1.75, 1.80, math.pi / 2), ["door1"]),
    (Pose2D(1.75, 3.60, math.pi / 2), ["area:kitchen", "window1"]),
    (Pose2D(1.00, 6.30, math.pi / 2), ["fridge1"]),
    (Pose2D(1.60, 6.00, math.pi), ["fridge1"]),  # repeated tag, fuses
    (Pose2D(1.75, 2.20, -math.pi / 2), []),
    (Pose2D(3.40, 1.40, 0.0), ["window2", "reject:vase1"]),
    (Pose2D(5.00, 1.80, math.pi / 2), ["door2"]),
    (Pose2D(5.00, 4.20, math.pi / 2), ["area:living_room", "table1", "tv1"]),
    (Pose2D(4.60, 6.30, math.pi / 2), ["couch1"]),
    (Pose2D(5.00, 2.30, -math.pi / 2), []),
    (Pose2D(6.20, 1.30, 0.0), ["window3", "window4"]),
    (Pose2D(8.25, 1.80, math.pi / 2), ["door3"]),
    (Pose2D(8.25, 3.80, math.pi / 2), ["area:bedroom", "bed1"]),
    (Pose2D(8.00, 5.50, math.pi / 2), []),
]

ODOM_SIGMA = (0.015, 0.015, 0.008)
OBS_SIGMA = (0.02, 0.02, 0.015)
DIMS_SIGMA = 0.02  # fractional


def demo_session(seed: int = SEED) -> list[SessionRecord]:
    rng = np.random.default_rng(seed)
    objects = {label: (concept, pose, dims, props)
               for label, concept, pose, dims, props in DEMO_OBJECTS}
    areas = {label: (concept, Pose2D(x, y, 0.0)) for label, concept, (x, y) in DEMO_AREAS}

    records: list[SessionRecord] = []
    seq = 0
    reading = _RUN[0][0]  # odometry is exact at the anchor
    true_prev = _RUN[0][0]

    def noisy_rel(true_cur: Pose2D) -> Pose2D:
        rel = true_cur.relative_to(true_prev)
        return Pose2D(rel.x + rng.normal(0, ODOM_SIGMA[0]),
                      rel.y + rng.normal(0, ODOM_SIGMA[1]),
                      rel.theta + rng.normal(0, ODOM_SIGMA[2]))

    for k, (true_pose, tags) in enumerate(_RUN):
        if k > 0:
            reading = reading.compose(noisy_rel(true_pose))
            true_prev = true_pose
        seq += 1
        records.append(OdomRecord(seq=seq, pose=reading))
        for tag in tags:
            seq += 1
            if tag.startswith("area:"):
                label = tag.split(":", 1)[1]
                concept, target = areas[label]
                rel = target.relative_to(true_pose)
                records.append(TagEvent(seq=seq, kind="area", label=label, concept=concept,
                                        robot_pose=reading, relative_pose=rel))
                continue
            if tag.startswith("reject:"):
                label = tag.split(":", 1)[1]
                records.append(TagEvent(
                    seq=seq, kind="object", label=label, concept="Table",
                    robot_pose=reading,
                    relative_pose=Pose2D(0.8, 0.2, 0.0),
                    dims=(0.2, 0.2, 0.2)))  # nowhere near a table's nominal dims
                continue
            label = tag
            concept, target, dims, props = objects[label]
            rel = target.relative_to(true_pose)
            rel = Pose2D(rel.x + rng.normal(0, OBS_SIGMA[0]),
                         rel.y + rng.normal(0, OBS_SIGMA[1]),
                         rel.theta + rng.normal(0, OBS_SIGMA[2]))
            measured = tuple(float(d * (1.0 + rng.normal(0, DIMS_SIGMA))) for d in dims)
            kind = "door" if concept == "Door" else "object"
            records.append(TagEvent(seq=seq, kind=kind, label=label, concept=concept,
                                    robot_pose=reading, relative_pose=rel,
                                    dims=measured, properties=dict(props)))
    return records


DEMO_LEXICON = {
    "fridge": "Fridge",
    "refrigerator": "Fridge",
    "mini fridge": "MiniFridge",
    "oven": "Oven",
    "table": "Table",
    "chair": "Chair",
    "couch": "Couch",
    "sofa": "Couch",
    "bed": "Bed",
    "tv": "Tv",
    "tv set": "Tv",
    "television": "Tv",
    "heater": "Heater",
    "bathtub": "Bathtub",
    "window": "Window",
    "door": "Door",
    "kitchen": "Kitchen",
    "living room": "LivingRoom",
    "bedroom": "Bedroom",
    "bathroom": "Bathroom",
    "corridor": "Corridor",
    "hall": "Corridor",
    "office": "Office",
    "room": "Room",
}

# 25 annotated utterances over the demo world; robot at HOME_POSE unless given
DEMO_CORPUS = [
    {"command": "go near the fridge", "expect": {"kind": "referent", "label": "fridge1"}},
    {"command": "go to the kitchen", "expect": {"kind": "referent", "label": "kitchen"}},
    {"command": "go near the table", "expect": {"kind": "referent", "label": "table1"}},
    {"command": "go to the couch", "expect": {"kind": "referent", "label": "couch1"}},
    {"command": "go near the bed", "expect": {"kind": "referent", "label": "bed1"}},
    {"command": "go near the tv", "expect": {"kind": "referent", "label": "tv1"}},
    {"command": "check whether in the corridor the third window on the left is open",
     "expect": {"kind": "referent", "label": "window3"}, "answer": False},
    {"command": "go near the first window on the left in the corridor",
     "expect": {"kind": "referent", "label": "window1"}},
    {"command": "go to the second window on the left in the corridor",
     "expect": {"kind": "referent", "label": "window2"}},
    {"command": "go near the first window on the right in the corridor",
     "expect": {"kind": "referent", "label": "window4"}},
    {"command": "move to the bedroom", "expect": {"kind": "referent", "label": "bedroom"}},
    {"command": "go to the living room", "expect": {"kind": "referent", "label": "living_room"}},
    {"command": "go near the door in the kitchen", "expect": {"kind": "referent", "label": "door1"}},
    {"command": "go near the door in the bedroom", "expect": {"kind": "referent", "label": "door3"}},
    {"command": "check whether in the kitchen the fridge is open",
     "expect": {"kind": "referent", "label": "fridge1"}, "answer": False},
    {"command": "check whether the tv is on",
     "expect": {"kind": "referent", "label": "tv1"}, "answer": False},
    {"command": "go near the tv set", "expect": {"kind": "referent", "label": "tv1"}},
    {"command": "go near the second window in the corridor",
     "expect": {"kind": "referent", "label": "window2"}},
    {"command": "go to the first door in the corridor",
     "expect": {"kind": "referent", "label": "door1"}},
    {"command": "go to the third door in the corridor",
     "expect": {"kind": "referent", "label": "door3"}},
    {"command": "go near the couch in the living room",
     "expect": {"kind": "referent", "label": "couch1"}},
    {"command": "check whether the window in the kitchen is open",
     "expect": {"kind": "referent", "label": "window1"}, "answer": False},
    {"command": "go near the window in the kitchen",
     "expect": {"kind": "referent", "label": "window1"}},
    {"command": "go to the second window on the left",
     "expect": {"kind": "referent", "label": "window2"}},
    {"command": "go near the heater",
     "expect": {"kind": "fallback_area", "area_concept": "LivingRoom"}},
]


def data_dir() -> Path:
    return Path(__file__).parent / "data"


def build_demo_world(config: BuildConfig | None = None):
    """Demo world built fully in memory (no files involved)."""
    kb = load_kb(data_dir() / "kb_home.json")
    return build_world(demo_grid(), demo_session(), kb, config,
                       kb_ref="kb_home.json")


def write_demo_data(out_dir=None) -> dict[str, Path]:
    """Write the frozen demo fixtures; returns the paths."""
    out = Path(out_dir) if out_dir else data_dir()
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    grid = demo_grid()
    paths["map"] = out / "demo_map.pgm"
    save_grid(grid, paths["map"], out / "demo_map.yaml")
    paths["metadata"] = out / "demo_map.yaml"

    paths["session"] = out / "demo_session.jsonl"
    with open(paths["session"], "w", encoding="utf-8") as f:
        for record in demo_session():
            f.write(json.dumps(record_to_json(record), sort_keys=True) + "\n")

    paths["lexicon"] = out / "lexicon.json"
    with open(paths["lexicon"], "w", encoding="utf-8") as f:
        json.dump(DEMO_LEXICON, f, indent=2, sort_keys=True)
        f.write("\n")

    paths["corpus"] = out / "grounding_corpus.json"
    with open(paths["corpus"], "w", encoding="utf-8") as f:
        json.dump({"robot_pose": [HOME_POSE.x, HOME_POSE.y, HOME_POSE.theta],
                   "utterances": DEMO_CORPUS}, f, indent=2)
        f.write("\n")
    return paths
