import json

import numpy as np
import pytest

from semantica.errors import LayerNotBuilt, SchemaViolation
from semantica.world import (
    canonical_json,
    load_world,
    save_world,
    world_from_document,
    world_to_document,
)


class TestCanonicalJson:
    def test_sorted_keys_and_float_format(self):
        doc = {"b": 1.0, "a": 0.123456789123, "c": [1, 2.5, True, None, "x"]}
        text = canonical_json(doc)
        assert text == '{"a":0.123456789,"b":1.0,"c":[1,2.5,true,null,"x"]}'

    def test_idempotent_through_parse(self):
        rng = np.random.default_rng(17)
        values = [float(v) for v in rng.normal(0, 100, 200)] + [1e-17, 123456789.123456]
        text = canonical_json(values)
        reparsed = json.loads(text)
        assert canonical_json(reparsed) == text

    def test_rejects_non_finite(self):
        with pytest.raises(SchemaViolation):
            canonical_json({"x": float("nan")})


class TestWorldRoundTrip:
    def test_save_load_save_byte_identical(self, demo_world, tmp_path):
        p1 = tmp_path / "world.json"
        p2 = tmp_path / "world2.json"
        save_world(demo_world, p1)
        back = load_world(p1)
        save_world(back, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_logical_equality(self, demo_world, tmp_path):
        p = tmp_path / "world.json"
        save_world(demo_world, p)
        back = load_world(p)
        assert np.array_equal(back.grid.cells, demo_world.grid.cells)
        assert back.store.labels() == demo_world.store.labels()
        assert np.array_equal(back.cellmap.cell_index, demo_world.cellmap.cell_index)
        assert back.cellmap.region_labels == demo_world.cellmap.region_labels
        assert back.cellmap.connect == demo_world.cellmap.connect
        assert sorted(back.topo.nodes) == sorted(demo_world.topo.nodes)
        # document forms agree exactly (in-memory floats may carry more
        # precision than the canonical 9 significant digits)
        assert canonical_json(world_to_document(back)) == \
            canonical_json(world_to_document(demo_world))

    def test_grounding_works_after_reload(self, demo_world, demo_lexicon, tmp_path):
        from semantica.demo import HOME_POSE
        from semantica.grounding import ground, parse_command
        from semantica.planner import plan_route
        p = tmp_path / "world.json"
        save_world(demo_world, p)
        back = load_world(p)
        cmd = parse_command("go near the fridge", demo_lexicon)
        res = ground(cmd.reference, back, demo_lexicon, HOME_POSE)
        assert res.referent == "fridge1"
        plan = plan_route(HOME_POSE, res, back)
        assert plan.node_ids()[-1] == "d_kitchen"

    def test_version_checked(self, demo_world):
        doc = world_to_document(demo_world)
        doc["version"] = 99
        with pytest.raises(SchemaViolation):
            world_from_document(doc)

    def test_layer_guards(self, home_kb):
        from semantica.demo import demo_grid
        from semantica.knowledge import InstanceStore
        from semantica.world import WorldModel
        bare = WorldModel(kb=home_kb, grid=demo_grid(), store=InstanceStore(home_kb))
        with pytest.raises(LayerNotBuilt):
            bare.require_cellmap()
        with pytest.raises(LayerNotBuilt):
            bare.require_topo()
