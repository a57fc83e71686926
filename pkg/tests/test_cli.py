import json
import subprocess
import sys

import pytest

from semantica.demo import data_dir


def run_cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "semantica.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


@pytest.fixture(scope="module")
def built_world(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "world.json"
    proc = run_cli(
        "build",
        "--map", str(data_dir() / "demo_map.pgm"),
        "--events", str(data_dir() / "demo_session.jsonl"),
        "--kb", str(data_dir() / "kb_home.json"),
        "--out", str(out),
    )
    assert proc.returncode == 0, proc.stderr
    return out, proc.stdout


class TestBuild:
    def test_build_summary_and_world(self, built_world):
        out, stdout = built_world
        assert out.exists()
        assert "accepted tags: 17" in stdout
        assert "rejected tags: 1" in stdout
        assert "regions: 4" in stdout
        doc = json.loads(out.read_text())
        assert doc["version"] == 1
        assert len(doc["signatures"]) == 16

    def test_missing_kb_exits_2(self, tmp_path):
        proc = run_cli(
            "build",
            "--map", str(data_dir() / "demo_map.pgm"),
            "--events", str(data_dir() / "demo_session.jsonl"),
            "--kb", str(tmp_path / "nope.json"),
            "--out", str(tmp_path / "w.json"),
        )
        assert proc.returncode == 2
        err = json.loads(proc.stderr)
        assert "no such KB file" in err["message"]

    def test_missing_events_exits_2(self, tmp_path):
        proc = run_cli("build", "--map", str(data_dir() / "demo_map.pgm"),
                       "--out", str(tmp_path / "w.json"))
        assert proc.returncode == 2
        err = json.loads(proc.stderr)
        assert err["error"] == "missing_input"

    def test_byte_identical_rebuild(self, built_world, tmp_path):
        out, _ = built_world
        out2 = tmp_path / "world2.json"
        proc = run_cli(
            "build",
            "--map", str(data_dir() / "demo_map.pgm"),
            "--events", str(data_dir() / "demo_session.jsonl"),
            "--kb", str(data_dir() / "kb_home.json"),
            "--out", str(out2),
        )
        assert proc.returncode == 0
        assert out.read_bytes() == out2.read_bytes()


class TestGroundAndPlan:
    def test_plan_go_near_the_fridge(self, built_world):
        out, _ = built_world
        proc = run_cli("plan", "--world", str(out), "--command", "go near the fridge")
        assert proc.returncode == 0, proc.stderr
        payload = json.loads(proc.stdout)
        assert payload["grounding"]["referent"] == "fridge1"
        steps = payload["plan"]["steps"]
        assert [s["behavior"] for s in steps] == ["Reach", "CrossDoor", "Reach"]

    def test_parse_error_exits_4(self, built_world):
        out, _ = built_world
        proc = run_cli("plan", "--world", str(out), "--command", "go near fridge")
        assert proc.returncode == 4
        err = json.loads(proc.stderr)
        assert err["position"] == 3

    def test_unresolved_exits_3(self, built_world):
        # no chairs tagged and Chair carries no default location
        out, _ = built_world
        proc = run_cli("ground", "--world", str(out), "--command", "go near the chair")
        assert proc.returncode == 3
        payload = json.loads(proc.stdout)
        assert payload["grounding"]["kind"] == "unresolved"

    def test_fallback_area_exits_0(self, built_world):
        out, _ = built_world
        proc = run_cli("plan", "--world", str(out), "--command", "go near the heater")
        assert proc.returncode == 0, proc.stderr
        payload = json.loads(proc.stdout)
        assert payload["grounding"]["kind"] == "fallback_area"
        assert payload["grounding"]["area_concept"] == "LivingRoom"
        assert payload["plan"]["steps"][-1]["node"] == "d_living_room"

    def test_check_command(self, built_world):
        out, _ = built_world
        proc = run_cli("ground", "--world", str(out),
                       "--command", "check whether the tv is on")
        assert proc.returncode == 0
        payload = json.loads(proc.stdout)
        assert payload["answer"] == {"known": True, "value": False}


class TestExport:
    def test_topograph_dot(self, built_world, tmp_path):
        out, _ = built_world
        dot = tmp_path / "topo.dot"
        proc = run_cli("export", "--world", str(out), "--what", "topograph",
                       "--out", str(dot))
        assert proc.returncode == 0
        text = dot.read_text()
        assert text.count("shape=box") == 6
        assert text.count("shape=ellipse") == 4

    def test_cellmap_json(self, built_world, tmp_path):
        out, _ = built_world
        path = tmp_path / "cells.json"
        proc = run_cli("export", "--world", str(out), "--what", "cellmap",
                       "--out", str(path))
        assert proc.returncode == 0
        doc = json.loads(path.read_text())
        assert {r["label"] for r in doc["regions"]} == {
            "corridor", "kitchen", "living_room", "bedroom"}

    def test_overlay_band_count(self, built_world, tmp_path):
        import numpy as np
        out, _ = built_world
        path = tmp_path / "overlay.pgm"
        proc = run_cli("export", "--world", str(out), "--what", "overlay",
                       "--out", str(path))
        assert proc.returncode == 0
        data = path.read_bytes()
        img = np.frombuffer(data.split(b"255\n", 1)[1], dtype=np.uint8)
        bands = set(img.tolist()) - {0, 16, 255}
        assert len(bands) == 4

    def test_byte_stable_exports(self, built_world, tmp_path):
        out, _ = built_world
        a, b = tmp_path / "a.dot", tmp_path / "b.dot"
        run_cli("export", "--world", str(out), "--what", "topograph", "--out", str(a))
        run_cli("export", "--world", str(out), "--what", "topograph", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_export_before_build(self, tmp_path, home_kb):
        # a world without layers: craft by saving a bare document
        from semantica.demo import demo_grid
        from semantica.knowledge import InstanceStore
        from semantica.world import WorldModel, save_world
        bare = tmp_path / "bare.json"
        save_world(WorldModel(kb=home_kb, grid=demo_grid(), store=InstanceStore(home_kb)), bare)
        proc = run_cli("export", "--world", str(bare), "--what", "topograph",
                       "--out", str(tmp_path / "x.dot"))
        assert proc.returncode == 2
        err = json.loads(proc.stderr)
        assert err["error"] == "LayerNotBuilt"
