"""HTTP JSON API over a world model or a live acquisition session.

Endpoints:
    GET  /world             full world document
    GET  /kb                the conceptual KB document (for tag prefills)
    GET  /map               the occupancy grid document (available pre-finalize)
    GET  /cellmap           cell map export
    GET  /topograph         topological graph export
    GET  /session/log       the session's event log (JSON Lines records)
    POST /session/tag       one tag or odometry record; accept/reject reply
    POST /session/finalize  optimize + build all layers, swap in the world
    POST /command           utterance -> grounding (+ plan or answer)

Mutations are serialized under one lock; finalize builds a fresh world
and swaps the reference, so concurrent readers always see a consistent
snapshot (the old world or the new one, never a mix).
"""
from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from . import demo as demo_mod
from .acquisition import OdomRecord, TagEvent, ingest_session, record_from_json, record_to_json, validate_tag
from .cellmap import cellmap_to_json
from .errors import (
    LabelConceptConflict,
    LayerNotBuilt,
    NonMonotoneSeq,
    NoRoute,
    ParseError,
    RobotOutsideMap,
    SchemaViolation,
    SemanticaError,
)
from .geometry import Pose2D
from .grid import load_grid
from .grounding import GOTO, REFERENT, Lexicon, ground, parse_command
from .knowledge import load_kb
from .pipeline import BuildConfig, build_world
from .planner import answer_check, plan_route
from .topograph import to_dot
from .world import WorldModel, canonical_json, load_world, world_to_document


class Service:
    """Shared state behind the HTTP handlers."""

    def __init__(self, world: Optional[WorldModel] = None, kb=None, grid=None,
                 lexicon: Optional[Lexicon] = None, config: Optional[BuildConfig] = None):
        if world is None and (kb is None or grid is None):
            raise SchemaViolation("serve needs either a world or a KB plus a map")
        self.lock = threading.Lock()
        self.world = world
        self.kb = kb if kb is not None else world.kb
        self.grid = grid if grid is not None else world.grid
        self.lexicon = lexicon or Lexicon(demo_mod.DEMO_LEXICON)
        self.config = config or BuildConfig()
        self.records: list = []
        self.accepted_tags = 0

    # -- session --

    def add_record(self, doc: dict) -> tuple[int, dict]:
        try:
            record = record_from_json({"v": 1, **doc} if "v" not in doc else doc)
        except SchemaViolation as e:
            return 400, {"error": "SchemaViolation", "message": str(e)}
        with self.lock:
            if self.records and record.seq <= self.records[-1].seq:
                return 400, {"error": "NonMonotoneSeq",
                             "message": f"seq {record.seq} not after {self.records[-1].seq}"}
            if isinstance(record, OdomRecord):
                self.records.append(record)
                return 200, {"status": "recorded", "seq": record.seq}
            event: TagEvent = record
            try:
                self.kb.require(event.concept)
            except SemanticaError as e:
                return 400, {"error": "UnknownConcept", "message": str(e)}
            for prior in self.records:
                if isinstance(prior, TagEvent) and prior.label == event.label \
                        and prior.kind != "area" and event.kind != "area" \
                        and prior.concept != event.concept:
                    return 422, {"error": "DuplicateLabel",
                                 "message": f"label {event.label!r} already tagged as {prior.concept}"}
            verdict = validate_tag(event, self.kb, self.config.acquisition.tolerance)
            if not verdict.accepted:
                self.records.append(record)
                return 422, {"status": "rejected", "reason": verdict.reason, "seq": event.seq}
            self.records.append(record)
            self.accepted_tags += 1
            reply = {"status": "accepted", "seq": event.seq}
            if verdict.warning:
                reply["warning"] = verdict.warning
            return 200, reply

    def finalize(self) -> tuple[int, dict]:
        with self.lock:
            if self.accepted_tags == 0:
                return 409, {"error": "EmptySession",
                             "message": "no accepted tags to finalize"}
            try:
                world, _ = build_world(self.grid, list(self.records), self.kb, self.config)
            except SemanticaError as e:
                return 409, {"error": type(e).__name__, "message": str(e)}
            self.world = world
            return 200, {"status": "finalized", **world.session_meta}

    def log_records(self) -> list[dict]:
        with self.lock:
            return [record_to_json(r) for r in self.records]

    # -- reads --

    def world_doc(self) -> tuple[int, dict]:
        world = self.world
        if world is None:
            return 409, {"error": "LayerNotBuilt", "message": "session not finalized"}
        return 200, world_to_document(world)

    def kb_doc(self) -> tuple[int, dict]:
        from .knowledge import kb_to_document
        return 200, kb_to_document(self.kb)

    def map_doc(self) -> tuple[int, dict]:
        from .world import _grid_doc
        return 200, _grid_doc(self.grid)

    def cellmap_doc(self) -> tuple[int, dict]:
        world = self.world
        if world is None or world.cellmap is None:
            return 409, {"error": "LayerNotBuilt", "message": "cell map not built"}
        return 200, cellmap_to_json(world.cellmap)

    def topograph_doc(self) -> tuple[int, dict]:
        world = self.world
        if world is None or world.topo is None:
            return 409, {"error": "LayerNotBuilt", "message": "topological graph not built"}
        from .world import _topo_doc
        doc = _topo_doc(world.topo)
        doc["dot"] = to_dot(world.topo)
        return 200, doc

    # -- commands --

    def command(self, body: dict) -> tuple[int, dict]:
        world = self.world
        if world is None:
            return 409, {"error": "LayerNotBuilt", "message": "session not finalized"}
        utterance = body.get("utterance")
        if not isinstance(utterance, str):
            return 400, {"error": "SchemaViolation", "message": "body needs 'utterance'"}
        robot = Pose2D(*body["robot_pose"]) if body.get("robot_pose") else demo_mod.HOME_POSE
        try:
            command = parse_command(utterance, self.lexicon)
        except ParseError as e:
            return 400, {"error": "ParseError", "message": str(e),
                         "position": e.position, "expected": e.expected}
        try:
            res = ground(command.reference, world, self.lexicon, robot)
        except SemanticaError as e:
            return 400, {"error": type(e).__name__, "message": str(e)}
        payload: dict = {"grounding": {
            "kind": res.kind,
            "referent": res.referent,
            "area_concept": res.area_concept,
            "candidates": list(res.candidates),
        }}
        if res.resolved and command.verb == GOTO:
            try:
                plan = plan_route(robot, res, world)
                payload["plan"] = {
                    "start_node": plan.start_node,
                    "total_cost": plan.total_cost,
                    "steps": [{"behavior": s.behavior, "node": s.node,
                               "pose": [s.pose.x, s.pose.y, s.pose.theta],
                               "door": s.door} for s in plan.steps],
                }
            except (NoRoute, RobotOutsideMap) as e:
                payload["plan_error"] = str(e)
        elif res.kind == REFERENT and command.verb != GOTO:
            answer = answer_check(command, res, world)
            payload["answer"] = {"known": answer.known, "value": answer.value}
        return 200, payload


class _Handler(BaseHTTPRequestHandler):
    service: Service  # set on the server class

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status: int, payload, exact_floats: bool = False) -> None:
        if isinstance(payload, (dict, list)):
            # the event log must replay bit-exactly, so it keeps full float
            # precision; canonical (9-digit) formatting covers everything else
            text = json.dumps(payload, sort_keys=True) if exact_floats \
                else canonical_json(payload)
            body = text.encode()
            ctype = "application/json"
        else:
            body = payload if isinstance(payload, bytes) else str(payload).encode()
            ctype = "text/plain; charset=utf-8"
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        self._send(204, b"")

    def do_GET(self):
        service = self.server.service  # type: ignore[attr-defined]
        if self.path == "/world":
            self._send(*service.world_doc())
        elif self.path == "/kb":
            self._send(*service.kb_doc())
        elif self.path == "/map":
            self._send(*service.map_doc())
        elif self.path == "/cellmap":
            self._send(*service.cellmap_doc())
        elif self.path == "/topograph":
            self._send(*service.topograph_doc())
        elif self.path == "/session/log":
            self._send(200, {"records": service.log_records()}, exact_floats=True)
        else:
            self._send(404, {"error": "NotFound", "message": self.path})

    def do_POST(self):
        service = self.server.service  # type: ignore[attr-defined]
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            body = json.loads(raw.decode("utf-8")) if raw.strip() else {}
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            self._send(400, {"error": "SchemaViolation", "message": f"bad JSON body: {e}"})
            return
        if self.path == "/session/tag":
            self._send(*service.add_record(body))
        elif self.path == "/session/finalize":
            self._send(*service.finalize())
        elif self.path == "/command":
            self._send(*service.command(body))
        else:
            self._send(404, {"error": "NotFound", "message": self.path})


def make_server(service: Service, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((host, port), _Handler)
    server.service = service  # type: ignore[attr-defined]
    return server


def serve(world_path=None, kb_path=None, map_path=None,
          host: str = "127.0.0.1", port: int = 8080) -> None:
    if world_path:
        service = Service(world=load_world(world_path))
    else:
        if kb_path is None or map_path is None:
            raise SchemaViolation("serve needs --world, or --kb together with --map")
        service = Service(kb=load_kb(kb_path), grid=load_grid(map_path))
    server = make_server(service, host=host, port=port)
    print(f"serving on http://{host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
