"""Command-line interface: build, ground, plan, export, serve.

Exit codes: 0 success, 2 bad/missing inputs, 3 unresolved grounding or
no route, 4 command parse error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import demo as demo_mod
from .acquisition import load_session_log
from .cellmap import cellmap_to_json, overlay_pgm_bytes
from .errors import NoRoute, ParseError, RobotOutsideMap, SemanticaError
from .geometry import Pose2D
from .grid import load_grid
from .grounding import FALLBACK_AREA, GOTO, REFERENT, Lexicon, ground, parse_command
from .knowledge import load_kb
from .pipeline import BuildConfig, build_world
from .planner import answer_check, plan_route
from .posegraph import to_g2o
from .topograph import TopoConfig, to_dot
from .world import canonical_json, load_world, save_world, world_to_document

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNRESOLVED = 3
EXIT_PARSE = 4

KB_ENV = "SEMANTICA_KB_PATH"


def _fail(code: int, kind: str, message: str, **extra) -> int:
    payload = {"error": kind, "message": message}
    payload.update(extra)
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def _default_kb_path(explicit: str | None) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get(KB_ENV)
    if env:
        return Path(env)
    return demo_mod.data_dir() / "kb_home.json"


def _parse_pose(text: str) -> Pose2D:
    parts = [float(p) for p in text.split(",")]
    if len(parts) not in (2, 3):
        raise ValueError(f"pose must be x,y[,theta]: {text!r}")
    return Pose2D(parts[0], parts[1], parts[2] if len(parts) == 3 else 0.0)


def _load_lexicon(path: str | None) -> Lexicon:
    if path:
        return Lexicon.load(path)
    return Lexicon(demo_mod.DEMO_LEXICON)


def cmd_build(args) -> int:
    for name in ("map", "events"):
        value = getattr(args, name)
        if value is None:
            return _fail(EXIT_INPUT, "missing_input", f"missing required input --{name}")
        if not Path(value).exists():
            return _fail(EXIT_INPUT, "missing_input", f"{value}: no such file")
    kb_path = _default_kb_path(args.kb)
    if not kb_path.exists():
        return _fail(EXIT_INPUT, "missing_input", f"{kb_path}: no such KB file")
    try:
        kb = load_kb(kb_path)
        grid = load_grid(args.map, args.map_metadata)
        records = load_session_log(args.events)
        config = BuildConfig()
        config.acquisition.tolerance = args.tolerance
        config.topo = TopoConfig(door_offset=args.door_offset)
        world, result = build_world(
            grid, records, kb, config, kb_ref=str(kb_path.name),
            map_ref={"image": str(args.map), "metadata": str(args.map_metadata or "")})
        save_world(world, args.out)
    except SemanticaError as e:
        return _fail(EXIT_INPUT, type(e).__name__, str(e))
    cm = world.cellmap
    print(f"accepted tags: {world.session_meta['accepted']}")
    print(f"rejected tags: {world.session_meta['rejected']}")
    print(f"final chi2: {world.session_meta['final_chi2']:.6g} "
          f"(from {world.session_meta['initial_chi2']:.6g})")
    print(f"cells: {cm.num_cells}")
    print(f"regions: {len(cm.region_labels)} ({', '.join(cm.region_labels)})")
    print(f"topo nodes: {len(world.topo.nodes)} "
          f"({len(world.topo.dynamic_nodes())} dynamic, {len(world.topo.static_nodes())} static)")
    print(f"world written to {args.out}")
    return EXIT_OK


def _grounding_payload(res) -> dict:
    return {
        "kind": res.kind,
        "referent": res.referent,
        "area_concept": res.area_concept,
        "candidates": list(res.candidates),
    }


def _plan_payload(plan) -> dict:
    return {
        "start_node": plan.start_node,
        "total_cost": plan.total_cost,
        "steps": [{
            "behavior": s.behavior,
            "node": s.node,
            "pose": [s.pose.x, s.pose.y, s.pose.theta],
            "door": s.door,
        } for s in plan.steps],
    }


def _ground_command(args, want_plan: bool) -> int:
    if args.world is None or not Path(args.world).exists():
        return _fail(EXIT_INPUT, "missing_input", "missing or unreadable --world")
    try:
        world = load_world(args.world)
    except SemanticaError as e:
        return _fail(EXIT_INPUT, type(e).__name__, str(e))
    lexicon = _load_lexicon(args.lexicon)
    robot = _parse_pose(args.robot_pose) if args.robot_pose else demo_mod.HOME_POSE
    try:
        command = parse_command(args.command, lexicon)
    except ParseError as e:
        return _fail(EXIT_PARSE, "parse_error", str(e),
                     position=e.position, expected=e.expected)
    try:
        res = ground(command.reference, world, lexicon, robot)
    except SemanticaError as e:
        return _fail(EXIT_INPUT, type(e).__name__, str(e))
    payload: dict = {"grounding": _grounding_payload(res)}
    code = EXIT_OK
    plan = None
    if not res.resolved:
        code = EXIT_UNRESOLVED
    elif command.verb == GOTO and want_plan:
        try:
            plan = plan_route(robot, res, world)
            payload["plan"] = _plan_payload(plan)
        except (NoRoute, RobotOutsideMap) as e:
            payload["plan_error"] = str(e)
            code = EXIT_UNRESOLVED
    elif command.verb != GOTO and res.kind == REFERENT:
        answer = answer_check(command, res, world)
        payload["answer"] = {"known": answer.known, "value": answer.value}
    if args.format == "text":
        print(_render_text(payload, plan))
    else:
        print(canonical_json(payload))
    return code


def _render_text(payload: dict, plan) -> str:
    lines = []
    g = payload["grounding"]
    if g["kind"] == "referent":
        lines.append(f"referent: {g['referent']}")
    elif g["kind"] == "fallback_area":
        lines.append(f"no matching instance; try the {g['area_concept']} area")
    elif g["kind"] == "ambiguous":
        lines.append(f"ambiguous: {', '.join(g['candidates'])}")
    else:
        lines.append("unresolved")
    if "answer" in payload:
        a = payload["answer"]
        lines.append(f"answer: {a['value']}" if a["known"] else "answer: unknown")
    if plan is not None:
        lines.append(f"route from {plan.start_node} (total {plan.total_cost:.2f} m):")
        for k, step in enumerate(plan.steps, start=1):
            door = f" through {step.door}" if step.door else ""
            lines.append(f"  {k}. {step.behavior}{door} -> {step.node} "
                         f"({step.pose.x:.2f}, {step.pose.y:.2f}, {step.pose.theta:.2f})")
    if "plan_error" in payload:
        lines.append(f"no route: {payload['plan_error']}")
    return "\n".join(lines)


def cmd_ground(args) -> int:
    return _ground_command(args, want_plan=False)


def cmd_plan(args) -> int:
    return _ground_command(args, want_plan=True)


def cmd_export(args) -> int:
    if args.world is None or not Path(args.world).exists():
        return _fail(EXIT_INPUT, "missing_input", "missing or unreadable --world")
    try:
        world = load_world(args.world)
        if args.what == "topograph":
            data = to_dot(world.require_topo()).encode()
        elif args.what == "cellmap":
            data = (canonical_json(cellmap_to_json(world.require_cellmap())) + "\n").encode()
        elif args.what == "overlay":
            data = overlay_pgm_bytes(world.require_cellmap())
        elif args.what == "posegraph":
            return _fail(EXIT_INPUT, "LayerNotBuilt",
                         "pose graph export requires building from a session")
        else:
            return _fail(EXIT_INPUT, "bad_argument", f"unknown layer {args.what!r}")
    except SemanticaError as e:
        return _fail(EXIT_INPUT, type(e).__name__, str(e))
    Path(args.out).write_bytes(data)
    print(f"{args.what} written to {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve
    kb_path = _default_kb_path(args.kb)
    try:
        serve(world_path=args.world, kb_path=kb_path if args.world is None else None,
              map_path=args.map if args.world is None else None,
              host=args.host, port=args.port)
    except SemanticaError as e:
        return _fail(EXIT_INPUT, type(e).__name__, str(e))
    return EXIT_OK


def cmd_demo(args) -> int:
    out = Path(args.out)
    paths = demo_mod.write_demo_data(out)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semantica",
        description="Layered semantic environment models from occupancy grids and tagging sessions.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("build", help="build a world document from map + session log")
    p.add_argument("--map", help="occupancy grid PGM")
    p.add_argument("--map-metadata", help="YAML metadata (default: <map>.yaml)")
    p.add_argument("--events", help="session log (JSON Lines)")
    p.add_argument("--kb", help=f"KB JSON (default: ${KB_ENV} or the shipped home KB)")
    p.add_argument("--out", default="world.json")
    p.add_argument("--tolerance", type=float, default=0.25,
                   help="dimension coherence tolerance (fraction)")
    p.add_argument("--door-offset", type=float, default=0.5,
                   help="static node distance in front of doors (m)")
    p.set_defaults(fn=cmd_build)

    for name, fn in (("ground", cmd_ground), ("plan", cmd_plan)):
        p = sub.add_parser(name, help=f"{name} a natural-language command")
        p.add_argument("--world", help="world document from `build`")
        p.add_argument("--command", required=True)
        p.add_argument("--robot-pose", help="x,y[,theta]")
        p.add_argument("--lexicon", help="lexicon JSON (default: shipped)")
        p.add_argument("--format", choices=["json", "text"], default="json")
        p.set_defaults(fn=fn)

    p = sub.add_parser("export", help="export a layer for inspection")
    p.add_argument("--world", required=True)
    p.add_argument("--what", choices=["cellmap", "topograph", "overlay"], required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("serve", help="HTTP JSON API over a world or a fresh session")
    p.add_argument("--world", help="serve an already-built world document")
    p.add_argument("--kb", help="KB for a fresh acquisition session")
    p.add_argument("--map", help="map PGM for a fresh acquisition session")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("demo", help="write the bundled demo fixtures to a directory")
    p.add_argument("--out", default="demo_data")
    p.set_defaults(fn=cmd_demo)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as e:
        return _fail(EXIT_INPUT, "bad_argument", str(e))


if __name__ == "__main__":
    sys.exit(main())
