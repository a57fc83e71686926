"""Topological graph, command grounding, and route planning.

Static nodes (dark in the DOT render) flank each door; dynamic nodes
(light) stand for whole areas and get a metric pose only at plan time.
"""
from pathlib import Path

from semantica import Lexicon, ground, parse_command, plan_route, answer_check, to_dot
from semantica.demo import DEMO_LEXICON, HOME_POSE, build_demo_world
from semantica.geometry import Pose2D

world, _ = build_demo_world()
topo = world.topo
print(f"topological graph: {len(topo.dynamic_nodes())} dynamic + "
      f"{len(topo.static_nodes())} static nodes, {len(topo.edges)} edges")

out = Path(__file__).parent / "demo_out"
out.mkdir(exist_ok=True)
(out / "topograph.dot").write_text(to_dot(topo))
print(f"wrote {out / 'topograph.dot'} (render with: dot -Tpng)")

lexicon = Lexicon(DEMO_LEXICON)
bedroom_pose = Pose2D(8.5, 5.0, 0.0)

for utterance, pose in [
    ("go near the fridge", bedroom_pose),
    ("check whether in the corridor the third window on the left is open", HOME_POSE),
    ("go near the heater", HOME_POSE),
]:
    print(f"\n> {utterance}")
    cmd = parse_command(utterance, lexicon)
    res = ground(cmd.reference, world, lexicon, pose)
    print(f"  grounding: {res.kind}"
          + (f" -> {res.referent}" if res.referent else "")
          + (f" -> area {res.area_concept}" if res.area_concept else ""))
    if cmd.verb == "check" and res.kind == "referent":
        answer = answer_check(cmd, res, world)
        print(f"  answer: {answer.value if answer.known else 'unknown'}")
    elif res.resolved:
        plan = plan_route(pose, res, world)
        print(f"  route ({plan.total_cost:.2f} m):")
        for step in plan.steps:
            door = f" through {step.door}" if step.door else ""
            print(f"    {step.behavior}{door} -> {step.node} "
                  f"({step.pose.x:.2f}, {step.pose.y:.2f})")
