"""Replay the demo tagging session and watch the pose graph converge.

Every odometry reading becomes a pose node, every accepted tag an
observation edge; repeated tags of the same label fuse into a single
object estimate. The optimizer is Gauss-Newton with LM damping.
"""
from semantica import ingest_session, load_kb, load_session_log, optimize, to_g2o
from semantica.demo import data_dir

kb = load_kb(data_dir() / "kb_home.json")
records = load_session_log(data_dir() / "demo_session.jsonl")
print(f"session: {len(records)} records")

result = ingest_session(records, kb)
print(f"accepted {len(result.accepted)} tags, rejected {len(result.rejected)}:")
for event, reason in result.rejected:
    print(f"  seq {event.seq} {event.label!r}: {reason}")

graph = result.graph
print(f"\npose graph: {len(graph.poses)} robot poses, {len(graph.object_labels)} objects, "
      f"{len(graph.odom_edges)} odometry edges, {len(graph.object_edges)} object edges")
print("(fridge1 was tagged twice, so it has two observation edges)")

opt = optimize(graph)
print(f"\nchi2 trace: {[f'{v:.4f}' for v in opt.chi2_trace]}")
for label in graph.object_labels:
    p = opt.graph.object_pose(label)
    print(f"  {label:9s} -> ({p.x:6.3f}, {p.y:6.3f}, {p.theta:6.3f})")

g2o_text = to_g2o(opt.graph)
print(f"\ng2o interchange: {len(g2o_text.splitlines())} lines, first three:")
for line in g2o_text.splitlines()[:3]:
    print(" ", line)
