"""Drive a live acquisition session through the HTTP API.

The same flow the browser console uses: post tags, get accept/reject
acknowledgments, finalize, then issue commands against the built world.
"""
import json
import threading
import urllib.request

from semantica import load_kb
from semantica.demo import data_dir, demo_grid
from semantica.server import Service, make_server

service = Service(kb=load_kb(data_dir() / "kb_home.json"), grid=demo_grid())
server = make_server(service, port=0)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"
print(f"service on {base}")


def call(method, path, body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(base + path, data=data, method=method,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read())


# a tiny session: one room gets tagged as kitchen with a fridge by the door
events = [
    {"type": "odom", "seq": 1, "pose": [2.0, 1.5, 0.0]},
    {"type": "tag", "seq": 2, "kind": "area", "label": "corridor", "concept": "Corridor",
     "robot_pose": [2.0, 1.5, 0.0], "relative_pose": [1.0, 0.0, 0.0]},
    {"type": "tag", "seq": 3, "kind": "door", "label": "door1", "concept": "Door",
     "robot_pose": [2.0, 1.5, 0.0], "relative_pose": [-0.25, 1.45, 1.5707963],
     "dims": [2.0, 0.9, 0.3]},
    {"type": "odom", "seq": 4, "pose": [1.75, 3.6, 1.5707963]},
    {"type": "tag", "seq": 5, "kind": "area", "label": "kitchen", "concept": "Kitchen",
     "robot_pose": [1.75, 3.6, 1.5707963], "relative_pose": [1.0, 0.5, 0.0]},
    {"type": "tag", "seq": 6, "kind": "object", "label": "fridge1", "concept": "Fridge",
     "robot_pose": [1.75, 3.6, 1.5707963], "relative_pose": [3.85, 1.2, -1.5707963],
     "dims": [1.8, 0.7, 0.7], "properties": {"open": False}},
    # a wildly mis-measured tag, to see the dimensional coherence check fire
    {"type": "tag", "seq": 7, "kind": "object", "label": "crate1", "concept": "Table",
     "robot_pose": [1.75, 3.6, 1.5707963], "relative_pose": [1.0, -1.0, 0.0],
     "dims": [0.1, 0.1, 0.1]},
]
for event in events:
    status, reply = call("POST", "/session/tag", event)
    label = event.get("label", "(odom)")
    print(f"  seq {event['seq']} {label:10s} -> {status} {reply.get('status', '')} "
          f"{reply.get('reason', '')}")

status, summary = call("POST", "/session/finalize")
print(f"\nfinalize -> {status}: {summary['accepted']} accepted, "
      f"{summary['rejected']} rejected, chi2 {summary['final_chi2']:.2e}")

status, topo = call("GET", "/topograph")
print(f"topograph: {len(topo['nodes'])} nodes")

status, reply = call("POST", "/command",
                     {"utterance": "go near the fridge", "robot_pose": [5.0, 1.5, 0.0]})
print(f"\n'go near the fridge' -> {reply['grounding']['kind']} "
      f"{reply['grounding']['referent']}")
for step in reply["plan"]["steps"]:
    print(f"  {step['behavior']:9s} -> {step['node']}")

server.shutdown()
server.server_close()
