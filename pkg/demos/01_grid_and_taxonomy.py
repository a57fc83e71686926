"""Load the demo occupancy grid and poke at the conceptual taxonomy.

The grid is a plain PGM+YAML map; the taxonomy is a JSON document with
is-a links, inheritable properties, and default locations.
"""
from semantica import load_grid, load_kb
from semantica.demo import data_dir

grid = load_grid(data_dir() / "demo_map.pgm", data_dir() / "demo_map.yaml")
print(f"map: {grid.width} x {grid.height} cells at {grid.resolution} m "
      f"-> {grid.width * grid.resolution:.1f} x {grid.height * grid.resolution:.1f} m")
print(f"free space: {grid.free_mask().sum()} cells")

kb = load_kb(data_dir() / "kb_home.json")
print(f"\nconcepts: {len(kb.concepts)}")
print("roots:", [c for c in kb.concepts if kb.parent(c) is None])

# property inheritance: MiniFridge overrides the dims but inherits the color
print("\nFridge dims:", kb.nominal_dims("Fridge"))
print("MiniFridge dims:", kb.nominal_dims("MiniFridge"))
print("MiniFridge color (inherited):", kb.concept_property("MiniFridge", "color"))

# default locations support the robot when nothing specific is known
for concept in ("Fridge", "MiniFridge", "Bed", "Kitchen"):
    print(f"default location of {concept}: {kb.default_location(concept)}")
