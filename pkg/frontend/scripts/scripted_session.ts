// Headless scripted session against a live server: the same api/session/
// overlay modules the browser console uses, driven straight from Node.
// Tags 3 objects, 1 door, and 2 areas in the demo home, finalizes, runs
// two commands, and writes everything a parity check needs to --out.
//
//   node dist/scripts/scripted_session.js --base http://127.0.0.1:PORT --out result.json

import { writeFileSync } from "node:fs";

import { ApiClient } from "../src/api.js";
import { renderedNodeCounts, renderedRegionCount } from "../src/overlays.js";
import { SessionController, nominalDims } from "../src/session.js";
import type { KbDoc, Pose } from "../src/types.js";

function arg(name: string): string {
  const k = process.argv.indexOf(name);
  if (k < 0 || k + 1 >= process.argv.length) {
    throw new Error(`missing ${name}`);
  }
  return process.argv[k + 1];
}

async function main(): Promise<void> {
  const api = new ApiClient(arg("--base"));
  const session = new SessionController();
  const outPath = arg("--out");

  const kb: KbDoc = (await api.getKb()).body;
  const dims = (concept: string) => nominalDims(kb, concept) ?? [1, 1, 1];

  // walk into the kitchen through door1 and tag as a user would
  await session.submitOdom(api, [0.7, 1.5, 0]);
  const corridorTag = session.buildTag("area", "corridor", "Corridor", [3.0, 1.5]);
  await session.submitTag(api, corridorTag, [3.0, 1.5]);

  await session.submitOdom(api, [1.75, 1.9, Math.PI / 2]);
  const door = session.buildTag("door", "door1", "Door", [1.75, 2.95],
    { theta: Math.PI / 2, dims: dims("Door") });
  await session.submitTag(api, door, [1.75, 2.95]);

  await session.submitOdom(api, [1.75, 3.7, Math.PI / 2]);
  const kitchenTag = session.buildTag("area", "kitchen", "Kitchen", [1.0, 4.5]);
  await session.submitTag(api, kitchenTag, [1.0, 4.5]);

  const fridge = session.buildTag("object", "fridge1", "Fridge", [0.55, 7.45],
    { dims: dims("Fridge"), properties: { open: false } });
  await session.submitTag(api, fridge, [0.55, 7.45]);

  const oven = session.buildTag("object", "oven1", "Oven", [2.8, 7.5],
    { dims: dims("Oven") });
  await session.submitTag(api, oven, [2.8, 7.5]);

  const table = session.buildTag("object", "table1", "Table", [2.4, 5.2],
    { dims: dims("Table") });
  await session.submitTag(api, table, [2.4, 5.2]);

  const finalize = (await api.finalize()).body;

  const cellmap = (await api.getCellMap()).body;
  const topograph = (await api.getTopograph()).body;
  // keep the raw bytes: re-serializing through JS would collapse 4.0 to 4
  const worldRaw = await (await fetch(arg("--base") + "/world")).text();

  const commands = [];
  for (const utterance of ["go near the fridge", "check whether the fridge is open"]) {
    const { status, body } = await api.command(utterance, [4.0, 1.5, 0]);
    commands.push({ utterance, status, body });
  }

  writeFileSync(outPath, JSON.stringify({
    finalize,
    log_jsonl: session.exportLogJsonl(),
    world_raw: worldRaw,
    rendered: {
      regions: renderedRegionCount(cellmap),
      nodes: renderedNodeCounts(topograph),
    },
    api_counts: {
      regions: cellmap.regions?.length ?? 0,
      dynamic: topograph.nodes.filter((n) => n.kind === "dynamic").length,
      static: topograph.nodes.filter((n) => n.kind === "static").length,
    },
    commands,
  }));
  console.log(`scripted session complete: ${session.recordCount} records, `
    + `${finalize.accepted} accepted`);
}

main().catch((err) => {
  console.error(err);
  process.exit(1);
});
