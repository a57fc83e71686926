// DOM wiring for the acquisition console. Everything drawable comes
// from the API through overlays.ts; this file only renders and routes
// user input.

import { ApiClient } from "./api.js";
import {
  cellShapes,
  gridPixels,
  makeTransform,
  planWaypoints,
  topoShapes,
  Transform,
} from "./overlays.js";
import { SessionController, nominalDims } from "./session.js";
import type { CellMapDoc, GridDoc, KbDoc, PlanDoc, Pose, TopoDoc } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T;

const api = new ApiClient(
  (document.querySelector("meta[name=semantica-api]") as HTMLMetaElement)?.content
  ?? "http://127.0.0.1:8080");
const session = new SessionController();

let grid: GridDoc | null = null;
let kb: KbDoc | null = null;
let transform: Transform | null = null;
let cellmap: CellMapDoc | null = null;
let topo: TopoDoc | null = null;
let pendingClick: [number, number] | null = null;
let animation: { points: { node: string; world: [number, number] }[]; t: number } | null = null;

const canvas = $("map") as unknown as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;

function log(text: string, cls = "") {
  const line = document.createElement("div");
  line.textContent = text;
  if (cls) {
    line.className = cls;
  }
  $("transcript").appendChild(line);
  $("transcript").scrollTop = $("transcript").scrollHeight;
}

function draw() {
  if (!grid || !transform) {
    return;
  }
  const base = new ImageData(new Uint8ClampedArray(gridPixels(grid)), grid.width, grid.height);
  const off = document.createElement("canvas");
  off.width = grid.width;
  off.height = grid.height;
  off.getContext("2d")!.putImageData(base, 0, 0);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);

  if (cellmap) {
    for (const shape of cellShapes(cellmap)) {
      ctx.beginPath();
      shape.polygon.forEach(([x, y], i) => {
        const [px, py] = transform!.toCanvas(x, y);
        i === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
      });
      ctx.closePath();
      ctx.globalAlpha = 0.35;
      ctx.fillStyle = shape.color;
      ctx.fill();
      ctx.globalAlpha = 1.0;
      ctx.strokeStyle = "#777";
      ctx.stroke();
    }
  }
  if (topo) {
    const { nodes, edges } = topoShapes(topo);
    ctx.strokeStyle = "#444";
    ctx.lineWidth = 1.5;
    for (const edge of edges) {
      ctx.beginPath();
      ctx.moveTo(...transform.toCanvas(...edge.from));
      ctx.lineTo(...transform.toCanvas(...edge.to));
      ctx.setLineDash(edge.behavior === "CrossDoor" ? [5, 3] : []);
      ctx.stroke();
    }
    ctx.setLineDash([]);
    for (const node of nodes) {
      const [px, py] = transform.toCanvas(...node.world);
      ctx.beginPath();
      ctx.arc(px, py, node.kind === "dynamic" ? 8 : 6, 0, 2 * Math.PI);
      ctx.fillStyle = node.fill;
      ctx.fill();
      ctx.strokeStyle = "#222";
      ctx.stroke();
    }
  }
  for (const marker of session.markers) {
    const [px, py] = transform.toCanvas(...marker.world);
    ctx.beginPath();
    ctx.arc(px, py, 5, 0, 2 * Math.PI);
    ctx.fillStyle = marker.status === "accepted" ? "#2a9d2a" : "#d03030";
    ctx.fill();
    ctx.fillStyle = "#111";
    ctx.font = "11px sans-serif";
    ctx.fillText(marker.label, px + 7, py - 4);
  }
  const [rx, ry] = transform.toCanvas(session.robotPose[0], session.robotPose[1]);
  ctx.beginPath();
  ctx.arc(rx, ry, 6, 0, 2 * Math.PI);
  ctx.fillStyle = "#2255cc";
  ctx.fill();
  if (pendingClick) {
    const [px, py] = transform.toCanvas(...pendingClick);
    ctx.beginPath();
    ctx.arc(px, py, 7, 0, 2 * Math.PI);
    ctx.strokeStyle = "#cc8800";
    ctx.lineWidth = 2;
    ctx.stroke();
    ctx.lineWidth = 1;
  }
  if (animation) {
    const { points, t } = animation;
    const k = Math.min(Math.floor(t), points.length - 1);
    ctx.strokeStyle = "#aa33aa";
    ctx.lineWidth = 2.5;
    ctx.beginPath();
    points.slice(0, k + 1).forEach((p, i) => {
      const [px, py] = transform!.toCanvas(...p.world);
      i === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
    });
    ctx.stroke();
    ctx.lineWidth = 1;
  }
}

function concepts(root: string): string[] {
  if (!kb) {
    return [];
  }
  const byName = new Map(kb.concepts.map((c) => [c.name, c]));
  const descends = (name: string): boolean => {
    let cursor: string | null = name;
    while (cursor) {
      if (cursor === root) {
        return true;
      }
      cursor = byName.get(cursor)?.isa ?? null;
    }
    return false;
  };
  return kb.concepts.map((c) => c.name).filter(descends).sort();
}

function refreshConceptChoices() {
  const kind = ($("kind") as HTMLSelectElement).value;
  const root = kind === "area" ? "Areas" : kind === "door" ? "StructuralElements" : "Objects";
  const select = $("concept") as HTMLSelectElement;
  select.innerHTML = "";
  for (const name of concepts(root)) {
    const option = document.createElement("option");
    option.value = option.textContent = name;
    select.appendChild(option);
  }
  if (kind === "door") {
    select.value = "Door";
  }
  prefillDims();
}

function prefillDims() {
  if (!kb) {
    return;
  }
  const concept = ($("concept") as HTMLSelectElement).value;
  const dims = nominalDims(kb, concept);
  ($("dims") as HTMLInputElement).value = dims ? dims.map((d) => d.toFixed(2)).join(",") : "";
}

async function submitTag() {
  if (!pendingClick) {
    log("click the map first", "warn");
    return;
  }
  const kind = ($("kind") as HTMLSelectElement).value as "object" | "area" | "door";
  const label = ($("label") as HTMLInputElement).value.trim();
  const concept = ($("concept") as HTMLSelectElement).value;
  const dimsText = ($("dims") as HTMLInputElement).value.trim();
  const theta = parseFloat(($("theta") as HTMLInputElement).value || "0");
  const dims = dimsText ? (dimsText.split(",").map(Number) as [number, number, number]) : undefined;
  const record = session.buildTag(kind, label, concept, pendingClick, { dims, theta });
  const outcome = await session.submitTag(api, record, pendingClick);
  if (outcome.ok) {
    log(`accepted ${label} (${concept})`, "ok");
  } else if (outcome.stored) {
    log(`rejected ${label}: ${outcome.reply.reason}`, "err");
  } else {
    log(`refused ${label}: ${outcome.reply.error ?? ""} ${outcome.reply.message ?? ""}`, "err");
  }
  ($("finalize") as HTMLButtonElement).disabled = session.acceptedTags === 0;
  pendingClick = null;
  draw();
}

async function finalize() {
  const { status, body } = await api.finalize();
  if (status !== 200) {
    log(`finalize failed: ${body.message ?? body.error}`, "err");
    return;
  }
  log(`finalized: ${body.accepted} accepted, ${body.rejected} rejected, `
    + `chi2 ${body.final_chi2?.toExponential(2)}`, "ok");
  cellmap = (await api.getCellMap()).body;
  topo = (await api.getTopograph()).body;
  draw();
}

async function runCommand() {
  const utterance = ($("command") as HTMLInputElement).value.trim();
  if (!utterance) {
    return;
  }
  log(`> ${utterance}`);
  const { status, body } = await api.command(utterance, session.robotPose);
  if (status !== 200) {
    if (body.error === "ParseError") {
      log(`  ${" ".repeat(Math.max(0, (body.position ?? 1) - 1))}^ expected ${body.expected}`, "err");
    } else {
      log(`  error: ${body.message ?? body.error}`, "err");
    }
    return;
  }
  const g = body.grounding!;
  log(`  ${g.kind}${g.referent ? ": " + g.referent : ""}`
    + `${g.area_concept ? ": try " + g.area_concept : ""}`
    + `${g.candidates.length > 1 ? ": " + g.candidates.join(", ") : ""}`);
  if (body.answer) {
    log(`  answer: ${body.answer.known ? JSON.stringify(body.answer.value) : "unknown"}`);
  }
  if (body.plan && topo) {
    log(`  route: ${body.plan.steps.map((s) => s.behavior + "->" + s.node).join(", ")}`);
    animatePlan(body.plan);
  }
}

function animatePlan(plan: PlanDoc) {
  if (!topo) {
    return;
  }
  const points = planWaypoints(plan, topo);
  animation = { points, t: 0 };
  const tick = () => {
    if (!animation) {
      return;
    }
    animation.t += 0.08;
    draw();
    if (animation.t < animation.points.length + 2) {
      requestAnimationFrame(tick);
    }
  };
  requestAnimationFrame(tick);
}

function exportLog() {
  const blob = new Blob([session.exportLogJsonl()], { type: "application/jsonl" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "session.jsonl";
  a.click();
  URL.revokeObjectURL(a.href);
}

async function init() {
  grid = (await api.getMap()).body;
  kb = (await api.getKb()).body;
  transform = makeTransform(grid, canvas.width, canvas.height);
  refreshConceptChoices();
  canvas.addEventListener("click", (event) => {
    const rect = canvas.getBoundingClientRect();
    const px = ((event.clientX - rect.left) / rect.width) * canvas.width;
    const py = ((event.clientY - rect.top) / rect.height) * canvas.height;
    pendingClick = transform!.toWorld(px, py);
    $("click-pos").textContent = `(${pendingClick[0].toFixed(2)}, ${pendingClick[1].toFixed(2)})`;
    draw();
  });
  $("kind").addEventListener("change", refreshConceptChoices);
  $("concept").addEventListener("change", prefillDims);
  $("tag").addEventListener("click", () => void submitTag());
  $("finalize").addEventListener("click", () => void finalize());
  $("send").addEventListener("click", () => void runCommand());
  ($("command") as HTMLInputElement).addEventListener("keydown", (e) => {
    if (e.key === "Enter") {
      void runCommand();
    }
  });
  $("export").addEventListener("click", exportLog);
  $("move").addEventListener("click", async () => {
    if (pendingClick) {
      const pose: Pose = [pendingClick[0], pendingClick[1], 0];
      const outcome = await session.submitOdom(api, pose);
      log(outcome.ok ? `robot moved to (${pose[0].toFixed(2)}, ${pose[1].toFixed(2)})`
        : `move refused: ${outcome.reply.message}`, outcome.ok ? "" : "err");
      pendingClick = null;
      draw();
    }
  });
  draw();
  log("session open: click the map, fill the form, tag");
}

void init();
