// Live-session state: tag submission, accept/reject markers, and the
// exported event log. All world mutation happens server-side; this
// module only mirrors API responses.

import type { ApiClient } from "./api.js";
import type { KbDoc, Pose, SessionRecord, TagRecord, TagReply } from "./types.js";

export interface Marker {
  seq: number;
  label: string;
  kind: string;
  world: [number, number];
  status: "accepted" | "rejected";
  reason?: string;
}

export interface SubmitOutcome {
  ok: boolean;
  stored: boolean;
  status: number;
  reply: TagReply;
}

function wrapAngle(theta: number): number {
  let t = (theta + Math.PI) % (2 * Math.PI);
  if (t <= 0) {
    t += 2 * Math.PI;
  }
  return t - Math.PI;
}

/** Pose of a world point expressed in the robot frame (heading 0). */
export function relativePose(robot: Pose, worldX: number, worldY: number, worldTheta = 0): Pose {
  const dx = worldX - robot[0];
  const dy = worldY - robot[1];
  const c = Math.cos(robot[2]);
  const s = Math.sin(robot[2]);
  return [c * dx + s * dy, -s * dx + c * dy, wrapAngle(worldTheta - robot[2])];
}

/** Nominal (height, width, length) walking up the is-a chain. */
export function nominalDims(kb: KbDoc, concept: string): [number, number, number] | null {
  const byName = new Map(kb.concepts.map((c) => [c.name, c]));
  const dims: (number | null)[] = [null, null, null];
  const keys = ["height", "width", "length"] as const;
  let cursor: string | null = concept;
  while (cursor) {
    const entry = byName.get(cursor);
    if (!entry) {
      break;
    }
    keys.forEach((key, i) => {
      const value = entry.properties?.[key];
      if (dims[i] === null && typeof value === "number") {
        dims[i] = value;
      }
    });
    cursor = entry.isa;
  }
  if (dims.some((d) => d === null)) {
    return null;
  }
  return dims as [number, number, number];
}

export class SessionController {
  private seq = 0;
  private readonly records: SessionRecord[] = [];
  readonly markers: Marker[] = [];
  robotPose: Pose = [0.7, 1.5, 0];
  acceptedTags = 0;

  nextSeq(): number {
    this.seq += 1;
    return this.seq;
  }

  /** Report the robot's odometry; becomes part of the exported log. */
  async submitOdom(api: ApiClient, pose: Pose): Promise<SubmitOutcome> {
    const record: SessionRecord = { type: "odom", seq: this.nextSeq(), pose };
    const { status, body } = await api.postTag(record);
    const ok = status === 200;
    if (ok) {
      this.records.push(record);
      this.robotPose = pose;
    }
    return { ok, stored: ok, status, reply: body };
  }

  buildTag(
    kind: TagRecord["kind"],
    label: string,
    concept: string,
    world: [number, number],
    options: { theta?: number; dims?: [number, number, number]; properties?: Record<string, unknown> } = {},
  ): TagRecord {
    const record: TagRecord = {
      type: "tag",
      seq: this.nextSeq(),
      kind,
      label,
      concept,
      robot_pose: this.robotPose,
      relative_pose: relativePose(this.robotPose, world[0], world[1], options.theta ?? 0),
    };
    if (kind !== "area") {
      record.dims = options.dims ?? [1, 1, 1];
    }
    if (options.properties && Object.keys(options.properties).length > 0) {
      record.properties = options.properties;
    }
    return record;
  }

  /**
   * Post one tag. Accepted and dimension-rejected tags enter the log
   * (replays reproduce the rejection); refused tags (conflicts, schema
   * errors) do not, and the caller shows the error inline.
   */
  async submitTag(api: ApiClient, record: TagRecord, world: [number, number]): Promise<SubmitOutcome> {
    const { status, body } = await api.postTag(record);
    const accepted = status === 200 && body.status === "accepted";
    const rejected = status === 422 && body.status === "rejected";
    if (accepted || rejected) {
      this.records.push(record);
      this.markers.push({
        seq: record.seq,
        label: record.label,
        kind: record.kind,
        world,
        status: accepted ? "accepted" : "rejected",
        reason: body.reason,
      });
      if (accepted) {
        this.acceptedTags += 1;
      }
    } else {
      this.seq -= 1; // refused: the seq was never consumed server-side
    }
    return { ok: accepted, stored: accepted || rejected, status, reply: body };
  }

  /** The session as JSON Lines, replayable by `semantica build`. */
  exportLogJsonl(): string {
    return this.records.map((r) => JSON.stringify({ v: 1, ...r })).join("\n") + "\n";
  }

  get recordCount(): number {
    return this.records.length;
  }
}
