// Payload shapes of the semantica HTTP API.

export type Pose = [number, number, number];

export interface TagRecord {
  type: "tag";
  seq: number;
  kind: "object" | "area" | "door";
  label: string;
  concept: string;
  robot_pose: Pose;
  relative_pose: Pose;
  dims?: [number, number, number];
  properties?: Record<string, unknown>;
}

export interface OdomRecord {
  type: "odom";
  seq: number;
  pose: Pose;
}

export type SessionRecord = TagRecord | OdomRecord;

export interface TagReply {
  status?: "accepted" | "rejected" | "recorded";
  reason?: string;
  warning?: string;
  error?: string;
  message?: string;
  seq?: number;
}

export interface FinalizeReply {
  status?: string;
  accepted?: number;
  rejected?: number;
  final_chi2?: number;
  error?: string;
  message?: string;
}

export interface GridDoc {
  width: number;
  height: number;
  resolution: number;
  origin: Pose;
  rows: string[]; // '.' free, '#' occupied, '?' unknown; row 0 at world bottom
}

export interface CellDoc {
  id: number;
  labels: string[];
  polygon: [number, number][];
  runs: [number, number, number][];
  region?: number;
}

export interface CellMapDoc {
  resolution: number;
  cells: CellDoc[];
  connect: [number, number][];
  regions?: { id: number; label: string }[];
}

export interface TopoNodeDoc {
  id: string;
  kind: "static" | "dynamic";
  area: string;
  pose: Pose;
  door: string | null;
}

export interface TopoEdgeDoc {
  a: string;
  b: string;
  behavior: string;
  cost: number;
  door: string | null;
}

export interface TopoDoc {
  nodes: TopoNodeDoc[];
  edges: TopoEdgeDoc[];
  dot?: string;
}

export interface GroundingDoc {
  kind: "referent" | "fallback_area" | "ambiguous" | "unresolved";
  referent: string | null;
  area_concept: string | null;
  candidates: string[];
}

export interface PlanStepDoc {
  behavior: string;
  node: string;
  pose: Pose;
  door: string | null;
}

export interface PlanDoc {
  start_node: string;
  total_cost: number;
  steps: PlanStepDoc[];
}

export interface CommandReply {
  grounding?: GroundingDoc;
  plan?: PlanDoc;
  plan_error?: string;
  answer?: { known: boolean; value: unknown };
  error?: string;
  message?: string;
  position?: number;
  expected?: string;
}

export interface KbConceptDoc {
  name: string;
  isa: string | null;
  properties?: Record<string, unknown>;
  default_location?: string;
}

export interface KbDoc {
  concepts: KbConceptDoc[];
}

export interface SessionLogDoc {
  records: (SessionRecord & { v: number })[];
}
