// Thin typed client for the semantica HTTP API. The fetch implementation
// is injectable so tests can run without a server and the scripted
// session can run under Node.

import type {
  CellMapDoc,
  CommandReply,
  FinalizeReply,
  GridDoc,
  KbDoc,
  Pose,
  SessionLogDoc,
  SessionRecord,
  TagReply,
  TopoDoc,
} from "./types.js";

export interface ApiResponse<T> {
  status: number;
  body: T;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<ApiResponse<T>> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.base + path, init);
    return { status: resp.status, body: (await resp.json()) as T };
  }

  getMap(): Promise<ApiResponse<GridDoc>> {
    return this.request("GET", "/map");
  }

  getKb(): Promise<ApiResponse<KbDoc>> {
    return this.request("GET", "/kb");
  }

  getWorld(): Promise<ApiResponse<Record<string, unknown>>> {
    return this.request("GET", "/world");
  }

  getCellMap(): Promise<ApiResponse<CellMapDoc>> {
    return this.request("GET", "/cellmap");
  }

  getTopograph(): Promise<ApiResponse<TopoDoc>> {
    return this.request("GET", "/topograph");
  }

  getSessionLog(): Promise<ApiResponse<SessionLogDoc>> {
    return this.request("GET", "/session/log");
  }

  postTag(record: SessionRecord): Promise<ApiResponse<TagReply>> {
    return this.request("POST", "/session/tag", record);
  }

  finalize(): Promise<ApiResponse<FinalizeReply>> {
    return this.request("POST", "/session/finalize");
  }

  command(utterance: string, robotPose?: Pose): Promise<ApiResponse<CommandReply>> {
    const body: Record<string, unknown> = { utterance };
    if (robotPose) {
      body.robot_pose = robotPose;
    }
    return this.request("POST", "/command", body);
  }
}
