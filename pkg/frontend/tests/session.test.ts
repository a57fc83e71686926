import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SessionController, nominalDims, relativePose } from "../src/session.js";
import type { KbDoc, TagReply } from "../src/types.js";

function fakeApi(handler: (path: string, body: unknown) => { status: number; body: TagReply }) {
  const fetchFn = async (url: string, init?: RequestInit) => {
    const path = new URL(url).pathname;
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    const { status, body: reply } = handler(path, body);
    return new Response(JSON.stringify(reply), { status });
  };
  return new ApiClient("http://test", fetchFn as typeof fetch);
}

const kb: KbDoc = {
  concepts: [
    { name: "Appliance", isa: "Objects" },
    { name: "Fridge", isa: "Appliance", properties: { height: 1.8, width: 0.7, length: 0.7 } },
    { name: "MiniFridge", isa: "Fridge", properties: { height: 0.85, width: 0.5, length: 0.5 } },
    { name: "Wall", isa: "StructuralElements" },
  ],
};

describe("relativePose", () => {
  it("is the identity for a robot at the origin", () => {
    expect(relativePose([0, 0, 0], 2, 3)).toEqual([2, 3, 0]);
  });

  it("rotates into the robot frame", () => {
    // robot at (1, 1) facing +y; a point one meter ahead is (2, 0, ...) ... no:
    // ahead means +y in world, which is +x in the robot frame
    const [x, y, theta] = relativePose([1, 1, Math.PI / 2], 1, 2);
    expect(x).toBeCloseTo(1, 12);
    expect(y).toBeCloseTo(0, 12);
    expect(theta).toBeCloseTo(-Math.PI / 2, 12);
  });

  it("round-trips through the forward transform", () => {
    const robot: [number, number, number] = [2.5, -1.25, 0.7];
    const [rx, ry] = relativePose(robot, 4.0, 0.5);
    const c = Math.cos(robot[2]);
    const s = Math.sin(robot[2]);
    expect(robot[0] + c * rx - s * ry).toBeCloseTo(4.0, 12);
    expect(robot[1] + s * rx + c * ry).toBeCloseTo(0.5, 12);
  });
});

describe("nominalDims", () => {
  it("reads dims off the concept", () => {
    expect(nominalDims(kb, "Fridge")).toEqual([1.8, 0.7, 0.7]);
  });

  it("shadows the parent's dims", () => {
    expect(nominalDims(kb, "MiniFridge")).toEqual([0.85, 0.5, 0.5]);
  });

  it("returns null when dims are absent", () => {
    expect(nominalDims(kb, "Wall")).toBeNull();
  });
});

describe("SessionController", () => {
  it("stores accepted tags with green markers", async () => {
    const api = fakeApi(() => ({ status: 200, body: { status: "accepted" } }));
    const session = new SessionController();
    const tag = session.buildTag("object", "fridge1", "Fridge", [2, 3], { dims: [1.8, 0.7, 0.7] });
    const outcome = await session.submitTag(api, tag, [2, 3]);
    expect(outcome.ok).toBe(true);
    expect(session.markers).toHaveLength(1);
    expect(session.markers[0].status).toBe("accepted");
    expect(session.acceptedTags).toBe(1);
  });

  it("stores dimension-rejected tags with the reason and allows retry", async () => {
    let calls = 0;
    const api = fakeApi(() => {
      calls += 1;
      return calls === 1
        ? { status: 422, body: { status: "rejected", reason: "dimension height out of tolerance" } }
        : { status: 200, body: { status: "accepted" } };
    });
    const session = new SessionController();
    const bad = session.buildTag("object", "fridge1", "Fridge", [2, 3], { dims: [18, 7, 7] });
    const first = await session.submitTag(api, bad, [2, 3]);
    expect(first.ok).toBe(false);
    expect(first.stored).toBe(true);
    expect(session.markers[0].status).toBe("rejected");
    expect(session.markers[0].reason).toContain("height");
    const retry = session.buildTag("object", "fridge1", "Fridge", [2, 3], { dims: [1.8, 0.7, 0.7] });
    const second = await session.submitTag(api, retry, [2, 3]);
    expect(second.ok).toBe(true);
    expect(session.recordCount).toBe(2); // both in the log: replay reproduces the rejection
  });

  it("does not store refused tags (label conflicts)", async () => {
    const api = fakeApi(() => ({
      status: 422,
      body: { error: "DuplicateLabel", message: "label 'x1' already tagged as Fridge" },
    }));
    const session = new SessionController();
    const tag = session.buildTag("object", "x1", "Table", [1, 1], { dims: [1, 1, 1] });
    const outcome = await session.submitTag(api, tag, [1, 1]);
    expect(outcome.stored).toBe(false);
    expect(session.recordCount).toBe(0);
    expect(session.markers).toHaveLength(0);
  });

  it("exports a replayable JSON Lines log", async () => {
    const api = fakeApi(() => ({ status: 200, body: { status: "accepted" } }));
    const session = new SessionController();
    await session.submitOdom(api, [1, 2, 0.5]);
    const tag = session.buildTag("area", "kitchen", "Kitchen", [3, 4]);
    await session.submitTag(api, tag, [3, 4]);
    const lines = session.exportLogJsonl().trim().split("\n");
    expect(lines).toHaveLength(2);
    const odom = JSON.parse(lines[0]);
    expect(odom).toMatchObject({ v: 1, type: "odom", seq: 1, pose: [1, 2, 0.5] });
    const area = JSON.parse(lines[1]);
    expect(area).toMatchObject({ v: 1, type: "tag", seq: 2, kind: "area", label: "kitchen" });
    expect(area.dims).toBeUndefined();
  });

  it("tracks the robot pose through odometry", async () => {
    const api = fakeApi(() => ({ status: 200, body: { status: "recorded" } }));
    const session = new SessionController();
    await session.submitOdom(api, [5, 6, 1]);
    expect(session.robotPose).toEqual([5, 6, 1]);
    const tag = session.buildTag("object", "box1", "Fridge", [6, 6], { dims: [1, 1, 1] });
    expect(tag.robot_pose).toEqual([5, 6, 1]);
  });
});
