import { describe, expect, it } from "vitest";

import { ApiError, DceClient, FetchLike } from "../src/api.js";
import { FakeService } from "./fakeService.js";

function jsonFetch(status: number, body: unknown): FetchLike {
  return async () =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
}

describe("DceClient", () => {
  it("parses a session start response", async () => {
    const service = new FakeService();
    const client = new DceClient("http://fake", service.fetch);
    const session = await client.startSession("svy-1");
    expect(session.session_id).toBe("svy-1.sess-1");
    expect(session.choice_set.total_sets).toBe(3);
    expect(session.choice_set.alternatives).toHaveLength(3);
  });

  it("turns error statuses into ApiError with the service detail", async () => {
    const client = new DceClient(
      "http://fake",
      jsonFetch(422, { detail: "too few sets: 3 sets ..." }),
    );
    await expect(client.createDesign({} as never)).rejects.toMatchObject({
      name: "ApiError",
      status: 422,
      detail: expect.stringContaining("too few sets"),
    });
  });

  it("joins list-valued validation details", async () => {
    const client = new DceClient(
      "http://fake",
      jsonFetch(422, { detail: ["first problem", "second problem"] }),
    );
    try {
      await client.createDesign({} as never);
      expect.unreachable();
    } catch (err) {
      expect((err as ApiError).detail).toBe("first problem; second problem");
    }
  });

  it("rejects well-formed but schema-invalid payloads", async () => {
    const client = new DceClient(
      "http://fake",
      jsonFetch(200, { nothing: "useful" }),
    );
    await expect(client.getSurvey("svy-1")).rejects.toThrow();
  });

  it("handles non-JSON error bodies", async () => {
    const client = new DceClient(
      "http://fake",
      async () => new Response("gateway timeout", { status: 504 }),
    );
    await expect(client.getSurvey("svy-1")).rejects.toMatchObject({
      status: 504,
      detail: "gateway timeout",
    });
  });

  it("fetches responses as raw CSV text", async () => {
    const csv = "gid,respondent,alt,choice\n1,1,1,1\n";
    const client = new DceClient(
      "http://fake",
      async () => new Response(csv, { status: 200 }),
    );
    expect(await client.getResponsesCsv("svy-1")).toBe(csv);
  });
});
