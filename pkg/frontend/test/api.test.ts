import { describe, expect, it } from "vitest";

import { ApiError, BrokerApi, FetchLike } from "../src/api.js";
import { fixtures } from "./fixtures.js";

interface Call {
  url: string;
  method: string;
  headers: Record<string, string>;
  body?: string;
}

function stub(status: number, payload: unknown): {
  calls: Call[];
  fetchImpl: FetchLike;
} {
  const calls: Call[] = [];
  const fetchImpl: FetchLike = async (url, init) => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      headers: (init?.headers ?? {}) as Record<string, string>,
      body: init?.body as string | undefined,
    });
    return new Response(JSON.stringify(payload), { status });
  };
  return { calls, fetchImpl };
}

const BASE = "http://broker.test";

describe("BrokerApi", () => {
  it("sends the recorded subscribe request body byte for byte", async () => {
    const { calls, fetchImpl } = stub(201, { sub_id: "S" });
    const api = new BrokerApi(BASE, { fetchImpl });
    const doc = JSON.parse(fixtures.subscription_S);
    const result = await api.subscribe("cli-000000000001", doc);
    expect(result.sub_id).toBe("S");
    expect(calls[0]!.url).toBe(`${BASE}/subscriptions`);
    expect(calls[0]!.method).toBe("POST");
    expect(calls[0]!.headers["content-type"]).toBe("application/json");
    expect(calls[0]!.body).toBe(fixtures.subscribe_request);
  });

  it("sends the recorded publish request body byte for byte", async () => {
    const { calls, fetchImpl } = stub(201, { event_id: "E", matched_count: 1 });
    const api = new BrokerApi(BASE, { fetchImpl });
    const receipt = await api.publish(
      "cli-000000000001",
      JSON.parse(fixtures.event_E),
    );
    expect(receipt.matched_count).toBe(1);
    expect(calls[0]!.body).toBe(fixtures.publish_request);
  });

  it("drains notifications with an escaped query parameter", async () => {
    const { calls, fetchImpl } = stub(200, { notifications: [] });
    const api = new BrokerApi(BASE, { fetchImpl });
    expect(await api.drain("cli a/b")).toEqual([]);
    expect(calls[0]!.url).toBe(`${BASE}/notifications?client_id=cli%20a%2Fb`);
    expect(calls[0]!.body).toBeUndefined();
  });

  it("attaches the admin token only to admin calls", async () => {
    const { calls, fetchImpl } = stub(200, { mode: "syntactic" });
    const api = new BrokerApi(BASE, { fetchImpl, adminToken: "hush" });
    await api.setMode("syntactic");
    expect(calls[0]!.headers["x-admin-token"]).toBe("hush");
    await api.status();
    expect(calls[1]!.headers["x-admin-token"]).toBeUndefined();
  });

  it("turns error envelopes into ApiError", async () => {
    const { fetchImpl } = stub(409, { error: "duplicate sub_id 'S'" });
    const api = new BrokerApi(BASE, { fetchImpl });
    const attempt = api.subscribe("cli-1", { predicates: [["a", "=", "x"]] });
    await expect(attempt).rejects.toThrowError(ApiError);
    await expect(attempt).rejects.toMatchObject({
      status: 409,
      message: "duplicate sub_id 'S'",
    });
  });

  it("builds stream URLs from the base", () => {
    const api = new BrokerApi(BASE);
    expect(api.streamUrl("cli-9")).toBe(`${BASE}/stream?client_id=cli-9`);
  });
});
