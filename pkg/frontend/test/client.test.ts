/** Each console control maps to exactly one documented service request. */

import { describe, expect, it } from "vitest";

import { ServiceClient, ServiceError } from "../src/client.js";

interface Recorded {
  url: string;
  method: string;
  body: unknown;
}

function fakeService(status = 200, payload: unknown = { ok: true }) {
  const calls: Recorded[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body === undefined ? undefined : JSON.parse(String(init.body)),
    });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "content-type": "application/json" },
    });
  };
  return { calls, fetchFn };
}

const BASE = "http://svc.test:8099";

describe("request mapping", () => {
  it("createTopology → POST /topology with the form body", async () => {
    const svc = fakeService();
    const client = new ServiceClient(BASE, svc.fetchFn);
    await client.createTopology({ clustersPerSide: 3, nodesPerClusterSide: 4, nodeSpacing: 10, gatewayHops: false });
    expect(svc.calls).toEqual([
      {
        url: `${BASE}/topology`,
        method: "POST",
        body: { clustersPerSide: 3, nodesPerClusterSide: 4, nodeSpacing: 10, gatewayHops: false },
      },
    ]);
  });

  it("startSimulation → POST /simulations", async () => {
    const svc = fakeService();
    const client = new ServiceClient(BASE, svc.fetchFn);
    const body = {
      repeat: true,
      ticks: 160,
      events: [{ tick: 0, kind: "Entity" as const, entityType: "Animal" }],
    };
    await client.startSimulation(body);
    expect(svc.calls).toEqual([{ url: `${BASE}/simulations`, method: "POST", body }]);
  });

  it("stopSimulation → POST /simulations/{id}/stop with no body", async () => {
    const svc = fakeService();
    const client = new ServiceClient(BASE, svc.fetchFn);
    await client.stopSimulation("sim-1");
    expect(svc.calls).toEqual([
      { url: `${BASE}/simulations/sim-1/stop`, method: "POST", body: undefined },
    ]);
  });

  it("injectEvent → POST /simulations/{id}/events", async () => {
    const svc = fakeService();
    const client = new ServiceClient(BASE, svc.fetchFn);
    await client.injectEvent("sim-1", { tick: 0, kind: "Attack" });
    expect(svc.calls).toEqual([
      {
        url: `${BASE}/simulations/sim-1/events`,
        method: "POST",
        body: { tick: 0, kind: "Attack" },
      },
    ]);
  });

  it("fetchActions → GET /actions with query params", async () => {
    const svc = fakeService();
    const client = new ServiceClient(BASE, svc.fetchFn);
    await client.fetchActions("sim-1", 10);
    expect(svc.calls).toEqual([
      { url: `${BASE}/actions?simId=sim-1&limit=10`, method: "GET", body: undefined },
    ]);
  });

  it("runQuery → POST /queries/{id}", async () => {
    const svc = fakeService();
    const client = new ServiceClient(BASE, svc.fetchFn);
    await client.runQuery("q3", { concept: "Human", minWeight: 0.9 });
    expect(svc.calls).toEqual([
      {
        url: `${BASE}/queries/q3`,
        method: "POST",
        body: { concept: "Human", minWeight: 0.9 },
      },
    ]);
  });

  it("trims trailing slashes and derives the stream address", () => {
    const client = new ServiceClient("http://svc.test:8099///");
    expect(client.streamUrl()).toBe("ws://svc.test:8099/stream");
    expect(new ServiceClient("https://svc.test").streamUrl()).toBe("wss://svc.test/stream");
  });
});

describe("errors", () => {
  it("surfaces the service's error detail", async () => {
    const svc = fakeService(409, { detail: "simulation sim-1 is still running" });
    const client = new ServiceClient(BASE, svc.fetchFn);
    await expect(client.startSimulation({})).rejects.toThrowError(
      new ServiceError(409, "simulation sim-1 is still running"),
    );
  });

  it("keeps the status line when the error body is not JSON", async () => {
    const fetchFn = async (): Promise<Response> =>
      new Response("boom", { status: 500, statusText: "Internal Server Error" });
    const client = new ServiceClient(BASE, fetchFn);
    await expect(client.createTopology({})).rejects.toMatchObject({ status: 500 });
  });

  it("maps network failure to status 0", async () => {
    const fetchFn = async (): Promise<Response> => {
      throw new TypeError("fetch failed");
    };
    const client = new ServiceClient(BASE, fetchFn);
    await expect(client.fetchActions()).rejects.toMatchObject({ status: 0 });
  });
});
