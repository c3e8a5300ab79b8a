// @vitest-environment jsdom
/** Scripted browser round trip against the recorded service session:
 * create the default field, start a simulation, inject an Attack, and watch
 * the alarm feed fill — the console driven through real DOM events, the
 * service answered from the recorded fixture. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { beforeEach, describe, expect, it } from "vitest";

import { mountApp, type AppHandle, type StreamHandlers } from "../src/app.js";
import { ServiceClient } from "../src/client.js";

interface RecordedHttp {
  method: string;
  path: string;
  body: unknown;
  status: number;
  response: unknown;
}

interface Fixture {
  http: RecordedHttp[];
  messages: Array<Record<string, unknown>>;
}

const fixture: Fixture = JSON.parse(
  readFileSync(join(process.cwd(), "test", "fixtures", "attack_run.json"), "utf-8"),
);

/** Answers requests with the fixture's recorded responses for that route. */
function fixtureFetch(log: Array<{ method: string; path: string; body: unknown }>) {
  return async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const path = new URL(url).pathname + new URL(url).search;
    log.push({
      method,
      path,
      body: init?.body === undefined ? undefined : JSON.parse(String(init.body)),
    });
    const recorded = fixture.http.find((h) => h.method === method && h.path === path);
    if (recorded === undefined) {
      return new Response(JSON.stringify({ detail: `unrecorded route ${method} ${path}` }), {
        status: 404,
        headers: { "content-type": "application/json" },
      });
    }
    return new Response(JSON.stringify(recorded.response), {
      status: recorded.status,
      headers: { "content-type": "application/json" },
    });
  };
}

class FakeStream {
  handlers: StreamHandlers | null = null;
  connectCount = 0;
  closed = 0;

  connector = (_url: string, handlers: StreamHandlers) => {
    this.handlers = handlers;
    this.connectCount += 1;
    return { close: () => { this.closed += 1; } };
  };

  open(): void {
    this.handlers!.onOpen();
  }

  emit(message: unknown): void {
    this.handlers!.onMessage(message);
  }

  drop(): void {
    this.handlers!.onClose();
  }
}

function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

function submit(form: HTMLFormElement): void {
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

describe("operator console round trip", () => {
  let root: HTMLElement;
  let stream: FakeStream;
  let app: AppHandle;
  let requests: Array<{ method: string; path: string; body: unknown }>;

  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>';
    root = document.getElementById("app")!;
    stream = new FakeStream();
    requests = [];
    app = mountApp(root, {
      client: new ServiceClient("http://svc.test:8099", fixtureFetch(requests)),
      connect: stream.connector,
    });
  });

  it("walks create → start → inject Attack → alarm in the feed", async () => {
    // until the stream is open the start control is locked
    const start = root.querySelector<HTMLButtonElement>("#start-sim")!;
    expect(start.disabled).toBe(true);
    stream.open();
    expect(start.disabled).toBe(false);

    // connection snapshot draws the field
    stream.emit(fixture.messages[0]);
    expect(root.querySelectorAll("#field .node.sensornode")).toHaveLength(144);
    expect(root.querySelectorAll("#field .node.gateway")).toHaveLength(9);
    expect(root.querySelectorAll("#field .node.sink")).toHaveLength(1);
    expect(root.querySelectorAll("#field .lead")).toHaveLength(153);

    // operator creates the default 3x4x10 field
    submit(root.querySelector<HTMLFormElement>("#topology-form")!);
    await flush();
    expect(requests).toEqual([
      {
        method: "POST",
        path: "/topology",
        body: { clustersPerSide: 3, nodesPerClusterSide: 4, nodeSpacing: 10, gatewayHops: false },
      },
    ]);
    stream.emit(fixture.messages.find((m) => m.type === "topology")!);
    expect(root.querySelectorAll("#field .node")).toHaveLength(154);

    // operator starts ambient animal traffic on repeat
    const simForm = root.querySelector<HTMLFormElement>("#sim-form")!;
    (simForm.elements.namedItem("repeat") as HTMLInputElement).checked = true;
    (simForm.elements.namedItem("ticks") as HTMLInputElement).value = "160";
    submit(simForm);
    await flush();
    expect(requests[1]).toEqual({
      method: "POST",
      path: "/simulations",
      body: {
        repeat: true,
        ticks: 160,
        events: [{ tick: 0, kind: "Entity", entityType: "Animal" }],
      },
    });

    // stream reports the run; stop/inject unlock
    stream.emit({ v: 1, type: "state", simId: "sim-1", tick: -1, state: "Running" });
    expect(root.querySelector<HTMLButtonElement>("#start-sim")!.disabled).toBe(true);
    expect(root.querySelector<HTMLButtonElement>("#stop-sim")!.disabled).toBe(false);
    const inject = root.querySelector<HTMLButtonElement>("#inject-event")!;
    expect(inject.disabled).toBe(false);

    // operator injects an Attack mid-run
    const injectForm = root.querySelector<HTMLFormElement>("#inject-form")!;
    (injectForm.elements.namedItem("kind") as HTMLSelectElement).value = "Attack";
    submit(injectForm);
    await flush();
    expect(requests[2]).toEqual({
      method: "POST",
      path: "/simulations/sim-1/events",
      body: { tick: 0, kind: "Attack" },
    });

    // before any action the feed shows its placeholder
    expect(root.querySelector("#alarm-feed .placeholder")!.textContent).toBe("no alarms");

    // replay the rest of the recorded run
    for (const message of fixture.messages.slice(1)) {
      stream.emit(message);
    }

    const items = [...root.querySelectorAll("#alarm-feed li")];
    expect(items.length).toBeGreaterThanOrEqual(1);
    expect(root.querySelector("#alarm-feed .placeholder")).toBeNull();
    const alarmItems = root.querySelectorAll("#alarm-feed li.alarm");
    expect(alarmItems.length).toBeGreaterThanOrEqual(1);
    // newest first: the first feed row is the latest Alarm from the fixture
    expect(items[0]!.textContent).toContain("Alarm Vehicle");
    expect(items[0]!.textContent).toContain("[tick 4]");
    expect(app.vm().alarms.filter((a) => a.actionKind === "Alarm").length)
      .toBeGreaterThanOrEqual(1);

    // run finished: inject/stop lock again, start unlocks
    expect(root.querySelector<HTMLElement>("#sim-status")!.textContent).toContain("Finished");
    expect(root.querySelector<HTMLButtonElement>("#inject-event")!.disabled).toBe(true);
    expect(root.querySelector<HTMLButtonElement>("#stop-sim")!.disabled).toBe(true);
    expect(root.querySelector<HTMLButtonElement>("#start-sim")!.disabled).toBe(false);
  });

  it("shows detection markers while entities are in range", () => {
    stream.open();
    stream.emit(fixture.messages[0]);
    const detections = fixture.messages.find((m) => m.type === "detections")!;
    stream.emit(detections);
    const markers = root.querySelectorAll("#field .marker");
    expect(markers.length).toBeGreaterThan(0);
    const hot = root.querySelectorAll("#field .node.hot");
    expect(hot.length).toBe((detections.items as unknown[]).length);
  });

  it("stop control issues the documented stop call", async () => {
    stream.open();
    stream.emit(fixture.messages[0]);
    submit(root.querySelector<HTMLFormElement>("#sim-form")!);
    await flush();
    stream.emit({ v: 1, type: "state", simId: "sim-1", tick: 0, state: "Running" });
    root.querySelector<HTMLButtonElement>("#stop-sim")!.click();
    await flush();
    expect(requests.at(-1)).toEqual({
      method: "POST",
      path: "/simulations/sim-1/stop",
      body: undefined,
    });
  });

  it("drops non-v1 traffic without touching the view", () => {
    stream.open();
    stream.emit(fixture.messages[0]);
    const before = JSON.stringify(app.vm());
    stream.emit({ v: 2, type: "action", simId: "x", tick: 0, state: "Running", item: {} });
    stream.emit({ v: 1, type: "ack", command: "start" });
    stream.emit("not json shaped");
    expect(JSON.stringify(app.vm())).toBe(before);
  });

  it("connection drop raises the banner; retry reconnects", () => {
    stream.open();
    const banner = root.querySelector<HTMLElement>("#banner")!;
    expect(banner.hidden).toBe(true);
    stream.drop();
    expect(banner.hidden).toBe(false);
    expect(root.querySelector<HTMLElement>("#conn")!.textContent).toBe("closed");

    root.querySelector<HTMLButtonElement>("#retry")!.click();
    expect(stream.connectCount).toBe(2);
    stream.open();
    expect(banner.hidden).toBe(true);
    // fresh snapshot rebuilds the field after reconnect
    stream.emit(fixture.messages[0]);
    expect(root.querySelectorAll("#field .node")).toHaveLength(154);
  });

  it("surfaces service errors inline", async () => {
    stream.open();
    stream.emit(fixture.messages[0]);
    stream.emit({ v: 1, type: "state", simId: "sim-9", tick: 0, state: "Running" });
    // sim-9 has no recorded routes: the fake service answers 404 with detail
    submit(root.querySelector<HTMLFormElement>("#inject-form")!);
    await flush();
    expect(root.querySelector<HTMLElement>("#error")!.textContent).toContain("unrecorded route");
  });
});
