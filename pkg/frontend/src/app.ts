/** DOM console: topology builder, simulation controls, live field, alarm feed.
 *
 * One rendering loop consumes an ordered message queue fed by the stream
 * connection; controls call the HTTP client and never mutate view state
 * directly — everything rendered comes back over the stream.
 */

import { ServiceClient, ServiceError, type EventBody } from "./client.js";
import { parseMessage } from "./protocol.js";
import {
  applyMessage,
  connectionChanged,
  initialState,
  simRunning,
  type AlarmEntry,
  type ViewModel,
} from "./viewmodel.js";

export interface StreamHandlers {
  onOpen(): void;
  /** `data` is the decoded JSON payload of one websocket message. */
  onMessage(data: unknown): void;
  onClose(): void;
}

export interface StreamHandle {
  close(): void;
}

export type StreamConnector = (url: string, handlers: StreamHandlers) => StreamHandle;

/** Production connector over the browser WebSocket. */
export const webSocketConnector: StreamConnector = (url, handlers) => {
  const socket = new WebSocket(url);
  socket.onopen = () => handlers.onOpen();
  socket.onmessage = (event) => {
    let data: unknown;
    try {
      data = JSON.parse(String(event.data));
    } catch {
      return; // not JSON: drop
    }
    handlers.onMessage(data);
  };
  socket.onclose = () => handlers.onClose();
  return { close: () => socket.close() };
};

export interface AppOptions {
  client: ServiceClient;
  connect: StreamConnector;
  streamUrl?: string;
}

export interface AppHandle {
  /** current view model (for tests) */
  vm(): ViewModel;
  reconnect(): void;
}

const ENTITY_TYPES = ["Animal", "Human", "Vehicle", "GroupOfHuman", "GroupOfAnimal"];

export function formatAlarm(entry: AlarmEntry): string {
  return `[tick ${entry.tick}] ${entry.actionKind} ${entry.concept} @ ${entry.sourceNode}` +
    ` via ${entry.sourceGateway} (w=${entry.weight.toFixed(2)})`;
}

export function mountApp(root: HTMLElement, opts: AppOptions): AppHandle {
  const streamUrl = opts.streamUrl ?? opts.client.streamUrl();
  let vm = initialState();
  let lastSimId: string | null = null;
  let handle: StreamHandle | null = null;

  root.innerHTML = `
    <div class="console">
      <div id="banner" class="banner" hidden>
        <span>connection failed</span>
        <button id="retry" type="button">Retry</button>
      </div>
      <header>
        <span id="conn">connecting</span>
        <span id="sim-status">no simulation</span>
        <span id="error" class="error"></span>
      </header>
      <main class="layout">
        <svg id="field" xmlns="http://www.w3.org/2000/svg"></svg>
        <aside>
          <form id="topology-form">
            <h2>Field</h2>
            <label>clusters/side <input name="clustersPerSide" type="number" value="3" min="1"></label>
            <label>nodes/cluster side <input name="nodesPerClusterSide" type="number" value="4" min="1"></label>
            <label>spacing <input name="nodeSpacing" type="number" value="10" step="0.5" min="1"></label>
            <label>gateway hops <input name="gatewayHops" type="checkbox"></label>
            <button id="create-topology" type="submit">Create topology</button>
          </form>
          <form id="sim-form">
            <h2>Simulation</h2>
            <label>entity <select name="entityType">
              <option value="">none</option>
              ${ENTITY_TYPES.map((t) => `<option${t === "Animal" ? " selected" : ""}>${t}</option>`).join("")}
            </select></label>
            <label>speed <input name="speed" type="number" min="1" placeholder="default"></label>
            <label>ticks <input name="ticks" type="number" value="200" min="1"></label>
            <label>repeat <input name="repeat" type="checkbox"></label>
            <button id="start-sim" type="submit">Start</button>
            <button id="stop-sim" type="button" disabled>Stop</button>
          </form>
          <form id="inject-form">
            <h2>Inject event</h2>
            <label>kind <select name="kind">
              <option>Attack</option>
              <option>Smuggling</option>
              <option>Entity</option>
            </select></label>
            <label>entity <select name="entityType">
              ${ENTITY_TYPES.map((t) => `<option>${t}</option>`).join("")}
            </select></label>
            <button id="inject-event" type="submit" disabled>Inject</button>
          </form>
          <section>
            <h2>Alarm feed</h2>
            <ol id="alarm-feed"><li class="placeholder">no alarms</li></ol>
          </section>
        </aside>
      </main>
    </div>`;

  const el = {
    banner: root.querySelector<HTMLElement>("#banner")!,
    retry: root.querySelector<HTMLButtonElement>("#retry")!,
    conn: root.querySelector<HTMLElement>("#conn")!,
    simStatus: root.querySelector<HTMLElement>("#sim-status")!,
    error: root.querySelector<HTMLElement>("#error")!,
    field: root.querySelector<SVGSVGElement>("#field")!,
    topologyForm: root.querySelector<HTMLFormElement>("#topology-form")!,
    simForm: root.querySelector<HTMLFormElement>("#sim-form")!,
    injectForm: root.querySelector<HTMLFormElement>("#inject-form")!,
    start: root.querySelector<HTMLButtonElement>("#start-sim")!,
    stop: root.querySelector<HTMLButtonElement>("#stop-sim")!,
    inject: root.querySelector<HTMLButtonElement>("#inject-event")!,
    feed: root.querySelector<HTMLOListElement>("#alarm-feed")!,
  };

  // -- rendering -----------------------------------------------------------

  function renderField(): void {
    const svg = el.field;
    while (svg.firstChild) svg.removeChild(svg.firstChild);
    const field = vm.field;
    if (field === null) return;
    const margin = 10;
    svg.setAttribute("viewBox", `${-margin} ${-margin} ${field.areaSide + 2 * margin} ${field.areaSide + 2 * margin}`);

    const ns = "http://www.w3.org/2000/svg";
    const byId = new Map(field.nodes.map((n) => [n.id, n]));
    for (const edge of field.leadEdges) {
      const a = byId.get(edge.from);
      const b = byId.get(edge.to);
      if (!a || !b) continue;
      const line = document.createElementNS(ns, "line");
      line.setAttribute("x1", String(a.x));
      line.setAttribute("y1", String(a.y));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y));
      line.setAttribute("class", "lead");
      svg.appendChild(line);
    }
    const hotNodes = new Set(vm.markers.map((m) => m.node));
    for (const node of field.nodes) {
      const circle = document.createElementNS(ns, "circle");
      circle.setAttribute("cx", String(node.x));
      circle.setAttribute("cy", String(node.y));
      circle.setAttribute("r", node.kind === "SensorNode" ? "1.2" : "2.4");
      const hot = hotNodes.has(node.name) ? " hot" : "";
      circle.setAttribute("class", `node ${node.kind.toLowerCase()}${hot}`);
      const heat = vm.heat[node.name];
      const title = document.createElementNS(ns, "title");
      title.textContent = heat === undefined
        ? node.name
        : `${node.name} ${heat.concept} a=${heat.acoustic} s=${heat.seismic} t=${heat.tick}`;
      circle.appendChild(title);
      svg.appendChild(circle);
    }
    for (const marker of vm.markers) {
      const ring = document.createElementNS(ns, "circle");
      ring.setAttribute("cx", String(marker.x));
      ring.setAttribute("cy", String(marker.y));
      ring.setAttribute("r", "3");
      ring.setAttribute("class", `marker concept-${marker.concept.toLowerCase()}`);
      svg.appendChild(ring);
    }
  }

  function renderStatus(): void {
    el.conn.textContent = vm.connection;
    el.banner.hidden = vm.connection !== "closed";
    if (vm.sim === null) {
      el.simStatus.textContent = "no simulation";
    } else {
      el.simStatus.textContent =
        `${vm.sim.id}: ${vm.sim.state} tick=${vm.sim.tick} readings=${vm.sim.readings}`;
    }
    const running = simRunning(vm);
    el.start.disabled = running || vm.connection !== "open";
    el.stop.disabled = !running;
    el.inject.disabled = !running;
  }

  function renderAlarms(): void {
    const feed = el.feed;
    while (feed.firstChild) feed.removeChild(feed.firstChild);
    if (vm.alarms.length === 0) {
      const li = document.createElement("li");
      li.className = "placeholder";
      li.textContent = "no alarms";
      feed.appendChild(li);
      return;
    }
    for (const entry of vm.alarms) {
      const li = document.createElement("li");
      li.className = entry.actionKind === "Alarm" ? "alarm" : "notify";
      li.textContent = formatAlarm(entry);
      feed.appendChild(li);
    }
  }

  function render(): void {
    renderField();
    renderStatus();
    renderAlarms();
  }

  // -- message pump ----------------------------------------------------------

  const queue: unknown[] = [];
  let draining = false;

  function pump(): void {
    if (draining) return;
    draining = true;
    try {
      while (queue.length > 0) {
        const raw = queue.shift();
        const msg = parseMessage(raw);
        if (msg === null) continue;
        vm = applyMessage(vm, msg);
        if (vm.sim !== null) lastSimId = vm.sim.id;
      }
    } finally {
      draining = false;
    }
    render();
  }

  // -- controls --------------------------------------------------------------

  function showError(err: unknown): void {
    el.error.textContent = err instanceof ServiceError ? err.message : String(err);
  }

  function clearError(): void {
    el.error.textContent = "";
  }

  function numberValue(form: HTMLFormElement, name: string): number | undefined {
    const input = form.elements.namedItem(name) as HTMLInputElement | null;
    if (input === null || input.value === "") return undefined;
    const value = Number(input.value);
    return Number.isFinite(value) ? value : undefined;
  }

  el.topologyForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const form = el.topologyForm;
    const hops = (form.elements.namedItem("gatewayHops") as HTMLInputElement).checked;
    opts.client
      .createTopology({
        clustersPerSide: numberValue(form, "clustersPerSide"),
        nodesPerClusterSide: numberValue(form, "nodesPerClusterSide"),
        nodeSpacing: numberValue(form, "nodeSpacing"),
        gatewayHops: hops,
      })
      .then(clearError, showError);
  });

  el.simForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const form = el.simForm;
    const entityType = (form.elements.namedItem("entityType") as HTMLSelectElement).value;
    const repeat = (form.elements.namedItem("repeat") as HTMLInputElement).checked;
    const body: Parameters<ServiceClient["startSimulation"]>[0] = { repeat };
    const ticks = numberValue(form, "ticks");
    if (ticks !== undefined) body.ticks = ticks;
    if (entityType !== "") {
      const entityEvent: EventBody = { tick: 0, kind: "Entity", entityType };
      const speed = numberValue(form, "speed");
      if (speed !== undefined) entityEvent.speed = speed;
      body.events = [entityEvent];
    }
    opts.client.startSimulation(body).then((status) => {
      lastSimId = status.id;
      clearError();
    }, showError);
  });

  el.stop.addEventListener("click", () => {
    if (lastSimId === null) return;
    opts.client.stopSimulation(lastSimId).then(clearError, showError);
  });

  el.injectForm.addEventListener("submit", (event) => {
    event.preventDefault();
    if (lastSimId === null) return;
    const form = el.injectForm;
    const kind = (form.elements.namedItem("kind") as HTMLSelectElement).value as EventBody["kind"];
    const body: EventBody = { tick: 0, kind };
    if (kind === "Entity") {
      body.entityType = (form.elements.namedItem("entityType") as HTMLSelectElement).value;
    }
    opts.client.injectEvent(lastSimId, body).then(clearError, showError);
  });

  // -- stream lifecycle --------------------------------------------------------

  function doConnect(): void {
    vm = connectionChanged(vm, "connecting");
    render();
    handle = opts.connect(streamUrl, {
      onOpen() {
        vm = connectionChanged(vm, "open");
        render();
      },
      onMessage(data) {
        queue.push(data);
        pump();
      },
      onClose() {
        vm = connectionChanged(vm, "closed");
        render();
      },
    });
  }

  el.retry.addEventListener("click", () => {
    handle?.close();
    doConnect();
  });

  doConnect();
  render();

  return {
    vm: () => vm,
    reconnect: () => {
      handle?.close();
      doConnect();
    },
  };
}
