/** HTTP client for the control service.
 *
 * Every console control maps to exactly one of these methods, and every
 * method issues exactly one documented request — nothing undocumented goes
 * over the wire.
 */

export interface TopologyForm {
  clustersPerSide?: number;
  nodesPerClusterSide?: number;
  nodeSpacing?: number;
  gatewayHops?: boolean;
}

export interface TopologyCounts {
  nodes: number;
  edges: number;
  sensors: number;
  gateways: number;
}

export interface EventBody {
  tick: number;
  kind: "Attack" | "Smuggling" | "Entity";
  entityType?: string;
  speed?: number;
}

export interface StartBody {
  seed?: number;
  ticks?: number;
  repeat?: boolean;
  events?: EventBody[];
}

export interface SimStatus {
  id: string;
  state: string;
  tick: number;
  seed: number;
  ticks: number;
  actionCount: number;
  stats?: Record<string, number>;
  error?: string;
}

export interface ActionsPage {
  actions: Array<Record<string, unknown>>;
  total: number;
}

export interface QueryResult {
  query: string;
  count: number;
  rows: unknown[][];
}

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ServiceError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    // default to the ambient fetch, bound so browsers keep their receiver
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  /** ws:// or wss:// address of the event stream for this service. */
  streamUrl(): string {
    return this.base.replace(/^http/, "ws") + "/stream";
  }

  async createTopology(form: TopologyForm): Promise<TopologyCounts> {
    return this.request("POST", "/topology", form);
  }

  async startSimulation(body: StartBody): Promise<SimStatus> {
    return this.request("POST", "/simulations", body);
  }

  async getSimulation(simId: string): Promise<SimStatus> {
    return this.request("GET", `/simulations/${encodeURIComponent(simId)}`);
  }

  async stopSimulation(simId: string): Promise<SimStatus> {
    return this.request("POST", `/simulations/${encodeURIComponent(simId)}/stop`);
  }

  async injectEvent(simId: string, event: EventBody): Promise<unknown> {
    return this.request("POST", `/simulations/${encodeURIComponent(simId)}/events`, event);
  }

  async fetchActions(simId?: string, limit?: number): Promise<ActionsPage> {
    const params = new URLSearchParams();
    if (simId !== undefined) params.set("simId", simId);
    if (limit !== undefined) params.set("limit", String(limit));
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    return this.request("GET", `/actions${suffix}`);
  }

  async runQuery(queryId: "q1" | "q2" | "q3", params: Record<string, unknown>): Promise<QueryResult> {
    return this.request("POST", `/queries/${queryId}`, params);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ServiceError(0, `service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = `${response.status} ${response.statusText}`;
      try {
        const payload = (await response.json()) as { detail?: unknown };
        if (typeof payload.detail === "string") detail = payload.detail;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ServiceError(response.status, detail);
    }
    return (await response.json()) as T;
  }
}
