/** Wire types for the control service's v1 JSON interfaces.
 *
 * The console consumes exactly two surfaces: the REST routes (see
 * `client.ts`) and the `/stream` WebSocket whose messages are all tagged
 * `{"v": 1, "type": ...}`. Anything that is not a well-formed v1 message is
 * rejected by `parseMessage` and never reaches the view model.
 */

export const STREAM_VERSION = 1;

export type NodeKind = "Sink" | "Gateway" | "SensorNode";

export interface TopologyNode {
  id: number;
  kind: NodeKind;
  name: string;
  x: number;
  y: number;
}

export interface LeadEdge {
  from: number;
  to: number;
}

/** First message on every stream connection, and re-sent whenever the field
 * is rebuilt. */
export interface TopologyMessage {
  v: typeof STREAM_VERSION;
  type: "topology";
  nodes: TopologyNode[];
  leadEdges: LeadEdge[];
  areaSide: number;
}

export type SimState = "Running" | "Stopping" | "Finished" | "Failed";

interface SimStamped {
  v: typeof STREAM_VERSION;
  simId: string;
  tick: number;
  state: SimState;
}

export interface TickMessage extends SimStamped {
  type: "tick";
  /** readings sensed during this tick */
  readings: number;
}

/** One classified record a gateway kept (level-2 output). */
export interface DetectionItem {
  node: string;
  tick: number;
  concept: string;
  weight: number;
  acoustic: number;
  seismic: number;
  videoPath: string;
}

export interface DetectionsMessage extends SimStamped {
  type: "detections";
  items: DetectionItem[];
}

/** A sink-level action (level-3 output). */
export interface ActionItem {
  tick: number;
  concept: string;
  weight: number;
  actionKind: "Alarm" | "Notify";
  sourceGateway: string;
  sourceNode: string;
  acoustic: number;
}

export interface ActionMessage extends SimStamped {
  type: "action";
  item: ActionItem;
}

export interface StateMessage extends SimStamped {
  type: "state";
}

export type StreamMessage =
  | TopologyMessage
  | TickMessage
  | DetectionsMessage
  | ActionMessage
  | StateMessage;

const SIM_STATES: readonly string[] = ["Running", "Stopping", "Finished", "Failed"];

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function isStamped(msg: Record<string, unknown>): boolean {
  return (
    typeof msg.simId === "string" &&
    typeof msg.tick === "number" &&
    typeof msg.state === "string" &&
    SIM_STATES.includes(msg.state)
  );
}

/** Narrow a decoded JSON value to a v1 stream message; anything else
 * (unknown version, unknown type, command acks, malformed shapes) yields
 * null and is dropped by the caller. */
export function parseMessage(raw: unknown): StreamMessage | null {
  if (!isRecord(raw) || raw.v !== STREAM_VERSION || typeof raw.type !== "string") {
    return null;
  }
  switch (raw.type) {
    case "topology":
      if (Array.isArray(raw.nodes) && Array.isArray(raw.leadEdges) &&
          typeof raw.areaSide === "number") {
        return raw as unknown as TopologyMessage;
      }
      return null;
    case "tick":
      if (isStamped(raw) && typeof raw.readings === "number") {
        return raw as unknown as TickMessage;
      }
      return null;
    case "detections":
      if (isStamped(raw) && Array.isArray(raw.items)) {
        return raw as unknown as DetectionsMessage;
      }
      return null;
    case "action":
      if (isStamped(raw) && isRecord(raw.item)) {
        return raw as unknown as ActionMessage;
      }
      return null;
    case "state":
      if (isStamped(raw)) {
        return raw as unknown as StateMessage;
      }
      return null;
    default:
      return null;
  }
}
