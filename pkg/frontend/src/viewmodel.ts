/** Pure console state derived from the stream.
 *
 * `applyMessage` is a reducer: the rendered UI is a function of the message
 * sequence (plus connection status), never of client-side simulation. All
 * state is plain JSON data so replay tests can compare snapshots directly.
 */

import type {
  ActionItem,
  LeadEdge,
  SimState,
  StreamMessage,
  TopologyNode,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface HeatEntry {
  acoustic: number;
  seismic: number;
  concept: string;
  tick: number;
}

/** A node that reported a kept detection on the most recent tick. */
export interface Marker {
  node: string;
  x: number;
  y: number;
  concept: string;
  weight: number;
  tick: number;
}

export interface AlarmEntry extends ActionItem {
  simId: string;
}

export interface FieldView {
  nodes: TopologyNode[];
  leadEdges: LeadEdge[];
  areaSide: number;
  /** node name -> index into `nodes` */
  indexByName: Record<string, number>;
}

export interface SimView {
  id: string;
  tick: number;
  state: SimState;
  /** readings sensed on the latest completed tick */
  readings: number;
}

export interface ViewModel {
  connection: ConnectionStatus;
  field: FieldView | null;
  sim: SimView | null;
  /** latest acoustic/seismic evidence per node name */
  heat: Record<string, HeatEntry>;
  markers: Marker[];
  /** newest first */
  alarms: AlarmEntry[];
}

export const ALARM_FEED_CAP = 200;

export function initialState(): ViewModel {
  return {
    connection: "connecting",
    field: null,
    sim: null,
    heat: {},
    markers: [],
    alarms: [],
  };
}

export function connectionChanged(vm: ViewModel, status: ConnectionStatus): ViewModel {
  return { ...vm, connection: status };
}

function simStamp(msg: { simId: string; tick: number; state: SimState }, readings: number): SimView {
  return { id: msg.simId, tick: msg.tick, state: msg.state, readings };
}

function carryReadings(vm: ViewModel, simId: string): number {
  return vm.sim !== null && vm.sim.id === simId ? vm.sim.readings : 0;
}

export function applyMessage(vm: ViewModel, msg: StreamMessage): ViewModel {
  switch (msg.type) {
    case "topology": {
      // A fresh snapshot replaces the field and everything drawn on it;
      // the alarm feed is operator history and survives.
      const indexByName: Record<string, number> = {};
      msg.nodes.forEach((node, i) => {
        indexByName[node.name] = i;
      });
      return {
        ...vm,
        field: {
          nodes: msg.nodes,
          leadEdges: msg.leadEdges,
          areaSide: msg.areaSide,
          indexByName,
        },
        heat: {},
        markers: [],
      };
    }
    case "tick":
      // A tick with no follow-up detections message means nothing was kept:
      // markers clear now and reappear only if evidence arrives.
      return {
        ...vm,
        sim: simStamp(msg, msg.readings),
        markers: [],
      };
    case "detections": {
      const heat = { ...vm.heat };
      const markers: Marker[] = [];
      for (const item of msg.items) {
        heat[item.node] = {
          acoustic: item.acoustic,
          seismic: item.seismic,
          concept: item.concept,
          tick: item.tick,
        };
        const index = vm.field?.indexByName[item.node];
        if (index === undefined) {
          continue; // detection for a node we have no geometry for
        }
        const node = vm.field!.nodes[index]!;
        markers.push({
          node: item.node,
          x: node.x,
          y: node.y,
          concept: item.concept,
          weight: item.weight,
          tick: item.tick,
        });
      }
      return {
        ...vm,
        sim: simStamp(msg, carryReadings(vm, msg.simId)),
        heat,
        markers,
      };
    }
    case "action": {
      const entry: AlarmEntry = { ...msg.item, simId: msg.simId };
      return {
        ...vm,
        sim: simStamp(msg, carryReadings(vm, msg.simId)),
        alarms: [entry, ...vm.alarms].slice(0, ALARM_FEED_CAP),
      };
    }
    case "state":
      return { ...vm, sim: simStamp(msg, carryReadings(vm, msg.simId)) };
  }
}

/** Replay an ordered message sequence from scratch. */
export function replay(messages: StreamMessage[], start?: ViewModel): ViewModel {
  let vm = start ?? initialState();
  for (const msg of messages) {
    vm = applyMessage(vm, msg);
  }
  return vm;
}

export function simRunning(vm: ViewModel): boolean {
  return vm.sim !== null && (vm.sim.state === "Running" || vm.sim.state === "Stopping");
}
