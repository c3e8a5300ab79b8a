"""HTTP control service with a live event stream.

REST endpoints build the sensor field, start/stop simulations, inject
events, run the analysis queries, and expose metrics. `/stream` is a
WebSocket that first sends the current topology and then fan-outs
version-tagged JSON messages (tick, detections, action, state) while a
simulation runs; it also accepts command messages (inject, stop).

Each simulation runs against a freshly built field so runs stay
reproducible; queries always read the most recent store, quiesced between
ticks by a lock shared with the simulation thread.
"""

from __future__ import annotations

import asyncio
import itertools
import threading
import time
from contextlib import asynccontextmanager
from dataclasses import replace
from typing import Any

from fastapi import Body, FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from .config import RunConfig, _parse_event, _parse_topology, default_config
from .datagen import EntityWorld
from .errors import ConfigError, UnknownConcept, WmsnError
from .fusion import SinkFusedRec, SnFusedRec
from .pipeline import Pipeline
from .queries import QUERY_FNS
from .runner import build_field, build_world
from .store import EdgeKind, NodeKind
from .topology import Topology

STREAM_VERSION = 1
CLOSE_GOING_AWAY = 1001

RUNNING = "Running"
STOPPING = "Stopping"
FINISHED = "Finished"
FAILED = "Failed"


# ---------------------------------------------------------------------------
# stream fan-out

class Broadcaster:
    """Thread-safe fan-out of JSON messages to every connected stream."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._subscribers: dict[int, tuple[asyncio.Queue, asyncio.AbstractEventLoop]] = {}
        self._ids = itertools.count(1)

    def register(self, queue: asyncio.Queue, loop: asyncio.AbstractEventLoop) -> int:
        with self._lock:
            sub_id = next(self._ids)
            self._subscribers[sub_id] = (queue, loop)
            return sub_id

    def unregister(self, sub_id: int) -> None:
        with self._lock:
            self._subscribers.pop(sub_id, None)

    def publish(self, message: dict) -> None:
        with self._lock:
            targets = list(self._subscribers.values())
        for queue, loop in targets:
            loop.call_soon_threadsafe(queue.put_nowait, message)


_SHUTDOWN = {"type": "__shutdown__"}


# ---------------------------------------------------------------------------
# simulation bookkeeping

class SimulationRun:
    def __init__(self, sim_id: str, seed: int, ticks: int):
        self.id = sim_id
        self.seed = seed
        self.ticks = ticks
        self.state = RUNNING
        self.tick = -1
        self.error: str | None = None
        self.actions: list[dict] = []
        self.stop_requested = threading.Event()
        self.thread: threading.Thread | None = None
        self.world: EntityWorld | None = None
        self.pipeline: Pipeline | None = None

    def status(self) -> dict:
        body = {
            "id": self.id,
            "state": self.state,
            "tick": self.tick,
            "seed": self.seed,
            "ticks": self.ticks,
            "actionCount": len(self.actions),
        }
        if self.pipeline is not None:
            body["stats"] = self.pipeline.stats.as_dict()
        if self.error is not None:
            body["error"] = self.error
        return body


class ServiceState:
    """Everything the endpoints share: the field, the sim registry, and the
    stream broadcaster."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.broadcaster = Broadcaster()
        self.tick_lock = threading.Lock()
        self.sims: dict[str, SimulationRun] = {}
        self._sim_ids = itertools.count(1)
        self.active: SimulationRun | None = None
        self.topology: Topology = build_field(cfg)

    # -- field ------------------------------------------------------------

    def rebuild_field(self, topo_cfg=None) -> Topology:
        if self.active is not None and self.active.state in (RUNNING, STOPPING):
            raise HTTPException(409, "a simulation is running; stop it first")
        run_cfg = self.cfg if topo_cfg is None else replace(self.cfg, topology=topo_cfg)
        with self.tick_lock:
            self.topology = build_field(run_cfg)
        self.broadcaster.publish(topology_message(self.topology))
        return self.topology

    # -- simulations -------------------------------------------------------

    def start_simulation(self, body: dict) -> SimulationRun:
        if self.active is not None and self.active.state in (RUNNING, STOPPING):
            raise HTTPException(409, f"simulation {self.active.id} is still running")

        allowed = {"seed", "ticks", "events", "repeat"}
        for key in body:
            if key not in allowed:
                raise HTTPException(400, f"unknown field {key!r}")
        seed = body.get("seed", self.cfg.seed)
        ticks = body.get("ticks", self.cfg.simulation.max_ticks)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise HTTPException(400, "seed: expected an integer")
        if not isinstance(ticks, int) or isinstance(ticks, bool) or ticks < 1:
            raise HTTPException(400, "ticks: expected an integer >= 1")
        repeat = body.get("repeat")
        if repeat is not None and not isinstance(repeat, bool):
            raise HTTPException(400, "repeat: expected a boolean")
        events_raw = body.get("events", [])
        if not isinstance(events_raw, list):
            raise HTTPException(400, "events: expected a list")
        extra_events = []
        for i, item in enumerate(events_raw):
            try:
                extra_events.append(_parse_event(item, f"events[{i}]"))
            except ConfigError as exc:
                raise HTTPException(400, str(exc)) from exc

        sim = SimulationRun(f"sim-{next(self._sim_ids)}", seed, ticks)
        with self.tick_lock:
            self.topology = build_field(self.cfg)
        world = build_world(self.topology, self.cfg, seed)
        if repeat is not None:
            world.repeat = repeat
        for event in extra_events:
            world.schedule(event)

        detections: list[dict] = []

        def on_fused(rec: SnFusedRec) -> None:
            detections.append(rec.as_payload())

        def on_action(rec: SinkFusedRec) -> None:
            payload = rec.as_payload()
            sim.actions.append(payload)
            self.broadcaster.publish(
                stream_message("action", sim, tick=rec.tick, item=payload)
            )

        sim.world = world
        sim.pipeline = Pipeline(
            self.topology,
            self.cfg.fusion,
            seed=seed,
            capacities=self.cfg.queues,
            mode="serial",
            on_action=on_action,
            on_fused=on_fused,
        )
        self.sims[sim.id] = sim
        self.active = sim

        interval = self.cfg.service.tick_interval_ms / 1000.0

        def drive() -> None:
            try:
                self.broadcaster.publish(stream_message("state", sim))
                for tick in range(sim.ticks):
                    if sim.stop_requested.is_set():
                        break
                    detections.clear()
                    with self.tick_lock:
                        world.spawn_due(tick)
                        if world.exhausted():
                            break
                        readings = world.sense(tick)
                        sim.pipeline.run_single_tick(tick, readings)
                        world.advance()
                    sim.tick = tick
                    self.broadcaster.publish(
                        stream_message("tick", sim, readings=len(readings))
                    )
                    if detections:
                        self.broadcaster.publish(
                            stream_message("detections", sim, items=list(detections))
                        )
                    if interval > 0:
                        time.sleep(interval)
                sim.state = FINISHED
            except WmsnError as exc:
                sim.state = FAILED
                sim.error = str(exc)
            finally:
                self.broadcaster.publish(stream_message("state", sim))

        sim.thread = threading.Thread(target=drive, name=sim.id, daemon=True)
        sim.thread.start()
        return sim

    def get_sim(self, sim_id: str) -> SimulationRun:
        sim = self.sims.get(sim_id)
        if sim is None:
            raise HTTPException(404, f"no simulation {sim_id!r}")
        return sim

    def stop_simulation(self, sim_id: str) -> SimulationRun:
        sim = self.get_sim(sim_id)
        if sim.state not in (RUNNING, STOPPING):
            raise HTTPException(409, f"simulation {sim_id} is {sim.state}")
        sim.state = STOPPING
        sim.stop_requested.set()
        return sim

    def inject_event(self, sim_id: str, body: dict) -> dict:
        sim = self.get_sim(sim_id)
        if sim.state not in (RUNNING, STOPPING):
            raise HTTPException(409, f"simulation {sim_id} is {sim.state}")
        try:
            event = _parse_event(body, "event")
        except ConfigError as exc:
            raise HTTPException(400, str(exc)) from exc
        with self.tick_lock:
            sim.world.inject(event)
        return {"accepted": True, "event": body}

    def wait_all(self, timeout: float = 30.0) -> None:
        for sim in self.sims.values():
            if sim.thread is not None:
                sim.thread.join(timeout)


# ---------------------------------------------------------------------------
# stream message shapes

def stream_message(msg_type: str, sim: SimulationRun, **extra) -> dict:
    msg = {
        "v": STREAM_VERSION,
        "type": msg_type,
        "simId": sim.id,
        "tick": sim.tick,
        "state": sim.state,
    }
    msg.update(extra)
    return msg


def topology_message(topology: Topology) -> dict:
    store = topology.store
    nodes = []
    for kind in (NodeKind.SINK, NodeKind.GATEWAY, NodeKind.SENSOR_NODE):
        for nid in store.nodes_of_kind(kind):
            x, y = topology.positions[nid]
            nodes.append(
                {
                    "id": nid,
                    "kind": kind.value,
                    "name": store.node_props(nid)["name"],
                    "x": float(x),
                    "y": float(y),
                }
            )
    leads = [
        {"from": from_id, "to": to_id}
        for _, kind, from_id, to_id in store.edges()
        if kind == EdgeKind.LEAD
    ]
    return {
        "v": STREAM_VERSION,
        "type": "topology",
        "nodes": nodes,
        "leadEdges": leads,
        "areaSide": topology.config.area_side,
    }


# ---------------------------------------------------------------------------
# app

def create_app(cfg: RunConfig | None = None) -> FastAPI:
    state = ServiceState(cfg if cfg is not None else default_config())

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        for sim in state.sims.values():
            sim.stop_requested.set()
        state.wait_all()
        state.broadcaster.publish(_SHUTDOWN)

    app = FastAPI(title="wmsngraph", lifespan=lifespan)
    # the browser console may be served from any origin (e.g. a file:// page
    # or a dev server); the service carries no credentials or secrets
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.service = state

    @app.post("/topology", status_code=201)
    def build_topology_endpoint(body: dict = Body(default={})) -> dict:
        try:
            topo_cfg = _parse_topology(body, "") if body else None
        except ConfigError as exc:
            raise HTTPException(400, str(exc)) from exc
        topology = state.rebuild_field(topo_cfg)
        store = topology.store
        return {
            "nodes": store.node_count,
            "edges": store.edge_count,
            "sensors": store.count_nodes(NodeKind.SENSOR_NODE),
            "gateways": store.count_nodes(NodeKind.GATEWAY),
        }

    @app.post("/simulations", status_code=201)
    def start_simulation(body: dict = Body(default={})) -> dict:
        sim = state.start_simulation(body)
        return sim.status()

    @app.get("/simulations/{sim_id}")
    def get_simulation(sim_id: str) -> dict:
        return state.get_sim(sim_id).status()

    @app.post("/simulations/{sim_id}/stop", status_code=202)
    def stop_simulation(sim_id: str) -> dict:
        return state.stop_simulation(sim_id).status()

    @app.post("/simulations/{sim_id}/events", status_code=202)
    def inject_event(sim_id: str, body: dict = Body(...)) -> dict:
        return state.inject_event(sim_id, body)

    @app.get("/actions")
    def list_actions(simId: str | None = None, limit: int = 100) -> dict:
        if simId is not None:
            sims = [state.get_sim(simId)]
        else:
            sims = list(state.sims.values())
        items = [dict(a, simId=sim.id) for sim in sims for a in sim.actions]
        return {"actions": items[-limit:], "total": len(items)}

    @app.post("/queries/{query_id}")
    def run_query(query_id: str, body: dict = Body(default={})) -> dict:
        if query_id not in QUERY_FNS:
            raise HTTPException(404, f"unknown query {query_id!r}")
        allowed = {
            "q1": {"concept", "minWeight"},
            "q2": {"minAcoustic", "chainLen"},
            "q3": {"concept", "minWeight"},
        }[query_id]
        for key in body:
            if key not in allowed:
                raise HTTPException(400, f"unknown parameter {key!r}")
        try:
            with state.tick_lock:
                store = state.topology.store
                if query_id == "q1":
                    rows = QUERY_FNS["q1"](
                        store, body.get("concept", "Vehicle"), body.get("minWeight", 0.9)
                    )
                elif query_id == "q2":
                    rows = QUERY_FNS["q2"](
                        store, body.get("minAcoustic", 15), body.get("chainLen", 3)
                    )
                else:
                    rows = QUERY_FNS["q3"](
                        store, body.get("concept", "Human"), body.get("minWeight", 0.9)
                    )
        except (UnknownConcept, ValueError) as exc:
            raise HTTPException(400, str(exc)) from exc
        return {"query": query_id, "count": len(rows), "rows": [list(r) for r in rows]}

    @app.get("/metrics")
    def metrics() -> dict:
        with state.tick_lock:
            store = state.topology.store
            node_counts = {
                kind.value: store.count_nodes(kind)
                for kind in NodeKind
                if store.count_nodes(kind)
            }
            totals = {"nodes": store.node_count, "edges": store.edge_count}
        return {
            "store": {**totals, "byKind": node_counts},
            "simulations": {sim_id: sim.status() for sim_id, sim in state.sims.items()},
        }

    @app.websocket("/stream")
    async def stream(ws: WebSocket) -> None:
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue()
        sub_id = state.broadcaster.register(queue, asyncio.get_running_loop())
        recv_task: asyncio.Task | None = None
        queue_task: asyncio.Task | None = None
        try:
            with state.tick_lock:
                first = topology_message(state.topology)
            await ws.send_json(first)
            recv_task = asyncio.create_task(ws.receive_json())
            queue_task = asyncio.create_task(queue.get())
            while True:
                done, _ = await asyncio.wait(
                    {recv_task, queue_task}, return_when=asyncio.FIRST_COMPLETED
                )
                if queue_task in done:
                    message = queue_task.result()
                    if message is _SHUTDOWN or message.get("type") == "__shutdown__":
                        await ws.close(code=CLOSE_GOING_AWAY, reason="server shutdown")
                        break
                    await ws.send_json(message)
                    queue_task = asyncio.create_task(queue.get())
                if recv_task in done:
                    try:
                        command = recv_task.result()
                    except WebSocketDisconnect:
                        break
                    reply = handle_command(state, command)
                    await ws.send_json(reply)
                    recv_task = asyncio.create_task(ws.receive_json())
        except WebSocketDisconnect:
            pass
        finally:
            state.broadcaster.unregister(sub_id)
            for task in (recv_task, queue_task):
                if task is not None:
                    task.cancel()

    return app


def handle_command(state: ServiceState, command: Any) -> dict:
    """Commands arriving over the stream socket; mirrors the REST surface."""
    if not isinstance(command, dict) or command.get("type") != "command":
        return {"v": STREAM_VERSION, "type": "error", "message": "expected a command message"}
    name = command.get("command")
    try:
        if name == "start":
            sim = state.start_simulation(command.get("body", {}))
            return {"v": STREAM_VERSION, "type": "ack", "command": name, "simId": sim.id}
        if name == "stop":
            sim_id = command.get("simId") or (state.active.id if state.active else "")
            sim = state.stop_simulation(sim_id)
            return {"v": STREAM_VERSION, "type": "ack", "command": name, "simId": sim.id}
        if name == "inject":
            sim_id = command.get("simId") or (state.active.id if state.active else "")
            state.inject_event(sim_id, command.get("event", {}))
            return {"v": STREAM_VERSION, "type": "ack", "command": name, "simId": sim_id}
    except HTTPException as exc:
        return {"v": STREAM_VERSION, "type": "error", "message": exc.detail}
    return {"v": STREAM_VERSION, "type": "error", "message": f"unknown command {name!r}"}


def serve_forever(cfg: RunConfig, host: str, port: int) -> None:
    import uvicorn

    uvicorn.run(create_app(cfg), host=host, port=port, log_level="info")
