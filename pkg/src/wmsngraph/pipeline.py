"""Queue-connected fusion pipeline with a single-threaded oracle mode.

Four bounded FIFO queues carry data between the stages:

    scalarData (readings) -> fused (sensor-level) -> forward (gateway-level)
    -> action (sink-level)

In threaded mode each stage runs on its own worker; a tick-end marker flows
through every queue so a stage only closes a tick after seeing the complete
batch (the per-tick barrier), and the driver does not start the next tick
until the previous one fully drained. Store writes therefore happen in the
same order as in serial mode, which makes the two modes byte-identical, not
just set-equal.

Producers block when a queue is full; nothing is ever dropped. A put that
stays blocked past a generous timeout raises QueueOverflow, which only
happens if a consumer died.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Iterator, TextIO

from .datagen import EntityWorld, Reading
from .errors import QueueOverflow, UnknownNode
from .fusion import (
    FusionConfig,
    GatewayStage,
    GwFusedRec,
    RelayStage,
    SensorStage,
    SinkFusedRec,
    SinkStage,
    SnFusedRec,
)
from .store import GraphStore, NodeKind
from .topology import Topology

PUT_TIMEOUT_S = 60.0


class BoundedQueue:
    """FIFO with a hard capacity; puts block rather than drop."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("queue capacity must be >= 1")
        self.capacity = capacity
        self._q: queue.Queue = queue.Queue(maxsize=capacity)

    def put(self, item, timeout: float = PUT_TIMEOUT_S) -> None:
        try:
            self._q.put(item, block=True, timeout=timeout)
        except queue.Full:
            raise QueueOverflow(
                f"queue stayed full for {timeout}s (capacity {self.capacity})"
            ) from None

    def get(self, timeout: float | None = None):
        return self._q.get(block=True, timeout=timeout)

    def __len__(self) -> int:
        return self._q.qsize()


@dataclass(frozen=True)
class QueueCapacities:
    scalar_data: int = 1024
    fused: int = 1024
    forward: int = 1024
    action: int = 1024


@dataclass
class QueueSet:
    scalar_data: BoundedQueue
    fused: BoundedQueue
    forward: BoundedQueue
    action: BoundedQueue

    @classmethod
    def create(cls, caps: QueueCapacities) -> "QueueSet":
        return cls(
            scalar_data=BoundedQueue(caps.scalar_data),
            fused=BoundedQueue(caps.fused),
            forward=BoundedQueue(caps.forward),
            action=BoundedQueue(caps.action),
        )


@dataclass
class PipelineStats:
    ticks: int = 0
    readings: int = 0
    fused: int = 0
    batches: int = 0
    kept: int = 0
    dropped: int = 0
    forwarded: int = 0
    actions: int = 0

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


@dataclass(frozen=True)
class TickEnd:
    tick: int


class _Stop:
    def __repr__(self):
        return "<stop>"


STOP = _Stop()


# ---------------------------------------------------------------------------
# reading sources

class WorldSource:
    """Live simulation: spawn scheduled events, sense, advance entities."""

    def __init__(self, world: EntityWorld, until_tick: int):
        if until_tick < 0:
            raise ValueError("until_tick must be >= 0")
        self.world = world
        self.until_tick = until_tick

    def __iter__(self) -> Iterator[tuple[int, list[Reading]]]:
        for tick in range(self.until_tick):
            self.world.spawn_due(tick)
            if self.world.exhausted():
                return
            yield tick, self.world.sense(tick)
            self.world.advance()


class TraceSource:
    """Replays a recorded reading trace (one JSON object per line) against a
    store holding the same topology."""

    def __init__(self, lines: Iterable[str], store: GraphStore):
        self.lines = lines
        self.store = store

    def __iter__(self) -> Iterator[tuple[int, list[Reading]]]:
        current_tick: int | None = None
        batch: list[Reading] = []
        for line in self.lines:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            node_id = self.store.find_by_name(NodeKind.SENSOR_NODE, row["node"])
            if node_id is None:
                raise UnknownNode(f"trace references unknown node {row['node']!r}")
            reading = Reading(
                node_id=node_id,
                node_name=row["node"],
                tick=int(row["tick"]),
                pir=bool(row["pir"]),
                seismic=int(row["seismic"]),
                acoustic=int(row["acoustic"]),
            )
            if current_tick is None:
                current_tick = reading.tick
            if reading.tick != current_tick:
                yield current_tick, batch
                current_tick = reading.tick
                batch = []
            batch.append(reading)
        if current_tick is not None:
            yield current_tick, batch


def trace_line(reading: Reading) -> str:
    return json.dumps(
        {
            "node": reading.node_name,
            "tick": reading.tick,
            "pir": reading.pir,
            "seismic": reading.seismic,
            "acoustic": reading.acoustic,
        },
        sort_keys=True,
        separators=(",", ":"),
    )


# ---------------------------------------------------------------------------
# pipeline driver

class Pipeline:
    """Wires the fusion stages over the queue set and runs a reading source
    to completion in either execution mode."""

    def __init__(
        self,
        topology: Topology,
        fusion_cfg: FusionConfig,
        seed: int,
        capacities: QueueCapacities = QueueCapacities(),
        mode: str = "threaded",
        on_action: Callable[[SinkFusedRec], None] | None = None,
        on_fused: Callable[[SnFusedRec], None] | None = None,
        trace_fp: TextIO | None = None,
    ):
        if mode not in ("threaded", "serial"):
            raise ValueError(f"unknown pipeline mode {mode!r}")
        self.topology = topology
        self.store = topology.store
        self.mode = mode
        self.capacities = capacities
        self.on_action = on_action
        self.on_fused = on_fused
        self.trace_fp = trace_fp
        self.sensor = SensorStage(self.store, topology, fusion_cfg, seed)
        self.gateway = GatewayStage(self.store, fusion_cfg)
        self.relay = RelayStage(self.store, topology)
        self.sink = SinkStage(self.store, fusion_cfg, topology.sink_id)
        self.stats = PipelineStats()

    # -- shared per-tick pieces -----------------------------------------

    def _emit_reading(self, reading: Reading) -> None:
        if self.trace_fp is not None:
            self.trace_fp.write(trace_line(reading))
            self.trace_fp.write("\n")
        self.stats.readings += 1

    def _finish_stats(self) -> PipelineStats:
        self.stats.fused = self.sensor.fused_count
        self.stats.batches = self.gateway.batch_count
        self.stats.kept = self.gateway.kept_count
        self.stats.dropped = self.gateway.dropped_count
        self.stats.forwarded = self.relay.forwarded_count
        self.stats.actions = self.sink.action_count
        return self.stats

    def run(self, source: Iterable[tuple[int, list[Reading]]]) -> PipelineStats:
        if self.mode == "serial":
            return self._run_serial(source)
        return self._run_threaded(source)

    def run_single_tick(self, tick: int, readings: list[Reading]) -> list[SinkFusedRec]:
        """Serial processing of one externally driven tick (service mode)."""
        actions = self._serial_tick(tick, readings)
        self._finish_stats()
        return actions

    def _serial_tick(self, tick: int, readings: list[Reading]) -> list[SinkFusedRec]:
        self.stats.ticks += 1
        fused_recs: list[SnFusedRec] = []
        for reading in readings:
            self._emit_reading(reading)
            rec = self.sensor.process(reading)
            if rec is not None:
                fused_recs.append(rec)
                if self.on_fused is not None:
                    self.on_fused(rec)
        gw_recs = self.gateway.process_tick(tick, fused_recs)
        for gw_rec in gw_recs:
            self.relay.process(gw_rec)
        actions = self.sink.process_tick(tick, gw_recs)
        if self.on_action is not None:
            for action in actions:
                self.on_action(action)
        return actions

    def _run_serial(self, source) -> PipelineStats:
        for tick, readings in source:
            self._serial_tick(tick, readings)
        return self._finish_stats()

    # -- threaded mode ---------------------------------------------------

    def _run_threaded(self, source) -> PipelineStats:
        queues = QueueSet.create(self.capacities)
        done: queue.Queue = queue.Queue()
        errors: list[BaseException] = []

        def guard(body):
            def runner():
                try:
                    body()
                except BaseException as exc:  # propagate to the driver
                    errors.append(exc)
                    done.put(("error", exc))

            return runner

        def sensor_worker():
            while True:
                item = queues.scalar_data.get()
                if item is STOP:
                    queues.fused.put(STOP)
                    return
                if isinstance(item, TickEnd):
                    queues.fused.put(item)
                    continue
                rec = self.sensor.process(item)
                if rec is not None:
                    if self.on_fused is not None:
                        self.on_fused(rec)
                    queues.fused.put(rec)

        def gateway_worker():
            batch: list[SnFusedRec] = []
            while True:
                item = queues.fused.get()
                if item is STOP:
                    queues.forward.put(STOP)
                    return
                if isinstance(item, TickEnd):
                    for gw_rec in self.gateway.process_tick(item.tick, batch):
                        queues.forward.put(gw_rec)
                    batch = []
                    queues.forward.put(item)
                    continue
                batch.append(item)

        def sink_worker():
            batch: list[GwFusedRec] = []
            while True:
                item = queues.forward.get()
                if item is STOP:
                    queues.action.put(STOP)
                    return
                if isinstance(item, TickEnd):
                    for action in self.sink.process_tick(item.tick, batch):
                        queues.action.put(action)
                    batch = []
                    queues.action.put(item)
                    continue
                self.relay.process(item)
                batch.append(item)

        def action_worker():
            while True:
                item = queues.action.get()
                if item is STOP:
                    return
                if isinstance(item, TickEnd):
                    done.put(("tick", item.tick))
                    continue
                if self.on_action is not None:
                    self.on_action(item)

        workers = [
            threading.Thread(target=guard(w), name=name, daemon=True)
            for name, w in (
                ("fusion-sensor", sensor_worker),
                ("fusion-gateway", gateway_worker),
                ("fusion-sink", sink_worker),
                ("fusion-action", action_worker),
            )
        ]
        for w in workers:
            w.start()

        failure: BaseException | None = None
        try:
            for tick, readings in source:
                self.stats.ticks += 1
                for reading in readings:
                    self._emit_reading(reading)
                    queues.scalar_data.put(reading)
                queues.scalar_data.put(TickEnd(tick))
                kind, value = done.get(timeout=PUT_TIMEOUT_S * 2)
                if kind == "error":
                    failure = value
                    break
        finally:
            queues.scalar_data.put(STOP)
            if failure is not None or errors:
                # a dead stage cannot forward the stop marker; unblock the rest
                for q in (queues.fused, queues.forward, queues.action):
                    try:
                        q.put(STOP, timeout=1.0)
                    except QueueOverflow:
                        pass
            for w in workers:
                w.join(timeout=10.0)
        if failure is None and errors:
            failure = errors[0]
        if failure is not None:
            raise failure
        return self._finish_stats()
