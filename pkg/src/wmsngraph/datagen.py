"""Entities moving over the field and the readings they induce.

Each tick every live entity contributes acoustic and seismic energy to the
sensor nodes within sensing radius; contributions attenuate linearly with
distance and superpose additively. Movement is a biased random walk on the
four compass directions plus standing still. Entities that leave the
monitored square die.

All randomness flows through numpy generators seeded from (seed, stream)
tuples, so runs are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .topology import Topology

# unit moves per direction, scaled by entity speed
DIRECTIONS: tuple[str, ...] = ("N", "S", "E", "W", "STAY")
_MOVES: dict[str, tuple[int, int]] = {
    "N": (0, 1),
    "S": (0, -1),
    "E": (1, 0),
    "W": (-1, 0),
    "STAY": (0, 0),
}

UNIFORM_BIAS: tuple[float, ...] = (0.2, 0.2, 0.2, 0.2, 0.2)

# rng stream labels
_STREAM_SPAWN = 0
_STREAM_GROUP = 1


@dataclass(frozen=True)
class EntityType:
    name: str
    speed: int
    acoustic: int  # emitted level at distance zero
    seismic: int

    def with_speed(self, speed: int | None) -> "EntityType":
        if speed is None or speed == self.speed:
            return self
        return EntityType(self.name, speed, self.acoustic, self.seismic)


ENTITY_TYPES: dict[str, EntityType] = {
    t.name: t
    for t in (
        EntityType("Human", 1, 20, 10),
        EntityType("Animal", 2, 40, 20),
        EntityType("Vehicle", 4, 70, 80),
        EntityType("GroupOfHuman", 1, 60, 30),
        EntityType("GroupOfAnimal", 2, 80, 60),
    )
}

EVENT_KINDS = ("Attack", "Smuggling", "Entity")


@dataclass
class Entity:
    entity_id: int
    kind: EntityType
    x: float
    y: float
    bias: tuple[float, ...] = UNIFORM_BIAS
    group: int = 0  # entities sharing a group draw one direction per tick
    alive: bool = True


@dataclass(frozen=True)
class Reading:
    """One sensor node's measurement for one tick."""

    node_id: int
    node_name: str
    tick: int
    pir: bool
    seismic: int
    acoustic: int


def attenuate(base: int, distance: float, radius: float) -> int:
    """Signal level at `distance` from a source emitting `base` at zero.

    Linear ramp hitting zero at the sensing radius; rounded half-up to an
    integer so equal inputs always yield equal readings.
    """
    if radius <= 0 or distance >= radius:
        return 0
    value = base * (1.0 - distance / radius)
    return int(math.floor(value + 0.5))


def step_entity(entity: Entity, direction: str, area_side: float) -> Entity:
    """Move one tick worth of distance; leaving the square kills the entity."""
    dx, dy = _MOVES[direction]
    entity.x += dx * entity.kind.speed
    entity.y += dy * entity.kind.speed
    if not (0.0 <= entity.x <= area_side and 0.0 <= entity.y <= area_side):
        entity.alive = False
    return entity


def draw_direction(rng: np.random.Generator, bias: tuple[float, ...]) -> str:
    """Inverse-CDF draw over DIRECTIONS with probabilities `bias`."""
    u = rng.random()
    acc = 0.0
    for direction, p in zip(DIRECTIONS, bias):
        acc += p
        if u < acc:
            return direction
    return DIRECTIONS[-1]


def sense_tick(
    topology: Topology,
    entities: list[Entity],
    tick: int,
    radius: float,
    emit_quiescent: bool = False,
) -> list[Reading]:
    """Readings for one tick, ordered by sensor node name.

    A node reports when at least one entity is within `radius`; its levels
    are the attenuated contributions of all such entities, summed. With
    `emit_quiescent` every other node also reports an all-zero reading.
    """
    acc: dict[int, list[int]] = {}
    for entity in entities:
        if not entity.alive:
            continue
        for node_id, dist in topology.nodes_within_radius((entity.x, entity.y), radius):
            slot = acc.get(node_id)
            if slot is None:
                slot = acc[node_id] = [0, 0]
            slot[0] += attenuate(entity.kind.seismic, dist, radius)
            slot[1] += attenuate(entity.kind.acoustic, dist, radius)

    store = topology.store
    rows: list[tuple[str, Reading]] = []
    for node_id, (seis, acou) in acc.items():
        name = store.node_props(node_id)["name"]
        rows.append(
            (name, Reading(node_id, name, tick, True, seis, acou))
        )
    if emit_quiescent:
        for node_id in topology.sensor_ids.values():
            if node_id not in acc:
                name = store.node_props(node_id)["name"]
                rows.append((name, Reading(node_id, name, tick, False, 0, 0)))
    rows.sort(key=lambda pair: pair[0])
    return [reading for _, reading in rows]


@dataclass(frozen=True)
class ScheduledEvent:
    tick: int
    kind: str  # one of EVENT_KINDS
    entity_type: str | None = None
    speed: int | None = None


class EntityWorld:
    """Owns the live entities, their rng streams, and the event schedule."""

    def __init__(
        self,
        topology: Topology,
        seed: int,
        radius: float = 10.0,
        emit_quiescent: bool = False,
        attack_type: str = "Vehicle",
        repeat: bool = False,
    ):
        self.topology = topology
        self.seed = seed
        self.radius = radius
        self.emit_quiescent = emit_quiescent
        self.attack_type = attack_type
        self.repeat = repeat
        self.entities: list[Entity] = []
        self._spawn_rng = np.random.default_rng([seed, _STREAM_SPAWN])
        self._group_rngs: dict[int, np.random.Generator] = {}
        self._next_entity = 0
        self._next_group = 0
        self._pending: list[ScheduledEvent] = []
        self._initial: list[ScheduledEvent] = []
        self._repeats_done = 0

    # -- scheduling ----------------------------------------------------

    def schedule(self, event: ScheduledEvent) -> None:
        if event.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {event.kind!r}")
        if event.kind == "Entity" and event.entity_type not in ENTITY_TYPES:
            raise ValueError(f"unknown entity type {event.entity_type!r}")
        self._pending.append(event)
        self._initial.append(event)

    def inject(self, event: ScheduledEvent) -> None:
        """Late event (operator command); not part of the repeat script."""
        if event.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {event.kind!r}")
        self._pending.append(event)

    # -- spawning ------------------------------------------------------

    def _new_group(self) -> int:
        group = self._next_group
        self._next_group += 1
        self._group_rngs[group] = np.random.default_rng(
            [self.seed, _STREAM_GROUP, group]
        )
        return group

    def _add(self, etype: EntityType, x: float, y: float,
             bias: tuple[float, ...], group: int) -> Entity:
        entity = Entity(self._next_entity, etype, x, y, bias, group)
        self._next_entity += 1
        self.entities.append(entity)
        return entity

    def spawn_entity(self, type_name: str, speed: int | None = None) -> list[Entity]:
        """A wanderer entering from the south edge at a random position."""
        etype = ENTITY_TYPES[type_name].with_speed(speed)
        x = float(self._spawn_rng.uniform(0.0, self.topology.config.area_side))
        return [self._add(etype, x, 0.0, UNIFORM_BIAS, self._new_group())]

    def spawn_attack(self, attack_type: str | None = None) -> list[Entity]:
        """Intruder crossing from the south edge, heading straight north."""
        etype = ENTITY_TYPES[attack_type or self.attack_type]
        x = float(self._spawn_rng.uniform(0.0, self.topology.config.area_side))
        bias = (1.0, 0.0, 0.0, 0.0, 0.0)
        return [self._add(etype, x, 0.0, bias, self._new_group())]

    def spawn_smuggling(self) -> list[Entity]:
        """Two grouped entities entering at the west edge on adjacent node
        rows, drifting east/south in lockstep."""
        cfg = self.topology.config
        rows = cfg.nodes_per_side
        j = int(self._spawn_rng.integers(0, max(rows - 1, 1)))
        y_low = (j + 1) * cfg.node_spacing
        y_high = (j + 2) * cfg.node_spacing
        bias = (0.0, 0.5, 0.5, 0.0, 0.0)  # N,S,E,W,STAY
        group = self._new_group()
        return [
            self._add(ENTITY_TYPES["GroupOfHuman"], 0.0, y_low, bias, group),
            self._add(ENTITY_TYPES["GroupOfAnimal"], 0.0, y_high, bias, group),
        ]

    def _run_event(self, event: ScheduledEvent) -> list[Entity]:
        if event.kind == "Attack":
            return self.spawn_attack(event.entity_type)
        if event.kind == "Smuggling":
            return self.spawn_smuggling()
        return self.spawn_entity(event.entity_type, event.speed)

    # -- tick protocol -------------------------------------------------

    def spawn_due(self, tick: int) -> list[Entity]:
        """Spawn every scheduled event whose tick has arrived."""
        due = [e for e in self._pending if e.tick <= tick]
        self._pending = [e for e in self._pending if e.tick > tick]
        spawned: list[Entity] = []
        for event in due:
            spawned.extend(self._run_event(event))
        if not self.entities and not self._pending and self.repeat and self._initial:
            base = tick + 1
            self._repeats_done += 1
            first = min(e.tick for e in self._initial)
            for event in self._initial:
                self._pending.append(
                    ScheduledEvent(
                        base + (event.tick - first),
                        event.kind,
                        event.entity_type,
                        event.speed,
                    )
                )
        return spawned

    def sense(self, tick: int) -> list[Reading]:
        return sense_tick(
            self.topology, self.entities, tick, self.radius, self.emit_quiescent
        )

    def advance(self) -> None:
        """Move every live entity; grouped entities share one direction."""
        area = self.topology.config.area_side
        drawn: dict[int, str] = {}
        for entity in self.entities:
            direction = drawn.get(entity.group)
            if direction is None:
                direction = draw_direction(self._group_rngs[entity.group], entity.bias)
                drawn[entity.group] = direction
            step_entity(entity, direction, area)
        self.entities = [e for e in self.entities if e.alive]

    def exhausted(self) -> bool:
        return not self.entities and not self._pending
