"""Run configuration: JSON in, validated dataclasses out.

Unknown keys are rejected by name so a typo cannot silently fall back to a
default. All sections are optional; omitted values take the defaults below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .datagen import ENTITY_TYPES, EVENT_KINDS, ScheduledEvent
from .errors import ConfigError
from .fusion import PROFILES, FusionConfig
from .pipeline import QueueCapacities
from .topology import TopologyConfig

PIPELINE_MODES = ("threaded", "serial")


@dataclass(frozen=True)
class DatagenConfig:
    radius: float = 10.0
    emit_quiescent: bool = False
    ticks_per_month: int = 8640  # five-minute sensing period over 30 days
    attack_type: str = "Vehicle"


@dataclass(frozen=True)
class SimulationConfig:
    entity_type: str | None = "Animal"
    speed: int | None = None
    repeat: bool = False
    max_ticks: int = 200
    events: tuple[ScheduledEvent, ...] = ()


@dataclass(frozen=True)
class BenchmarkConfig:
    repetitions: int = 5
    months: tuple[int, ...] = (1, 2, 3, 4, 5)
    spawn_every_ticks: int = 7
    attack_every_ticks: int = 50
    smuggling_every_ticks: int = 211
    q1_concept: str = "Vehicle"
    q1_min_weight: float = 0.9
    q2_min_acoustic: float = 15
    q2_chain_len: int = 3
    q3_concept: str = "Human"
    q3_min_weight: float = 0.9

    def query_params(self) -> dict[str, dict[str, Any]]:
        return {
            "q1": {"concept": self.q1_concept, "minWeight": self.q1_min_weight},
            "q2": {"minAcoustic": self.q2_min_acoustic, "chainLen": self.q2_chain_len},
            "q3": {"concept": self.q3_concept, "minWeight": self.q3_min_weight},
        }


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8099
    tick_interval_ms: int = 0


@dataclass(frozen=True)
class RunConfig:
    seed: int = 1
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    datagen: DatagenConfig = field(default_factory=DatagenConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    queues: QueueCapacities = field(default_factory=QueueCapacities)
    pipeline_mode: str = "threaded"
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    benchmark: BenchmarkConfig = field(default_factory=BenchmarkConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)


def default_config() -> RunConfig:
    return RunConfig()


# ---------------------------------------------------------------------------
# validation helpers

def _require_mapping(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object")
    return value

def _reject_unknown(obj: dict, allowed: dict[str, Any], path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}{key}: unknown key")


def _pick(obj: dict, key: str, expected, default, path: str):
    if key not in obj:
        return default
    value = obj[key]
    if expected is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}{key}: expected a boolean")
    elif expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}{key}: expected an integer")
    elif expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}{key}: expected a number")
        value = float(value)
    elif expected is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}{key}: expected a string")
    return value


def _parse_topology(obj: dict, path: str) -> TopologyConfig:
    allowed = {"clustersPerSide", "nodesPerClusterSide", "nodeSpacing", "gatewayHops"}
    _reject_unknown(obj, dict.fromkeys(allowed), path)
    try:
        return TopologyConfig(
            clusters_per_side=_pick(obj, "clustersPerSide", int, 3, path),
            nodes_per_cluster_side=_pick(obj, "nodesPerClusterSide", int, 4, path),
            node_spacing=_pick(obj, "nodeSpacing", float, 10.0, path),
            gateway_hops=_pick(obj, "gatewayHops", bool, False, path),
        )
    except ValueError as exc:
        raise ConfigError(f"{path[:-1]}: {exc}") from exc


def _parse_datagen(obj: dict, path: str) -> DatagenConfig:
    allowed = {"radius", "emitQuiescent", "ticksPerMonth", "attackType"}
    _reject_unknown(obj, dict.fromkeys(allowed), path)
    cfg = DatagenConfig(
        radius=_pick(obj, "radius", float, 10.0, path),
        emit_quiescent=_pick(obj, "emitQuiescent", bool, False, path),
        ticks_per_month=_pick(obj, "ticksPerMonth", int, 8640, path),
        attack_type=_pick(obj, "attackType", str, "Vehicle", path),
    )
    if cfg.radius <= 0:
        raise ConfigError(f"{path}radius: must be positive")
    if cfg.ticks_per_month < 1:
        raise ConfigError(f"{path}ticksPerMonth: must be >= 1")
    if cfg.attack_type not in ENTITY_TYPES:
        raise ConfigError(f"{path}attackType: unknown entity type {cfg.attack_type!r}")
    return cfg


def _parse_fusion(obj: dict, path: str) -> FusionConfig:
    allowed = {"level1Threshold", "level2ThresholdPct", "level3Threshold", "profile"}
    _reject_unknown(obj, dict.fromkeys(allowed), path)
    profile = _pick(obj, "profile", str, "calibrated", path)
    if profile not in PROFILES:
        raise ConfigError(
            f"{path}profile: unknown profile {profile!r} "
            f"(choose from {', '.join(sorted(PROFILES))})"
        )
    try:
        return FusionConfig(
            level1_threshold=_pick(obj, "level1Threshold", float, 5.0, path),
            level2_threshold_pct=_pick(obj, "level2ThresholdPct", float, 10.0, path),
            level3_threshold=_pick(obj, "level3Threshold", float, 15.0, path),
            profile_name=profile,
        )
    except ValueError as exc:
        raise ConfigError(f"{path[:-1]}: {exc}") from exc


def _parse_queues(obj: dict, path: str) -> QueueCapacities:
    allowed = {"scalarData", "fused", "forward", "action"}
    _reject_unknown(obj, dict.fromkeys(allowed), path)
    caps = QueueCapacities(
        scalar_data=_pick(obj, "scalarData", int, 1024, path),
        fused=_pick(obj, "fused", int, 1024, path),
        forward=_pick(obj, "forward", int, 1024, path),
        action=_pick(obj, "action", int, 1024, path),
    )
    for name, cap in (("scalarData", caps.scalar_data), ("fused", caps.fused),
                      ("forward", caps.forward), ("action", caps.action)):
        if cap < 1:
            raise ConfigError(f"{path}{name}: capacity must be >= 1")
    return caps


def _parse_event(obj: Any, path: str) -> ScheduledEvent:
    obj = _require_mapping(obj, path)
    allowed = {"tick", "kind", "entityType", "speed"}
    _reject_unknown(obj, dict.fromkeys(allowed), f"{path}.")
    if "tick" not in obj or "kind" not in obj:
        raise ConfigError(f"{path}: events need tick and kind")
    tick = _pick(obj, "tick", int, None, f"{path}.")
    kind = _pick(obj, "kind", str, None, f"{path}.")
    entity_type = _pick(obj, "entityType", str, None, f"{path}.")
    speed = _pick(obj, "speed", int, None, f"{path}.")
    if tick < 0:
        raise ConfigError(f"{path}.tick: must be >= 0")
    if kind not in EVENT_KINDS:
        raise ConfigError(
            f"{path}.kind: unknown event kind {kind!r} "
            f"(choose from {', '.join(EVENT_KINDS)})"
        )
    if kind == "Entity" and entity_type not in ENTITY_TYPES:
        raise ConfigError(f"{path}.entityType: unknown entity type {entity_type!r}")
    if entity_type is not None and entity_type not in ENTITY_TYPES:
        raise ConfigError(f"{path}.entityType: unknown entity type {entity_type!r}")
    return ScheduledEvent(tick, kind, entity_type, speed)


def _parse_simulation(obj: dict, path: str) -> SimulationConfig:
    allowed = {"entityType", "speed", "repeat", "maxTicks", "events"}
    _reject_unknown(obj, dict.fromkeys(allowed), path)
    entity_type = obj.get("entityType", "Animal")
    if entity_type is not None:
        if not isinstance(entity_type, str) or entity_type not in ENTITY_TYPES:
            raise ConfigError(f"{path}entityType: unknown entity type {entity_type!r}")
    speed = obj.get("speed")
    if speed is not None and (isinstance(speed, bool) or not isinstance(speed, int)):
        raise ConfigError(f"{path}speed: expected an integer")
    events_raw = obj.get("events", [])
    if not isinstance(events_raw, list):
        raise ConfigError(f"{path}events: expected a list")
    events = tuple(
        _parse_event(item, f"{path}events[{i}]") for i, item in enumerate(events_raw)
    )
    cfg = SimulationConfig(
        entity_type=entity_type,
        speed=speed,
        repeat=_pick(obj, "repeat", bool, False, path),
        max_ticks=_pick(obj, "maxTicks", int, 200, path),
        events=events,
    )
    if cfg.max_ticks < 1:
        raise ConfigError(f"{path}maxTicks: must be >= 1")
    return cfg


def _parse_benchmark(obj: dict, path: str) -> BenchmarkConfig:
    allowed = {
        "repetitions", "months", "spawnEveryTicks", "attackEveryTicks",
        "smugglingEveryTicks", "q1Concept", "q1MinWeight", "q2MinAcoustic",
        "q2ChainLen", "q3Concept", "q3MinWeight",
    }
    _reject_unknown(obj, dict.fromkeys(allowed), path)
    months_raw = obj.get("months", [1, 2, 3, 4, 5])
    if (
        not isinstance(months_raw, list)
        or not months_raw
        or any(isinstance(m, bool) or not isinstance(m, int) or m < 1 for m in months_raw)
    ):
        raise ConfigError(f"{path}months: expected a list of positive integers")
    cfg = BenchmarkConfig(
        repetitions=_pick(obj, "repetitions", int, 5, path),
        months=tuple(months_raw),
        spawn_every_ticks=_pick(obj, "spawnEveryTicks", int, 7, path),
        attack_every_ticks=_pick(obj, "attackEveryTicks", int, 50, path),
        smuggling_every_ticks=_pick(obj, "smugglingEveryTicks", int, 211, path),
        q1_concept=_pick(obj, "q1Concept", str, "Vehicle", path),
        q1_min_weight=_pick(obj, "q1MinWeight", float, 0.9, path),
        q2_min_acoustic=_pick(obj, "q2MinAcoustic", float, 15, path),
        q2_chain_len=_pick(obj, "q2ChainLen", int, 3, path),
        q3_concept=_pick(obj, "q3Concept", str, "Human", path),
        q3_min_weight=_pick(obj, "q3MinWeight", float, 0.9, path),
    )
    if cfg.repetitions < 5:
        raise ConfigError(f"{path}repetitions: must be >= 5")
    for name, every in (("spawnEveryTicks", cfg.spawn_every_ticks),
                        ("attackEveryTicks", cfg.attack_every_ticks),
                        ("smugglingEveryTicks", cfg.smuggling_every_ticks)):
        if every < 1:
            raise ConfigError(f"{path}{name}: must be >= 1")
    if cfg.q2_chain_len < 1:
        raise ConfigError(f"{path}q2ChainLen: must be >= 1")
    return cfg


def _parse_service(obj: dict, path: str) -> ServiceConfig:
    allowed = {"host", "port", "tickIntervalMs"}
    _reject_unknown(obj, dict.fromkeys(allowed), path)
    cfg = ServiceConfig(
        host=_pick(obj, "host", str, "127.0.0.1", path),
        port=_pick(obj, "port", int, 8099, path),
        tick_interval_ms=_pick(obj, "tickIntervalMs", int, 0, path),
    )
    if not 0 < cfg.port < 65536:
        raise ConfigError(f"{path}port: out of range")
    if cfg.tick_interval_ms < 0:
        raise ConfigError(f"{path}tickIntervalMs: must be >= 0")
    return cfg


_SECTIONS = {
    "seed": None,
    "topology": _parse_topology,
    "datagen": _parse_datagen,
    "fusion": _parse_fusion,
    "queues": _parse_queues,
    "pipeline": None,
    "simulation": _parse_simulation,
    "benchmark": _parse_benchmark,
    "service": _parse_service,
}


def parse_config(data: Any) -> RunConfig:
    data = _require_mapping(data, "config")
    _reject_unknown(data, _SECTIONS, "")
    seed = _pick(data, "seed", int, 1, "")

    pipeline_obj = _require_mapping(data.get("pipeline", {}), "pipeline")
    _reject_unknown(pipeline_obj, {"mode": None}, "pipeline.")
    mode = _pick(pipeline_obj, "mode", str, "threaded", "pipeline.")
    if mode not in PIPELINE_MODES:
        raise ConfigError(
            f"pipeline.mode: unknown mode {mode!r} (choose from {', '.join(PIPELINE_MODES)})"
        )

    def section(name, parser, default):
        if name not in data:
            return default
        return parser(_require_mapping(data[name], name), f"{name}.")

    return RunConfig(
        seed=seed,
        topology=section("topology", _parse_topology, TopologyConfig()),
        datagen=section("datagen", _parse_datagen, DatagenConfig()),
        fusion=section("fusion", _parse_fusion, FusionConfig()),
        queues=section("queues", _parse_queues, QueueCapacities()),
        pipeline_mode=mode,
        simulation=section("simulation", _parse_simulation, SimulationConfig()),
        benchmark=section("benchmark", _parse_benchmark, BenchmarkConfig()),
        service=section("service", _parse_service, ServiceConfig()),
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fp:
            data = json.load(fp)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


def config_to_dict(cfg: RunConfig) -> dict[str, Any]:
    """The JSON shape that parse_config accepts, fully spelled out."""
    return {
        "seed": cfg.seed,
        "topology": {
            "clustersPerSide": cfg.topology.clusters_per_side,
            "nodesPerClusterSide": cfg.topology.nodes_per_cluster_side,
            "nodeSpacing": cfg.topology.node_spacing,
            "gatewayHops": cfg.topology.gateway_hops,
        },
        "datagen": {
            "radius": cfg.datagen.radius,
            "emitQuiescent": cfg.datagen.emit_quiescent,
            "ticksPerMonth": cfg.datagen.ticks_per_month,
            "attackType": cfg.datagen.attack_type,
        },
        "fusion": {
            "level1Threshold": cfg.fusion.level1_threshold,
            "level2ThresholdPct": cfg.fusion.level2_threshold_pct,
            "level3Threshold": cfg.fusion.level3_threshold,
            "profile": cfg.fusion.profile_name,
        },
        "queues": {
            "scalarData": cfg.queues.scalar_data,
            "fused": cfg.queues.fused,
            "forward": cfg.queues.forward,
            "action": cfg.queues.action,
        },
        "pipeline": {"mode": cfg.pipeline_mode},
        "simulation": {
            "entityType": cfg.simulation.entity_type,
            "speed": cfg.simulation.speed,
            "repeat": cfg.simulation.repeat,
            "maxTicks": cfg.simulation.max_ticks,
            "events": [
                {
                    "tick": e.tick,
                    "kind": e.kind,
                    **({"entityType": e.entity_type} if e.entity_type else {}),
                    **({"speed": e.speed} if e.speed is not None else {}),
                }
                for e in cfg.simulation.events
            ],
        },
        "benchmark": {
            "repetitions": cfg.benchmark.repetitions,
            "months": list(cfg.benchmark.months),
            "spawnEveryTicks": cfg.benchmark.spawn_every_ticks,
            "attackEveryTicks": cfg.benchmark.attack_every_ticks,
            "smugglingEveryTicks": cfg.benchmark.smuggling_every_ticks,
            "q1Concept": cfg.benchmark.q1_concept,
            "q1MinWeight": cfg.benchmark.q1_min_weight,
            "q2MinAcoustic": cfg.benchmark.q2_min_acoustic,
            "q2ChainLen": cfg.benchmark.q2_chain_len,
            "q3Concept": cfg.benchmark.q3_concept,
            "q3MinWeight": cfg.benchmark.q3_min_weight,
        },
        "service": {
            "host": cfg.service.host,
            "port": cfg.service.port,
            "tickIntervalMs": cfg.service.tick_interval_ms,
        },
    }
