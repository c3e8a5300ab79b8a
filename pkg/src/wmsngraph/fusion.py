"""Three-level fusion: classification, filtering, and action generation.

Level 1 runs on sensor nodes: gate a reading on PIR plus minimum scalar
levels, classify it into a concept with a confidence weight, and attach
synthetic multimedia metadata. Level 2 runs on gateways: drop near-duplicate
reports within one tick's batch. Level 3 runs on the sink: raise an action
when two adjacent kept reports are both loud.

The algorithmic cores are pure functions; the *Stage classes persist their
outputs into the graph store with the full linkage (Collect, Next, Fusion,
FusedBy, Last*, Reported, Forwarded edges).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .datagen import Reading
from .errors import EmptyBatch, StoreWriteFailure, WmsnError
from .store import EdgeKind, GraphStore, NodeKind
from .topology import Topology

CONCEPTS = ("Animal", "Human", "Vehicle")
UNKNOWN = "Unknown"

# when two concepts match with equal weight, the more threatening wins
_TIE_ORDER = {"Vehicle": 0, "Human": 1, "Animal": 2}

FEATURE_LEN = 8


@dataclass(frozen=True)
class Band:
    """Inclusive [lo, hi] value band; hi=None means unbounded above, where
    membership is strict (value > lo)."""

    lo: float
    hi: float | None = None

    def __post_init__(self):
        if self.hi is not None and self.hi < self.lo:
            raise ValueError(f"band upper bound {self.hi} below {self.lo}")

    def contains(self, value: float) -> bool:
        if self.hi is None:
            return value > self.lo
        return self.lo <= value <= self.hi

    def score(self, value: float) -> float:
        """Trapezoidal membership: 1.0 across the middle half of the band,
        falling linearly to 0.5 at the edges. Unbounded bands climb from 0.5
        just above lo and saturate at 1.0 from 2*lo upward."""
        if not self.contains(value):
            return 0.0
        if self.hi is None:
            if self.lo <= 0:
                return 1.0
            return 0.5 + 0.5 * min(1.0, (value - self.lo) / self.lo)
        width = self.hi - self.lo
        if width == 0:
            return 1.0
        quarter = width / 4.0
        if value < self.lo + quarter:
            return 0.5 + 0.5 * (value - self.lo) / quarter
        if value > self.hi - quarter:
            return 0.5 + 0.5 * (self.hi - value) / quarter
        return 1.0


@dataclass(frozen=True)
class ConceptRule:
    concept: str
    pir_required: bool
    seismic: Band
    acoustic: Band


# "paper-literal": the published sample thresholds, kept verbatim even though
# they cannot be produced by the published emission levels.
# "calibrated": bands at 60%..120% of each entity type's emission bases, so
# any single entity within 20% of a node's sensing radius scores 1.0 as
# itself. Groups are deliberately ambiguous under it.
PROFILES: dict[str, tuple[ConceptRule, ...]] = {
    "paper-literal": (
        ConceptRule("Vehicle", True, Band(35, None), Band(50, None)),
        ConceptRule("Human", True, Band(21, 55), Band(31, 50)),
        ConceptRule("Animal", True, Band(5, 20), Band(5, 30)),
    ),
    "calibrated": (
        ConceptRule("Vehicle", True, Band(48, 96), Band(42, 84)),
        ConceptRule("Human", True, Band(6, 12), Band(12, 24)),
        ConceptRule("Animal", True, Band(12, 24), Band(24, 48)),
    ),
}


@dataclass(frozen=True)
class FusionConfig:
    level1_threshold: float = 5.0
    level2_threshold_pct: float = 10.0
    level3_threshold: float = 15.0
    profile_name: str = "calibrated"

    def __post_init__(self):
        if min(self.level1_threshold, self.level2_threshold_pct, self.level3_threshold) < 0:
            raise ValueError("fusion thresholds must be >= 0")
        if self.profile_name not in PROFILES:
            raise ValueError(f"unknown classification profile {self.profile_name!r}")

    @property
    def profile(self) -> tuple[ConceptRule, ...]:
        return PROFILES[self.profile_name]


def classify(
    pir: bool, seismic: float, acoustic: float, profile: tuple[ConceptRule, ...]
) -> tuple[str, float]:
    """Best-matching concept and its confidence; (Unknown, 0.0) if none."""
    best_key: tuple[float, int] | None = None
    best: tuple[str, float] = (UNKNOWN, 0.0)
    for rule in profile:
        if rule.pir_required and not pir:
            continue
        if not (rule.seismic.contains(seismic) and rule.acoustic.contains(acoustic)):
            continue
        weight = min(rule.seismic.score(seismic), rule.acoustic.score(acoustic))
        key = (-weight, _TIE_ORDER.get(rule.concept, 99))
        if best_key is None or key < best_key:
            best_key = key
            best = (rule.concept, weight)
    return best


# ---------------------------------------------------------------------------
# fused records

@dataclass
class SnFusedRec:
    node_id: int
    node_name: str
    tick: int
    concept: str
    weight: float
    acoustic: int
    seismic: int
    video_path: str
    video_duration_sec: int
    frame_ref: str
    foreground_ref: str
    silhouette_ref: str
    frm_features: tuple[float, ...]
    fgnd_features: tuple[float, ...]
    gateway_id: int | None = None
    gateway_name: str = ""
    store_id: int | None = None
    raw_store_id: int | None = None

    def as_payload(self) -> dict:
        return {
            "node": self.node_name,
            "tick": self.tick,
            "concept": self.concept,
            "weight": round(self.weight, 4),
            "acoustic": self.acoustic,
            "seismic": self.seismic,
            "videoPath": self.video_path,
        }


@dataclass
class GwFusedRec:
    gateway_id: int
    gateway_name: str
    tick: int
    kept: list[SnFusedRec]
    dropped_count: int
    store_id: int | None = None


@dataclass
class SinkFusedRec:
    tick: int
    concept: str
    weight: float
    source_gateway: str
    source_node: str
    action_kind: str
    acoustic: int
    source: GwFusedRec | None = field(default=None, repr=False)
    store_id: int | None = None

    def as_payload(self) -> dict:
        return {
            "tick": self.tick,
            "concept": self.concept,
            "weight": round(self.weight, 4),
            "actionKind": self.action_kind,
            "sourceGateway": self.source_gateway,
            "sourceNode": self.source_node,
            "acoustic": self.acoustic,
        }


# ---------------------------------------------------------------------------
# synthetic multimedia metadata

def _digest(seed: int, label: str) -> bytes:
    key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    return hashlib.blake2b(label.encode(), key=key, digest_size=16).digest()


def synthetic_features(seed: int, label: str) -> tuple[float, ...]:
    raw = _digest(seed, label)
    return tuple(round(b / 255.0, 4) for b in raw[:FEATURE_LEN])


def synthetic_video_duration(seed: int, label: str) -> int:
    return 5 + _digest(seed, label + ":dur")[0] % 26


# ---------------------------------------------------------------------------
# level 1: sensor node

def first_level_fusion(
    reading: Reading, cfg: FusionConfig, seed: int
) -> SnFusedRec | None:
    """Gate, classify, and decorate one reading. Pure; returns None when the
    reading does not pass the PIR + scalar threshold gate."""
    if not reading.pir:
        return None
    if reading.seismic < cfg.level1_threshold or reading.acoustic < cfg.level1_threshold:
        return None
    concept, weight = classify(
        reading.pir, reading.seismic, reading.acoustic, cfg.profile
    )
    label = f"{reading.node_name}:{reading.tick}"
    return SnFusedRec(
        node_id=reading.node_id,
        node_name=reading.node_name,
        tick=reading.tick,
        concept=concept,
        weight=weight,
        acoustic=reading.acoustic,
        seismic=reading.seismic,
        video_path=f"video/{reading.node_name}/{reading.tick}.mp4",
        video_duration_sec=synthetic_video_duration(seed, label),
        frame_ref=f"frame/{reading.node_name}/{reading.tick}",
        foreground_ref=f"foreground/{reading.node_name}/{reading.tick}",
        silhouette_ref=f"silhouette/{reading.node_name}/{reading.tick}",
        frm_features=synthetic_features(seed, label + ":frm"),
        fgnd_features=synthetic_features(seed, label + ":fgnd"),
    )


# ---------------------------------------------------------------------------
# level 2: gateway duplicate filter

def second_level_filter(
    batch: list[SnFusedRec], threshold_pct: float
) -> tuple[list[SnFusedRec], int]:
    """Duplicate removal over one gateway's tick batch (ordered by node name).

    The first element is always kept. Every later element is compared with
    its batch predecessor: it is a duplicate when the signed acoustic
    difference stays below threshold_pct percent of its own acoustic level.
    """
    if not batch:
        raise EmptyBatch("second-level fusion needs at least one report")
    kept = [batch[0]]
    dropped = 0
    for previous, current in zip(batch, batch[1:]):
        diff = current.acoustic - previous.acoustic
        diff_rate = current.acoustic * threshold_pct / 100.0
        if diff < diff_rate:
            dropped += 1
        else:
            kept.append(current)
    return kept, dropped


# ---------------------------------------------------------------------------
# level 3: sink actions

def third_level_fusion(
    gw_recs: list[GwFusedRec], cfg: FusionConfig
) -> list[SinkFusedRec]:
    """Actions from adjacent kept reports that are both above the alarm
    threshold. Adjacency is scoped to one gateway's kept list; the flattened
    batch is ordered by (gateway name, node name)."""
    actions: list[SinkFusedRec] = []
    for gw_rec in gw_recs:
        for previous, current in zip(gw_rec.kept, gw_rec.kept[1:]):
            if (
                current.acoustic > cfg.level3_threshold
                and previous.acoustic > cfg.level3_threshold
            ):
                kind = "Alarm" if current.concept == "Vehicle" else "Notify"
                actions.append(
                    SinkFusedRec(
                        tick=current.tick,
                        concept=current.concept,
                        weight=current.weight,
                        source_gateway=gw_rec.gateway_name,
                        source_node=current.node_name,
                        action_kind=kind,
                        acoustic=current.acoustic,
                        source=gw_rec,
                    )
                )
    return actions


# ---------------------------------------------------------------------------
# persisting stages

def _features_json(vec: tuple[float, ...]) -> str:
    return json.dumps(list(vec), separators=(",", ":"))


class SensorStage:
    """Persists every reading, runs level-1 fusion, links the results."""

    def __init__(self, store: GraphStore, topology: Topology,
                 cfg: FusionConfig, seed: int):
        self.store = store
        self.topology = topology
        self.cfg = cfg
        self.seed = seed
        self.raw_count = 0
        self.fused_count = 0
        self._last_raw: dict[int, int] = {}
        self._last_raw_edge: dict[int, int] = {}
        self._last_snf: dict[int, int] = {}
        self._last_snf_edge: dict[int, int] = {}
        self._gateway_name: dict[int, str] = {}

    def process(self, reading: Reading) -> SnFusedRec | None:
        store = self.store
        try:
            raw_id = store.create_node(
                NodeKind.SENSOR_RAW_DATA,
                {
                    "tick": reading.tick,
                    "pir": reading.pir,
                    "seismic": reading.seismic,
                    "acoustic": reading.acoustic,
                },
            )
            store.create_edge(EdgeKind.COLLECT, reading.node_id, raw_id)
            prev_raw = self._last_raw.get(reading.node_id)
            if prev_raw is not None:
                store.create_edge(EdgeKind.NEXT, prev_raw, raw_id)
            self._last_raw[reading.node_id] = raw_id
            last_edge = self._last_raw_edge.get(reading.node_id)
            if last_edge is None:
                self._last_raw_edge[reading.node_id] = store.create_edge(
                    EdgeKind.LAST_COLLECTED, reading.node_id, raw_id
                )
            else:
                store.retarget_edge(last_edge, raw_id)
            self.raw_count += 1

            rec = first_level_fusion(reading, self.cfg, self.seed)
            if rec is None:
                return None
            snf_id = store.create_node(
                NodeKind.SN_FUSED_DATA,
                {
                    "tick": rec.tick,
                    "concept": rec.concept,
                    "weight": rec.weight,
                    "acoustic": rec.acoustic,
                    "seismic": rec.seismic,
                    "videoPath": rec.video_path,
                    "videoDurationSec": rec.video_duration_sec,
                    "frameRef": rec.frame_ref,
                    "foregroundRef": rec.foreground_ref,
                    "silhouetteRef": rec.silhouette_ref,
                    "frmFeatures": _features_json(rec.frm_features),
                    "fgndFeatures": _features_json(rec.fgnd_features),
                },
            )
            store.create_edge(EdgeKind.FUSION, raw_id, snf_id)
            store.create_edge(EdgeKind.FUSED_BY, snf_id, reading.node_id)
            prev_snf = self._last_snf.get(reading.node_id)
            if prev_snf is not None:
                store.create_edge(EdgeKind.NEXT, prev_snf, snf_id)
            self._last_snf[reading.node_id] = snf_id
            fusion_edge = self._last_snf_edge.get(reading.node_id)
            if fusion_edge is None:
                self._last_snf_edge[reading.node_id] = store.create_edge(
                    EdgeKind.LAST_FUSION, reading.node_id, snf_id
                )
            else:
                store.retarget_edge(fusion_edge, snf_id)
        except WmsnError as exc:
            raise StoreWriteFailure(f"level-1 persistence failed: {exc}") from exc

        gateway = self.topology.gateway_of(reading.node_id)
        name = self._gateway_name.get(gateway)
        if name is None:
            name = self._gateway_name[gateway] = store.node_props(gateway)["name"]
        rec.gateway_id = gateway
        rec.gateway_name = name
        rec.store_id = snf_id
        rec.raw_store_id = raw_id
        self.fused_count += 1
        return rec


class GatewayStage:
    """Batches one tick's reports per gateway and filters duplicates."""

    def __init__(self, store: GraphStore, cfg: FusionConfig):
        self.store = store
        self.cfg = cfg
        self.batch_count = 0
        self.kept_count = 0
        self.dropped_count = 0
        self._last_edge: dict[int, int] = {}

    def process_tick(self, tick: int, recs: list[SnFusedRec]) -> list[GwFusedRec]:
        if not recs:
            return []
        by_gateway: dict[str, list[SnFusedRec]] = {}
        for rec in recs:
            by_gateway.setdefault(rec.gateway_name, []).append(rec)
        out: list[GwFusedRec] = []
        store = self.store
        for gateway_name in sorted(by_gateway):
            batch = sorted(by_gateway[gateway_name], key=lambda r: r.node_name)
            gateway_id = batch[0].gateway_id
            try:
                for rec in batch:
                    store.create_edge(EdgeKind.REPORTED, rec.store_id, gateway_id)
                kept, dropped = second_level_filter(batch, self.cfg.level2_threshold_pct)
                gwf_id = store.create_node(
                    NodeKind.GW_FUSED_DATA,
                    {
                        "tick": tick,
                        "gateway": gateway_name,
                        "keptCount": len(kept),
                        "droppedCount": dropped,
                    },
                )
                for rec in kept:
                    store.create_edge(EdgeKind.FUSION, rec.store_id, gwf_id)
                store.create_edge(EdgeKind.FUSED_BY, gwf_id, gateway_id)
                last = self._last_edge.get(gateway_id)
                if last is None:
                    self._last_edge[gateway_id] = store.create_edge(
                        EdgeKind.LAST_FUSION, gateway_id, gwf_id
                    )
                else:
                    store.retarget_edge(last, gwf_id)
            except WmsnError as exc:
                raise StoreWriteFailure(f"level-2 persistence failed: {exc}") from exc
            self.batch_count += 1
            self.kept_count += len(kept)
            self.dropped_count += dropped
            out.append(
                GwFusedRec(
                    gateway_id=gateway_id,
                    gateway_name=gateway_name,
                    tick=tick,
                    kept=kept,
                    dropped_count=dropped,
                    store_id=gwf_id,
                )
            )
        return out


class RelayStage:
    """Walks fused gateway reports up the Lead chain, one Forwarded edge per
    hop, ending at the sink."""

    def __init__(self, store: GraphStore, topology: Topology):
        self.store = store
        self.topology = topology
        self.forwarded_count = 0

    def process(self, gw_rec: GwFusedRec) -> None:
        store = self.store
        current = gw_rec.gateway_id
        try:
            while True:
                leader = store.neighbor_one(current, EdgeKind.LEAD, "in")
                if leader is None:
                    raise StoreWriteFailure(
                        f"gateway {gw_rec.gateway_name} cannot reach the sink"
                    )
                store.create_edge(EdgeKind.FORWARDED, gw_rec.store_id, leader)
                self.forwarded_count += 1
                if store.node_kind(leader) is NodeKind.SINK:
                    return
                current = leader
        except StoreWriteFailure:
            raise
        except WmsnError as exc:
            raise StoreWriteFailure(f"relay persistence failed: {exc}") from exc


class SinkStage:
    """Runs level-3 fusion over the tick's forwarded batches and persists
    the resulting actions."""

    def __init__(self, store: GraphStore, cfg: FusionConfig, sink_id: int):
        self.store = store
        self.cfg = cfg
        self.sink_id = sink_id
        self.action_count = 0

    def process_tick(self, tick: int, gw_recs: list[GwFusedRec]) -> list[SinkFusedRec]:
        if not gw_recs:
            return []
        ordered = sorted(gw_recs, key=lambda r: r.gateway_name)
        actions = third_level_fusion(ordered, self.cfg)
        store = self.store
        for action in actions:
            try:
                sink_fused = store.create_node(
                    NodeKind.SINK_FUSED_DATA,
                    {
                        "tick": action.tick,
                        "concept": action.concept,
                        "weight": action.weight,
                        "sourceGateway": action.source_gateway,
                        "sourceNode": action.source_node,
                        "actionKind": action.action_kind,
                        "acoustic": action.acoustic,
                    },
                )
                store.create_edge(EdgeKind.FUSION, action.source.store_id, sink_fused)
                store.create_edge(EdgeKind.FUSED_BY, sink_fused, self.sink_id)
            except WmsnError as exc:
                raise StoreWriteFailure(f"level-3 persistence failed: {exc}") from exc
            action.store_id = sink_fused
            self.action_count += 1
        return actions
