"""In-process relational baseline for the benchmark.

The store's contents are flattened into plain row tables that mirror a
normalized schema (sensor nodes, gateways, raw readings, fused records,
video metadata), with foreign-key columns instead of adjacency. The only
indexes are hash maps on the primary keys, so every query below is an
explicit scan + hash-join plan; the recursive depth query expands the
gateway hierarchy iteratively (semi-naive), the way a recursive CTE would.

Rows, row order, and value types must match the graph engine exactly; the
benchmark refuses to time backends that disagree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .errors import UnknownConcept
from .queries import DEFAULT_CHAIN_LEN, VALID_CONCEPTS
from .store import EdgeKind, GraphStore, NodeKind


@dataclass
class RelationalBaseline:
    sensornode: list[dict[str, Any]] = field(default_factory=list)
    gateway: list[dict[str, Any]] = field(default_factory=list)
    sensorrawdata: list[dict[str, Any]] = field(default_factory=list)
    sensorfuseddata: list[dict[str, Any]] = field(default_factory=list)
    gatewayfuseddata: list[dict[str, Any]] = field(default_factory=list)
    sinkfuseddata: list[dict[str, Any]] = field(default_factory=list)
    sensorrawvideodata: list[dict[str, Any]] = field(default_factory=list)

    # hash indexes on primary keys only
    sensornode_by_id: dict[int, dict] = field(default_factory=dict, repr=False)
    gateway_by_id: dict[int, dict] = field(default_factory=dict, repr=False)
    sensorrawdata_by_id: dict[int, dict] = field(default_factory=dict, repr=False)
    sensorfuseddata_by_id: dict[int, dict] = field(default_factory=dict, repr=False)
    sensorrawvideodata_by_id: dict[int, dict] = field(default_factory=dict, repr=False)

    def table_counts(self) -> dict[str, int]:
        return {
            "sensornode": len(self.sensornode),
            "gateway": len(self.gateway),
            "sensorrawdata": len(self.sensorrawdata),
            "sensorfuseddata": len(self.sensorfuseddata),
            "gatewayfuseddata": len(self.gatewayfuseddata),
            "sinkfuseddata": len(self.sinkfuseddata),
            "sensorrawvideodata": len(self.sensorrawvideodata),
        }

    # ------------------------------------------------------------------
    # queries

    def q1(self, concept: str, min_weight: float) -> list[tuple]:
        if concept not in VALID_CONCEPTS:
            raise UnknownConcept(f"{concept!r} is not one of {', '.join(VALID_CONCEPTS)}")
        out = []
        for row in self.sensorfuseddata:  # full scan
            if row["concept"] != concept or row["weight"] <= min_weight:
                continue
            node = self.sensornode_by_id[row["fusedby"]]  # hash join
            out.append(
                (
                    row["tick"],
                    row["id"],
                    (concept, row["weight"], row["tick"], node["indexx"], node["indexy"]),
                )
            )
        out.sort(key=lambda r: (r[0], r[1]))
        return [row for _, _, row in out]

    def q2(self, min_acoustic: float, chain_len: int = DEFAULT_CHAIN_LEN) -> list[tuple]:
        if chain_len < 1:
            raise ValueError("chain_len must be >= 1")
        out = []
        for row in self.sensorrawdata:  # full scan over candidate starts
            if row["acoustic"] <= min_acoustic:
                continue
            current = row
            ok = True
            for _ in range(chain_len - 1):
                next_id = current["next_id"]
                if next_id is None:
                    ok = False
                    break
                current = self.sensorrawdata_by_id[next_id]  # hash join on pk
                if current["acoustic"] <= min_acoustic:
                    ok = False
                    break
            if not ok:
                continue
            video_id = current["video_id"]
            if video_id is None:
                continue
            video = self.sensorrawvideodata_by_id[video_id]
            node = self.sensornode_by_id[row["sensornode_id"]]
            out.append(
                (
                    node["name"],
                    row["id"],
                    (
                        node["name"],
                        node["indexx"],
                        node["indexy"],
                        current["acoustic"],
                        video["video_path"],
                        video["duration_sec"],
                    ),
                )
            )
        out.sort(key=lambda r: (r[0], r[1]))
        return [row for _, _, row in out]

    def q3(self, concept: str, min_weight: float) -> list[tuple]:
        if concept not in VALID_CONCEPTS:
            raise UnknownConcept(f"{concept!r} is not one of {', '.join(VALID_CONCEPTS)}")
        # iterative expansion of the gateway hierarchy, seeded at the
        # gateways the sink leads directly (lead is NULL there)
        depth: dict[int, int] = {
            g["id"]: 1 for g in self.gateway if g["lead"] is None
        }
        changed = True
        while changed:
            changed = False
            for g in self.gateway:
                if g["id"] in depth:
                    continue
                parent = g["lead"]
                if parent in depth:
                    depth[g["id"]] = depth[parent] + 1
                    changed = True
        out = []
        for row in self.sensorfuseddata:  # full scan
            if row["concept"] != concept or row["weight"] <= min_weight:
                continue
            node = self.sensornode_by_id[row["fusedby"]]
            gateway = self.gateway_by_id[node["lead"]]
            out.append(
                (
                    (gateway["name"], node["name"], row["tick"], row["id"]),
                    (gateway["name"], node["name"], row["tick"], depth[gateway["id"]]),
                )
            )
        out.sort(key=lambda r: r[0])
        return [row for _, row in out]

    def run(self, query: str, params: dict[str, Any]) -> list[tuple]:
        if query == "q1":
            return self.q1(params["concept"], params["minWeight"])
        if query == "q2":
            return self.q2(params["minAcoustic"], params.get("chainLen", DEFAULT_CHAIN_LEN))
        if query == "q3":
            return self.q3(params["concept"], params["minWeight"])
        raise ValueError(f"unknown query {query!r}")


def build_relational_baseline(store: GraphStore) -> RelationalBaseline:
    """Flatten the store into row tables; one pass over nodes, one over edges."""
    base = RelationalBaseline()
    sink_ids: set[int] = set()
    for node_id, kind, props in store.nodes():
        if kind is NodeKind.SINK:
            sink_ids.add(node_id)
        elif kind is NodeKind.SENSOR_NODE:
            row = {
                "id": node_id,
                "name": props["name"],
                "indexx": props["indexX"],
                "indexy": props["indexY"],
                "lead": None,
            }
            base.sensornode.append(row)
            base.sensornode_by_id[node_id] = row
        elif kind is NodeKind.GATEWAY:
            row = {"id": node_id, "name": props["name"], "lead": None}
            base.gateway.append(row)
            base.gateway_by_id[node_id] = row
        elif kind is NodeKind.SENSOR_RAW_DATA:
            row = {
                "id": node_id,
                "sensornode_id": None,
                "tick": props["tick"],
                "pir": props["pir"],
                "seismic": props["seismic"],
                "acoustic": props["acoustic"],
                "next_id": None,
                "video_id": None,
            }
            base.sensorrawdata.append(row)
            base.sensorrawdata_by_id[node_id] = row
        elif kind is NodeKind.SN_FUSED_DATA:
            row = {
                "id": node_id,
                "fusedby": None,
                "tick": props["tick"],
                "concept": props["concept"],
                "weight": props["weight"],
                "acoustic": props.get("acoustic"),
            }
            base.sensorfuseddata.append(row)
            base.sensorfuseddata_by_id[node_id] = row
            video = {
                "id": node_id,
                "video_path": props["videoPath"],
                "duration_sec": props["videoDurationSec"],
            }
            base.sensorrawvideodata.append(video)
            base.sensorrawvideodata_by_id[node_id] = video
        elif kind is NodeKind.GW_FUSED_DATA:
            base.gatewayfuseddata.append(
                {
                    "id": node_id,
                    "fusedby": None,
                    "tick": props["tick"],
                    "keptcount": props.get("keptCount"),
                    "droppedcount": props.get("droppedCount"),
                }
            )
        elif kind is NodeKind.SINK_FUSED_DATA:
            base.sinkfuseddata.append(
                {
                    "id": node_id,
                    "tick": props["tick"],
                    "concept": props.get("concept"),
                    "weight": props.get("weight"),
                    "actionkind": props.get("actionKind"),
                    "sourcegateway": props.get("sourceGateway"),
                    "sourcenode": props.get("sourceNode"),
                    "acoustic": props.get("acoustic"),
                }
            )

    gwf_by_id = {row["id"]: row for row in base.gatewayfuseddata}
    for _, kind, from_id, to_id in store.edges():
        if kind is EdgeKind.LEAD:
            if to_id in base.sensornode_by_id:
                row = base.sensornode_by_id[to_id]
                if row["lead"] is None:
                    row["lead"] = from_id
            elif to_id in base.gateway_by_id:
                row = base.gateway_by_id[to_id]
                if row["lead"] is None:
                    row["lead"] = None if from_id in sink_ids else from_id
        elif kind is EdgeKind.COLLECT:
            row = base.sensorrawdata_by_id.get(to_id)
            if row is not None and row["sensornode_id"] is None:
                row["sensornode_id"] = from_id
        elif kind is EdgeKind.NEXT:
            row = base.sensorrawdata_by_id.get(from_id)
            if row is not None and row["next_id"] is None:
                row["next_id"] = to_id
        elif kind is EdgeKind.FUSION:
            row = base.sensorrawdata_by_id.get(from_id)
            if row is not None and row["video_id"] is None:
                row["video_id"] = to_id
        elif kind is EdgeKind.FUSED_BY:
            row = base.sensorfuseddata_by_id.get(from_id)
            if row is not None:
                if row["fusedby"] is None:
                    row["fusedby"] = to_id
            else:
                gwf = gwf_by_id.get(from_id)
                if gwf is not None and gwf["fusedby"] is None:
                    gwf["fusedby"] = to_id
    return base
