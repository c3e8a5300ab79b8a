"""The three benchmark queries over the graph store.

Each query has two implementations here:

* the engine plan (`query_*`), which leans on property indexes and stored
  adjacency — as an embedded executor it reads the storage structures
  directly in its hot loops, and
* a brute-force reference (`scan_*`), which only walks the flat node and
  edge lists through the public surface. The reference exists to check the
  engine, never to be fast.

Row shapes and ordering are part of the contract because the relational
baseline must return exactly the same rows.
"""

from __future__ import annotations

from typing import Any

from .errors import UnknownConcept
from .store import EdgeKind, GraphStore, NodeKind

VALID_CONCEPTS = ("Animal", "Human", "Vehicle", "Unknown")

DEFAULT_CHAIN_LEN = 3


def _check_concept(concept: str) -> None:
    if concept not in VALID_CONCEPTS:
        raise UnknownConcept(
            f"{concept!r} is not one of {', '.join(VALID_CONCEPTS)}"
        )


# ---------------------------------------------------------------------------
# Q1: concept detections above a confidence floor

def query_concept_based(
    store: GraphStore, concept: str, min_weight: float
) -> list[tuple[str, float, int, int, int]]:
    """Rows (concept, weight, fusionTick, indexX, indexY) ordered by
    fusionTick (ties by record id).

    Plan: concept-index bucket, weight filter, one FusedBy hop per hit.
    """
    _check_concept(concept)
    nodes = store._nodes
    fused_by = EdgeKind.FUSED_BY
    hits = [
        (snf_id, record.props, record.out_adj)
        for snf_id in store.range_scan(NodeKind.SN_FUSED_DATA, "concept", concept, concept)
        if (record := nodes[snf_id]).props["weight"] > min_weight
    ]
    rows: list[tuple[int, int, tuple]] = []
    for snf_id, props, out_adj in hits:
        sensor = nodes[out_adj[fused_by][0][1]].props
        tick = props["tick"]
        rows.append(
            (
                tick,
                snf_id,
                (concept, props["weight"], tick, sensor["indexX"], sensor["indexY"]),
            )
        )
    rows.sort(key=lambda r: (r[0], r[1]))
    return [row for _, _, row in rows]


def scan_concept_based(
    store: GraphStore, concept: str, min_weight: float
) -> list[tuple[str, float, int, int, int]]:
    _check_concept(concept)
    fused_by: dict[int, int] = {}
    for _, kind, from_id, to_id in store.edges():
        if kind is EdgeKind.FUSED_BY and from_id not in fused_by:
            fused_by[from_id] = to_id
    rows = []
    for node_id, kind, props in store.nodes():
        if kind is not NodeKind.SN_FUSED_DATA:
            continue
        if props["concept"] != concept or props["weight"] <= min_weight:
            continue
        target = fused_by.get(node_id)
        node_props = store.node_props(target)
        rows.append(
            (
                props["tick"],
                node_id,
                (concept, props["weight"], props["tick"],
                 node_props["indexX"], node_props["indexY"]),
            )
        )
    rows.sort(key=lambda r: (r[0], r[1]))
    return [row for _, _, row in rows]


# ---------------------------------------------------------------------------
# Q2: sustained-volume chains ending in video evidence

def query_video_chains(
    store: GraphStore, min_acoustic: float, chain_len: int = DEFAULT_CHAIN_LEN
) -> list[tuple[str, int, int, int, str, int]]:
    """Rows (nodeName, indexX, indexY, acoustic, videoPath, videoDurationSec)
    for every raw reading that starts `chain_len` consecutive readings all
    louder than `min_acoustic`, ordered by nodeName (ties by start id).

    The chain's last reading supplies the acoustic level and its fused video
    metadata; a chain whose last reading never fused yields no row.

    Plan: acoustic-index range for candidate starts, Next-chain walk over
    stored adjacency, Fusion hop at the chain end.
    """
    if chain_len < 1:
        raise ValueError("chain_len must be >= 1")
    nodes = store._nodes
    next_kind = EdgeKind.NEXT
    fusion = EdgeKind.FUSION
    collect = EdgeKind.COLLECT
    hops = chain_len - 1
    rows: list[tuple[str, int, tuple]] = []
    starts = store.range_scan(
        NodeKind.SENSOR_RAW_DATA, "acoustic", min_acoustic, None, lo_open=True
    )
    # visit candidates in id (= insertion) order rather than acoustic order
    starts.sort()
    for start in map(nodes.__getitem__, starts):
        current = start
        ok = True
        for _ in range(hops):
            pairs = current.out_adj.get(next_kind)
            if pairs is None:
                ok = False
                break
            current = nodes[pairs[0][1]]
            if current.props["acoustic"] <= min_acoustic:
                ok = False
                break
        if not ok:
            continue
        fused_pairs = current.out_adj.get(fusion)
        if fused_pairs is None:
            continue
        sensor = nodes[start.in_adj[collect][0][1]].props
        fused = nodes[fused_pairs[0][1]].props
        name = sensor["name"]
        rows.append(
            (
                name,
                start.node_id,
                (
                    name,
                    sensor["indexX"],
                    sensor["indexY"],
                    current.props["acoustic"],
                    fused["videoPath"],
                    fused["videoDurationSec"],
                ),
            )
        )
    rows.sort(key=lambda r: (r[0], r[1]))
    return [row for _, _, row in rows]


def scan_video_chains(
    store: GraphStore, min_acoustic: float, chain_len: int = DEFAULT_CHAIN_LEN
) -> list[tuple[str, int, int, int, str, int]]:
    if chain_len < 1:
        raise ValueError("chain_len must be >= 1")
    next_of: dict[int, int] = {}
    fused_of: dict[int, int] = {}
    collected_by: dict[int, int] = {}
    raw_kind: dict[int, bool] = {}
    for node_id, kind, _ in store.nodes():
        if kind is NodeKind.SENSOR_RAW_DATA:
            raw_kind[node_id] = True
    for _, kind, from_id, to_id in store.edges():
        if kind is EdgeKind.NEXT and from_id in raw_kind and from_id not in next_of:
            next_of[from_id] = to_id
        elif kind is EdgeKind.FUSION and from_id in raw_kind and from_id not in fused_of:
            fused_of[from_id] = to_id
        elif kind is EdgeKind.COLLECT and to_id not in collected_by:
            collected_by[to_id] = from_id
    rows = []
    for start_id in raw_kind:
        if store.node_props(start_id)["acoustic"] <= min_acoustic:
            continue
        current = start_id
        ok = True
        for _ in range(chain_len - 1):
            current = next_of.get(current)
            if current is None or store.node_props(current)["acoustic"] <= min_acoustic:
                ok = False
                break
        if not ok:
            continue
        fused = fused_of.get(current)
        if fused is None:
            continue
        sensor_props = store.node_props(collected_by[start_id])
        fused_props = store.node_props(fused)
        rows.append(
            (
                sensor_props["name"],
                start_id,
                (
                    sensor_props["name"],
                    sensor_props["indexX"],
                    sensor_props["indexY"],
                    store.node_props(current)["acoustic"],
                    fused_props["videoPath"],
                    fused_props["videoDurationSec"],
                ),
            )
        )
    rows.sort(key=lambda r: (r[0], r[1]))
    return [row for _, _, row in rows]


# ---------------------------------------------------------------------------
# Q3: detections with routing depth to the sink

def query_recursive_depth(
    store: GraphStore, concept: str, min_weight: float
) -> list[tuple[str, str, int, int]]:
    """Rows (gatewayName, nodeName, fusionTick, depth) for each qualifying
    detection; depth counts Lead hops from the node's gateway to the sink.
    Ordered by (gatewayName, nodeName, fusionTick, record id).

    Plan: one Lead traversal rooted at the sink resolves every gateway's
    depth, then a weight-index range supplies candidates; each hit is a
    FusedBy hop plus an incoming-Lead hop.
    """
    _check_concept(concept)
    nodes = store._nodes
    fused_by = EdgeKind.FUSED_BY
    lead = EdgeKind.LEAD
    # one traversal of the static Lead hierarchy resolves every sensor to
    # (gatewayName, sensorName, gateway depth); hits then need a single probe
    gw_info: dict[int, tuple[str, int]] = {}
    sensor_info: dict[int, tuple[str, str, int]] = {}
    for sink_id in store.nodes_of_kind(NodeKind.SINK):
        reached = store.traverse(sink_id, lead, "out")
        for node_id, depth in reached:
            node = nodes[node_id]
            if node.kind is NodeKind.GATEWAY:
                gw_info[node_id] = (node.props["name"], depth)
        for node_id, _ in reached:
            node = nodes[node_id]
            if node.kind is NodeKind.SENSOR_NODE:
                gateway_name, depth = gw_info[node.in_adj[lead][0][1]]
                sensor_info[node_id] = (gateway_name, node.props["name"], depth)
    # both predicates are indexed: intersect the id sets, probing the
    # smaller side against the larger
    by_weight = store.range_scan(
        NodeKind.SN_FUSED_DATA, "weight", min_weight, None, lo_open=True
    )
    by_concept = store.range_scan(NodeKind.SN_FUSED_DATA, "concept", concept, concept)
    if len(by_concept) < len(by_weight):
        hit_ids = set(by_weight).intersection(by_concept)
    else:
        hit_ids = set(by_concept).intersection(by_weight)
    rows: list[tuple[tuple, tuple]] = []
    for record in map(nodes.__getitem__, hit_ids):
        gateway_name, node_name, depth = sensor_info[record.out_adj[fused_by][0][1]]
        tick = record.props["tick"]
        rows.append(
            ((gateway_name, node_name, tick, record.node_id),
             (gateway_name, node_name, tick, depth))
        )
    rows.sort(key=lambda r: r[0])
    return [row for _, row in rows]


def scan_recursive_depth(
    store: GraphStore, concept: str, min_weight: float
) -> list[tuple[str, str, int, int]]:
    _check_concept(concept)
    fused_by: dict[int, int] = {}
    led_by: dict[int, int] = {}
    for _, kind, from_id, to_id in store.edges():
        if kind is EdgeKind.FUSED_BY and from_id not in fused_by:
            fused_by[from_id] = to_id
        elif kind is EdgeKind.LEAD and to_id not in led_by:
            led_by[to_id] = from_id
    sink_ids = set(store.nodes_of_kind(NodeKind.SINK))
    rows = []
    for snf_id, kind, props in store.nodes():
        if kind is not NodeKind.SN_FUSED_DATA:
            continue
        if props["concept"] != concept or props["weight"] <= min_weight:
            continue
        node_id = fused_by[snf_id]
        gateway_id = led_by[node_id]
        depth = 0
        current = gateway_id
        while current not in sink_ids:
            current = led_by[current]
            depth += 1
        gateway_name = store.node_props(gateway_id)["name"]
        node_name = store.node_props(node_id)["name"]
        row = (gateway_name, node_name, props["tick"], depth)
        rows.append(((gateway_name, node_name, props["tick"], snf_id), row))
    rows.sort(key=lambda r: r[0])
    return [row for _, row in rows]


QUERY_FNS: dict[str, Any] = {
    "q1": query_concept_based,
    "q2": query_video_chains,
    "q3": query_recursive_depth,
}

SCAN_FNS: dict[str, Any] = {
    "q1": scan_concept_based,
    "q2": scan_video_chains,
    "q3": scan_recursive_depth,
}
