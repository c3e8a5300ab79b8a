"""
Embedded property graph: nodes, edges, indexes, snapshots
=========================================================

The storage layer is a small in-memory property graph. Every node has a
kind, a property map, and per-kind adjacency lists; selected properties are
kept in ordered indexes so range scans avoid full passes over the store.
"""

import tempfile
from pathlib import Path

from wmsngraph import EdgeKind, GraphStore, NodeKind

# Build a miniature field by hand: one sink, one gateway, two sensor nodes.
store = GraphStore()
sink = store.create_node(NodeKind.SINK, {"name": "SINK"})
gateway = store.create_node(NodeKind.GATEWAY, {"name": "GW-0-0"})
west = store.create_node(NodeKind.SENSOR_NODE, {"name": "SN-0-0", "indexX": 0, "indexY": 0})
east = store.create_node(NodeKind.SENSOR_NODE, {"name": "SN-1-0", "indexX": 1, "indexY": 0})

# Control edges point downstream: the sink leads the gateway, the gateway
# leads its sensor nodes.
store.create_edge(EdgeKind.LEAD, sink, gateway)
store.create_edge(EdgeKind.LEAD, gateway, west)
store.create_edge(EdgeKind.LEAD, gateway, east)

print("nodes:", store.node_count, "edges:", store.edge_count)

# Attach a few measurement records under one sensor node. `weight` and
# `concept` are indexed for SnFusedData, which is what the analytics
# queries lean on.
for tick, weight in enumerate((0.25, 0.5, 0.75, 1.0)):
    rec = store.create_node(
        NodeKind.SN_FUSED_DATA,
        {"concept": "Animal", "weight": weight, "tick": tick,
         "acoustic": 10 + tick, "features": "[]"},
    )
    store.create_edge(EdgeKind.FUSED_BY, rec, west)

# Range scan over the ordered weight index: weight >= 0.5.
heavy = store.range_scan(NodeKind.SN_FUSED_DATA, "weight", 0.5, None)
print("records with weight >= 0.5:", len(heavy))

# Breadth-first traversal from the sink along outgoing LEAD edges returns
# (node_id, depth) pairs — the command hierarchy with hop counts.
for node_id, depth in store.traverse(sink, EdgeKind.LEAD, "out"):
    print("  depth", depth, store.node_kind(node_id).value, store.node_props(node_id)["name"])

# Snapshots are line-oriented text: a header, then one line per node and
# per edge. Import rebuilds every index, so a round trip is lossless.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "field.snapshot"
    store.export_snapshot(path)
    print("snapshot header:", path.read_text().splitlines()[0])

    clone = GraphStore.import_snapshot(path)
    assert list(clone.snapshot_lines()) == list(store.snapshot_lines())
    print("round trip: identical line for line")
