"""Embedded in-memory property graph with typed nodes and edges.

The store keeps adjacency lists directly on node records (index-free
adjacency), enforces a fixed edge schema, and maintains sorted property
indexes for the handful of (kind, property) pairs the query engine scans.
Records are append-only: node properties are fixed at creation and edges are
never deleted, although the "Last*" bookkeeping edges may be retargeted to a
newer record.

Snapshots are line oriented and byte deterministic:

    WMSNGRAPH v1
    N <id> <kind> <json-props>
    E <id> <kind> <fromId> <toId>
"""

from __future__ import annotations

import json
import threading
from bisect import bisect_left, bisect_right, insort
from collections import deque
from enum import Enum
from typing import Any, Iterable, Iterator

from .errors import (
    CorruptSnapshot,
    DanglingEndpoint,
    DuplicateExternalName,
    IoFailure,
    MissingRequiredProperty,
    SchemaViolation,
    UnindexedProperty,
    UnknownNode,
)


class NodeKind(str, Enum):
    SINK = "Sink"
    GATEWAY = "Gateway"
    SENSOR_NODE = "SensorNode"
    SENSOR_RAW_DATA = "SensorRawData"
    SN_FUSED_DATA = "SnFusedData"
    GW_FUSED_DATA = "GwFusedData"
    SINK_FUSED_DATA = "SinkFusedData"


class EdgeKind(str, Enum):
    LEAD = "Lead"
    COLLECT = "Collect"
    LAST_COLLECTED = "LastCollected"
    NEXT = "Next"
    FUSION = "Fusion"
    FUSED_BY = "FusedBy"
    LAST_FUSION = "LastFusion"
    REPORTED = "Reported"
    FORWARDED = "Forwarded"


# Permitted (edge, from, to) triples. Anything else is a SchemaViolation.
EDGE_SCHEMA: frozenset[tuple[EdgeKind, NodeKind, NodeKind]] = frozenset(
    {
        (EdgeKind.LEAD, NodeKind.SINK, NodeKind.GATEWAY),
        (EdgeKind.LEAD, NodeKind.GATEWAY, NodeKind.GATEWAY),
        (EdgeKind.LEAD, NodeKind.GATEWAY, NodeKind.SENSOR_NODE),
        (EdgeKind.COLLECT, NodeKind.SENSOR_NODE, NodeKind.SENSOR_RAW_DATA),
        (EdgeKind.LAST_COLLECTED, NodeKind.SENSOR_NODE, NodeKind.SENSOR_RAW_DATA),
        (EdgeKind.NEXT, NodeKind.SENSOR_RAW_DATA, NodeKind.SENSOR_RAW_DATA),
        (EdgeKind.NEXT, NodeKind.SN_FUSED_DATA, NodeKind.SN_FUSED_DATA),
        (EdgeKind.FUSION, NodeKind.SENSOR_RAW_DATA, NodeKind.SN_FUSED_DATA),
        (EdgeKind.FUSION, NodeKind.SN_FUSED_DATA, NodeKind.GW_FUSED_DATA),
        (EdgeKind.FUSION, NodeKind.GW_FUSED_DATA, NodeKind.SINK_FUSED_DATA),
        (EdgeKind.FUSED_BY, NodeKind.SN_FUSED_DATA, NodeKind.SENSOR_NODE),
        (EdgeKind.FUSED_BY, NodeKind.GW_FUSED_DATA, NodeKind.GATEWAY),
        (EdgeKind.FUSED_BY, NodeKind.SINK_FUSED_DATA, NodeKind.SINK),
        (EdgeKind.LAST_FUSION, NodeKind.SENSOR_NODE, NodeKind.SN_FUSED_DATA),
        (EdgeKind.LAST_FUSION, NodeKind.GATEWAY, NodeKind.GW_FUSED_DATA),
        (EdgeKind.REPORTED, NodeKind.SN_FUSED_DATA, NodeKind.GATEWAY),
        (EdgeKind.FORWARDED, NodeKind.GW_FUSED_DATA, NodeKind.GATEWAY),
        (EdgeKind.FORWARDED, NodeKind.GW_FUSED_DATA, NodeKind.SINK),
    }
)

REQUIRED_PROPS: dict[NodeKind, frozenset[str]] = {
    NodeKind.SINK: frozenset({"name"}),
    NodeKind.GATEWAY: frozenset({"name"}),
    NodeKind.SENSOR_NODE: frozenset({"name"}),
    NodeKind.SENSOR_RAW_DATA: frozenset({"tick", "pir", "seismic", "acoustic"}),
    NodeKind.SN_FUSED_DATA: frozenset({"tick", "concept", "weight"}),
    NodeKind.GW_FUSED_DATA: frozenset({"tick"}),
    NodeKind.SINK_FUSED_DATA: frozenset({"tick"}),
}

# Kinds whose "name" property must be globally unique within the kind.
UNIQUE_NAME_KINDS = (NodeKind.GATEWAY, NodeKind.SENSOR_NODE)

# (kind, property) pairs with a maintained range index.
DEFAULT_INDEXES: tuple[tuple[NodeKind, str], ...] = (
    (NodeKind.SN_FUSED_DATA, "weight"),
    (NodeKind.SN_FUSED_DATA, "concept"),
    (NodeKind.SENSOR_RAW_DATA, "acoustic"),
    (NodeKind.SENSOR_NODE, "name"),
)

SNAPSHOT_HEADER = "WMSNGRAPH v1"

_SCALARS = (bool, int, float, str)


class _Node:
    __slots__ = ("node_id", "kind", "props", "out_adj", "in_adj")

    def __init__(self, node_id: int, kind: NodeKind, props: dict[str, Any]):
        self.node_id = node_id
        self.kind = kind
        self.props = props
        # EdgeKind -> list[(edge_id, other_node_id)], insertion ordered
        self.out_adj: dict[EdgeKind, list[tuple[int, int]]] = {}
        self.in_adj: dict[EdgeKind, list[tuple[int, int]]] = {}


class _Edge:
    __slots__ = ("edge_id", "kind", "from_id", "to_id")

    def __init__(self, edge_id: int, kind: EdgeKind, from_id: int, to_id: int):
        self.edge_id = edge_id
        self.kind = kind
        self.from_id = from_id
        self.to_id = to_id


class _PropIndex:
    """Sorted-value index: distinct values kept ordered, ids per value kept
    in insertion order so scans are deterministic."""

    __slots__ = ("values", "by_value")

    def __init__(self):
        self.values: list[Any] = []
        self.by_value: dict[Any, list[int]] = {}

    def add(self, value: Any, node_id: int) -> None:
        bucket = self.by_value.get(value)
        if bucket is None:
            insort(self.values, value)
            self.by_value[value] = [node_id]
        else:
            bucket.append(node_id)

    def scan(self, lo: Any, hi: Any, lo_open: bool = False) -> list[int]:
        if lo is None:
            start = 0
        elif lo_open:
            start = bisect_right(self.values, lo)
        else:
            start = bisect_left(self.values, lo)
        end = len(self.values) if hi is None else bisect_right(self.values, hi)
        out: list[int] = []
        for value in self.values[start:end]:
            out.extend(self.by_value[value])
        return out


class GraphStore:
    """Typed property graph. Node and edge ids are dense, starting at 0."""

    def __init__(self, indexes: Iterable[tuple[NodeKind, str]] = DEFAULT_INDEXES):
        self._nodes: list[_Node] = []
        self._edges: list[_Edge] = []
        self._by_kind: dict[NodeKind, list[int]] = {k: [] for k in NodeKind}
        self._edge_counts: dict[EdgeKind, int] = {k: 0 for k in EdgeKind}
        self._indexes: dict[tuple[NodeKind, str], _PropIndex] = {
            key: _PropIndex() for key in indexes
        }
        self._names: dict[NodeKind, dict[str, int]] = {
            k: {} for k in UNIQUE_NAME_KINDS
        }
        self._lock = threading.RLock()

    # ------------------------------------------------------------------
    # mutation

    def create_node(self, kind: NodeKind, props: dict[str, Any]) -> int:
        kind = NodeKind(kind)
        for required in REQUIRED_PROPS[kind]:
            if required not in props:
                raise MissingRequiredProperty(kind.value, required)
        for key, value in props.items():
            if not isinstance(value, _SCALARS):
                raise TypeError(
                    f"property {key!r} must be a scalar, got {type(value).__name__}"
                )
        with self._lock:
            if kind in self._names:
                name = props["name"]
                if name in self._names[kind]:
                    raise DuplicateExternalName(f"{kind.value} name {name!r} already exists")
            node_id = len(self._nodes)
            node = _Node(node_id, kind, dict(props))
            self._nodes.append(node)
            self._by_kind[kind].append(node_id)
            if kind in self._names:
                self._names[kind][props["name"]] = node_id
            for (ikind, prop), index in self._indexes.items():
                if ikind is kind and prop in props:
                    index.add(props[prop], node_id)
            return node_id

    def create_edge(self, kind: EdgeKind, from_id: int, to_id: int) -> int:
        kind = EdgeKind(kind)
        with self._lock:
            if not self.has_node(from_id):
                raise DanglingEndpoint(f"edge source {from_id} does not exist")
            if not self.has_node(to_id):
                raise DanglingEndpoint(f"edge target {to_id} does not exist")
            src = self._nodes[from_id]
            dst = self._nodes[to_id]
            if (kind, src.kind, dst.kind) not in EDGE_SCHEMA:
                raise SchemaViolation(
                    f"{kind.value} edge from {src.kind.value} to {dst.kind.value} not allowed"
                )
            edge_id = len(self._edges)
            self._edges.append(_Edge(edge_id, kind, from_id, to_id))
            self._edge_counts[kind] += 1
            src.out_adj.setdefault(kind, []).append((edge_id, to_id))
            dst.in_adj.setdefault(kind, []).append((edge_id, from_id))
            return edge_id

    def retarget_edge(self, edge_id: int, new_to_id: int) -> None:
        """Point an existing edge at a different target node.

        Used for the Last* bookkeeping edges, which always reference the most
        recent record instead of accumulating history.
        """
        with self._lock:
            if not 0 <= edge_id < len(self._edges):
                raise UnknownNode(f"edge {edge_id} does not exist")
            if not self.has_node(new_to_id):
                raise DanglingEndpoint(f"edge target {new_to_id} does not exist")
            edge = self._edges[edge_id]
            src = self._nodes[edge.from_id]
            new_dst = self._nodes[new_to_id]
            if (edge.kind, src.kind, new_dst.kind) not in EDGE_SCHEMA:
                raise SchemaViolation(
                    f"{edge.kind.value} edge from {src.kind.value} "
                    f"to {new_dst.kind.value} not allowed"
                )
            old_dst = self._nodes[edge.to_id]
            old_dst.in_adj[edge.kind].remove((edge_id, edge.from_id))
            out_list = src.out_adj[edge.kind]
            out_list[out_list.index((edge_id, edge.to_id))] = (edge_id, new_to_id)
            new_dst.in_adj.setdefault(edge.kind, []).append((edge_id, edge.from_id))
            edge.to_id = new_to_id

    # ------------------------------------------------------------------
    # reads

    def has_node(self, node_id: int) -> bool:
        return 0 <= node_id < len(self._nodes)

    def _node(self, node_id: int) -> _Node:
        if not self.has_node(node_id):
            raise UnknownNode(f"node {node_id} does not exist")
        return self._nodes[node_id]

    def node_kind(self, node_id: int) -> NodeKind:
        return self._node(node_id).kind

    def node_props(self, node_id: int) -> dict[str, Any]:
        """Live property mapping; callers must treat it as read-only."""
        return self._node(node_id).props

    def neighbors(
        self, node_id: int, kind: EdgeKind, direction: str = "out"
    ) -> list[int]:
        node = self._node(node_id)
        adj = node.out_adj if direction == "out" else node.in_adj
        return [other for _, other in adj.get(EdgeKind(kind), ())]

    def neighbor_one(
        self, node_id: int, kind: EdgeKind, direction: str = "out"
    ) -> int | None:
        """First neighbor over `kind` or None; handy for to-one edges."""
        node = self._node(node_id)
        adj = node.out_adj if direction == "out" else node.in_adj
        pairs = adj.get(kind)
        return pairs[0][1] if pairs else None

    def traverse(
        self,
        start_id: int,
        kind: EdgeKind,
        direction: str = "out",
        max_depth: int | None = None,
    ) -> list[tuple[int, int]]:
        """Breadth-first reachability over one edge kind.

        Returns (node_id, depth) pairs in visit order; the start node appears
        first at depth 0 and each node is reported at its minimal depth.
        """
        kind = EdgeKind(kind)
        self._node(start_id)
        seen = {start_id}
        order: list[tuple[int, int]] = [(start_id, 0)]
        frontier = deque(order)
        while frontier:
            node_id, depth = frontier.popleft()
            if max_depth is not None and depth >= max_depth:
                continue
            node = self._nodes[node_id]
            adj = node.out_adj if direction == "out" else node.in_adj
            for _, other in adj.get(kind, ()):
                if other not in seen:
                    seen.add(other)
                    order.append((other, depth + 1))
                    frontier.append((other, depth + 1))
        return order

    def range_scan(
        self, kind: NodeKind, prop: str, lo: Any, hi: Any, lo_open: bool = False
    ) -> list[int]:
        """Ids of `kind` nodes with lo <= props[prop] <= hi (None = open end),
        ordered by property value then insertion. `lo_open` makes the lower
        bound strict (lo < props[prop])."""
        index = self._indexes.get((NodeKind(kind), prop))
        if index is None:
            raise UnindexedProperty(f"no index on ({NodeKind(kind).value}, {prop!r})")
        return index.scan(lo, hi, lo_open)

    def find_by_name(self, kind: NodeKind, name: str) -> int | None:
        lookup = self._names.get(NodeKind(kind))
        if lookup is None:
            raise UnindexedProperty(f"{NodeKind(kind).value} names are not unique-indexed")
        return lookup.get(name)

    def nodes_of_kind(self, kind: NodeKind) -> list[int]:
        return list(self._by_kind[NodeKind(kind)])

    def nodes(self) -> Iterator[tuple[int, NodeKind, dict[str, Any]]]:
        for node in self._nodes:
            yield node.node_id, node.kind, node.props

    def edges(self) -> Iterator[tuple[int, EdgeKind, int, int]]:
        for edge in self._edges:
            yield edge.edge_id, edge.kind, edge.from_id, edge.to_id

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def count_nodes(self, kind: NodeKind) -> int:
        return len(self._by_kind[NodeKind(kind)])

    def count_edges(self, kind: EdgeKind) -> int:
        return self._edge_counts[EdgeKind(kind)]

    # ------------------------------------------------------------------
    # snapshots

    def snapshot_lines(self) -> Iterator[str]:
        yield SNAPSHOT_HEADER
        for node in self._nodes:
            props = json.dumps(node.props, sort_keys=True, separators=(",", ":"))
            yield f"N {node.node_id} {node.kind.value} {props}"
        for edge in self._edges:
            yield f"E {edge.edge_id} {edge.kind.value} {edge.from_id} {edge.to_id}"

    def export_snapshot(self, path) -> int:
        """Write the snapshot file; returns the number of records written."""
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fp:
                for line in self.snapshot_lines():
                    fp.write(line)
                    fp.write("\n")
        except OSError as exc:
            raise IoFailure(f"cannot write snapshot {path}: {exc}") from exc
        return len(self._nodes) + len(self._edges)

    @classmethod
    def import_snapshot(
        cls, path, indexes: Iterable[tuple[NodeKind, str]] = DEFAULT_INDEXES
    ) -> "GraphStore":
        try:
            with open(path, "r", encoding="utf-8") as fp:
                lines = fp.read().splitlines()
        except OSError as exc:
            raise IoFailure(f"cannot read snapshot {path}: {exc}") from exc
        if not lines or lines[0] != SNAPSHOT_HEADER:
            raise CorruptSnapshot(1, f"expected header {SNAPSHOT_HEADER!r}")
        store = cls(indexes=indexes)
        for line_no, line in enumerate(lines[1:], start=2):
            if not line.strip():
                raise CorruptSnapshot(line_no, "blank line")
            tag, _, rest = line.partition(" ")
            try:
                if tag == "N":
                    ident, kind_s, props_s = rest.split(" ", 2)
                    kind = NodeKind(kind_s)
                    props = json.loads(props_s)
                    if not isinstance(props, dict):
                        raise CorruptSnapshot(line_no, "props must be a JSON object")
                    node_id = store.create_node(kind, props)
                    if node_id != int(ident):
                        raise CorruptSnapshot(
                            line_no, f"node id {ident} out of sequence"
                        )
                elif tag == "E":
                    ident, kind_s, from_s, to_s = rest.split(" ")
                    edge_id = store.create_edge(
                        EdgeKind(kind_s), int(from_s), int(to_s)
                    )
                    if edge_id != int(ident):
                        raise CorruptSnapshot(
                            line_no, f"edge id {ident} out of sequence"
                        )
                else:
                    raise CorruptSnapshot(line_no, f"unknown record tag {tag!r}")
            except CorruptSnapshot:
                raise
            except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
                raise CorruptSnapshot(line_no, str(exc)) from exc
            except (SchemaViolation, DanglingEndpoint, MissingRequiredProperty,
                    DuplicateExternalName) as exc:
                raise CorruptSnapshot(line_no, str(exc)) from exc
        return store
