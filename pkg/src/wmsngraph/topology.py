"""Surveillance field layout: sink, gateway clusters, and sensor grid.

The monitored area is a square. Sensor nodes sit on a regular grid with one
node per `node_spacing`-sized cell, grouped into square clusters, each led by
a gateway placed at the cluster centroid. The sink sits at the area centre.

With `gateway_hops` disabled every gateway reports straight to the sink
(star). With it enabled only the centre gateway talks to the sink and the
remaining gateways chain inward, each led by the neighbour one step closer
to the centre cluster, so fused reports travel several hops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonEmptyStore, OrphanNode, UnknownNode
from .store import EdgeKind, GraphStore, NodeKind

SINK_NAME = "SINK"


@dataclass(frozen=True)
class TopologyConfig:
    clusters_per_side: int = 3
    nodes_per_cluster_side: int = 4
    node_spacing: float = 10.0

    # route gateway traffic over inter-gateway hops instead of a star
    gateway_hops: bool = False

    def __post_init__(self):
        if self.clusters_per_side < 1:
            raise ValueError("clusters_per_side must be >= 1")
        if self.nodes_per_cluster_side < 1:
            raise ValueError("nodes_per_cluster_side must be >= 1")
        if self.node_spacing <= 0:
            raise ValueError("node_spacing must be positive")

    @property
    def nodes_per_side(self) -> int:
        return self.clusters_per_side * self.nodes_per_cluster_side

    @property
    def area_side(self) -> float:
        return self.nodes_per_side * self.node_spacing

    def sensor_position(self, i: int, j: int) -> tuple[float, float]:
        return ((i + 1) * self.node_spacing, (j + 1) * self.node_spacing)

    def gateway_position(self, ci: int, cj: int) -> tuple[float, float]:
        n = self.nodes_per_cluster_side
        cx = self.node_spacing * (ci * n + (n + 1) / 2)
        cy = self.node_spacing * (cj * n + (n + 1) / 2)
        return (cx, cy)


def sensor_name(i: int, j: int) -> str:
    return f"SN-{i}-{j}"


def gateway_name(ci: int, cj: int) -> str:
    return f"GW-{ci}-{cj}"


@dataclass
class Topology:
    """Store ids and geometry for one built field."""

    store: GraphStore
    config: TopologyConfig
    sink_id: int
    gateway_ids: dict[tuple[int, int], int]
    sensor_ids: dict[tuple[int, int], int]
    positions: dict[int, tuple[float, float]] = field(repr=False)

    def __post_init__(self):
        ids = sorted(self.sensor_ids.values())
        self._grid_ids = np.array(ids, dtype=np.int64)
        pos = np.array([self.positions[i] for i in ids], dtype=np.float64)
        pos = pos.reshape(len(ids), 2)
        self._grid_x = pos[:, 0]
        self._grid_y = pos[:, 1]

    def nodes_within_radius(
        self, point: tuple[float, float], radius: float
    ) -> list[tuple[int, float]]:
        """Sensor nodes with Euclidean distance <= radius from `point`,
        ascending by (distance, node name)."""
        px, py = point
        dist = np.hypot(self._grid_x - px, self._grid_y - py)
        mask = dist <= radius
        hits = [
            (float(d), self.store.node_props(int(nid))["name"], int(nid))
            for nid, d in zip(self._grid_ids[mask], dist[mask])
        ]
        hits.sort(key=lambda t: (t[0], t[1]))
        return [(nid, d) for d, _, nid in hits]

    def gateway_of(self, sensor_id: int) -> int:
        gw = self.store.neighbor_one(sensor_id, EdgeKind.LEAD, "in")
        if gw is None:
            raise OrphanNode(f"sensor node {sensor_id} has no leading gateway")
        return gw

    def depth_to_sink(self, node_id: int) -> int:
        """Number of Lead hops separating a node from the sink (sink: 0)."""
        depth = 0
        current = node_id
        seen = set()
        while self.store.node_kind(current) is not NodeKind.SINK:
            leader = self.store.neighbor_one(current, EdgeKind.LEAD, "in")
            if leader is None:
                raise OrphanNode(f"node {current} is not led by anything")
            if leader in seen:
                raise OrphanNode(f"Lead cycle at node {leader}")
            seen.add(leader)
            current = leader
            depth += 1
        return depth

    def position(self, node_id: int) -> tuple[float, float]:
        try:
            return self.positions[node_id]
        except KeyError:
            raise UnknownNode(f"node {node_id} has no position") from None

    @property
    def gateway_count(self) -> int:
        return len(self.gateway_ids)

    @property
    def sensor_count(self) -> int:
        return len(self.sensor_ids)


def _hop_parent(ci: int, cj: int, centre: int) -> tuple[int, int]:
    def step(v: int) -> int:
        if v > centre:
            return v - 1
        if v < centre:
            return v + 1
        return v

    return (step(ci), step(cj))


def build_topology(config: TopologyConfig, store: GraphStore) -> Topology:
    """Create sink, gateways, sensor nodes, and Lead edges in `store`.

    The store must be empty; node ids are assigned in a fixed order (sink,
    gateways row-major, sensors row-major) so identical configs produce
    identical snapshots.
    """
    if store.node_count or store.edge_count:
        raise NonEmptyStore(
            f"topology build needs an empty store, found {store.node_count} nodes"
        )

    positions: dict[int, tuple[float, float]] = {}
    half = config.area_side / 2
    sink_id = store.create_node(NodeKind.SINK, {"name": SINK_NAME})
    positions[sink_id] = (half, half)

    gateway_ids: dict[tuple[int, int], int] = {}
    for ci in range(config.clusters_per_side):
        for cj in range(config.clusters_per_side):
            gid = store.create_node(NodeKind.GATEWAY, {"name": gateway_name(ci, cj)})
            gateway_ids[(ci, cj)] = gid
            positions[gid] = config.gateway_position(ci, cj)

    sensor_ids: dict[tuple[int, int], int] = {}
    n = config.nodes_per_cluster_side
    for i in range(config.nodes_per_side):
        for j in range(config.nodes_per_side):
            sid = store.create_node(
                NodeKind.SENSOR_NODE,
                {"name": sensor_name(i, j), "indexX": i, "indexY": j},
            )
            sensor_ids[(i, j)] = sid
            positions[sid] = config.sensor_position(i, j)

    if config.gateway_hops and config.clusters_per_side > 1:
        centre = (config.clusters_per_side - 1) // 2
        store.create_edge(EdgeKind.LEAD, sink_id, gateway_ids[(centre, centre)])
        # chain the rest inward, nearest ring first so parents already exist
        ordered = sorted(
            gateway_ids,
            key=lambda c: (max(abs(c[0] - centre), abs(c[1] - centre)), c),
        )
        for ci, cj in ordered:
            if (ci, cj) == (centre, centre):
                continue
            parent = _hop_parent(ci, cj, centre)
            store.create_edge(EdgeKind.LEAD, gateway_ids[parent], gateway_ids[(ci, cj)])
    else:
        for key in sorted(gateway_ids):
            store.create_edge(EdgeKind.LEAD, sink_id, gateway_ids[key])

    for (i, j), sid in sorted(sensor_ids.items()):
        gw = gateway_ids[(i // n, j // n)]
        store.create_edge(EdgeKind.LEAD, gw, sid)

    return Topology(
        store=store,
        config=config,
        sink_id=sink_id,
        gateway_ids=gateway_ids,
        sensor_ids=sensor_ids,
        positions=positions,
    )


def attach_topology(store: GraphStore, config: TopologyConfig) -> Topology:
    """Rebuild the Topology view over a store that already holds a field
    (e.g. one restored from a snapshot built with the same config)."""
    sinks = store.nodes_of_kind(NodeKind.SINK)
    if len(sinks) != 1:
        raise OrphanNode(f"expected exactly one sink, found {len(sinks)}")
    positions: dict[int, tuple[float, float]] = {}
    half = config.area_side / 2
    positions[sinks[0]] = (half, half)
    gateway_ids: dict[tuple[int, int], int] = {}
    for ci in range(config.clusters_per_side):
        for cj in range(config.clusters_per_side):
            gid = store.find_by_name(NodeKind.GATEWAY, gateway_name(ci, cj))
            if gid is None:
                raise UnknownNode(f"gateway {gateway_name(ci, cj)} missing from store")
            gateway_ids[(ci, cj)] = gid
            positions[gid] = config.gateway_position(ci, cj)
    sensor_ids: dict[tuple[int, int], int] = {}
    for i in range(config.nodes_per_side):
        for j in range(config.nodes_per_side):
            sid = store.find_by_name(NodeKind.SENSOR_NODE, sensor_name(i, j))
            if sid is None:
                raise UnknownNode(f"sensor {sensor_name(i, j)} missing from store")
            sensor_ids[(i, j)] = sid
            positions[sid] = config.sensor_position(i, j)
    return Topology(
        store=store,
        config=config,
        sink_id=sinks[0],
        gateway_ids=gateway_ids,
        sensor_ids=sensor_ids,
        positions=positions,
    )


def check_no_orphans(topology: Topology) -> None:
    """Every gateway and sensor node must be led by something."""
    store = topology.store
    for nid in store.nodes_of_kind(NodeKind.GATEWAY):
        if store.neighbor_one(nid, EdgeKind.LEAD, "in") is None:
            raise OrphanNode(f"gateway {store.node_props(nid)['name']} has no leader")
    for nid in store.nodes_of_kind(NodeKind.SENSOR_NODE):
        if store.neighbor_one(nid, EdgeKind.LEAD, "in") is None:
            raise OrphanNode(f"sensor {store.node_props(nid)['name']} has no leader")
