"""Graph store contract tests.

Adjacency, traversal, and index behaviour are checked against independent
oracles: plain edge-list scans, networkx shortest-path depths, and full
property scans.
"""

import json

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmsngraph.errors import (
    CorruptSnapshot,
    DanglingEndpoint,
    DuplicateExternalName,
    IoFailure,
    MissingRequiredProperty,
    SchemaViolation,
    UnindexedProperty,
    UnknownNode,
)
from wmsngraph.store import (
    DEFAULT_INDEXES,
    EDGE_SCHEMA,
    REQUIRED_PROPS,
    EdgeKind,
    GraphStore,
    NodeKind,
)

MINIMAL_PROPS = {
    NodeKind.SINK: {"name": "SINK"},
    NodeKind.GATEWAY: {"name": "GW-0-0"},
    NodeKind.SENSOR_NODE: {"name": "SN-0-0"},
    NodeKind.SENSOR_RAW_DATA: {"tick": 0, "pir": True, "seismic": 3, "acoustic": 4},
    NodeKind.SN_FUSED_DATA: {"tick": 0, "concept": "Human", "weight": 0.5},
    NodeKind.GW_FUSED_DATA: {"tick": 0},
    NodeKind.SINK_FUSED_DATA: {"tick": 0},
}


def fresh_node(store: GraphStore, kind: NodeKind, **extra) -> int:
    props = dict(MINIMAL_PROPS[kind])
    if "name" in props:
        props["name"] = f"{props['name']}-{store.node_count}"
    props.update(extra)
    return store.create_node(kind, props)


def test_node_ids_are_dense_and_sequential():
    store = GraphStore()
    ids = [fresh_node(store, NodeKind.SENSOR_RAW_DATA) for _ in range(5)]
    assert ids == [0, 1, 2, 3, 4]
    assert store.node_count == 5


def test_required_props_enforced_per_kind():
    store = GraphStore()
    for kind, required in REQUIRED_PROPS.items():
        for missing in required:
            props = {k: v for k, v in MINIMAL_PROPS[kind].items() if k != missing}
            with pytest.raises(MissingRequiredProperty) as err:
                store.create_node(kind, props)
            assert missing in str(err.value)


def test_non_scalar_property_rejected():
    store = GraphStore()
    with pytest.raises(TypeError):
        store.create_node(NodeKind.SINK, {"name": "S", "bad": [1, 2]})
    with pytest.raises(TypeError):
        store.create_node(NodeKind.SINK, {"name": "S", "bad": None})


def test_duplicate_names_rejected_for_gateway_and_sensor_node():
    store = GraphStore()
    store.create_node(NodeKind.GATEWAY, {"name": "GW-0-0"})
    with pytest.raises(DuplicateExternalName):
        store.create_node(NodeKind.GATEWAY, {"name": "GW-0-0"})
    store.create_node(NodeKind.SENSOR_NODE, {"name": "SN-1-1"})
    with pytest.raises(DuplicateExternalName):
        store.create_node(NodeKind.SENSOR_NODE, {"name": "SN-1-1"})
    # sinks are not subject to the uniqueness rule
    store.create_node(NodeKind.SINK, {"name": "SINK"})
    store.create_node(NodeKind.SINK, {"name": "SINK"})


def test_find_by_name():
    store = GraphStore()
    gw = store.create_node(NodeKind.GATEWAY, {"name": "GW-2-1"})
    assert store.find_by_name(NodeKind.GATEWAY, "GW-2-1") == gw
    assert store.find_by_name(NodeKind.GATEWAY, "GW-9-9") is None
    with pytest.raises(UnindexedProperty):
        store.find_by_name(NodeKind.SINK, "SINK")


def test_edge_schema_exhaustive():
    """Every permitted (edge, from, to) triple succeeds; every other
    combination raises SchemaViolation."""
    for ekind in EdgeKind:
        for from_kind in NodeKind:
            for to_kind in NodeKind:
                store = GraphStore()
                a = fresh_node(store, from_kind)
                b = fresh_node(store, to_kind)
                if (ekind, from_kind, to_kind) in EDGE_SCHEMA:
                    assert store.create_edge(ekind, a, b) == 0
                else:
                    with pytest.raises(SchemaViolation):
                        store.create_edge(ekind, a, b)


def test_dangling_endpoints_rejected():
    store = GraphStore()
    sn = fresh_node(store, NodeKind.SENSOR_NODE)
    with pytest.raises(DanglingEndpoint):
        store.create_edge(EdgeKind.COLLECT, sn, 99)
    with pytest.raises(DanglingEndpoint):
        store.create_edge(EdgeKind.COLLECT, 99, sn)


def test_unknown_node_on_reads():
    store = GraphStore()
    with pytest.raises(UnknownNode):
        store.node_props(0)
    with pytest.raises(UnknownNode):
        store.neighbors(3, EdgeKind.COLLECT)
    with pytest.raises(UnknownNode):
        store.traverse(1, EdgeKind.LEAD)


def test_neighbors_directions_and_order():
    store = GraphStore()
    sn = fresh_node(store, NodeKind.SENSOR_NODE)
    raws = [fresh_node(store, NodeKind.SENSOR_RAW_DATA, tick=t) for t in range(4)]
    for r in raws:
        store.create_edge(EdgeKind.COLLECT, sn, r)
    assert store.neighbors(sn, EdgeKind.COLLECT, "out") == raws
    assert store.neighbors(sn, EdgeKind.COLLECT, "in") == []
    for r in raws:
        assert store.neighbors(r, EdgeKind.COLLECT, "in") == [sn]
    assert store.neighbor_one(sn, EdgeKind.COLLECT) == raws[0]
    assert store.neighbor_one(raws[0], EdgeKind.NEXT) is None


def test_retarget_edge_moves_single_bookkeeping_edge():
    store = GraphStore()
    sn = fresh_node(store, NodeKind.SENSOR_NODE)
    r0 = fresh_node(store, NodeKind.SENSOR_RAW_DATA)
    r1 = fresh_node(store, NodeKind.SENSOR_RAW_DATA)
    last = store.create_edge(EdgeKind.LAST_COLLECTED, sn, r0)
    store.retarget_edge(last, r1)
    assert store.neighbors(sn, EdgeKind.LAST_COLLECTED) == [r1]
    assert store.neighbors(r0, EdgeKind.LAST_COLLECTED, "in") == []
    assert store.neighbors(r1, EdgeKind.LAST_COLLECTED, "in") == [sn]
    assert store.count_edges(EdgeKind.LAST_COLLECTED) == 1
    # retarget still checks schema
    snf = fresh_node(store, NodeKind.SN_FUSED_DATA)
    with pytest.raises(SchemaViolation):
        store.retarget_edge(last, snf)
    with pytest.raises(DanglingEndpoint):
        store.retarget_edge(last, 99)


def test_range_scan_matches_full_scan():
    store = GraphStore()
    values = [5, 1, 9, 5, 3, 7, 5, 0, 9]
    ids = [
        fresh_node(store, NodeKind.SENSOR_RAW_DATA, acoustic=v) for v in values
    ]
    got = store.range_scan(NodeKind.SENSOR_RAW_DATA, "acoustic", 3, 7)
    expect = sorted(
        (i for i, v in zip(ids, values) if 3 <= v <= 7),
        key=lambda i: (values[ids.index(i)], i),
    )
    assert got == expect
    # open ends
    assert set(store.range_scan(NodeKind.SENSOR_RAW_DATA, "acoustic", None, None)) == set(ids)
    assert store.range_scan(NodeKind.SENSOR_RAW_DATA, "acoustic", 10, None) == []
    with pytest.raises(UnindexedProperty):
        store.range_scan(NodeKind.SENSOR_RAW_DATA, "seismic", 0, 1)


def test_range_scan_string_index():
    store = GraphStore()
    a = fresh_node(store, NodeKind.SN_FUSED_DATA, concept="Animal")
    h = fresh_node(store, NodeKind.SN_FUSED_DATA, concept="Human")
    v = fresh_node(store, NodeKind.SN_FUSED_DATA, concept="Vehicle")
    h2 = fresh_node(store, NodeKind.SN_FUSED_DATA, concept="Human")
    assert store.range_scan(NodeKind.SN_FUSED_DATA, "concept", "Human", "Human") == [h, h2]
    assert store.range_scan(NodeKind.SN_FUSED_DATA, "concept", "Animal", "Human") == [a, h, h2]
    assert v not in store.range_scan(NodeKind.SN_FUSED_DATA, "concept", None, "Human")


# ---------------------------------------------------------------------------
# randomized graphs checked against independent oracles

@st.composite
def chain_graphs(draw):
    """A store holding raw-data chains plus the flat edge list that built it."""
    store = GraphStore()
    n_raw = draw(st.integers(min_value=1, max_value=25))
    raws = [
        fresh_node(store, NodeKind.SENSOR_RAW_DATA, acoustic=draw(st.integers(0, 50)))
        for _ in range(n_raw)
    ]
    edges = []
    n_edges = draw(st.integers(min_value=0, max_value=40))
    for _ in range(n_edges):
        a = draw(st.sampled_from(raws))
        b = draw(st.sampled_from(raws))
        edges.append((store.create_edge(EdgeKind.NEXT, a, b), a, b))
    return store, raws, edges


@given(chain_graphs())
@settings(max_examples=60, deadline=None)
def test_adjacency_equals_edge_scan(data):
    store, raws, edges = data
    for node in raws:
        expect_out = [b for _, a, b in edges if a == node]
        expect_in = [a for _, a, b in edges if b == node]
        assert store.neighbors(node, EdgeKind.NEXT, "out") == expect_out
        assert store.neighbors(node, EdgeKind.NEXT, "in") == expect_in
    scanned = [(e, a, b) for e, kind, a, b in store.edges() if kind is EdgeKind.NEXT]
    assert scanned == edges


@given(chain_graphs(), st.data())
@settings(max_examples=60, deadline=None)
def test_traverse_depths_match_networkx(data, extra):
    store, raws, edges = data
    start = extra.draw(st.sampled_from(raws))
    max_depth = extra.draw(st.one_of(st.none(), st.integers(0, 5)))
    got = store.traverse(start, EdgeKind.NEXT, "out", max_depth=max_depth)

    graph = nx.DiGraph()
    graph.add_nodes_from(raws)
    graph.add_edges_from((a, b) for _, a, b in edges)
    expect = nx.single_source_shortest_path_length(graph, start, cutoff=max_depth)

    assert dict(got) == dict(expect)
    assert got[0] == (start, 0)
    depths = [d for _, d in got]
    assert depths == sorted(depths)  # breadth-first order
    assert len({n for n, _ in got}) == len(got)  # each node reported once


@given(chain_graphs(), st.integers(0, 50), st.integers(0, 50))
@settings(max_examples=60, deadline=None)
def test_index_scan_equals_brute_force(data, lo, hi):
    store, raws, _ = data
    got = store.range_scan(NodeKind.SENSOR_RAW_DATA, "acoustic", lo, hi)
    rows = [(store.node_props(i)["acoustic"], i) for i in raws]
    expect = [i for v, i in sorted(rows) if lo <= v <= hi]
    assert got == expect


# ---------------------------------------------------------------------------
# snapshots

def small_store() -> GraphStore:
    store = GraphStore()
    sink = store.create_node(NodeKind.SINK, {"name": "SINK"})
    gw = store.create_node(NodeKind.GATEWAY, {"name": "GW-0-0"})
    sn = store.create_node(NodeKind.SENSOR_NODE, {"name": "SN-0-0", "indexX": 0, "indexY": 0})
    raw = store.create_node(
        NodeKind.SENSOR_RAW_DATA,
        {"tick": 3, "pir": True, "seismic": 12, "acoustic": 20},
    )
    store.create_edge(EdgeKind.LEAD, sink, gw)
    store.create_edge(EdgeKind.LEAD, gw, sn)
    store.create_edge(EdgeKind.COLLECT, sn, raw)
    store.create_edge(EdgeKind.LAST_COLLECTED, sn, raw)
    return store


def test_snapshot_format(tmp_path):
    store = small_store()
    path = tmp_path / "graph.snapshot"
    count = store.export_snapshot(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "WMSNGRAPH v1"
    assert count == store.node_count + store.edge_count == len(lines) - 1
    assert lines[1].startswith("N 0 Sink ")
    props = json.loads(lines[1].split(" ", 3)[3])
    assert props == {"name": "SINK"}
    assert lines[5] == "E 0 Lead 0 1"
    node_lines = [l for l in lines[1:] if l.startswith("N ")]
    edge_lines = [l for l in lines[1:] if l.startswith("E ")]
    assert lines[1:] == node_lines + edge_lines


def test_snapshot_round_trip_is_byte_identical(tmp_path):
    store = small_store()
    first = tmp_path / "a.snapshot"
    second = tmp_path / "b.snapshot"
    store.export_snapshot(first)
    restored = GraphStore.import_snapshot(first)
    restored.export_snapshot(second)
    assert first.read_bytes() == second.read_bytes()
    assert restored.node_count == store.node_count
    assert restored.edge_count == store.edge_count
    # behaviour survives the round trip, not just bytes
    sn = restored.find_by_name(NodeKind.SENSOR_NODE, "SN-0-0")
    assert restored.neighbors(sn, EdgeKind.COLLECT) == [3]
    assert restored.range_scan(NodeKind.SENSOR_RAW_DATA, "acoustic", 20, 20) == [3]


@pytest.mark.parametrize(
    "mutate, bad_line",
    [
        (lambda ls: ["WRONG HEADER"] + ls[1:], 1),
        (lambda ls: ls[:2] + ["X 9 Nope {}"] + ls[2:], 3),
        (lambda ls: ls[:1] + ["N 5 Sink {\"name\":\"SINK\"}"] + ls[2:], 2),
        (lambda ls: ls[:1] + ["N 0 Sink notjson"] + ls[2:], 2),
        (lambda ls: ls[:1] + ["N 0 Sink {}"] + ls[2:], 2),
        (lambda ls: ls + ["E 4 Lead 0 99"], 10),
        (lambda ls: ls + ["E 4 Collect 0 1"], 10),
        (lambda ls: ls + [""], 10),
    ],
)
def test_corrupt_snapshots_report_line_numbers(tmp_path, mutate, bad_line):
    store = small_store()
    path = tmp_path / "graph.snapshot"
    store.export_snapshot(path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(mutate(lines)) + "\n")
    with pytest.raises(CorruptSnapshot) as err:
        GraphStore.import_snapshot(path)
    assert err.value.line_no == bad_line


def test_io_failures(tmp_path):
    with pytest.raises(IoFailure):
        GraphStore.import_snapshot(tmp_path / "missing.snapshot")
    store = small_store()
    with pytest.raises(IoFailure):
        store.export_snapshot(tmp_path / "no" / "such" / "dir" / "x.snapshot")


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_snapshot_round_trip_random_stores(seed):
    import random

    rng = random.Random(seed)
    store = GraphStore()
    sns = [
        store.create_node(NodeKind.SENSOR_NODE, {"name": f"SN-{i}-0"})
        for i in range(rng.randint(1, 5))
    ]
    raw_by_sn = {sn: [] for sn in sns}
    for _ in range(rng.randint(0, 30)):
        sn = rng.choice(sns)
        raw = store.create_node(
            NodeKind.SENSOR_RAW_DATA,
            {
                "tick": rng.randint(0, 9),
                "pir": rng.random() < 0.5,
                "seismic": rng.randint(0, 99),
                "acoustic": rng.randint(0, 99),
            },
        )
        store.create_edge(EdgeKind.COLLECT, sn, raw)
        if raw_by_sn[sn]:
            store.create_edge(EdgeKind.NEXT, raw_by_sn[sn][-1], raw)
        raw_by_sn[sn].append(raw)

    lines = list(store.snapshot_lines())
    import tempfile

    with tempfile.NamedTemporaryFile("w", suffix=".snapshot", delete=False) as fp:
        fp.write("\n".join(lines) + "\n")
        name = fp.name
    restored = GraphStore.import_snapshot(name)
    assert list(restored.snapshot_lines()) == lines
