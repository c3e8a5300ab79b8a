"""Fusion algorithm hand-trace fixtures and linkage invariants.

The level 1-3 expectations below were worked out on paper from the published
pseudo-code before the implementation existed; they are the reference the
pipeline is held to.
"""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmsngraph.datagen import ENTITY_TYPES, Reading, attenuate
from wmsngraph.errors import EmptyBatch, StoreWriteFailure
from wmsngraph.fusion import (
    PROFILES,
    Band,
    FusionConfig,
    GatewayStage,
    RelayStage,
    SensorStage,
    SinkStage,
    SnFusedRec,
    classify,
    first_level_fusion,
    second_level_filter,
    synthetic_features,
    synthetic_video_duration,
    third_level_fusion,
)
from wmsngraph.fusion import GwFusedRec
from wmsngraph.store import EdgeKind, GraphStore, NodeKind
from wmsngraph.topology import TopologyConfig, build_topology

LITERAL = PROFILES["paper-literal"]
CALIBRATED = PROFILES["calibrated"]


def reading(node_id=0, name="SN-0-0", tick=0, pir=True, seismic=12, acoustic=20):
    return Reading(node_id, name, tick, pir, seismic, acoustic)


def fused(name, acoustic, tick=0, concept="Animal", weight=1.0, gateway="GW-0-0"):
    return SnFusedRec(
        node_id=0,
        node_name=name,
        tick=tick,
        concept=concept,
        weight=weight,
        acoustic=acoustic,
        seismic=10,
        video_path=f"video/{name}/{tick}.mp4",
        video_duration_sec=10,
        frame_ref="",
        foreground_ref="",
        silhouette_ref="",
        frm_features=(),
        fgnd_features=(),
        gateway_name=gateway,
        store_id=None,
    )


# ---------------------------------------------------------------------------
# classification

def test_classify_literal_profile_fixture_rows():
    concept, weight = classify(True, 12, 20, LITERAL)
    assert concept == "Animal" and weight == 1.0
    assert classify(False, 100, 100, LITERAL) == ("Unknown", 0.0)
    concept, weight = classify(True, 40, 45, LITERAL)
    assert concept == "Human"  # vehicle row needs acoustic beyond 50


def test_classify_no_match_is_unknown():
    assert classify(True, 0, 0, LITERAL) == ("Unknown", 0.0)
    assert classify(True, 4, 4, LITERAL) == ("Unknown", 0.0)


def test_classify_tie_break_prefers_threat():
    # a band layout where two rows match with the same saturated weight
    rules = (
        PROFILES["paper-literal"][1],  # Human 21-55 / 31-50
        PROFILES["paper-literal"][0],  # Vehicle >35 / >50
    )
    # seismic 70 (> 2*35), acoustic 100 (> 2*50): vehicle weight 1.0
    concept, weight = classify(True, 70, 100, rules)
    assert (concept, weight) == ("Vehicle", 1.0)


def test_band_scores():
    band = Band(10, 30)  # width 20, quarter 5
    assert band.score(9) == 0.0
    assert band.score(10) == 0.5
    assert band.score(12.5) == 0.75
    assert band.score(15) == 1.0
    assert band.score(20) == 1.0
    assert band.score(25) == 1.0
    assert band.score(27.5) == 0.75
    assert band.score(30) == 0.5
    open_band = Band(35, None)
    assert open_band.score(35) == 0.0  # strict lower bound
    assert open_band.score(52.5) == 0.75
    assert open_band.score(70) == 1.0
    assert open_band.score(700) == 1.0


@given(
    st.floats(0, 100, allow_nan=False),
    st.floats(0, 100, allow_nan=False),
    st.booleans(),
    st.sampled_from(["paper-literal", "calibrated"]),
)
@settings(max_examples=150, deadline=None)
def test_classify_weight_always_in_unit_interval(seismic, acoustic, pir, profile):
    concept, weight = classify(pir, seismic, acoustic, PROFILES[profile])
    assert 0.0 <= weight <= 1.0
    if concept == "Unknown":
        assert weight == 0.0
    else:
        assert weight >= 0.5  # any in-band value scores at least the edge value
    if not pir:
        assert concept == "Unknown"


def test_calibrated_profile_self_classification():
    """Each entity type within 20% of the radius classifies as itself with
    full confidence (groups excluded by design)."""
    radius = 10.0
    for name, expect in (("Human", "Human"), ("Animal", "Animal"), ("Vehicle", "Vehicle")):
        etype = ENTITY_TYPES[name]
        for d in (0.0, 1.0, 2.0):
            seis = attenuate(etype.seismic, d, radius)
            acou = attenuate(etype.acoustic, d, radius)
            concept, weight = classify(True, seis, acou, CALIBRATED)
            assert concept == expect, (name, d, seis, acou)
            assert weight == 1.0


# ---------------------------------------------------------------------------
# level 1

def test_first_level_gate_fixture():
    cfg = FusionConfig(level1_threshold=5, profile_name="paper-literal")
    rec = first_level_fusion(reading(seismic=12, acoustic=20), cfg, seed=1)
    assert rec is not None and rec.concept == "Animal"
    assert first_level_fusion(reading(seismic=4, acoustic=20), cfg, seed=1) is None
    assert first_level_fusion(reading(seismic=12, acoustic=4), cfg, seed=1) is None
    assert (
        first_level_fusion(reading(pir=False, seismic=90, acoustic=90), cfg, seed=1)
        is None
    )


def test_first_level_synthetic_metadata_is_deterministic():
    cfg = FusionConfig()
    a = first_level_fusion(reading(tick=9), cfg, seed=77)
    b = first_level_fusion(reading(tick=9), cfg, seed=77)
    c = first_level_fusion(reading(tick=9), cfg, seed=78)
    assert a == b
    assert a.video_path == "video/SN-0-0/9.mp4"
    assert 5 <= a.video_duration_sec <= 30
    assert len(a.frm_features) == 8 and len(a.fgnd_features) == 8
    assert all(0.0 <= v <= 1.0 for v in a.frm_features + a.fgnd_features)
    assert a.frm_features != a.fgnd_features
    # different seed shifts the synthetic draw
    assert (c.video_duration_sec, c.frm_features) != (a.video_duration_sec, a.frm_features)


def test_synthetic_draw_ranges():
    durations = {synthetic_video_duration(3, f"SN-0-0:{t}") for t in range(500)}
    assert min(durations) >= 5 and max(durations) <= 30
    assert len(durations) > 20  # actually spreads over the range
    assert len(synthetic_features(3, "x")) == 8


# ---------------------------------------------------------------------------
# level 2

def test_second_level_fixture_drop_and_keep():
    a, b = fused("SN-0-0", 20), fused("SN-0-1", 21)
    kept, dropped = second_level_filter([a, b], 10.0)
    assert kept == [a] and dropped == 1  # diff 1 < 2.1

    a, b = fused("SN-0-0", 20), fused("SN-0-1", 40)
    kept, dropped = second_level_filter([a, b], 10.0)
    assert kept == [a, b] and dropped == 0  # diff 20 >= 4

    only = fused("SN-0-0", 33)
    kept, dropped = second_level_filter([only], 10.0)
    assert kept == [only] and dropped == 0


def test_second_level_quieter_follower_is_duplicate():
    # signed difference, exactly as published: any drop in volume is a duplicate
    a, b = fused("SN-0-0", 40), fused("SN-0-1", 20)
    kept, dropped = second_level_filter([a, b], 10.0)
    assert kept == [a] and dropped == 1


def test_second_level_compares_with_batch_predecessor_not_last_kept():
    batch = [fused("SN-0-0", 10), fused("SN-0-1", 10), fused("SN-0-2", 29)]
    kept, dropped = second_level_filter(batch, 10.0)
    # middle is a duplicate of the first; third is compared against the
    # middle (its batch predecessor) and kept
    assert [r.acoustic for r in kept] == [10, 29] and dropped == 1


def test_second_level_empty_batch_raises():
    with pytest.raises(EmptyBatch):
        second_level_filter([], 10.0)


@given(st.lists(st.integers(0, 100), min_size=1, max_size=12), st.floats(0, 50))
@settings(max_examples=100, deadline=None)
def test_second_level_partition_properties(acoustics, pct):
    batch = [fused(f"SN-0-{i}", a) for i, a in enumerate(acoustics)]
    kept, dropped = second_level_filter(batch, pct)
    assert len(kept) + dropped == len(batch)
    assert kept[0] is batch[0]
    # kept order preserves batch order
    indices = [batch.index(k) for k in kept]
    assert indices == sorted(indices)


# ---------------------------------------------------------------------------
# level 3

def wrap_gateway(acoustics, gateway="GW-0-0", concept="Animal"):
    kept = [
        fused(f"SN-0-{i}", a, gateway=gateway, concept=concept)
        for i, a in enumerate(acoustics)
    ]
    return GwFusedRec(
        gateway_id=0, gateway_name=gateway, tick=0, kept=kept, dropped_count=0
    )


def test_third_level_fixture():
    cfg = FusionConfig(level3_threshold=15)
    actions = third_level_fusion([wrap_gateway([16, 18])], cfg)
    assert len(actions) == 1
    assert actions[0].acoustic == 18 and actions[0].source_node == "SN-0-1"
    assert third_level_fusion([wrap_gateway([16])], cfg) == []
    assert third_level_fusion([wrap_gateway([16, 14, 18])], cfg) == []


def test_third_level_scopes_pairs_to_one_gateway():
    cfg = FusionConfig(level3_threshold=15)
    batches = [wrap_gateway([40], "GW-0-0"), wrap_gateway([44], "GW-0-1")]
    assert third_level_fusion(batches, cfg) == []


def test_third_level_action_kinds():
    cfg = FusionConfig(level3_threshold=15)
    vehicle = third_level_fusion([wrap_gateway([20, 30], concept="Vehicle")], cfg)
    human = third_level_fusion([wrap_gateway([20, 30], concept="Human")], cfg)
    assert vehicle[0].action_kind == "Alarm"
    assert human[0].action_kind == "Notify"
    assert vehicle[0].source_gateway == "GW-0-0"


# ---------------------------------------------------------------------------
# persistence linkage

def build_field():
    topo = build_topology(TopologyConfig(1, 2, 10.0), GraphStore())
    return topo, topo.store


def test_sensor_stage_links_everything():
    topo, store = build_field()
    cfg = FusionConfig(level1_threshold=5, profile_name="paper-literal")
    stage = SensorStage(store, topo, cfg, seed=5)
    sid = topo.sensor_ids[(0, 0)]

    r1 = stage.process(Reading(sid, "SN-0-0", 0, True, 12, 20))
    r2 = stage.process(Reading(sid, "SN-0-0", 1, True, 2, 2))  # below gate
    r3 = stage.process(Reading(sid, "SN-0-0", 2, True, 13, 22))
    assert r1 and r2 is None and r3

    raws = store.neighbors(sid, EdgeKind.COLLECT, "out")
    assert len(raws) == 3
    # raw chain is total-ordered
    assert store.neighbors(raws[0], EdgeKind.NEXT, "out") == [raws[1]]
    assert store.neighbors(raws[1], EdgeKind.NEXT, "out") == [raws[2]]
    assert store.neighbors(sid, EdgeKind.LAST_COLLECTED, "out") == [raws[2]]
    # fused records link back to raw and node
    assert store.neighbors(r1.raw_store_id, EdgeKind.FUSION, "out") == [r1.store_id]
    assert store.neighbors(r1.store_id, EdgeKind.FUSED_BY, "out") == [sid]
    assert store.neighbors(sid, EdgeKind.LAST_FUSION, "out") == [r3.store_id]
    assert store.neighbors(r1.store_id, EdgeKind.NEXT, "out") == [r3.store_id]
    assert stage.raw_count == 3 and stage.fused_count == 2
    props = store.node_props(r1.store_id)
    assert props["concept"] == "Animal" and props["weight"] == 1.0
    assert json.loads(props["frmFeatures"]) == list(r1.frm_features)
    assert r1.gateway_name == "GW-0-0"


def test_gateway_stage_persists_batches():
    topo, store = build_field()
    cfg = FusionConfig(level1_threshold=5, level2_threshold_pct=10,
                       profile_name="paper-literal")
    sensor = SensorStage(store, topo, cfg, seed=5)
    gateway = GatewayStage(store, cfg)
    recs = [
        sensor.process(Reading(topo.sensor_ids[(0, 0)], "SN-0-0", 0, True, 12, 20)),
        sensor.process(Reading(topo.sensor_ids[(0, 1)], "SN-0-1", 0, True, 12, 21)),
        sensor.process(Reading(topo.sensor_ids[(1, 0)], "SN-1-0", 0, True, 12, 40)),
    ]
    gw_recs = gateway.process_tick(0, recs)
    assert len(gw_recs) == 1
    gw = gw_recs[0]
    assert [r.acoustic for r in gw.kept] == [20, 40] and gw.dropped_count == 1
    props = store.node_props(gw.store_id)
    assert props["keptCount"] == 2 and props["droppedCount"] == 1
    gw_id = topo.gateway_ids[(0, 0)]
    # all three reported, only kept ones fused
    assert len(store.neighbors(gw_id, EdgeKind.REPORTED, "in")) == 3
    fused_in = store.neighbors(gw.store_id, EdgeKind.FUSION, "in")
    assert fused_in == [recs[0].store_id, recs[2].store_id]
    assert store.neighbors(gw.store_id, EdgeKind.FUSED_BY, "out") == [gw_id]
    assert store.neighbors(gw_id, EdgeKind.LAST_FUSION, "out") == [gw.store_id]
    assert gateway.process_tick(1, []) == []


def test_relay_and_sink_stages():
    topo, store = build_field()
    cfg = FusionConfig(level1_threshold=5, level3_threshold=15,
                       profile_name="paper-literal")
    sensor = SensorStage(store, topo, cfg, seed=5)
    gateway = GatewayStage(store, cfg)
    relay = RelayStage(store, topo)
    sink = SinkStage(store, cfg, topo.sink_id)
    recs = [
        sensor.process(Reading(topo.sensor_ids[(0, 0)], "SN-0-0", 0, True, 12, 16)),
        sensor.process(Reading(topo.sensor_ids[(0, 1)], "SN-0-1", 0, True, 12, 18)),
    ]
    gw_recs = gateway.process_tick(0, recs)
    for gw in gw_recs:
        relay.process(gw)
    actions = sink.process_tick(0, gw_recs)
    assert len(actions) == 1
    action = actions[0]
    assert action.acoustic == 18 and action.source_node == "SN-0-1"
    # star topology: one forwarded hop straight to the sink
    assert store.neighbors(gw_recs[0].store_id, EdgeKind.FORWARDED, "out") == [
        topo.sink_id
    ]
    assert store.neighbors(action.store_id, EdgeKind.FUSED_BY, "out") == [topo.sink_id]
    assert store.neighbors(gw_recs[0].store_id, EdgeKind.FUSION, "out") == [
        action.store_id
    ]
    props = store.node_props(action.store_id)
    assert props["sourceNode"] == "SN-0-1" and props["actionKind"] == "Notify"
    assert sink.action_count == 1


def test_relay_over_hop_topology_creates_edge_per_hop():
    topo = build_topology(
        TopologyConfig(3, 2, 10.0, gateway_hops=True), GraphStore()
    )
    store = topo.store
    cfg = FusionConfig()
    gw_id = topo.gateway_ids[(0, 0)]  # two hops from the sink
    gwf_id = store.create_node(
        NodeKind.GW_FUSED_DATA,
        {"tick": 0, "gateway": "GW-0-0", "keptCount": 1, "droppedCount": 0},
    )
    store.create_edge(EdgeKind.FUSED_BY, gwf_id, gw_id)
    rec = GwFusedRec(gw_id, "GW-0-0", 0, kept=[], dropped_count=0, store_id=gwf_id)
    relay = RelayStage(store, topo)
    relay.process(rec)
    targets = store.neighbors(gwf_id, EdgeKind.FORWARDED, "out")
    assert targets == [topo.gateway_ids[(1, 1)], topo.sink_id]
    assert relay.forwarded_count == 2


def test_stage_write_failures_are_wrapped():
    topo, store = build_field()
    cfg = FusionConfig(profile_name="paper-literal")
    stage = SensorStage(store, topo, cfg, seed=1)
    bogus = Reading(topo.sink_id, "SN-0-0", 0, True, 12, 20)  # wrong endpoint kind
    with pytest.raises(StoreWriteFailure):
        stage.process(bogus)
