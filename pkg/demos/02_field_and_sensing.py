"""
Sensor field, wandering entities, and attenuated readings
=========================================================

A field is a square grid of sensor clusters, each cluster owned by a
gateway, all gateways answering to one sink. Entities spawn at the border,
take seeded random steps, and every sensor within range reports acoustic
and seismic energy that falls off linearly with distance.
"""

from wmsngraph import (
    ENTITY_TYPES,
    EntityWorld,
    GraphStore,
    NodeKind,
    ScheduledEvent,
    TopologyConfig,
    attenuate,
    build_topology,
)

# A 3x3 arrangement of clusters, 4x4 sensor nodes per cluster, 10 units
# apart. With hop chaining, outer gateways relay through inner ones instead
# of speaking to the sink directly.
config = TopologyConfig(clusters_per_side=3, nodes_per_cluster_side=4,
                        node_spacing=10.0, gateway_hops=True)
topo = build_topology(config, GraphStore())
print("sensor nodes:", topo.store.count_nodes(NodeKind.SENSOR_NODE))
print("gateways:", topo.store.count_nodes(NodeKind.GATEWAY))

# Geometry lives beside the graph: node id -> (x, y).
xs = sorted({x for x, _ in topo.positions.values()})
print("column positions:", xs[:4], "...", xs[-1])

# Every entity type carries a speed and base emission levels.
for name, etype in ENTITY_TYPES.items():
    print(f"  {name:<14} speed={etype.speed} acoustic={etype.acoustic} seismic={etype.seismic}")

# Emissions attenuate linearly and vanish at the sensing radius.
print("acoustic 40 heard at distance 0/5/10:",
      [attenuate(40, d, 10.0) for d in (0.0, 5.0, 10.0)])

# The world spawns entities from scheduled events and steps them each tick.
world = EntityWorld(topo, seed=7, radius=10.0)
world.schedule(ScheduledEvent(tick=0, kind="Entity", entity_type="Vehicle"))
spawned = world.spawn_due(0)
print("spawned:", [(e.kind.name, round(e.x, 1), e.y) for e in spawned])

# Walk a few ticks and watch who hears the vehicle. PIR trips whenever an
# entity is inside the radius, even if both energy channels round to zero.
for tick in range(4):
    readings = world.sense(tick)
    loudest = max(readings, key=lambda r: r.acoustic, default=None)
    if loudest is not None:
        print(f"tick {tick}: {len(readings)} readings; loudest {loudest.node_name}"
              f" acoustic={loudest.acoustic} seismic={loudest.seismic} pir={loudest.pir}")
    else:
        print(f"tick {tick}: nothing in range")
    world.advance()
