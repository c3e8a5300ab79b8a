"""
Benchmarking graph traversal against relational joins
=====================================================

The benchmark times the three queries on both engines over datasets that
double in size, reporting medians over repeated runs. The point of
interest is q3: the graph engine resolves relay depth with one traversal
plus an index intersection, while the relational engine must expand the
hierarchy iteratively and scan its fused-data table.
"""

from wmsngraph import (
    BenchmarkReport,
    NodeKind,
    build_benchmark_dataset,
    parse_config,
    run_benchmark,
    run_scaling_experiment,
)

# A benchmark dataset is just a long simulation: scheduled border traffic
# (mostly herds and vehicles, the odd human and smuggling run) over N
# months of ticks. The q3 advantage needs volume — the relational engine
# pays a full fused-table scan per run, the graph engine only pays per
# matching record — so this first dataset uses full-length months.
cfg = parse_config({
    "seed": 1,
    "topology": {"gatewayHops": True},
    "datagen": {"emitQuiescent": True, "ticksPerMonth": 720},
})

store = build_benchmark_dataset(cfg, months=2)
print("dataset raw readings:", store.count_nodes(NodeKind.SENSOR_RAW_DATA))

# One dataset, both engines, medians over 7 repetitions. The harness
# verifies row equality across backends before any timing starts.
entries = run_benchmark(store, repetitions=7, query_params=cfg.benchmark.query_params())
for e in sorted(entries, key=lambda e: (e.query, e.backend)):
    print(f"  {e.query} {e.backend:<10} median={e.median_ms:8.3f} ms rows={e.result_rows}")

q3 = {e.backend: e.median_ms for e in entries if e.query == "q3"}
print(f"q3 relational/graph speedup: {q3['relational'] / q3['graph']:.2f}x")

# The scaling experiment rebuilds the dataset for each duration and feeds
# every (query, backend, size) cell into one report, which also exposes
# median growth per size doubling and renders as CSV. Shorter months here
# keep the three rebuilds quick.
small = parse_config({
    "seed": 1,
    "topology": {"gatewayHops": True},
    "datagen": {"emitQuiescent": True, "ticksPerMonth": 144},
})
report = run_scaling_experiment(
    lambda months: build_benchmark_dataset(small, months),
    months=[1, 2, 4],
    repetitions=7,
    query_params=small.benchmark.query_params(),
)
assert isinstance(report, BenchmarkReport)
print("\nscaling report:")
print(report.to_csv())
print("q1 graph growth per doubling:",
      ", ".join(f"{f:.2f}" for f in report.growth_factors("q1", "graph")))
