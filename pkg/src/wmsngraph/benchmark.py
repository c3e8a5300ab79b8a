"""Timing harness comparing the graph engine against the relational baseline.

Result correctness comes first: for every (query, params) pair the two
backends' rows are compared before any timing is recorded, and a mismatch
aborts the benchmark. The comparison pass doubles as the warm-up; the timed
repetitions that follow use a monotonic nanosecond clock and report median
and minimum wall time.

The scaling experiment rebuilds the dataset at growing sizes (months of
simulated traffic) and tracks how query times move with data volume. Growth
factors are recorded, never asserted; they are measurements, not contracts.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .errors import BackendMismatch, InsufficientData
from .queries import (
    query_concept_based,
    query_recursive_depth,
    query_video_chains,
)
from .relational import RelationalBaseline, build_relational_baseline
from .store import GraphStore, NodeKind

CSV_HEADER = ["query", "backend", "data_records", "median_ms", "min_ms", "result_rows", "reps"]

DEFAULT_QUERY_PARAMS: dict[str, dict[str, Any]] = {
    "q1": {"concept": "Vehicle", "minWeight": 0.9},
    "q2": {"minAcoustic": 15, "chainLen": 3},
    "q3": {"concept": "Human", "minWeight": 0.9},
}

BACKENDS = ("graph", "relational")


@dataclass(frozen=True)
class BenchmarkEntry:
    query: str
    backend: str
    data_records: int
    median_ms: float
    min_ms: float
    result_rows: int
    reps: int


@dataclass
class BenchmarkReport:
    entries: list[BenchmarkEntry] = field(default_factory=list)

    def extend(self, entries: Sequence[BenchmarkEntry]) -> None:
        self.entries.extend(entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for e in self.entries:
            writer.writerow(
                [
                    e.query,
                    e.backend,
                    e.data_records,
                    f"{e.median_ms:.3f}",
                    f"{e.min_ms:.3f}",
                    e.result_rows,
                    e.reps,
                ]
            )
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fp:
            fp.write(self.to_csv())

    def format_table(self) -> str:
        widths = [7, 10, 12, 11, 9, 11, 4]
        header = ["query", "backend", "data_records", "median_ms", "min_ms",
                  "result_rows", "reps"]
        lines = [
            "  ".join(h.ljust(w) for h, w in zip(header, widths)),
            "  ".join("-" * w for w in widths),
        ]
        for e in self.entries:
            row = [
                e.query,
                e.backend,
                str(e.data_records),
                f"{e.median_ms:.3f}",
                f"{e.min_ms:.3f}",
                str(e.result_rows),
                str(e.reps),
            ]
            lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
        return "\n".join(lines)

    def validate_nonempty(self) -> None:
        """Every query must return rows on at least one dataset size."""
        totals: dict[str, int] = {}
        for e in self.entries:
            totals[e.query] = totals.get(e.query, 0) + e.result_rows
        empty = sorted(q for q, total in totals.items() if total == 0)
        if empty:
            raise InsufficientData(
                f"queries returned no rows on every size: {', '.join(empty)}"
            )

    def growth_factors(self, query: str, backend: str = "graph") -> list[float]:
        """Median-time growth factor per doubling of data size, for each
        consecutive size pair of one query/backend series."""
        series = sorted(
            (
                (e.data_records, e.median_ms)
                for e in self.entries
                if e.query == query and e.backend == backend
            ),
        )
        factors = []
        for (n1, t1), (n2, t2) in zip(series, series[1:]):
            if n2 > n1 > 0 and t1 > 0 and t2 > 0:
                doublings = math.log2(n2 / n1)
                factors.append((t2 / t1) ** (1.0 / doublings))
        return factors


def _run_query(store: GraphStore, baseline: RelationalBaseline,
               backend: str, query: str, params: dict[str, Any]) -> list[tuple]:
    if backend == "relational":
        return baseline.run(query, params)
    if query == "q1":
        return query_concept_based(store, params["concept"], params["minWeight"])
    if query == "q2":
        return query_video_chains(
            store, params["minAcoustic"], params.get("chainLen", 3)
        )
    if query == "q3":
        return query_recursive_depth(store, params["concept"], params["minWeight"])
    raise ValueError(f"unknown query {query!r}")


def run_benchmark(
    store: GraphStore,
    repetitions: int = 5,
    query_params: dict[str, dict[str, Any]] | None = None,
    queries: Sequence[str] = ("q1", "q2", "q3"),
    baseline: RelationalBaseline | None = None,
) -> list[BenchmarkEntry]:
    """Time every (query, backend) pair against one dataset.

    The relational baseline is built (untimed) from the same store, rows are
    verified equal across backends, then each pair runs `repetitions` timed
    executions after one warm-up.
    """
    if repetitions < 5:
        raise ValueError("benchmark needs at least 5 repetitions")
    params = {**DEFAULT_QUERY_PARAMS, **(query_params or {})}
    if baseline is None:
        baseline = build_relational_baseline(store)
    data_records = store.count_nodes(NodeKind.SENSOR_RAW_DATA)

    entries: list[BenchmarkEntry] = []
    for query in queries:
        # correctness gate + warm-up, excluded from timing
        reference: list[tuple] | None = None
        for backend in BACKENDS:
            rows = _run_query(store, baseline, backend, query, params[query])
            if reference is None:
                reference = rows
            elif rows != reference:
                raise BackendMismatch(
                    f"{query}: graph returned {len(reference)} rows, "
                    f"{backend} returned {len(rows)} differing rows"
                )
        for backend in BACKENDS:
            samples_ms: list[float] = []
            rows_len = 0
            for _ in range(repetitions):
                started = time.perf_counter_ns()
                rows = _run_query(store, baseline, backend, query, params[query])
                elapsed = time.perf_counter_ns() - started
                samples_ms.append(elapsed / 1e6)
                rows_len = len(rows)
            entries.append(
                BenchmarkEntry(
                    query=query,
                    backend=backend,
                    data_records=data_records,
                    median_ms=statistics.median(samples_ms),
                    min_ms=min(samples_ms),
                    result_rows=rows_len,
                    reps=repetitions,
                )
            )
    return entries


def run_scaling_experiment(
    dataset_builder: Callable[[int], GraphStore],
    months: Sequence[int],
    repetitions: int = 5,
    query_params: dict[str, dict[str, Any]] | None = None,
    queries: Sequence[str] = ("q1", "q2", "q3"),
) -> BenchmarkReport:
    """Benchmark across growing datasets; `dataset_builder(month)` must
    return a store holding that many months of simulated traffic."""
    report = BenchmarkReport()
    sizes: list[int] = []
    for month in months:
        store = dataset_builder(month)
        size = store.count_nodes(NodeKind.SENSOR_RAW_DATA)
        if sizes and size < sizes[-1]:
            raise InsufficientData(
                f"dataset shrank between sizes: {sizes[-1]} -> {size} raw records"
            )
        sizes.append(size)
        report.extend(
            run_benchmark(
                store,
                repetitions=repetitions,
                query_params=query_params,
                queries=queries,
            )
        )
    report.validate_nonempty()
    return report
