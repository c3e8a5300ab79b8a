"""Deterministic sensor-field surveillance simulator on an embedded property graph.

The package couples four layers that can be used independently or together:

- ``store``: an in-memory property-graph database with typed nodes and edges,
  ordered property indexes, breadth-first traversal, and a line-oriented
  snapshot format.
- ``topology`` / ``datagen``: a clustered sensor grid plus seeded entities
  that wander the field and emit distance-attenuated acoustic, seismic, and
  PIR readings.
- ``fusion`` / ``pipeline``: a three-level fusion cascade (per-node
  classification, per-gateway deduplication, sink-side corroboration) run
  either serially or across bounded thread-backed queues.
- ``queries`` / ``relational`` / ``benchmark``: three canned analytics
  queries executed against the graph and against a dict-based relational
  baseline, with a timing harness and a dataset-scaling experiment.

``runner.simulate_run`` ties the layers together for a full simulation;
``service`` exposes the same engine over HTTP and a WebSocket event stream.
"""

from .benchmark import (
    BenchmarkEntry,
    BenchmarkReport,
    run_benchmark,
    run_scaling_experiment,
)
from .config import RunConfig, default_config, load_config, parse_config
from .datagen import (
    ENTITY_TYPES,
    Entity,
    EntityWorld,
    Reading,
    ScheduledEvent,
    attenuate,
)
from .errors import WmsnError
from .fusion import (
    Band,
    ConceptRule,
    FusionConfig,
    classify,
    first_level_fusion,
    second_level_filter,
    third_level_fusion,
)
from .pipeline import Pipeline, PipelineStats, QueueCapacities
from .queries import (
    query_concept_based,
    query_recursive_depth,
    query_video_chains,
    scan_concept_based,
    scan_recursive_depth,
    scan_video_chains,
)
from .relational import RelationalBaseline, build_relational_baseline
from .runner import (
    SimulationResult,
    build_benchmark_dataset,
    run_scaling,
    simulate_run,
)
from .store import EdgeKind, GraphStore, NodeKind
from .topology import Topology, TopologyConfig, attach_topology, build_topology

__version__ = "0.1.0"

__all__ = [
    "ENTITY_TYPES",
    "Band",
    "BenchmarkEntry",
    "BenchmarkReport",
    "ConceptRule",
    "EdgeKind",
    "Entity",
    "EntityWorld",
    "FusionConfig",
    "GraphStore",
    "NodeKind",
    "Pipeline",
    "PipelineStats",
    "QueueCapacities",
    "Reading",
    "RelationalBaseline",
    "RunConfig",
    "ScheduledEvent",
    "SimulationResult",
    "Topology",
    "TopologyConfig",
    "WmsnError",
    "attach_topology",
    "attenuate",
    "build_benchmark_dataset",
    "build_relational_baseline",
    "build_topology",
    "classify",
    "default_config",
    "first_level_fusion",
    "load_config",
    "parse_config",
    "query_concept_based",
    "query_recursive_depth",
    "query_video_chains",
    "run_benchmark",
    "run_scaling",
    "run_scaling_experiment",
    "scan_concept_based",
    "scan_recursive_depth",
    "scan_video_chains",
    "second_level_filter",
    "simulate_run",
    "third_level_fusion",
]
