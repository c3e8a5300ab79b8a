"""Exception types shared across the package.

Every error raised on a contract violation derives from WmsnError so callers
can distinguish domain failures from programming errors.
"""


class WmsnError(Exception):
    """Base class for all domain errors."""


class ConfigError(WmsnError):
    """Run configuration is malformed; message names the offending key."""


class MissingRequiredProperty(WmsnError):
    """Node creation lacks a property required for its kind."""

    def __init__(self, kind: str, prop: str):
        super().__init__(f"{kind} requires property {prop!r}")
        self.kind = kind
        self.prop = prop


class DuplicateExternalName(WmsnError):
    """A sensor node or gateway reuses a name that must be unique."""


class SchemaViolation(WmsnError):
    """Edge endpoints do not satisfy the typed edge schema."""


class DanglingEndpoint(WmsnError):
    """Edge references a node id that does not exist."""


class UnknownNode(WmsnError):
    """Operation addressed a node id that does not exist."""


class UnindexedProperty(WmsnError):
    """Range scan over a (kind, property) pair with no index."""


class IoFailure(WmsnError):
    """Snapshot file could not be read or written."""


class CorruptSnapshot(WmsnError):
    """Snapshot text failed to parse; carries the 1-based line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class NonEmptyStore(WmsnError):
    """Topology build or snapshot import demands an empty store."""


class OrphanNode(WmsnError):
    """A non-sink node ended up without an incoming Lead edge."""


class EmptyBatch(WmsnError):
    """Second-level fusion invoked on an empty report batch."""


class QueueOverflow(WmsnError):
    """Bounded queue stayed full beyond the blocking timeout."""


class UnknownConcept(WmsnError):
    """Query referenced a concept outside the classification vocabulary."""


class InsufficientData(WmsnError):
    """Benchmark query produced no rows on every dataset size."""


class StoreWriteFailure(WmsnError):
    """A pipeline stage could not persist its output."""


class BackendMismatch(WmsnError):
    """Benchmark backends disagreed on query results; timing is meaningless."""
