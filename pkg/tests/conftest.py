"""Shared simulation helpers for query, benchmark, and acceptance tests,
plus the acceptance-criterion summary printed after every run."""

import pytest

from wmsngraph.datagen import EntityWorld, ScheduledEvent
from wmsngraph.fusion import FusionConfig
from wmsngraph.pipeline import Pipeline, WorldSource
from wmsngraph.store import GraphStore
from wmsngraph.topology import TopologyConfig, build_topology

# ---------------------------------------------------------------------------
# acceptance-criterion reporting: tests marked `criterion(n, title)` get one
# PASS/FAIL line each in the terminal summary

_criterion_results: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, title): acceptance criterion; reported as one "
        "PASS/FAIL line in the terminal summary",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num, title = marker.args
    if report.when == "call":
        status = "PASS" if report.passed else "FAIL"
        _criterion_results[num] = (title, status, report.duration)
    elif report.failed:  # setup/teardown error counts as a failure
        _criterion_results[num] = (title, "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criterion_results):
        title, status, duration = _criterion_results[num]
        terminalreporter.write_line(
            f"CRITERION {num} {status} ({duration:.1f}s) {title}"
        )


def mixed_events(until: int) -> list[ScheduledEvent]:
    """A varied scenario: wanderers of every type plus scripted incidents."""
    events = []
    for tick in range(0, until, 7):
        events.append(ScheduledEvent(tick, "Attack"))
    for tick in range(1, until, 5):
        events.append(ScheduledEvent(tick, "Entity", "Human"))
    for tick in range(3, until, 9):
        events.append(ScheduledEvent(tick, "Entity", "Animal"))
    for tick in range(4, until, 13):
        events.append(ScheduledEvent(tick, "Smuggling"))
    return events


def simulate(
    seed=101,
    until=80,
    events=None,
    clusters=3,
    per_cluster=4,
    spacing=10.0,
    hops=False,
    emit_quiescent=False,
    fusion=None,
    mode="serial",
    trace_fp=None,
):
    topo = build_topology(
        TopologyConfig(clusters, per_cluster, spacing, gateway_hops=hops),
        GraphStore(),
    )
    world = EntityWorld(topo, seed, radius=10.0, emit_quiescent=emit_quiescent)
    for event in events if events is not None else mixed_events(until):
        world.schedule(event)
    actions = []
    pipe = Pipeline(
        topo,
        fusion or FusionConfig(),
        seed,
        mode=mode,
        on_action=actions.append,
        trace_fp=trace_fp,
    )
    stats = pipe.run(WorldSource(world, until))
    return topo, stats, actions
