#!/usr/bin/env python3
"""Record a stream fixture from a live control service.

Starts the service on a local port, then performs the operator round trip
the console implements — create the default field, start a simulation with
ambient animal traffic, inject Attack events, watch the stream until an
Alarm action arrives, stop the run — and saves every HTTP exchange and
every stream message (in order) to test/fixtures/attack_run.json.

Run from the frontend directory:

    python3 scripts/record_fixture.py
"""

import json
import socket
import sys
import threading
import time
import urllib.request
from pathlib import Path

import uvicorn
from websockets.sync.client import connect as ws_connect

from wmsngraph.config import parse_config
from wmsngraph.service import create_app

FIXTURE_PATH = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "attack_run.json"

SERVICE_CONFIG = {
    "seed": 11,
    # corroboration threshold low enough that parallel vehicle crossings
    # raise alarms within a short recording window
    "fusion": {"level3Threshold": 1.0},
    "simulation": {"entityType": None, "maxTicks": 160},
    "service": {"tickIntervalMs": 20},
}

TOPOLOGY_FORM = {
    "clustersPerSide": 3,
    "nodesPerClusterSide": 4,
    "nodeSpacing": 10.0,
    "gatewayHops": False,
}

START_BODY = {
    "seed": 11,
    "ticks": 160,
    "repeat": True,
    "events": [{"tick": 0, "kind": "Entity", "entityType": "Animal"}],
}

ATTACK_EVENT = {"tick": 0, "kind": "Attack"}
ATTACK_COUNT = 5


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def start_server(port: int) -> uvicorn.Server:
    app = create_app(parse_config(SERVICE_CONFIG))
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.02)
    return server


class Recorder:
    def __init__(self, base: str):
        self.base = base
        self.http: list[dict] = []

    def request(self, method: str, path: str, body: dict | None = None) -> dict:
        data = None if body is None else json.dumps(body).encode()
        req = urllib.request.Request(
            self.base + path,
            data=data,
            method=method,
            headers={"content-type": "application/json"} if data else {},
        )
        with urllib.request.urlopen(req) as resp:
            payload = json.loads(resp.read())
            self.http.append(
                {"method": method, "path": path, "body": body,
                 "status": resp.status, "response": payload}
            )
            return payload


def record() -> dict:
    port = free_port()
    server = start_server(port)
    base = f"http://127.0.0.1:{port}"
    rec = Recorder(base)
    messages: list[dict] = []

    try:
        with ws_connect(f"ws://127.0.0.1:{port}/stream") as ws:
            # connection snapshot
            messages.append(json.loads(ws.recv(timeout=5)))

            # operator round trip
            rec.request("POST", "/topology", TOPOLOGY_FORM)
            start = rec.request("POST", "/simulations", START_BODY)
            sim_id = start["id"]
            for _ in range(ATTACK_COUNT):
                rec.request("POST", f"/simulations/{sim_id}/events", ATTACK_EVENT)

            alarms_seen = 0
            stopped = False
            started_at = time.time()
            deadline = started_at + 30
            while time.time() < deadline:
                try:
                    msg = json.loads(ws.recv(timeout=5))
                except TimeoutError:
                    break
                messages.append(msg)
                if (msg.get("type") == "action"
                        and msg.get("item", {}).get("actionKind") == "Alarm"):
                    alarms_seen += 1
                enough = alarms_seen >= 3 or (alarms_seen >= 1 and time.time() - started_at > 6)
                if enough and not stopped:
                    rec.request("POST", f"/simulations/{sim_id}/stop")
                    stopped = True
                if msg.get("type") == "state" and msg.get("state") in ("Finished", "Failed"):
                    if msg.get("tick", -1) >= 0:  # skip the initial Running->state echo
                        break
            rec.request("GET", f"/simulations/{sim_id}")
            rec.request("GET", f"/actions?simId={sim_id}&limit=10")
    finally:
        server.should_exit = True

    alarm_count = sum(
        1 for m in messages
        if m.get("type") == "action" and m.get("item", {}).get("actionKind") == "Alarm"
    )
    if alarm_count == 0:
        raise RuntimeError("recording produced no Alarm action; rerun")
    return {
        "serviceConfig": SERVICE_CONFIG,
        "http": rec.http,
        "messages": messages,
        "alarmCount": alarm_count,
    }


def main() -> None:
    fixture = record()
    FIXTURE_PATH.parent.mkdir(parents=True, exist_ok=True)
    FIXTURE_PATH.write_text(json.dumps(fixture, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {FIXTURE_PATH}")
    print(f"  stream messages: {len(fixture['messages'])}")
    print(f"  alarm actions:   {fixture['alarmCount']}")


if __name__ == "__main__":
    sys.exit(main())
