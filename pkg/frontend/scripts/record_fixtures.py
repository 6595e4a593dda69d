"""Record real API responses for the frontend's scripted-interaction tests.

Builds the seeded 25-site corpus (with three alternating crime types so the
type-exclusion step is non-degenerate), drives the HTTP API through the same
request sequence the frontend controller issues, and stores every
request/response pair keyed by method, path and canonical body. The replay
tests consume the service exclusively through these recorded responses.

Run from the repository root:  python frontend/scripts/record_fixtures.py
"""

import json
import os

from fastapi.testclient import TestClient

from crimescope.api import create_app
from crimescope.catalog import CrimeCatalog, CrimeRecord
from crimescope.config import Dataset, ServiceConfig
from crimescope.geometry import build_adjacency
from crimescope.hotspots import NmfConfig
from crimescope.synth import synth_region

OUT = os.path.join(os.path.dirname(__file__), "..", "fixtures", "api_replay.json")

TYPES = ("passerby robbery", "auto theft", "home burglary")

RING = [[-0.001, -0.001], [0.03, -0.001], [0.03, 0.03], [-0.001, 0.03]]


def typed_benchmark_dataset():
    base = synth_region(seed=7)
    records = [CrimeRecord(r.site_id, TYPES[i % len(TYPES)], r.timestamp)
               for i, r in enumerate(base.catalog.records)]
    catalog = CrimeCatalog(records, date_range=base.catalog.date_range,
                           dataset_label="benchmark")
    return Dataset("benchmark", catalog, base.geometry, build_adjacency(base.geometry))


def canonical(body):
    return json.dumps(body, sort_keys=True, separators=(",", ":"))


class Recorder:
    """Records an ordered request/response tape; the replay client walks it
    strictly in order, which also pins the exact request sequence the
    frontend controller is allowed to issue."""

    def __init__(self, client):
        self.client = client
        self.session = None
        self.tape = []

    def call(self, method, path, body=None):
        url = path if self.session is None else f"{path}?session={self.session}"
        response = self.client.post(url, json=body) if method == "POST" else self.client.get(url)
        assert response.status_code == 200, (path, response.text)
        payload = response.json()
        self.tape.append({"method": method, "path": path,
                          "body": None if body is None else json.loads(canonical(body)),
                          "response": payload})
        return payload


def refresh_series(recorder):
    recorder.call("GET", "/choropleth")
    recorder.call("GET", "/aggregates/global")
    recorder.call("GET", "/aggregates/cumulative")
    recorder.call("GET", "/aggregates/ranking")
    recorder.call("GET", "/aggregates/radial")


def main():
    dataset = typed_benchmark_dataset()
    config = ServiceConfig(datasets={"benchmark": dataset}, default_dataset="benchmark",
                           nmf=NmfConfig(restarts=10, seed=1234))
    client = TestClient(create_app(config))
    recorder = Recorder(client)

    session = recorder.call("POST", "/session", {})
    recorder.session = session["session_id"]
    recorder.call("GET", "/meta")

    # the exact interaction script the replay test performs
    recorder.call("POST", "/select", {"mode": "polygon", "geometry": RING})
    refresh_series(recorder)
    recorder.call("POST", "/hotspots/recompute", {"k": 3, "granularity": "month"})
    refresh_series(recorder)
    recorder.call("POST", "/filter", {"time_window": [12, 23]})
    refresh_series(recorder)
    recorder.call("POST", "/filter", {"excluded_types": ["home burglary"]})
    refresh_series(recorder)
    recorder.call("POST", "/hotspots/recompute", {"k": 3, "granularity": "month"})
    refresh_series(recorder)

    out = os.path.abspath(OUT)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump({"tape": recorder.tape}, fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(f"wrote {out} ({len(recorder.tape)} recorded requests)")


if __name__ == "__main__":
    main()
