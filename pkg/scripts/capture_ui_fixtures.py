#!/usr/bin/env python3
"""Refresh the captured API responses used by the browser-UI tests.

Runs the service in-process on the basic example dataset and writes the
responses under frontend/tests/fixtures/. Run after engine changes that
affect wire formats:

    python scripts/capture_ui_fixtures.py
"""

import json
import time
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from plumestat.fixtures import make_basic
from plumestat.service import create_app


def main():
    out = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app(tempfile.mkdtemp()))
    mon, wells, ovl = make_basic()
    r = client.post(
        "/datasets",
        files={
            "monitoring": ("monitoring.csv", mon.encode()),
            "wells": ("wells.csv", wells.encode()),
            "overlays": ("overlays.json", ovl.encode()),
        },
    )
    r.raise_for_status()
    dataset_id = r.json()["dataset_id"]
    analysis_id = client.post(f"/datasets/{dataset_id}/analyses", json={}).json()[
        "analysis_id"
    ]
    while client.get(f"/analyses/{analysis_id}").json()["status"] != "done":
        time.sleep(0.2)

    def dump(name, resp):
        resp.raise_for_status()
        (out / name).write_text(json.dumps(resp.json(), indent=1))
        print(f"wrote {name} ({len(resp.content)} bytes)")

    a = f"/analyses/{analysis_id}"
    dump("status.json", client.get(a))
    dump("slice.json", client.get(f"{a}/slices/5",
                                  params={"solute": "Benzene", "nx": 20, "ny": 20}))
    dump("slice_next.json", client.get(f"{a}/slices/6",
                                       params={"solute": "Benzene", "nx": 20, "ny": 20}))
    dump("flow.json", client.get(f"{a}/flow/5"))
    dump("flow_next.json", client.get(f"{a}/flow/6"))
    dump("trend.json", client.get(f"{a}/wells/MW-01/trend", params={"solute": "Benzene"}))
    dump("gw.json", client.get(f"{a}/wells/MW-01/gw"))
    dump("indicators_trend.json", client.get(f"{a}/indicators",
                                             params={"k": 11, "mode": "trend"}))
    dump("indicators_abs.json", client.get(
        f"{a}/indicators",
        params={"k": 11, "mode": "threshold-absolute",
                "thresholds": json.dumps({"Benzene": 0.5, "Toluene": 1.0, "MTBE": 0.2})},
    ))
    dump("frames.json", client.get(f"{a}/frames",
                                   params={"solute": "Benzene", "nx": 10, "ny": 10,
                                           "page_size": 12}))


if __name__ == "__main__":
    main()
