import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from flowscape import formats
from flowscape.errors import BundleError
from flowscape.geometry import compile_bundle
from flowscape.grid import GridSpec
from flowscape.ingest import FlowTable
from flowscape.law import CellStats
from flowscape.layers import LayerPreset
from flowscape.service import create_app
from flowscape.synth import TripEvent, UserVisit, VisitTable

BEACON = "No. 10422 Beacon Hill, Boston\nvisitors: 29706 visits: 82539 log10 μ: 2.717"


@pytest.fixture
def bundle_dir(tmp_path):
    grid = GridSpec(n_cols=120, n_rows=120)
    stats = CellStats(cell_id=10422, visitors=29706, visits=82539,
                      mu=10**2.717, log10_mu=2.717, height_m=1000.0 * 2.717**2)
    table = FlowTable(origin=np.array([10421]), dest=np.array([10422]),
                      group_counts=np.array([[29700, 0, 0, 6]]))
    bundle = compile_bundle(table, {10422: stats}, LayerPreset("open", 0, -np.inf), grid)
    formats.write_bundle(bundle, tmp_path)
    formats.write_cells_json([stats], tmp_path / "cells.json")
    (tmp_path / "names.json").write_text(json.dumps({"10422": "Beacon Hill, Boston"}))
    formats.write_visits_csv(VisitTable.from_records(
        [UserVisit("u0", 10421, 10422, 3), UserVisit("u1", 10300, 10422, 25)]),
        tmp_path / "visits.csv")
    formats.write_frames_ndjson([TripEvent(1, "u0", 10422)], tmp_path / "frames.ndjson")
    return tmp_path


@pytest.fixture
def client(bundle_dir):
    return TestClient(create_app(bundle_dir))


class TestArtifactEndpoints:
    def test_manifest_bytes_match_disk(self, client, bundle_dir):
        r = client.get("/api/manifest")
        assert r.status_code == 200
        assert r.content == (bundle_dir / "manifest.json").read_bytes()

    def test_cells_bytes_match_disk(self, client, bundle_dir):
        assert client.get("/api/cells").content == (bundle_dir / "cells.json").read_bytes()

    def test_buffers_match_disk(self, client, bundle_dir):
        for name in ("vertices.bin", "flows.bin"):
            r = client.get(f"/buffers/{name}")
            assert r.status_code == 200
            assert r.content == (bundle_dir / name).read_bytes()

    def test_unknown_buffer_404(self, client):
        assert client.get("/buffers/evil.bin").status_code == 404

    def test_etag_304(self, client):
        first = client.get("/api/manifest")
        etag = first.headers["etag"]
        again = client.get("/api/manifest", headers={"If-None-Match": etag})
        assert again.status_code == 304

    def test_frames_served(self, client, bundle_dir):
        r = client.get("/api/frames")
        assert r.status_code == 200
        assert r.content == (bundle_dir / "frames.ndjson").read_bytes()


class TestCellEndpoint:
    def test_beacon_hill_panel_exact(self, client):
        r = client.get("/api/cell/10422")
        assert r.status_code == 200
        doc = r.json()
        assert doc["panel"] == BEACON
        assert doc["visitors"] == 29706 and doc["visits"] == 82539
        assert doc["name"] == "Beacon Hill, Boston"

    def test_unknown_cell_404(self, client):
        assert client.get("/api/cell/999999999").status_code == 404

    def test_without_names_panel_has_no_name(self, bundle_dir):
        (bundle_dir / "names.json").unlink()
        client = TestClient(create_app(bundle_dir))
        doc = client.get("/api/cell/10422").json()
        assert doc["name"] is None
        assert doc["panel"].startswith("No. 10422\n")


class TestDiscEndpoint:
    def test_disc_dots(self, client):
        r = client.get("/api/disc/10422", params={"radius_km": 50})
        assert r.status_code == 200
        doc = r.json()
        assert doc["dest_cell"] == 10422 and len(doc["dots"]) == 2
        assert all(0 <= d["radial"] <= 1 for d in doc["dots"])

    def test_radius_widens_reach(self, client):
        near = client.get("/api/disc/10422", params={"radius_km": 1.5}).json()
        wide = client.get("/api/disc/10422", params={"radius_km": 150}).json()
        assert len(near["dots"]) == 1 and len(wide["dots"]) == 2

    def test_no_visits_404(self, bundle_dir):
        (bundle_dir / "visits.csv").unlink()
        client = TestClient(create_app(bundle_dir))
        assert client.get("/api/disc/10422").status_code == 404


class TestStartupValidation:
    def test_truncated_buffer_refused(self, bundle_dir):
        v = bundle_dir / "vertices.bin"
        v.write_bytes(v.read_bytes()[:-4])
        with pytest.raises(BundleError):
            create_app(bundle_dir)

    def test_missing_cells_refused(self, bundle_dir):
        (bundle_dir / "cells.json").unlink()
        with pytest.raises(BundleError):
            create_app(bundle_dir)

    def test_garbage_manifest_refused(self, bundle_dir):
        (bundle_dir / "manifest.json").write_text("not json")
        with pytest.raises(BundleError):
            create_app(bundle_dir)
