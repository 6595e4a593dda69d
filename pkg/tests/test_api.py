"""HTTP surface: sessions, selection, linked-view contracts, error shapes."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from crimescope.api import create_app
from crimescope.config import Dataset, ServiceConfig
from crimescope.geometry import FixtureGeocoder, build_adjacency
from crimescope.hotspots import NmfConfig


@pytest.fixture(scope="module")
def api_app(benchmark_region):
    geocoder = FixtureGeocoder(table={"1 hotspot lane": benchmark_region.geometry.centroids["s0101"]})
    dataset = Dataset("benchmark", benchmark_region.catalog, benchmark_region.geometry,
                      build_adjacency(benchmark_region.geometry), geocoder)
    config = ServiceConfig(datasets={"benchmark": dataset}, default_dataset="benchmark",
                           nmf=NmfConfig(restarts=10, seed=1234))
    return create_app(config)


@pytest.fixture()
def client(api_app):
    return TestClient(api_app)


@pytest.fixture()
def session(client):
    return client.post("/session", json={}).json()["session_id"]


def select_all(client, session):
    ring = [[-0.001, -0.001], [0.03, -0.001], [0.03, 0.03], [-0.001, 0.03]]
    response = client.post(f"/select?session={session}",
                           json={"mode": "polygon", "geometry": ring})
    assert response.status_code == 200
    return response.json()


def test_session_lifecycle(client):
    info = client.post("/session", json={}).json()
    assert info["dataset"] == "benchmark" and info["granularity"] == "month"
    assert info["slice_count"] == 60
    echo = client.get(f"/session/{info['session_id']}").json()
    assert echo["session_id"] == info["session_id"]
    missing = client.get("/session/nope")
    assert missing.status_code == 404
    assert missing.json() == {"code": "unknown_session", "message": "unknown session 'nope'"}
    unknown = client.post("/session", json={"dataset": "other"})
    assert unknown.status_code == 404 and unknown.json()["code"] == "unknown_dataset"


def test_select_point_single_site(client, session, benchmark_region):
    lon, lat = benchmark_region.geometry.centroids["s0202"]
    body = client.post(f"/select?session={session}",
                       json={"mode": "point", "geometry": [lon, lat]}).json()
    assert body == {"site_ids": ["s0202"], "provenance": "point"}


def test_select_point_outside_404(client, session):
    response = client.post(f"/select?session={session}",
                           json={"mode": "point", "geometry": [9.0, 9.0]})
    assert response.status_code == 404
    assert response.json()["code"] == "empty_selection"


def test_select_polyline_and_expand(client, session):
    path = [[0.0001, 0.0125], [0.0249, 0.0125]]  # through the middle row
    body = client.post(f"/select?session={session}",
                       json={"mode": "polyline", "geometry": path, "buffer_m": 5}).json()
    assert body["site_ids"] == [f"s02{c:02d}" for c in range(5)]
    expanded = client.post(f"/select?session={session}",
                           json={"mode": "polyline", "geometry": path,
                                 "buffer_m": 5, "expand_rings": 1}).json()
    assert len(expanded["site_ids"]) == 15


def test_select_address_via_stub(client, session):
    body = client.post(f"/select?session={session}",
                       json={"mode": "address", "address": "1 Hotspot Lane"}).json()
    assert body == {"site_ids": ["s0101"], "provenance": "address"}


def test_aggregates_require_region(client, session):
    response = client.get(f"/aggregates/global?session={session}")
    assert response.status_code == 400 and response.json()["code"] == "no_region"


def test_filter_echo_and_effect(client, session, benchmark_region):
    select_all(client, session)
    echo = client.post(f"/filter?session={session}",
                       json={"excluded_years": [2001], "time_window": [0, 35]}).json()
    assert echo["excluded_years"] == [2001]
    assert echo["time_window"] == [0, 35]
    series = client.get(f"/aggregates/global?session={session}").json()
    counts = np.array(series["counts"])
    assert counts[12:24].sum() == 0  # 2001 excluded
    assert counts[36:].sum() == 0  # window cut
    # clearing a facet with an explicit null
    echo = client.post(f"/filter?session={session}", json={"time_window": None}).json()
    assert echo["time_window"] is None


def test_filter_accepts_iso_dates(client, session):
    select_all(client, session)
    echo = client.post(f"/filter?session={session}",
                       json={"time_window": ["2001-01-01", "2001-12-31"]}).json()
    assert echo["time_window"] == [12, 23]


def test_recompute_recovers_planted_hotspots(client, session, benchmark_region):
    select_all(client, session)
    body = client.post(f"/hotspots/recompute?session={session}",
                       json={"k": 3, "granularity": "month"}).json()
    roles = benchmark_region.roles
    memberships = {frozenset(m) for m in body["memberships"]}
    assert memberships == {frozenset({roles["A"], roles["B"]}),
                           frozenset({roles["C"]}), frozenset({roles["D"]})}
    gauges = body["gauges"]
    assert all(0 <= g["importance"] <= 1 for g in gauges)
    assert body["dims"] == {"m": 25, "n": 60, "k": 3}


def test_stale_cache_contract(client, session):
    select_all(client, session)
    first = client.post(f"/hotspots/recompute?session={session}",
                        json={"k": 3, "granularity": "month"}).json()
    client.post(f"/filter?session={session}", json={"excluded_years": [2000, 2001]})
    cached = client.get(f"/hotspots?session={session}").json()
    assert cached["memberships"] == first["memberships"]
    assert cached["h_bin"] == first["h_bin"]
    # only an explicit recompute changes the model
    recomputed = client.post(f"/hotspots/recompute?session={session}",
                             json={"k": 3, "granularity": "month"}).json()
    assert recomputed["objective"] != first["objective"]


def test_hotspot_selection_filters_aggregates(client, session, benchmark_region):
    select_all(client, session)
    body = client.post(f"/hotspots/recompute?session={session}",
                       json={"k": 3, "granularity": "month"}).json()
    pair_index = next(i for i, m in enumerate(body["memberships"]) if len(m) == 2)
    client.post(f"/filter?session={session}", json={"hotspot": pair_index})
    series = client.get(f"/aggregates/global?session={session}").json()
    pair_sites = set(body["memberships"][pair_index])
    oracle = sum(1 for r in benchmark_region.catalog.records if r.site_id in pair_sites)
    assert sum(series["counts"]) == oracle


def test_rank_too_large_is_400(client, session):
    lon, lat = (0.0125, 0.0125)
    client.post(f"/select?session={session}", json={"mode": "point", "geometry": [lon, lat]})
    response = client.post(f"/hotspots/recompute?session={session}",
                           json={"k": 3, "granularity": "month"})
    assert response.status_code == 400
    assert response.json()["code"] == "rank_too_large"


def test_choropleth_recalculates_under_filters(client, session, benchmark_region):
    select_all(client, session)
    base = client.get(f"/choropleth?session={session}").json()["counts"]
    assert len(base) == 25
    assert sum(base.values()) == benchmark_region.catalog.record_count
    client.post(f"/filter?session={session}", json={"excluded_years": [2000, 2001, 2002]})
    filtered = client.get(f"/choropleth?session={session}").json()["counts"]
    assert sum(filtered.values()) < sum(base.values())
    oracle = sum(1 for r in benchmark_region.catalog.records if r.timestamp.year > 2002)
    assert sum(filtered.values()) == oracle


def test_choropleth_ignores_spatial_subselection(client, session, benchmark_region):
    select_all(client, session)
    base = client.get(f"/choropleth?session={session}").json()["counts"]
    client.post(f"/filter?session={session}", json={"site": "s0101"})
    narrowed = client.get(f"/choropleth?session={session}").json()["counts"]
    assert narrowed == base  # the map highlights, it does not blank


def test_cumulative_overlay_semantics(client, session):
    select_all(client, session)
    client.post(f"/filter?session={session}", json={"time_window": [0, 11]})
    body = client.get(f"/aggregates/cumulative?session={session}").json()
    base = body["base"]["by_month_of_year"]
    overlay = body["overlay"]["by_month_of_year"]
    assert all(o <= b for o, b in zip(overlay, base))
    assert sum(base) > sum(overlay)
    assert body["period_names"] == ["night", "morning", "afternoon", "evening"]


def test_ranking_and_radial_payload_shapes(client, session):
    select_all(client, session)
    ranking = client.get(f"/aggregates/ranking?session={session}").json()
    assert len(ranking["labels"]) == 60
    assert all(len(row) == 60 for row in ranking["ranks"])
    radial = client.get(f"/aggregates/radial?session={session}").json()
    assert radial["years"] == [2000, 2001, 2002, 2003, 2004]
    assert abs(sum(radial["shares"]) - 100.0) < 1e-9


def test_compare_endpoint(client, session):
    select_all(client, session)
    body = client.post(f"/compare?session={session}",
                       json={"confidence": 99.0, "k": 3}).json()
    assert set(body["counts"]) == {"P", "F", "G", "N"}
    assert 0.0 <= body["ssi"] <= 1.0
    assert len(body["categories"]) == 25
    assert len(body["z_scores"]) == 25


def test_granularity_switch_remaps_window(client, session):
    select_all(client, session)
    client.post(f"/filter?session={session}", json={"time_window": [12, 23]})  # year 2001
    body = client.post(f"/hotspots/recompute?session={session}",
                       json={"k": 3, "granularity": "day"}).json()
    assert body["granularity"] == "day"
    info = client.get(f"/session/{session}").json()
    assert info["granularity"] == "day"
    echo = client.post(f"/filter?session={session}", json={}).json()
    lo, hi = echo["time_window"]
    assert lo == 366  # 2001-01-01 in day slices (2000 is a leap year)
    assert hi == 366 + 364


def test_validation_error_shape(client, session):
    response = client.post(f"/select?session={session}", json={"mode": "warp"})
    assert response.status_code == 422
    assert response.json()["code"] == "validation_error"


def test_session_ttl_expiry(benchmark_region):
    from crimescope.api.app import SessionStore
    from crimescope.errors import SessionError

    store = SessionStore(ttl_s=0.0)  # everything is instantly stale
    created = store.create("benchmark")
    with pytest.raises(SessionError):
        store.get(created.session_id)
    keep = SessionStore(ttl_s=3600.0)
    session = keep.create("benchmark")
    assert keep.get(session.session_id) is session


def test_meta_endpoint(client, session, benchmark_region):
    meta = client.get(f"/meta?session={session}").json()
    assert meta["record_count"] == benchmark_region.catalog.record_count
    assert meta["site_count"] == 25
    assert meta["geometry"]["type"] == "FeatureCollection"
    assert len(meta["geometry"]["features"]) == 25
