import io
from datetime import datetime

import pytest

from crimescope.catalog import CrimeCatalog, CrimeRecord
from crimescope.geometry import build_adjacency
from crimescope.synth import grid_geometry, synth_region


@pytest.fixture(scope="session")
def grid3():
    return grid_geometry(3, 3)


@pytest.fixture(scope="session")
def grid5():
    return grid_geometry(5, 5)


@pytest.fixture(scope="session")
def grid3_adjacency(grid3):
    return build_adjacency(grid3)


@pytest.fixture(scope="session")
def benchmark_region():
    return synth_region(seed=7)


@pytest.fixture(scope="session")
def benchmark_adjacency(benchmark_region):
    return build_adjacency(benchmark_region.geometry)


def make_records(rows):
    """rows: (site_id, crime_type, 'YYYY-MM-DDTHH:MM') triples."""
    return [CrimeRecord(s, t, datetime.strptime(ts, "%Y-%m-%dT%H:%M"))
            for s, t, ts in rows]


def make_catalog(rows, **kwargs):
    return CrimeCatalog(make_records(rows), **kwargs)


def random_catalog(rng, sites, types, n_records, year_lo=2000, year_hi=2003):
    """Uniform random corpus over the given sites/types, sorted by draw."""
    rows = []
    for _ in range(n_records):
        site = sites[rng.integers(len(sites))]
        crime = types[rng.integers(len(types))]
        ts = datetime(int(rng.integers(year_lo, year_hi + 1)),
                      int(rng.integers(1, 13)), int(rng.integers(1, 29)),
                      int(rng.integers(0, 24)), int(rng.integers(0, 60)))
        rows.append(CrimeRecord(site, crime, ts))
    return CrimeCatalog(rows, date_range=(datetime(year_lo, 1, 1),
                                          datetime(year_hi, 12, 31, 23, 59)))


def csv_stream(text):
    return io.StringIO(text)
