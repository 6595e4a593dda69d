"""Service configuration: dataset paths, server defaults, env override.

The config file is JSON; `CRIMESCOPE_CONFIG` overrides the path given on the
command line. Each dataset entry names a records CSV and a geometry GeoJSON,
plus optional type-group and geocoder table files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .catalog import ingest_records, load_type_groups
from .errors import CrimescopeError
from .geometry import FixtureGeocoder, build_adjacency, load_geometry
from .hotspots import NmfConfig

ENV_CONFIG = "CRIMESCOPE_CONFIG"


@dataclass
class Dataset:
    label: str
    catalog: object
    geometry: object
    adjacency: object
    geocoder: FixtureGeocoder = field(default_factory=FixtureGeocoder)
    ingestion_report: object = None


@dataclass
class ServiceConfig:
    datasets: dict  # label -> Dataset
    default_dataset: str
    host: str = "127.0.0.1"
    port: int = 8734
    session_ttl_s: float = 3600.0
    polyline_buffer_m: float = 50.0
    nmf: NmfConfig = field(default_factory=NmfConfig)


def load_dataset(label: str, spec: dict) -> Dataset:
    geometry = load_geometry(spec["geometry"])
    type_groups = load_type_groups(spec["type_groups"]) if spec.get("type_groups") else None
    catalog, report = ingest_records(spec["records"], geometry,
                                     type_groups=type_groups, dataset_label=label)
    geocoder = FixtureGeocoder(spec["geocoder"]) if spec.get("geocoder") else FixtureGeocoder()
    return Dataset(label, catalog, geometry, build_adjacency(geometry), geocoder, report)


def load_config(path: str | None = None) -> ServiceConfig:
    path = os.environ.get(ENV_CONFIG, path)
    if path is None:
        raise CrimescopeError("no config file given (flag or CRIMESCOPE_CONFIG)",
                              code="missing_config")
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not doc.get("datasets"):
        raise CrimescopeError("config declares no datasets", code="missing_config")
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    datasets = {}
    for label, spec in doc["datasets"].items():
        resolved = {key: resolve(value) if key in ("records", "geometry", "type_groups", "geocoder")
                    else value for key, value in spec.items()}
        datasets[label] = load_dataset(label, resolved)

    nmf_doc = doc.get("nmf", {})
    nmf = NmfConfig(**nmf_doc) if nmf_doc else NmfConfig()
    return ServiceConfig(
        datasets=datasets,
        default_dataset=doc.get("default_dataset", next(iter(datasets))),
        host=doc.get("host", "127.0.0.1"),
        port=int(doc.get("port", 8734)),
        session_ttl_s=float(doc.get("session_ttl_s", 3600.0)),
        polyline_buffer_m=float(doc.get("polyline_buffer_m", 50.0)),
        nmf=nmf,
    )
