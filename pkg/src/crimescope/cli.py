"""Batch command-line client: ingestion, synthetic corpora, hotspot runs,
Gi* exports, SSI comparisons and the API server.

Every analytical subcommand goes through the same service layer as the HTTP
handlers, so both surfaces emit identical JSON for identical inputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import service
from .aggregates import FilterState, near_repeat_pairs
from .baseline import gi_star, kmeans_regions, run_comparison
from .catalog import count_matrix_entries, ingest_records, load_type_groups, normalize_type
from .config import Dataset, load_config
from .errors import CrimescopeError
from .geometry import (FixtureGeocoder, build_adjacency, geometry_to_geojson,
                       load_geometry, region_from_site_ids)
from .hotspots import NmfConfig, model_to_dict
from .synth import catalog_to_csv_rows, synth_city, synth_region


def _dump(payload, out=None):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_dataset(args) -> Dataset:
    geometry = load_geometry(args.geometry)
    type_groups = load_type_groups(args.type_groups) if getattr(args, "type_groups", None) else None
    catalog, report = ingest_records(args.records, geometry, type_groups=type_groups,
                                     dataset_label="cli")
    geocoder = FixtureGeocoder(args.geocoder) if getattr(args, "geocoder", None) else FixtureGeocoder()
    return Dataset("cli", catalog, geometry, build_adjacency(geometry), geocoder, report)


def _load_region(dataset, path):
    if path is None:
        return service.region_from_whole(dataset)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if "site_ids" in doc:
        return region_from_site_ids(dataset.geometry, doc["site_ids"])
    return service.select_region(dataset, doc["mode"], geometry=doc.get("geometry"),
                                 address=doc.get("address"), buffer_m=doc.get("buffer_m"),
                                 expand_rings=doc.get("expand_rings", 0))


def _build_filter(dataset, args, slicing):
    region = _load_region(dataset, getattr(args, "region", None))
    window = service.resolve_time_window(slicing, args.window) if getattr(args, "window", None) else None
    return FilterState(
        region=region,
        time_window=window,
        excluded_years=frozenset(getattr(args, "exclude_years", None) or ()),
        excluded_types=frozenset(normalize_type(t) for t in (getattr(args, "exclude_types", None) or ())),
    )


def _add_corpus_args(p, with_region=True):
    p.add_argument("--records", required=True, help="crime record CSV")
    p.add_argument("--geometry", required=True, help="site GeoJSON")
    p.add_argument("--type-groups", help="crime_type = group config file")
    p.add_argument("--geocoder", help="address lookup table file")
    if with_region:
        p.add_argument("--region", help="region JSON (site_ids or a selection)")


def _add_filter_args(p):
    p.add_argument("--exclude-years", type=int, nargs="*", default=None)
    p.add_argument("--exclude-types", nargs="*", default=None)
    p.add_argument("--window", nargs=2, metavar=("FROM", "TO"),
                   help="slice window: indices or YYYY-MM-DD dates")
    p.add_argument("--granularity", choices=["month", "day"], default="month")


def cmd_ingest(args):
    dataset = _load_dataset(args)
    report = dataset.ingestion_report
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.as_text() + "\n")
    print(report.as_text())
    print(f"catalog: {dataset.catalog.record_count} records, "
          f"{len(dataset.catalog.site_ids)} sites, "
          f"{len(dataset.catalog.crime_types)} crime types")
    return 0


def cmd_synth(args):
    import os

    os.makedirs(args.out, exist_ok=True)
    if args.city:
        corpus = synth_city(seed=args.seed)
        meta = {
            "kind": "city", "seed": args.seed,
            "clusters": {str(c): list(sites) for c, sites in
                         sorted((c, corpus.clustering.members(c))
                                for c in range(corpus.clustering.k_clusters))},
            "planted": {str(c): list(v) for c, v in sorted(corpus.planted.items())},
            "assignment": dict(sorted(corpus.clustering.assignment.items())),
        }
    else:
        corpus = synth_region(seed=args.seed)
        meta = {"kind": "benchmark-region", "seed": args.seed, "roles": corpus.roles}
    geo_path = f"{args.out}/geometry.json"
    rec_path = f"{args.out}/records.csv"
    meta_path = f"{args.out}/meta.json"
    with open(geo_path, "w", encoding="utf-8") as fh:
        json.dump(geometry_to_geojson(corpus.geometry), fh, sort_keys=True)
        fh.write("\n")
    with open(rec_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in catalog_to_csv_rows(corpus.catalog):
            writer.writerow(row)
    _dump(meta, meta_path)
    print(f"wrote {geo_path}, {rec_path}, {meta_path}")
    return 0


def cmd_hotspot(args):
    dataset = _load_dataset(args)
    slicing = dataset.catalog.default_slicing(args.granularity)
    filt = _build_filter(dataset, args, slicing)
    cfg = NmfConfig(k=args.k, restarts=args.restarts, seed=args.seed)
    model, _ = service.recompute_hotspots(dataset, filt, args.k, args.granularity, cfg)
    _dump(model_to_dict(model), args.out)
    return 0


def cmd_gistar(args):
    dataset = _load_dataset(args)
    slicing = dataset.catalog.default_slicing(args.granularity)
    filt = _build_filter(dataset, args, slicing)
    from .aggregates import record_mask

    mask = record_mask(dataset.catalog, slicing, filt)
    matrix = count_matrix_entries(dataset.catalog, slicing, filt.region.site_ids, mask=mask)
    result = gi_star(matrix.X.sum(axis=1), dataset.adjacency, matrix.row_sites,
                     args.confidence)
    rows = [("site_id", "z_score", "p_value", "hotspot")]
    rows += [(s, f"{z:.12g}", f"{p:.12g}", int(l)) for s, z, p, l in
             zip(result.sites, result.z_scores, result.p_values, result.labels)]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh).writerows(rows)
    else:
        csv.writer(sys.stdout).writerows(rows)
    return 0


def cmd_compare(args):
    dataset = _load_dataset(args)
    points = {s: dataset.geometry.projection.to_xy(*dataset.geometry.centroids[s])
              for s in dataset.geometry.site_ids}
    clustering = kmeans_regions(points, args.clusters, seed=args.seed)
    cfg = NmfConfig(k=args.k, restarts=args.restarts, seed=args.seed)
    report = run_comparison(dataset.catalog, dataset.geometry, dataset.adjacency,
                            clustering, cfg, args.confidence)
    _dump(report.as_dict(), args.out)
    if args.hist:
        with open(args.hist, "w", encoding="utf-8") as fh:
            fh.write(report.histogram_text() + "\n")
    else:
        print(report.histogram_text(), file=sys.stderr)
    return 0


def cmd_near_repeat(args):
    dataset = _load_dataset(args)
    region = _load_region(dataset, args.region)
    pairs = near_repeat_pairs(dataset.catalog, region, dataset.adjacency,
                              window_days=args.window_days,
                              include_neighbors=args.neighbors,
                              crime_type=args.crime_type)
    payload = {
        "window_days": args.window_days,
        "include_neighbors": args.neighbors,
        "pairs": [
            {"first_site": p.first_site, "second_site": p.second_site,
             "crime_type": p.crime_type,
             "first_time": p.first_time.strftime("%Y-%m-%dT%H:%M"),
             "second_time": p.second_time.strftime("%Y-%m-%dT%H:%M"),
             "delta_days": p.delta_days}
            for p in pairs
        ],
    }
    _dump(payload, args.out)
    return 0


def cmd_aggregates(args):
    dataset = _load_dataset(args)
    slicing = dataset.catalog.default_slicing(args.granularity)
    filt = _build_filter(dataset, args, slicing)
    builders = {
        "global": service.global_payload,
        "cumulative": service.cumulative_payload,
        "ranking": service.ranking_payload,
        "radial": service.radial_payload,
    }
    _dump(builders[args.kind](dataset, slicing, filt), args.out)
    return 0


def cmd_serve(args):
    import uvicorn

    from .api import create_app

    config = load_config(args.config)
    if args.port is not None:
        config.port = args.port
    if args.host is not None:
        config.host = args.host
    uvicorn.run(create_app(config), host=config.host, port=config.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crimescope",
                                     description="spatio-temporal crime analytics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and summarize a record file")
    _add_corpus_args(p, with_region=False)
    p.add_argument("--report", help="write the ingestion report here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="emit a synthetic corpus")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--benchmark", action="store_true", help="25-site benchmark region")
    group.add_argument("--city", action="store_true", help="400-site desk-scale city")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("hotspot", help="factorize a region into hotspots")
    _add_corpus_args(p)
    _add_filter_args(p)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="model JSON path (default stdout)")
    p.set_defaults(func=cmd_hotspot)

    p = sub.add_parser("gistar", help="Getis-Ord Gi* z/p export")
    _add_corpus_args(p)
    _add_filter_args(p)
    p.add_argument("--confidence", type=float, default=99.0)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_gistar)

    p = sub.add_parser("compare", help="clustered NMF-vs-Gi* SSI comparison")
    _add_corpus_args(p, with_region=False)
    p.add_argument("--clusters", type=int, default=300)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--confidence", type=float, default=99.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="report JSON path (default stdout)")
    p.add_argument("--hist", help="text histogram path (default stderr)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("near-repeat", help="same-type event pairs under a day window")
    _add_corpus_args(p)
    p.add_argument("--window-days", type=int, default=30)
    p.add_argument("--neighbors", action="store_true",
                   help="also pair queen-adjacent sites")
    p.add_argument("--crime-type", help="restrict to one crime type")
    p.add_argument("--out", help="JSON path (default stdout)")
    p.set_defaults(func=cmd_near_repeat)

    p = sub.add_parser("aggregates", help="linked-view series for a region")
    _add_corpus_args(p)
    _add_filter_args(p)
    p.add_argument("--kind", choices=["global", "cumulative", "ranking", "radial"],
                   required=True)
    p.add_argument("--out", help="JSON path (default stdout)")
    p.set_defaults(func=cmd_aggregates)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--config", help="config JSON (or CRIMESCOPE_CONFIG)")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CrimescopeError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
