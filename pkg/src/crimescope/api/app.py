"""FastAPI application: sessions, selection, filters, aggregates, hotspots.

One analyst session holds a filter state, a granularity and a cached hotspot
model over a shared immutable dataset. Filter changes never touch the cached
model; only an explicit recompute does. Requests within a session are
serialized by a per-session lock.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field, replace

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .. import service
from ..aggregates import FilterState
from ..catalog import normalize_type
from ..errors import CrimescopeError, FilterError, SessionError
from ..config import ServiceConfig
from . import schemas

STATUS_BY_CODE = {
    "unknown_session": 404,
    "unknown_dataset": 404,
    "empty_selection": 404,
    "rank_too_large": 400,
}


@dataclass
class Session:
    session_id: str
    dataset_label: str
    granularity: str = "month"
    filter: FilterState | None = None
    model: object = None
    model_granularity: str | None = None
    touched: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class SessionStore:
    def __init__(self, ttl_s: float):
        self.ttl_s = ttl_s
        self._sessions = {}
        self._lock = threading.Lock()

    def create(self, dataset_label: str) -> Session:
        session = Session(uuid.uuid4().hex, dataset_label)
        with self._lock:
            self._purge()
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            self._purge()
            session = self._sessions.get(session_id)
            if session is None:
                raise SessionError(f"unknown session {session_id!r}")
            session.touched = time.monotonic()
            return session

    def _purge(self):
        deadline = time.monotonic() - self.ttl_s
        stale = [sid for sid, s in self._sessions.items() if s.touched < deadline]
        for sid in stale:
            del self._sessions[sid]


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="crimescope", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    sessions = SessionStore(config.session_ttl_s)
    app.state.config = config
    app.state.sessions = sessions

    @app.exception_handler(CrimescopeError)
    def domain_error(_request: Request, exc: CrimescopeError):
        status = STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    def validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"code": "validation_error", "message": str(exc)})

    def dataset_for(session: Session):
        return config.datasets[session.dataset_label]

    def session_info(session: Session) -> dict:
        dataset = dataset_for(session)
        slicing = dataset.catalog.default_slicing(session.granularity)
        return {
            "session_id": session.session_id,
            "dataset": session.dataset_label,
            "granularity": session.granularity,
            "slice_count": len(slicing),
            "has_region": session.filter is not None,
            "has_model": session.model is not None,
        }

    def require_filter(session: Session) -> FilterState:
        if session.filter is None:
            raise FilterError("no region selected yet", code="no_region")
        return session.filter

    def memberships_of(session: Session):
        return session.model.memberships if session.model is not None else None

    @app.post("/session", response_model=schemas.SessionInfo)
    def create_session(body: schemas.SessionCreateRequest | None = None):
        label = body.dataset if body and body.dataset else config.default_dataset
        if label not in config.datasets:
            raise SessionError(f"unknown dataset {label!r}", code="unknown_dataset")
        return session_info(sessions.create(label))

    @app.get("/session/{session_id}", response_model=schemas.SessionInfo)
    def get_session(session_id: str):
        return session_info(sessions.get(session_id))

    @app.get("/meta", response_model=schemas.DatasetMeta)
    def meta(session: str = Query(...)):
        return service.dataset_meta(dataset_for(sessions.get(session)))

    @app.post("/select", response_model=schemas.RegionBody)
    def select(body: schemas.SelectRequest, session: str = Query(...)):
        state = sessions.get(session)
        with state.lock:
            dataset = dataset_for(state)
            region = service.select_region(
                dataset, body.mode, geometry=body.geometry, address=body.address,
                buffer_m=body.buffer_m, expand_rings=body.expand_rings,
                default_buffer_m=config.polyline_buffer_m)
            previous = state.filter
            if previous is None:
                state.filter = FilterState(region=region)
            else:
                # a fresh region drops the site/hotspot sub-selections, which
                # referred to the old one; time and type facets persist
                state.filter = replace(previous, region=region,
                                       selected_site=None, selected_hotspot=None)
            return service.region_payload(region)

    @app.post("/filter", response_model=schemas.FilterBody)
    def set_filter(body: schemas.FilterRequest, session: str = Query(...)):
        state = sessions.get(session)
        with state.lock:
            filt = require_filter(state)
            dataset = dataset_for(state)
            slicing = dataset.catalog.default_slicing(state.granularity)
            provided = body.model_fields_set
            changes = {}
            if "time_window" in provided:
                changes["time_window"] = service.resolve_time_window(slicing, body.time_window)
            if "excluded_years" in provided:
                changes["excluded_years"] = frozenset(body.excluded_years or ())
            if "excluded_types" in provided:
                changes["excluded_types"] = frozenset(
                    normalize_type(t) for t in (body.excluded_types or ()))
            if "site" in provided:
                changes["selected_site"] = body.site
            if "hotspot" in provided:
                if body.hotspot is not None:
                    members = memberships_of(state)
                    if members is None:
                        raise FilterError("no hotspot model computed yet", code="no_model")
                    if not 0 <= body.hotspot < len(members):
                        raise FilterError(f"hotspot index {body.hotspot} out of range")
                changes["selected_hotspot"] = body.hotspot
            state.filter = replace(filt, **changes)
            # exercise the combined filter so inconsistent facets fail loudly
            service.global_payload(dataset, slicing, state.filter, memberships_of(state))
            return service.filter_payload(state.filter)

    @app.get("/aggregates/global", response_model=schemas.GlobalSeriesBody)
    def aggregates_global(session: str = Query(...)):
        state = sessions.get(session)
        with state.lock:
            dataset = dataset_for(state)
            slicing = dataset.catalog.default_slicing(state.granularity)
            return service.global_payload(dataset, slicing, require_filter(state),
                                          memberships_of(state))

    @app.get("/aggregates/cumulative", response_model=schemas.CumulativeBody)
    def aggregates_cumulative(session: str = Query(...)):
        state = sessions.get(session)
        with state.lock:
            dataset = dataset_for(state)
            slicing = dataset.catalog.default_slicing(state.granularity)
            return service.cumulative_payload(dataset, slicing, require_filter(state),
                                              memberships_of(state))

    @app.get("/aggregates/ranking", response_model=schemas.RankingBody)
    def aggregates_ranking(session: str = Query(...), top_t: int = Query(default=5, ge=1)):
        state = sessions.get(session)
        with state.lock:
            dataset = dataset_for(state)
            slicing = dataset.catalog.default_slicing(state.granularity)
            return service.ranking_payload(dataset, slicing, require_filter(state),
                                           top_t, memberships_of(state))

    @app.get("/aggregates/radial", response_model=schemas.RadialBody)
    def aggregates_radial(session: str = Query(...), top_t: int = Query(default=5, ge=1)):
        state = sessions.get(session)
        with state.lock:
            dataset = dataset_for(state)
            slicing = dataset.catalog.default_slicing(state.granularity)
            return service.radial_payload(dataset, slicing, require_filter(state),
                                          top_t, memberships_of(state))

    @app.get("/choropleth", response_model=schemas.ChoroplethBody)
    def choropleth(session: str = Query(...)):
        state = sessions.get(session)
        with state.lock:
            dataset = dataset_for(state)
            slicing = dataset.catalog.default_slicing(state.granularity)
            filt = state.filter
            if filt is None:
                filt = FilterState(region=service.region_from_whole(dataset))
            return service.choropleth_payload(dataset, slicing, filt)

    @app.post("/hotspots/recompute", response_model=schemas.HotspotSummary)
    def recompute(body: schemas.RecomputeRequest, session: str = Query(...)):
        state = sessions.get(session)
        with state.lock:
            dataset = dataset_for(state)
            filt = require_filter(state)
            if body.granularity != state.granularity and filt.time_window is not None:
                old = dataset.catalog.default_slicing(state.granularity)
                new = dataset.catalog.default_slicing(body.granularity)
                filt = replace(filt, time_window=service.remap_time_window(
                    filt.time_window, old, new))
            model, _slicing = service.recompute_hotspots(
                dataset, filt, body.k, body.granularity, config.nmf,
                memberships_of(state))
            state.model = model
            state.model_granularity = body.granularity
            state.granularity = body.granularity
            state.filter = replace(filt, selected_hotspot=None)
            return service.hotspot_payload(model, body.granularity)

    @app.get("/hotspots", response_model=schemas.HotspotSummary)
    def hotspots(session: str = Query(...)):
        state = sessions.get(session)
        with state.lock:
            if state.model is None:
                raise FilterError("no hotspot model computed yet", code="no_model")
            return service.hotspot_payload(state.model, state.model_granularity)

    @app.post("/compare", response_model=schemas.CompareBody)
    def compare(body: schemas.CompareRequest, session: str = Query(...)):
        state = sessions.get(session)
        with state.lock:
            dataset = dataset_for(state)
            return service.compare_payload(dataset, require_filter(state),
                                           body.confidence, body.k, config.nmf)

    return app
