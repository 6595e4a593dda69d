"""Pydantic request/response models for the HTTP API.

Matrices serialize as dense row-major arrays with explicit dims; dates are
ISO strings. Errors always come back as ``{code, message}``.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    code: str
    message: str


class SessionCreateRequest(BaseModel):
    dataset: Optional[str] = None  # default dataset when omitted


class SessionInfo(BaseModel):
    session_id: str
    dataset: str
    granularity: Literal["month", "day"]
    slice_count: int
    has_region: bool
    has_model: bool


class SelectRequest(BaseModel):
    mode: Literal["point", "polyline", "polygon", "address"]
    geometry: Optional[list] = None  # [lon,lat] or [[lon,lat], ...]
    address: Optional[str] = None
    buffer_m: Optional[float] = Field(default=None, gt=0)
    expand_rings: int = Field(default=0, ge=0)


class RegionBody(BaseModel):
    site_ids: list[str]
    provenance: str


class FilterRequest(BaseModel):
    """Patch semantics: absent fields stay, explicit nulls clear a facet.

    `time_window` entries are slice indices or ISO dates.
    """

    time_window: Optional[list[Union[int, str]]] = None
    excluded_years: Optional[list[int]] = None
    excluded_types: Optional[list[str]] = None
    site: Optional[str] = None
    hotspot: Optional[int] = None


class FilterBody(BaseModel):
    region: RegionBody
    time_window: Optional[list[int]]
    excluded_years: list[int]
    excluded_types: list[str]
    site: Optional[str]
    hotspot: Optional[int]


class GlobalSeriesBody(BaseModel):
    granularity: str
    labels: list[str]
    counts: list[int]


class CumulativeBlock(BaseModel):
    by_month_of_year: list[int]
    by_day_of_week: list[int]
    by_period_of_day: list[int]


class CumulativeBody(BaseModel):
    base: CumulativeBlock
    overlay: CumulativeBlock
    period_names: list[str]


class RankingBody(BaseModel):
    types: list[str]
    labels: list[str]
    ranks: list[list[int]]  # (T, n)
    counts: list[list[int]]  # (T, n)


class RadialBody(BaseModel):
    types: list[str]
    years: list[int]
    grids: list[list[list[int]]]  # (T, Y, 12)
    shares: list[float]


class RecomputeRequest(BaseModel):
    k: int = Field(default=3, ge=1)
    granularity: Literal["month", "day"] = "month"


class GaugeBody(BaseModel):
    crime_count: int
    rate_of_crimes: float
    frequency: float
    importance: float
    degenerate: bool


class HotspotSummary(BaseModel):
    k: int
    dims: dict
    memberships: list[list[str]]
    noise_flags: list[bool]
    h_bin: list[list[int]]
    gauges: list[GaugeBody]
    objective: float
    restart_objectives: list[float]
    granularity: str
    degenerate: bool


class ChoroplethBody(BaseModel):
    counts: dict[str, int]


class CompareRequest(BaseModel):
    confidence: float = Field(default=99.0, gt=0, lt=100)
    k: int = Field(default=3, ge=1)


class CompareBody(BaseModel):
    ssi: float
    counts: dict[str, int]
    categories: dict[str, str]
    z_scores: dict[str, float]
    p_values: dict[str, float]


class DatasetMeta(BaseModel):
    dataset: str
    record_count: int
    crime_types: list[str]
    years: list[int]
    date_range: list[str]
    site_count: int
    geometry: dict  # GeoJSON FeatureCollection
