"""Marker data for the interactive map.

Records are fetched per viewport (inclusive bounds), optionally filtered
to image-bearing records, and grouped by position quantised to five
decimal places (about 1.1 m) so co-located specimens share one marker
and the client can page through them in a carousel. When a viewport
holds more groups than requested, a deterministic every-k-th subsample
keeps repeated pans stable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .records import BoundingBox

QUANTISE_DECIMALS = 5
MAX_MARKER_CAP = 2000
DEFAULT_MAX_MARKERS = 500


@dataclass(frozen=True)
class MarkerGroup:
    """All records sharing one quantised position."""

    latitude: float
    longitude: float
    records: tuple
    has_any_image: bool

    def __post_init__(self):
        if not self.records:
            raise ValueError("marker group needs at least one record")


@dataclass(frozen=True)
class ViewportRequest:
    bbox: BoundingBox
    zoom: int = 10
    images_only: bool = False
    max_markers: int = DEFAULT_MAX_MARKERS

    def __post_init__(self):
        if not (0 <= self.zoom <= 22):
            raise ValueError(f"zoom {self.zoom} outside [0, 22]")
        if not (1 <= self.max_markers <= MAX_MARKER_CAP):
            raise ValueError(f"max_markers must be in [1, {MAX_MARKER_CAP}]")


@dataclass(frozen=True)
class ViewportResult:
    groups: tuple
    truncated: bool

    @property
    def record_count(self) -> int:
        return sum(len(g.records) for g in self.groups)


def group_colocated(records) -> list:
    """Partition coordinate-bearing records into co-location groups.

    Every input record lands in exactly one group. Within a group records
    order by catalogue number; groups order south-west to north-east.
    """
    buckets: dict = {}
    for record in records:
        if record.latitude is None:
            raise ValueError(f"record {record.record_id} has no coordinates")
        key = (round(record.latitude, QUANTISE_DECIMALS),
               round(record.longitude, QUANTISE_DECIMALS))
        buckets.setdefault(key, []).append(record)
    groups = []
    for (lat, lon) in sorted(buckets):
        members = sorted(buckets[(lat, lon)], key=lambda r: r.catalogue_number)
        groups.append(MarkerGroup(
            latitude=lat, longitude=lon, records=tuple(members),
            has_any_image=any(r.image_urls for r in members)))
    return groups


def records_in_viewport(request: ViewportRequest, store) -> ViewportResult:
    """Marker groups for every record inside the request bounds."""
    bbox = request.bbox
    selected = [r for r in store.records
                if r.latitude is not None
                and bbox.contains(r.latitude, r.longitude)]
    if request.images_only:
        selected = [r for r in selected if r.image_urls]
    groups = group_colocated(selected)
    if len(groups) <= request.max_markers:
        return ViewportResult(groups=tuple(groups), truncated=False)
    step = math.ceil(len(groups) / request.max_markers)
    return ViewportResult(groups=tuple(groups[::step]), truncated=True)
