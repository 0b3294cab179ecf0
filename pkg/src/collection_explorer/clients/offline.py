"""Deterministic offline implementations of the three data upstreams.

All three evaluate against an immutable FixtureStore. Matching rules:
exact phrases compare case-insensitively, wildcards are case-insensitive
``*`` patterns over the whole value, ranges are inclusive integer
bounds, and spatial circles use great-circle distance with an inclusive
boundary. Each client counts its calls so tests can assert how often the
pipeline reached out.
"""
from __future__ import annotations

import re
from collections import Counter
from typing import Optional

from ..filters import ExactPhrase, FilterClause, FilterQuery, Range, Wildcard
from ..records import (EXTERNAL_TO_FIELD, TAXON_RANKS, FacetDistribution,
                       SpecimenRecord, haversine_km)
from ..resolvers import Direction, NameMatch, ResolvedLocation
from .base import OccurrenceResponse
from .fixtures import FixtureStore

_INT_RE = re.compile(r"-?\d+")


def _field_value(record: SpecimenRecord, external_name: str):
    """Value of an externally-named field, or None when absent.

    ``multimedia`` is derived: "Image" for image-bearing records, "None"
    otherwise, mirroring how the live service exposes availability.
    """
    if external_name == "multimedia":
        return "Image" if record.image_urls else "None"
    if external_name in TAXON_RANKS:
        return record.taxonomy.get(external_name)
    attr = EXTERNAL_TO_FIELD.get(external_name)
    if attr is None:
        return None
    value = getattr(record, attr)
    if attr == "image_urls":
        return value or None
    return value


def _as_int(value) -> Optional[int]:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, str) and _INT_RE.fullmatch(value.strip()):
        return int(value)
    return None


def _wildcard_regex(pattern: str) -> re.Pattern:
    parts = [re.escape(p) for p in pattern.split("*")]
    return re.compile(".*".join(parts), re.IGNORECASE | re.DOTALL)


class OfflineOccurrenceClient:
    """Linear-scan query evaluation over the fixture records."""

    def __init__(self, store: FixtureStore):
        self._store = store
        self.call_count = 0

    def search_occurrences(self, query: FilterQuery) -> OccurrenceResponse:
        self.call_count += 1
        if query.base_query != "*:*":
            raise ValueError(f"unsupported base query {query.base_query!r}")
        compiled = [(clause, _wildcard_regex(clause.matcher.pattern)
                     if isinstance(clause.matcher, Wildcard) else None)
                    for clause in query.clauses]
        matches = [record for record in self._store.records
                   if self._matches(record, compiled, query)]
        page = matches[query.start_index:query.start_index + query.page_size]
        facets = tuple(self._facet(field, matches) for field in query.facet_fields)
        return OccurrenceResponse(total_records=len(matches),
                                  records=tuple(page), facets=facets)

    @staticmethod
    def _matches(record, compiled, query) -> bool:
        for clause, regex in compiled:
            if not _clause_matches(record, clause, regex):
                return False
        if query.spatial is not None:
            if record.latitude is None:
                return False
            circle = query.spatial
            distance = haversine_km(record.latitude, record.longitude,
                                    circle.latitude, circle.longitude)
            if distance > circle.radius_km:
                return False
        return True

    @staticmethod
    def _facet(field: str, matches) -> FacetDistribution:
        counts = Counter()
        for record in matches:
            value = _field_value(record, field)
            if value is not None:
                counts[str(value)] += 1
        buckets = tuple(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
        return FacetDistribution(facet_field=field, buckets=buckets)


def _clause_matches(record: SpecimenRecord, clause: FilterClause,
                    regex: Optional[re.Pattern]) -> bool:
    value = _field_value(record, clause.field)
    if value is None:
        return False
    matcher = clause.matcher
    if isinstance(matcher, ExactPhrase):
        return str(value).lower() == matcher.value.lower()
    if isinstance(matcher, Range):
        as_int = _as_int(value)
        return as_int is not None and matcher.lo <= as_int <= matcher.hi
    return regex.fullmatch(str(value)) is not None


class OfflineGeocodeClient:
    """Gazetteer lookup by place name, country suffix ignored."""

    def __init__(self, places):
        self._places = tuple(places)
        self.call_count = 0

    def geocode(self, address: str) -> list:
        self.call_count += 1
        name = _strip_country(address)
        out = []
        for place in self._places:
            if place.name.lower() == name.lower():
                out.append(ResolvedLocation(
                    query_text=address,
                    latitude=place.latitude, longitude=place.longitude,
                    state_province=place.state,
                    formatted_name=f"{place.name}, {place.state}, Australia"))
        return out


def _strip_country(address: str) -> str:
    text = address.strip()
    lowered = text.lower()
    for suffix in (", australia", " australia"):
        if lowered.endswith(suffix):
            return text[: -len(suffix)].strip(" ,")
    return text


class OfflineNameClient:
    """Vernacular/scientific conversion backed by the fixture name table.

    A query matches an entry when it equals the source name (rank 0) or
    when one contains the other (rank 1), case-insensitively.
    """

    def __init__(self, name_table):
        self._table = tuple(name_table)
        self.call_count = 0

    def resolve(self, name: str, direction: Direction) -> list:
        self.call_count += 1
        query = name.strip().lower()
        matches = []
        seen = set()
        for pair in self._table:
            if direction is Direction.VERNACULAR_TO_SCIENTIFIC:
                source, target = pair.vernacular, pair.scientific
            else:
                source, target = pair.scientific, pair.vernacular
            rank = _match_rank(query, source.lower())
            if rank is not None and target.lower() not in seen:
                seen.add(target.lower())
                matches.append(NameMatch(resolved_name=target, confidence_rank=rank))
        return matches


def _match_rank(query: str, source: str) -> Optional[int]:
    if query == source:
        return 0
    if query in source or source in query:
        return 1
    return None
