"""Reference query evaluator used by the test suite.

This is a second, naive implementation of the offline search contract,
kept deliberately independent from ``clients.offline``: it works on the
external document rendering of each record, matches wildcards with its
own greedy scanner instead of regexes, and computes great-circle
distance with its own code. Production code must not import it.
"""
from __future__ import annotations

import math
from collections import Counter

from ..filters import ExactPhrase, FilterQuery, Range, Wildcard
from ..records import FacetDistribution, to_external
from .base import OccurrenceResponse
from .fixtures import FixtureStore

_SPHERE_RADIUS_KM = 6371.0088


def _distance_km(lat1, lon1, lat2, lon2) -> float:
    # haversine via atan2; written separately from the production helper
    rlat1, rlat2 = lat1 * math.pi / 180.0, lat2 * math.pi / 180.0
    dlat = (lat2 - lat1) * math.pi / 180.0
    dlon = (lon2 - lon1) * math.pi / 180.0
    h = (math.sin(dlat / 2.0) * math.sin(dlat / 2.0)
         + math.cos(rlat1) * math.cos(rlat2)
         * math.sin(dlon / 2.0) * math.sin(dlon / 2.0))
    return 2.0 * _SPHERE_RADIUS_KM * math.atan2(math.sqrt(h), math.sqrt(1.0 - h))


def _wild_match(pattern: str, text: str) -> bool:
    """Greedy '*' matching over the full text, case-insensitive."""
    p = pattern.lower()
    t = text.lower()
    pieces = p.split("*")
    if len(pieces) == 1:
        return t == p
    head, tail = pieces[0], pieces[-1]
    if not t.startswith(head) or not t.endswith(tail):
        return False
    pos = len(head)
    limit = len(t) - len(tail)
    for piece in pieces[1:-1]:
        if not piece:
            continue
        found = t.find(piece, pos, limit)
        if found < 0:
            return False
        pos = found + len(piece)
    return pos <= limit


def _doc_value(doc: dict, field: str):
    if field == "multimedia":
        return "Image" if doc.get("imageUrls") else "None"
    return doc.get(field)


def _int_or_none(value):
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        stripped = value.strip()
        body = stripped[1:] if stripped.startswith("-") else stripped
        if body.isdigit():
            return int(stripped)
    return None


def _clause_ok(doc: dict, clause) -> bool:
    value = _doc_value(doc, clause.field)
    if value is None:
        return False
    matcher = clause.matcher
    if isinstance(matcher, ExactPhrase):
        return str(value).lower() == matcher.value.lower()
    if isinstance(matcher, Wildcard):
        return _wild_match(matcher.pattern, str(value))
    if isinstance(matcher, Range):
        number = _int_or_none(value)
        return number is not None and matcher.lo <= number <= matcher.hi
    return False


def fixture_oracle(store: FixtureStore, query: FilterQuery) -> OccurrenceResponse:
    """Evaluate a query the slow, obvious way."""
    if query.base_query != "*:*":
        raise ValueError(f"unsupported base query {query.base_query!r}")
    kept = []
    for record in store.records:
        doc = to_external(record)
        if not all(_clause_ok(doc, clause) for clause in query.clauses):
            continue
        if query.spatial is not None:
            if "decimalLatitude" not in doc:
                continue
            d = _distance_km(doc["decimalLatitude"], doc["decimalLongitude"],
                             query.spatial.latitude, query.spatial.longitude)
            if d > query.spatial.radius_km:
                continue
        kept.append((record, doc))

    page = [record for record, _ in
            kept[query.start_index:query.start_index + query.page_size]]

    facets = []
    for field in query.facet_fields:
        tally = Counter()
        for _, doc in kept:
            value = _doc_value(doc, field)
            if value is not None:
                tally[str(value)] += 1
        ordered = tuple(sorted(tally.items(), key=lambda kv: (-kv[1], kv[0])))
        facets.append(FacetDistribution(facet_field=field, buckets=ordered))

    return OccurrenceResponse(total_records=len(kept), records=tuple(page),
                              facets=tuple(facets))
