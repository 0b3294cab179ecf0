"""Filter-query AST and its mapping to the occurrence-search wire syntax.

A query is a base term plus a list of ``fq`` filter clauses, an optional
spatial circle, paging and facet fields. Clauses come in exactly three
shapes: quoted exact phrase, ``*`` wildcard pattern, and inclusive
integer range. ``parse_clause`` is the exact inverse of the renderer.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Optional, Union
from urllib.parse import quote

from .records import GeoCircle

RESOURCE_FIELD = "dataResourceUid"
DEFAULT_BASE_QUERY = "*:*"

_FIELD_FORBIDDEN = set(':"\'') | set(" \t\n\r\v\f")
_RANGE_RE = re.compile(r"^\[\s*(-?\d+)\s+TO\s+(-?\d+)\s*\]$")
# Characters stripped from user text before it is wrapped into a
# wildcard pattern; prevents clause injection through free-form names.
_WILDCARD_STRIP = ':"[]'


class MalformedClause(ValueError):
    """Raised by parse_clause; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class ExactPhrase:
    value: str


@dataclass(frozen=True)
class Wildcard:
    pattern: str

    def __post_init__(self):
        if "*" not in self.pattern:
            raise ValueError("wildcard pattern has no '*' marker")
        if self.pattern.startswith('"'):
            raise ValueError("wildcard pattern must not start with a quote")


@dataclass(frozen=True)
class Range:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"range lo {self.lo} > hi {self.hi}")


Matcher = Union[ExactPhrase, Wildcard, Range]


@dataclass(frozen=True)
class FilterClause:
    field: str
    matcher: Matcher

    def __post_init__(self):
        if not self.field:
            raise ValueError("clause field must be non-empty")
        if any(c in _FIELD_FORBIDDEN for c in self.field):
            raise ValueError(f"clause field contains forbidden characters: {self.field!r}")


@dataclass(frozen=True)
class FilterQuery:
    """The resource-pinning clause is always present and always first."""

    clauses: tuple = ()
    base_query: str = DEFAULT_BASE_QUERY
    spatial: Optional[GeoCircle] = None
    page_size: int = 10
    start_index: int = 0
    facet_fields: tuple = ()

    def __post_init__(self):
        resource_positions = [i for i, c in enumerate(self.clauses)
                              if c.field == RESOURCE_FIELD]
        if len(resource_positions) != 1:
            raise ValueError("query must carry exactly one dataResourceUid clause")
        if resource_positions[0] != 0:
            raise ValueError("dataResourceUid clause must come first")
        if self.page_size < 1:
            raise ValueError(f"page_size must be >= 1, got {self.page_size}")
        if self.start_index < 0:
            raise ValueError(f"start_index must be >= 0, got {self.start_index}")
        if len(set(self.facet_fields)) != len(self.facet_fields):
            raise ValueError("facet_fields must be unique")

    def with_spatial(self, circle: Optional[GeoCircle]) -> "FilterQuery":
        return replace(self, spatial=circle)


def make_query(clauses=(), *, data_resource_uid: str = "dr368",
               spatial: Optional[GeoCircle] = None, page_size: int = 10,
               start_index: int = 0, facet_fields=()) -> FilterQuery:
    """Build a FilterQuery, injecting the resource-pinning clause first.

    Callers never supply the dataResourceUid clause themselves; the
    builder pins every query to the configured dataset.
    """
    pinned = (FilterClause(RESOURCE_FIELD, ExactPhrase(data_resource_uid)),)
    return FilterQuery(clauses=pinned + tuple(clauses), spatial=spatial,
                       page_size=page_size, start_index=start_index,
                       facet_fields=tuple(facet_fields))


def escape_phrase(raw: str) -> str:
    """Backslash-escape \\ and " so the result can sit between quotes."""
    return raw.replace("\\", "\\\\").replace('"', '\\"')


def unescape_phrase(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            out.append(text[i + 1])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def sanitize_wildcard_text(text: str) -> str:
    """Strip clause-delimiter characters from user text for *…* wrapping."""
    return "".join(c for c in text if c not in _WILDCARD_STRIP)


def wildcard_contains(text: str) -> Wildcard:
    return Wildcard(f"*{sanitize_wildcard_text(text)}*")


def render_clause(clause: FilterClause) -> str:
    m = clause.matcher
    if isinstance(m, ExactPhrase):
        return f'{clause.field}:"{escape_phrase(m.value)}"'
    if isinstance(m, Range):
        return f"{clause.field}:[{m.lo} TO {m.hi}]"
    return f"{clause.field}:{m.pattern}"


def parse_clause(text: str) -> FilterClause:
    """Parse one rendered clause back into a FilterClause.

    Classification: a quoted value is an exact phrase, ``[lo TO hi]`` is a
    range, anything containing ``*`` is a wildcard. Raises MalformedClause
    with the offending position for anything else.
    """
    sep = text.find(":")
    if sep < 0:
        raise MalformedClause("missing ':' field separator", len(text))
    fieldname = text[:sep]
    if not fieldname:
        raise MalformedClause("empty field name", 0)
    if any(c in _FIELD_FORBIDDEN for c in fieldname):
        raise MalformedClause(f"bad character in field name {fieldname!r}", 0)
    value = text[sep + 1:]
    if not value:
        raise MalformedClause("empty clause value", sep + 1)

    if value.startswith('"'):
        # scan for the closing unescaped quote
        i = 1
        while i < len(value):
            if value[i] == "\\":
                i += 2
                continue
            if value[i] == '"':
                break
            i += 1
        if i >= len(value):
            raise MalformedClause("unbalanced quote", sep + 1)
        if i != len(value) - 1:
            raise MalformedClause("trailing characters after closing quote", sep + 1 + i + 1)
        return FilterClause(fieldname, ExactPhrase(unescape_phrase(value[1:i])))

    range_match = _RANGE_RE.match(value)
    if range_match:
        lo, hi = int(range_match.group(1)), int(range_match.group(2))
        if lo > hi:
            raise MalformedClause(f"range lower bound {lo} above upper bound {hi}", sep + 1)
        return FilterClause(fieldname, Range(lo, hi))
    if value.startswith("[") and value.endswith("]"):
        raise MalformedClause("range bounds must be integers separated by TO", sep + 1)

    if "*" in value:
        return FilterClause(fieldname, Wildcard(value))

    raise MalformedClause("value is neither quoted, a range, nor a wildcard", sep + 1)


def format_decimal(x: float) -> str:
    """Shortest exact rendering: 5.0 -> "5", -33.731 -> "-33.731"."""
    if float(x) == int(x):
        return str(int(x))
    return repr(float(x))


def serialize(query: FilterQuery) -> dict:
    """Render a query to the wire-parameter multimap (key -> value list).

    ``startIndex`` is emitted only when positive; ``facets`` only when
    facet fields are requested.
    """
    params: dict = {"q": [query.base_query]}
    params["fq"] = [render_clause(c) for c in query.clauses]
    if query.spatial is not None:
        params["lat"] = [format_decimal(query.spatial.latitude)]
        params["lon"] = [format_decimal(query.spatial.longitude)]
        params["radius"] = [format_decimal(query.spatial.radius_km)]
    params["pageSize"] = [str(query.page_size)]
    if query.start_index > 0:
        params["startIndex"] = [str(query.start_index)]
    if query.facet_fields:
        params["facets"] = [",".join(query.facet_fields)]
    return params


def build_ala_url(query: FilterQuery, base_url: str) -> str:
    """Deterministic public-search URL carrying the q/fq parameters."""
    parts = [f"q={quote(query.base_query, safe='*')}"]
    for clause in query.clauses:
        parts.append(f"fq={quote(render_clause(clause), safe='*')}")
    return f"{base_url}?{'&'.join(parts)}"
