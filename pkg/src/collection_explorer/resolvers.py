"""Name and place resolution for the query pipeline.

Covers the two fallback steps: vernacular/scientific name conversion
(used to retry zero-result searches) and locality geocoding with
disambiguation when one place name matches several locations.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional, Union

from .clients.base import UpstreamUnavailable
from .tools import SearchSpecimensParams

DEFAULT_RADIUS_KM = 5.0
FAN_OUT_CAP = 5

STATE_ABBREVIATIONS = {
    "nsw": "New South Wales",
    "qld": "Queensland",
    "vic": "Victoria",
    "tas": "Tasmania",
    "sa": "South Australia",
    "wa": "Western Australia",
    "nt": "Northern Territory",
    "act": "Australian Capital Territory",
}

_COUNTRY_TOKENS = ("australia", "au")


class NoResolutionAvailable(RuntimeError):
    pass


class Direction(enum.Enum):
    VERNACULAR_TO_SCIENTIFIC = "vernacular_to_scientific"
    SCIENTIFIC_TO_VERNACULAR = "scientific_to_vernacular"


@dataclass(frozen=True)
class NameMatch:
    resolved_name: str
    taxon_id: Optional[str] = None
    confidence_rank: int = 0


@dataclass(frozen=True)
class NameResolution:
    input_name: str
    direction: Direction
    matches: tuple = ()

    def __post_init__(self):
        ranks = [m.confidence_rank for m in self.matches]
        if ranks != sorted(ranks):
            raise ValueError("matches must be sorted by confidence_rank")

    @property
    def best(self) -> Optional[NameMatch]:
        return self.matches[0] if self.matches else None


@dataclass(frozen=True)
class ResolvedLocation:
    query_text: str
    latitude: float
    longitude: float
    state_province: Optional[str] = None
    formatted_name: str = ""

    def __post_init__(self):
        if not (-90.0 <= self.latitude <= 90.0):
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not (-180.0 <= self.longitude <= 180.0):
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")


@dataclass(frozen=True)
class SinglePlan:
    location: ResolvedLocation
    radius_km: float


@dataclass(frozen=True)
class FanOutPlan:
    locations: tuple
    radius_km: float
    total_matches: int = 0  # before the cap was applied

    def __post_init__(self):
        if len(self.locations) < 2:
            raise ValueError("fan-out needs at least two locations")
        if self.radius_km <= 0:
            raise ValueError("radius_km must be positive")


@dataclass(frozen=True)
class UnresolvedPlan:
    query_text: str
    diagnostic: str = ""


LocationPlan = Union[SinglePlan, FanOutPlan, UnresolvedPlan]


def expand_state(text: str) -> str:
    """Expand common state abbreviations; pass anything else through."""
    return STATE_ABBREVIATIONS.get(text.strip().lower(), text.strip())


def states_equal(a: Optional[str], b: Optional[str]) -> bool:
    if a is None or b is None:
        return False
    return expand_state(a).lower() == expand_state(b).lower()


def ensure_country(text: str) -> str:
    """Append ", Australia" when the text carries no country token."""
    tokens = [t.strip(" ,.").lower() for t in text.split()]
    if any(t in _COUNTRY_TOKENS for t in tokens):
        return text
    return f"{text}, Australia"


def resolve_name(client, name: str, direction: Direction) -> NameResolution:
    """Look up a name via the name-resolution client.

    An empty match list is a legitimate outcome (unknown name); client
    failure raises UpstreamUnavailable and the caller falls back to the
    original name.
    """
    if not name:
        raise ValueError("name must be non-empty")
    matches = client.resolve(name, direction)
    ordered = tuple(sorted(matches, key=lambda m: (m.confidence_rank, m.resolved_name)))
    return NameResolution(input_name=name, direction=direction, matches=ordered)


def plan_location(geocoder, locality: str, state_hint: Optional[str] = None,
                  default_radius_km: float = DEFAULT_RADIUS_KM,
                  fan_out_cap: int = FAN_OUT_CAP) -> LocationPlan:
    """Geocode a locality into a search plan.

    One match gives a single circle; several matches narrow to the hinted
    state when that pins down exactly one, otherwise fan out over all
    matches (capped). No match, or a geocoder failure, leaves the
    locality unresolved and the caller degrades to a text filter.
    """
    if not locality:
        raise ValueError("locality must be non-empty")
    try:
        matches = list(geocoder.geocode(ensure_country(locality)))
    except UpstreamUnavailable as exc:
        return UnresolvedPlan(query_text=locality, diagnostic=str(exc))

    if not matches:
        return UnresolvedPlan(query_text=locality, diagnostic="no geocoder match")
    if len(matches) == 1:
        return SinglePlan(location=matches[0], radius_km=default_radius_km)

    if state_hint:
        in_state = [m for m in matches if states_equal(m.state_province, state_hint)]
        if len(in_state) == 1:
            return SinglePlan(location=in_state[0], radius_km=default_radius_km)
        if len(in_state) >= 2:
            matches = in_state

    total = len(matches)
    return FanOutPlan(locations=tuple(matches[:fan_out_cap]),
                      radius_km=default_radius_km, total_matches=total)


def retry_with_resolution(original: SearchSpecimensParams,
                          resolution: NameResolution) -> SearchSpecimensParams:
    """Swap a fruitless common name for the best resolved scientific name.

    Every other field of the original parameters is preserved.
    """
    if not resolution.matches:
        raise NoResolutionAvailable(f"no resolution for {resolution.input_name!r}")
    return replace(original, common_name=None,
                   scientific_name=resolution.best.resolved_name)
