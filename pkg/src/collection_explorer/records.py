"""Domain types for specimen occurrence records.

Everything here is an immutable value object, safe to share between
threads. External documents (as returned by the occurrence web service)
use a different field naming; the mapping between the two lives in this
module and nowhere else.
"""
from __future__ import annotations

import datetime as _dt
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

EARTH_RADIUS_KM = 6371.0088

TAXON_RANKS = ("kingdom", "phylum", "class", "order", "family", "genus", "species")

# Frozen external-name -> domain-attribute table. Taxonomic ranks map
# into the ``taxonomy`` dict and are handled separately.
EXTERNAL_TO_FIELD = {
    "uuid": "record_id",
    "catalogueNumber": "catalogue_number",
    "scientificName": "scientific_name",
    "vernacularName": "vernacular_name",
    "decimalLatitude": "latitude",
    "decimalLongitude": "longitude",
    "locality": "locality",
    "stateProvince": "state_province",
    "year": "event_year",
    "eventDate": "event_date",
    "collector": "collector",
    "imageUrls": "image_urls",
    "dataResourceUid": "data_resource_uid",
}

FIELD_TO_EXTERNAL = {v: k for k, v in EXTERNAL_TO_FIELD.items()}

MIN_EVENT_YEAR = 1000


class RecordValidationError(ValueError):
    """Base class for typed record-validation failures."""


class MissingRecordId(RecordValidationError):
    pass


class InvalidCoordinate(RecordValidationError):
    pass


class InvalidYear(RecordValidationError):
    pass


@dataclass(frozen=True)
class YearRange:
    start_year: int
    end_year: int

    def __post_init__(self):
        if self.start_year > self.end_year:
            raise ValueError(f"start_year {self.start_year} > end_year {self.end_year}")


@dataclass(frozen=True)
class BoundingBox:
    """Geographic bounds in decimal degrees. Antimeridian-crossing boxes
    (west > east) are rejected."""

    south: float
    west: float
    north: float
    east: float

    def __post_init__(self):
        if self.south > self.north:
            raise ValueError(f"south {self.south} > north {self.north}")
        if not (-90.0 <= self.south <= 90.0 and -90.0 <= self.north <= 90.0):
            raise ValueError("latitude bounds outside [-90, 90]")
        if not (-180.0 <= self.west <= 180.0 and -180.0 <= self.east <= 180.0):
            raise ValueError("longitude bounds outside [-180, 180]")
        if self.west > self.east:
            raise ValueError("antimeridian-crossing boxes are not supported")

    def contains(self, latitude: float, longitude: float) -> bool:
        """Inclusive on all four edges."""
        return (self.south <= latitude <= self.north
                and self.west <= longitude <= self.east)


@dataclass(frozen=True)
class GeoCircle:
    latitude: float
    longitude: float
    radius_km: float

    def __post_init__(self):
        if self.radius_km <= 0:
            raise ValueError(f"radius_km must be positive, got {self.radius_km}")
        if not (-90.0 <= self.latitude <= 90.0):
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not (-180.0 <= self.longitude <= 180.0):
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")


@dataclass(frozen=True)
class FacetDistribution:
    """Aggregated value counts for one field (e.g. records per state)."""

    facet_field: str
    buckets: tuple  # of (value: str, count: int), ordered

    def __post_init__(self):
        values = [v for v, _ in self.buckets]
        if len(values) != len(set(values)):
            raise ValueError(f"duplicate bucket values in facet {self.facet_field}")
        for value, count in self.buckets:
            if count < 0:
                raise ValueError(f"negative count for {self.facet_field}:{value}")

    def as_dict(self) -> dict:
        return {value: count for value, count in self.buckets}


@dataclass(frozen=True)
class SpecimenRecord:
    """One digitised specimen occurrence."""

    record_id: str
    catalogue_number: str = ""
    scientific_name: str = ""
    vernacular_name: Optional[str] = None
    taxonomy: Mapping[str, str] = field(default_factory=dict)
    latitude: Optional[float] = None
    longitude: Optional[float] = None
    locality: Optional[str] = None
    state_province: Optional[str] = None
    event_year: Optional[int] = None
    event_date: Optional[str] = None
    collector: Optional[str] = None
    image_urls: tuple = ()
    data_resource_uid: str = "dr368"

    def __post_init__(self):
        if not self.record_id:
            raise MissingRecordId("record has no occurrence identifier")
        if (self.latitude is None) != (self.longitude is None):
            raise InvalidCoordinate("latitude and longitude must be present together")
        if self.latitude is not None:
            if not (-90.0 <= self.latitude <= 90.0):
                raise InvalidCoordinate(f"latitude {self.latitude} outside [-90, 90]")
            if not (-180.0 <= self.longitude <= 180.0):
                raise InvalidCoordinate(f"longitude {self.longitude} outside [-180, 180]")
        if len(set(self.image_urls)) != len(self.image_urls):
            raise ValueError("image_urls contains duplicates")
        if not self.data_resource_uid:
            raise ValueError("data_resource_uid must be non-empty")

    @property
    def has_coordinates(self) -> bool:
        return self.latitude is not None

    @property
    def has_images(self) -> bool:
        return bool(self.image_urls)


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance over the mean-radius sphere."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(a))


def _as_float(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise InvalidCoordinate(f"{key} is not numeric: {value!r}")
    try:
        return float(value)
    except ValueError:
        raise InvalidCoordinate(f"{key} is not numeric: {value!r}") from None


def _as_year(value: Any) -> int:
    if isinstance(value, bool):
        raise InvalidYear(f"year is not an integer: {value!r}")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, str):
        try:
            value = int(value)
        except ValueError:
            raise InvalidYear(f"year is not an integer: {value!r}") from None
    if not isinstance(value, int):
        raise InvalidYear(f"year is not an integer: {value!r}")
    upper = _dt.date.today().year + 1
    if not (MIN_EVENT_YEAR <= value <= upper):
        raise InvalidYear(f"year {value} outside [{MIN_EVENT_YEAR}, {upper}]")
    return value


def validate_record(candidate: Mapping[str, Any],
                    default_resource_uid: str = "dr368") -> SpecimenRecord:
    """Normalise an external key-value document into a SpecimenRecord.

    Unknown keys are ignored. Missing ``dataResourceUid`` falls back to
    ``default_resource_uid``. Raises MissingRecordId, InvalidCoordinate
    or InvalidYear; never anything untyped for a well-formed document.
    """
    record_id = candidate.get("uuid")
    if not record_id or not isinstance(record_id, str):
        raise MissingRecordId("document has no 'uuid' field")

    lat = candidate.get("decimalLatitude")
    lon = candidate.get("decimalLongitude")
    if (lat is None) != (lon is None):
        raise InvalidCoordinate("exactly one of decimalLatitude/decimalLongitude present")
    latitude = _as_float(lat, "decimalLatitude") if lat is not None else None
    longitude = _as_float(lon, "decimalLongitude") if lon is not None else None

    year = candidate.get("year")
    event_year = _as_year(year) if year is not None else None

    taxonomy = {}
    for rank in TAXON_RANKS:
        value = candidate.get(rank)
        if value is not None:
            taxonomy[rank] = str(value)

    raw_urls = candidate.get("imageUrls") or ()
    image_urls = []
    for url in raw_urls:
        if url not in image_urls:
            image_urls.append(str(url))

    def _opt_str(key):
        value = candidate.get(key)
        return str(value) if value is not None else None

    return SpecimenRecord(
        record_id=record_id,
        catalogue_number=_opt_str("catalogueNumber") or "",
        scientific_name=_opt_str("scientificName") or "",
        vernacular_name=_opt_str("vernacularName"),
        taxonomy=taxonomy,
        latitude=latitude,
        longitude=longitude,
        locality=_opt_str("locality"),
        state_province=_opt_str("stateProvince"),
        event_year=event_year,
        event_date=_opt_str("eventDate"),
        collector=_opt_str("collector"),
        image_urls=tuple(image_urls),
        data_resource_uid=_opt_str("dataResourceUid") or default_resource_uid,
    )


def to_external(record: SpecimenRecord) -> dict:
    """Render a record back into the external field naming.

    Inverse of validate_record: re-validating the result yields an equal
    record. Fields that are None or empty are omitted, except identifiers.
    """
    doc: dict = {"uuid": record.record_id,
                 "dataResourceUid": record.data_resource_uid}
    if record.catalogue_number:
        doc["catalogueNumber"] = record.catalogue_number
    if record.scientific_name:
        doc["scientificName"] = record.scientific_name
    if record.vernacular_name is not None:
        doc["vernacularName"] = record.vernacular_name
    for rank in TAXON_RANKS:
        if rank in record.taxonomy:
            doc[rank] = record.taxonomy[rank]
    if record.latitude is not None:
        doc["decimalLatitude"] = record.latitude
        doc["decimalLongitude"] = record.longitude
    if record.locality is not None:
        doc["locality"] = record.locality
    if record.state_province is not None:
        doc["stateProvince"] = record.state_province
    if record.event_year is not None:
        doc["year"] = record.event_year
    if record.event_date is not None:
        doc["eventDate"] = record.event_date
    if record.collector is not None:
        doc["collector"] = record.collector
    if record.image_urls:
        doc["imageUrls"] = list(record.image_urls)
    return doc
