"""Record validation, invariants, and the external-naming round trip."""
import datetime

import pytest
from hypothesis import given
from hypothesis import strategies as st

from collection_explorer.records import (BoundingBox, FacetDistribution,
                                         GeoCircle, InvalidCoordinate,
                                         InvalidYear, MissingRecordId,
                                         SpecimenRecord, YearRange,
                                         haversine_km, to_external,
                                         validate_record)

B2_DOCUMENT = {
    "uuid": "a1b2c3d4-e5f6-7890",
    "scientificName": "Macropus giganteus",
    "vernacularName": "Eastern Grey Kangaroo",
    "decimalLatitude": -36.45,
    "decimalLongitude": 148.26,
    "stateProvince": "New South Wales",
    "year": 1985,
}


class TestValidateRecord:
    def test_external_document_maps_to_domain_fields(self):
        record = validate_record(B2_DOCUMENT)
        assert record.record_id == "a1b2c3d4-e5f6-7890"
        assert record.scientific_name == "Macropus giganteus"
        assert record.vernacular_name == "Eastern Grey Kangaroo"
        assert record.latitude == -36.45
        assert record.longitude == 148.26
        assert record.state_province == "New South Wales"
        assert record.event_year == 1985

    def test_minimal_document_is_valid_without_coordinates(self):
        record = validate_record({"uuid": "x", "scientificName": "Litoria caerulea"})
        assert record.record_id == "x"
        assert record.latitude is None and record.longitude is None
        assert record.has_coordinates is False

    def test_lone_latitude_rejected(self):
        with pytest.raises(InvalidCoordinate):
            validate_record({"uuid": "x", "decimalLatitude": -36.45})

    def test_missing_uuid_rejected(self):
        with pytest.raises(MissingRecordId):
            validate_record({"scientificName": "Litoria caerulea"})

    def test_out_of_range_coordinates_rejected(self):
        with pytest.raises(InvalidCoordinate):
            validate_record({"uuid": "x", "decimalLatitude": -95.0,
                             "decimalLongitude": 150.0})
        with pytest.raises(InvalidCoordinate):
            validate_record({"uuid": "x", "decimalLatitude": -35.0,
                             "decimalLongitude": 181.0})

    def test_non_numeric_coordinate_rejected(self):
        with pytest.raises(InvalidCoordinate):
            validate_record({"uuid": "x", "decimalLatitude": "south",
                             "decimalLongitude": 150.0})

    def test_year_bounds(self):
        with pytest.raises(InvalidYear):
            validate_record({"uuid": "x", "year": 999})
        next_year = datetime.date.today().year + 1
        with pytest.raises(InvalidYear):
            validate_record({"uuid": "x", "year": next_year + 1})
        assert validate_record({"uuid": "x", "year": next_year}).event_year == next_year
        assert validate_record({"uuid": "x", "year": 1000}).event_year == 1000

    def test_integral_float_year_coerced(self):
        assert validate_record({"uuid": "x", "year": 1985.0}).event_year == 1985

    def test_duplicate_image_urls_deduplicated(self):
        record = validate_record({"uuid": "x", "imageUrls": ["a", "b", "a"]})
        assert record.image_urls == ("a", "b")

    def test_unknown_fields_ignored(self):
        record = validate_record({"uuid": "x", "basisOfRecord": "PreservedSpecimen",
                                  "rights": "CC-BY"})
        assert record.record_id == "x"

    def test_missing_resource_uid_defaults(self):
        assert validate_record({"uuid": "x"}).data_resource_uid == "dr368"
        assert validate_record({"uuid": "x"},
                               default_resource_uid="dr999").data_resource_uid == "dr999"

    def test_taxonomy_ranks_collected(self):
        record = validate_record({"uuid": "x", "family": "Petauridae",
                                  "genus": "Petaurus", "kingdom": "Animalia"})
        assert record.taxonomy == {"kingdom": "Animalia", "family": "Petauridae",
                                   "genus": "Petaurus"}


class TestValueTypes:
    def test_year_range_order(self):
        assert YearRange(1980, 1989).end_year == 1989
        with pytest.raises(ValueError):
            YearRange(1990, 1989)

    def test_bounding_box_invariants(self):
        box = BoundingBox(south=-35.0, west=148.0, north=-33.0, east=152.0)
        assert box.contains(-34.0, 150.0)
        assert box.contains(-35.0, 148.0)  # inclusive edge
        assert not box.contains(-32.9, 150.0)
        with pytest.raises(ValueError):
            BoundingBox(south=-33.0, west=148.0, north=-35.0, east=152.0)
        with pytest.raises(ValueError):
            BoundingBox(south=-35.0, west=150.0, north=-33.0, east=-170.0)

    def test_geo_circle_invariants(self):
        with pytest.raises(ValueError):
            GeoCircle(-33.0, 151.0, 0.0)
        with pytest.raises(ValueError):
            GeoCircle(-91.0, 151.0, 5.0)

    def test_facet_distribution_unique_values(self):
        with pytest.raises(ValueError):
            FacetDistribution("stateProvince", (("NSW", 2), ("NSW", 1)))
        with pytest.raises(ValueError):
            FacetDistribution("year", (("1985", -1),))

    def test_record_duplicate_images_rejected(self):
        with pytest.raises(ValueError):
            SpecimenRecord(record_id="x", image_urls=("a", "a"))

    def test_record_empty_resource_uid_rejected(self):
        with pytest.raises(ValueError):
            SpecimenRecord(record_id="x", data_resource_uid="")


class TestHaversine:
    def test_zero_distance(self):
        assert haversine_km(-33.0, 151.0, -33.0, 151.0) == 0.0

    def test_known_distance(self):
        # Sydney <-> Melbourne is roughly 714 km
        d = haversine_km(-33.8688, 151.2093, -37.8136, 144.9631)
        assert 700 < d < 730


_taxonomy_values = st.text(min_size=1, max_size=12)
_records = st.builds(
    SpecimenRecord,
    record_id=st.text(min_size=1, max_size=24).filter(str.strip),
    catalogue_number=st.text(max_size=12),
    scientific_name=st.text(max_size=24),
    vernacular_name=st.one_of(st.none(), st.text(max_size=24)),
    taxonomy=st.dictionaries(
        st.sampled_from(("kingdom", "phylum", "class", "order",
                         "family", "genus", "species")),
        _taxonomy_values, max_size=4),
    latitude=st.none(),
    longitude=st.none(),
    locality=st.one_of(st.none(), st.text(max_size=24)),
    state_province=st.one_of(st.none(), st.text(max_size=24)),
    event_year=st.one_of(st.none(), st.integers(1000, 2026)),
    event_date=st.one_of(st.none(), st.text(max_size=12)),
    collector=st.one_of(st.none(), st.text(max_size=16)),
    image_urls=st.lists(st.text(min_size=1, max_size=16), max_size=3,
                        unique=True).map(tuple),
    data_resource_uid=st.sampled_from(("dr368", "dr100")),
)


@st.composite
def _records_with_coords(draw):
    record = draw(_records)
    if draw(st.booleans()):
        lat = draw(st.floats(min_value=-90, max_value=90, allow_nan=False))
        lon = draw(st.floats(min_value=-180, max_value=180, allow_nan=False))
        return SpecimenRecord(**{**record.__dict__, "latitude": lat, "longitude": lon})
    return record


@given(_records_with_coords())
def test_external_round_trip(record):
    assert validate_record(to_external(record)) == record
