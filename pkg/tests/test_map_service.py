"""Viewport retrieval, co-location grouping, subsampling determinism."""
import pytest

from collection_explorer.clients.fixtures import FixtureStore
from collection_explorer.map_service import (MarkerGroup, ViewportRequest,
                                             group_colocated,
                                             records_in_viewport)
from collection_explorer.records import BoundingBox, SpecimenRecord

AUSTRALIA = BoundingBox(south=-44.0, west=112.0, north=-9.0, east=154.0)


def _record(i, lat, lon, images=0):
    return SpecimenRecord(
        record_id=f"r{i}", catalogue_number=f"X.{i}", latitude=lat, longitude=lon,
        image_urls=tuple(f"https://img/{i}/{k}" for k in range(images)))


def coordinate_bearing(store):
    return [r for r in store.records if r.latitude is not None]


class TestGroupColocated:
    def test_quantised_equality_groups(self):
        groups = group_colocated([_record(1, -33.73100, 151.00400),
                                  _record(2, -33.731004, 151.004004)])
        assert len(groups) == 1
        assert len(groups[0].records) == 2
        assert groups[0].latitude == -33.731
        assert groups[0].longitude == 151.004

    def test_distinct_positions_stay_apart(self):
        groups = group_colocated([_record(1, -33.731, 151.004),
                                  _record(2, -33.732, 151.004),
                                  _record(3, -33.731, 151.005)])
        assert len(groups) == 3
        assert all(len(g.records) == 1 for g in groups)

    def test_partition_property_on_fixture(self, fixture_store):
        records = coordinate_bearing(fixture_store)
        groups = group_colocated(records)
        assert sum(len(g.records) for g in groups) == len(records)
        seen = [r.record_id for g in groups for r in g.records]
        assert len(seen) == len(set(seen))

    def test_orderings(self):
        groups = group_colocated([_record(2, -33.0, 151.0),
                                  _record(1, -33.0, 151.0),
                                  _record(3, -34.0, 150.0)])
        assert [g.latitude for g in groups] == [-34.0, -33.0]
        two = groups[1]
        assert [r.catalogue_number for r in two.records] == ["X.1", "X.2"]

    def test_image_flag(self):
        group = group_colocated([_record(1, -33.0, 151.0, images=0),
                                 _record(2, -33.0, 151.0, images=2)])[0]
        assert group.has_any_image is True
        bare = group_colocated([_record(3, -33.0, 151.0)])[0]
        assert bare.has_any_image is False

    def test_record_without_coordinates_rejected(self):
        with pytest.raises(ValueError):
            group_colocated([SpecimenRecord(record_id="n")])

    def test_empty_group_rejected(self):
        with pytest.raises(ValueError):
            MarkerGroup(latitude=0, longitude=0, records=(), has_any_image=False)


class TestViewport:
    def test_whole_extent_covers_every_coordinate_record(self, fixture_store):
        request = ViewportRequest(bbox=AUSTRALIA, max_markers=2000)
        result = records_in_viewport(request, fixture_store)
        assert not result.truncated
        assert result.record_count == len(coordinate_bearing(fixture_store))

    def test_degenerate_bbox_on_exact_position(self, fixture_store):
        record = coordinate_bearing(fixture_store)[0]
        box = BoundingBox(south=record.latitude, west=record.longitude,
                          north=record.latitude, east=record.longitude)
        result = records_in_viewport(ViewportRequest(bbox=box), fixture_store)
        ids = {r.record_id for g in result.groups for r in g.records}
        assert record.record_id in ids

    def test_images_only_filter(self, fixture_store):
        request = ViewportRequest(bbox=AUSTRALIA, images_only=True,
                                  max_markers=2000)
        result = records_in_viewport(request, fixture_store)
        assert result.groups
        for group in result.groups:
            assert group.has_any_image is True
            assert all(r.image_urls for r in group.records)
        expected = sum(1 for r in coordinate_bearing(fixture_store) if r.image_urls)
        assert result.record_count == expected

    def test_tiling_completeness(self, fixture_store):
        whole = records_in_viewport(
            ViewportRequest(bbox=AUSTRALIA, max_markers=2000), fixture_store)
        whole_ids = {r.record_id for g in whole.groups for r in g.records}

        union = set()
        lat_step = (AUSTRALIA.north - AUSTRALIA.south) / 4
        lon_step = (AUSTRALIA.east - AUSTRALIA.west) / 4
        for i in range(4):
            for j in range(4):
                cell = BoundingBox(
                    south=AUSTRALIA.south + i * lat_step,
                    west=AUSTRALIA.west + j * lon_step,
                    north=AUSTRALIA.south + (i + 1) * lat_step,
                    east=AUSTRALIA.west + (j + 1) * lon_step)
                result = records_in_viewport(
                    ViewportRequest(bbox=cell, max_markers=2000), fixture_store)
                for group in result.groups:
                    for record in group.records:
                        assert cell.contains(record.latitude, record.longitude)
                        union.add(record.record_id)
        assert union == whole_ids

    def test_monotonic_shrinking(self, fixture_store):
        box = BoundingBox(south=-35.0, west=149.0, north=-32.0, east=152.0)
        result = records_in_viewport(
            ViewportRequest(bbox=box, max_markers=2000), fixture_store)
        for group in result.groups:
            for record in group.records:
                assert box.contains(record.latitude, record.longitude)

    def test_subsample_is_deterministic_every_kth(self, fixture_store):
        request = ViewportRequest(bbox=AUSTRALIA, max_markers=10)
        first = records_in_viewport(request, fixture_store)
        second = records_in_viewport(request, fixture_store)
        assert first == second
        assert first.truncated
        assert len(first.groups) <= 10
        all_groups = records_in_viewport(
            ViewportRequest(bbox=AUSTRALIA, max_markers=2000),
            fixture_store).groups
        import math
        step = math.ceil(len(all_groups) / 10)
        assert first.groups == tuple(all_groups[::step])

    def test_request_invariants(self):
        with pytest.raises(ValueError):
            ViewportRequest(bbox=AUSTRALIA, zoom=23)
        with pytest.raises(ValueError):
            ViewportRequest(bbox=AUSTRALIA, max_markers=0)
        with pytest.raises(ValueError):
            ViewportRequest(bbox=AUSTRALIA, max_markers=2001)

    def test_empty_region(self):
        store = FixtureStore(records=(_record(1, -33.0, 151.0),),
                             name_table=(), places=())
        ocean = BoundingBox(south=-60.0, west=90.0, north=-55.0, east=100.0)
        result = records_in_viewport(ViewportRequest(bbox=ocean), store)
        assert result.groups == ()
        assert result.truncated is False
