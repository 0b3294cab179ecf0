"""Name resolution, geocoding plans, and the zero-result retry rewrite."""
import pytest

from collection_explorer.clients.base import UpstreamUnavailable
from collection_explorer.clients.fixtures import Place
from collection_explorer.clients.offline import (OfflineGeocodeClient,
                                                 OfflineNameClient)
from collection_explorer.records import YearRange
from collection_explorer.resolvers import (Direction, FanOutPlan, NameMatch,
                                           NameResolution,
                                           NoResolutionAvailable, SinglePlan,
                                           UnresolvedPlan, ensure_country,
                                           expand_state, plan_location,
                                           resolve_name, retry_with_resolution,
                                           states_equal)
from collection_explorer.tools import SearchSpecimensParams

TWO_CASTLE_HILLS = (
    Place("Castle Hill", "New South Wales", -33.731, 151.004),
    Place("Castle Hill", "Queensland", -19.2866, 146.7786),
)


class TestStateHandling:
    def test_abbreviations_expand(self):
        assert expand_state("NSW") == "New South Wales"
        assert expand_state("qld") == "Queensland"
        assert expand_state(" act ") == "Australian Capital Territory"

    def test_full_names_pass_through(self):
        assert expand_state("Tasmania") == "Tasmania"
        assert expand_state("Somewhere Else") == "Somewhere Else"

    def test_states_equal_mixes_abbreviations(self):
        assert states_equal("NSW", "new south wales")
        assert not states_equal("NSW", "Queensland")
        assert not states_equal(None, "Queensland")

    def test_ensure_country(self):
        assert ensure_country("Castle Hill") == "Castle Hill, Australia"
        assert ensure_country("Castle Hill, Australia") == "Castle Hill, Australia"
        assert ensure_country("Perth AU") == "Perth AU"


class TestResolveName:
    def test_vernacular_to_scientific(self, fixture_store):
        client = OfflineNameClient(fixture_store.name_table)
        resolution = resolve_name(client, "kangaroo",
                                  Direction.VERNACULAR_TO_SCIENTIFIC)
        assert resolution.matches
        assert resolution.best.resolved_name.startswith("Macropus")

    def test_scientific_to_vernacular_pair(self, fixture_store):
        client = OfflineNameClient(fixture_store.name_table)
        resolution = resolve_name(client, "Macropus giganteus",
                                  Direction.SCIENTIFIC_TO_VERNACULAR)
        assert [m.resolved_name for m in resolution.matches] == \
            ["Eastern Grey Kangaroo"]

    def test_matches_agree_with_direct_table_lookup(self, fixture_store):
        client = OfflineNameClient(fixture_store.name_table)
        query = "sugar glider"
        expected = sorted(
            pair.scientific for pair in fixture_store.name_table
            if query in pair.vernacular.lower() or pair.vernacular.lower() in query)
        resolution = resolve_name(client, query, Direction.VERNACULAR_TO_SCIENTIFIC)
        assert sorted(m.resolved_name for m in resolution.matches) == expected

    def test_unknown_name_gives_empty_matches(self, fixture_store):
        client = OfflineNameClient(fixture_store.name_table)
        resolution = resolve_name(client, "zzzz-not-a-name",
                                  Direction.VERNACULAR_TO_SCIENTIFIC)
        assert resolution.matches == ()

    def test_empty_name_rejected(self, fixture_store):
        with pytest.raises(ValueError):
            resolve_name(OfflineNameClient(fixture_store.name_table), "",
                         Direction.VERNACULAR_TO_SCIENTIFIC)

    def test_exact_match_outranks_containment(self):
        from collection_explorer.clients.fixtures import NamePair
        client = OfflineNameClient((
            NamePair("Glider", "Exactus matchus"),
            NamePair("Greater Glider", "Containus matchus"),
        ))
        resolution = resolve_name(client, "glider",
                                  Direction.VERNACULAR_TO_SCIENTIFIC)
        assert resolution.best.resolved_name == "Exactus matchus"
        assert [m.confidence_rank for m in resolution.matches] == [0, 1]

    def test_resolution_requires_sorted_ranks(self):
        with pytest.raises(ValueError):
            NameResolution("x", Direction.VERNACULAR_TO_SCIENTIFIC,
                           matches=(NameMatch("b", confidence_rank=1),
                                    NameMatch("a", confidence_rank=0)))


class TestPlanLocation:
    def test_state_hint_disambiguates(self):
        geocoder = OfflineGeocodeClient(TWO_CASTLE_HILLS)
        plan = plan_location(geocoder, "Castle Hill",
                             state_hint="New South Wales")
        assert isinstance(plan, SinglePlan)
        assert plan.location.state_province == "New South Wales"
        assert plan.radius_km == 5.0

    def test_abbreviated_hint_disambiguates(self):
        plan = plan_location(OfflineGeocodeClient(TWO_CASTLE_HILLS),
                             "Castle Hill", state_hint="QLD")
        assert isinstance(plan, SinglePlan)
        assert plan.location.state_province == "Queensland"

    def test_no_hint_fans_out(self):
        plan = plan_location(OfflineGeocodeClient(TWO_CASTLE_HILLS), "Castle Hill")
        assert isinstance(plan, FanOutPlan)
        assert [loc.state_province for loc in plan.locations] == \
            ["New South Wales", "Queensland"]
        assert plan.radius_km == 5.0

    def test_single_match_is_single_plan(self, fixture_store):
        plan = plan_location(OfflineGeocodeClient(fixture_store.places),
                             "Castle Hill")
        assert isinstance(plan, SinglePlan)
        assert plan.location.latitude == -33.731
        assert plan.location.longitude == 151.004

    def test_empty_locality_rejected(self):
        with pytest.raises(ValueError):
            plan_location(OfflineGeocodeClient(()), "")

    def test_unknown_place_unresolved(self):
        plan = plan_location(OfflineGeocodeClient(TWO_CASTLE_HILLS), "Atlantis")
        assert isinstance(plan, UnresolvedPlan)
        assert plan.query_text == "Atlantis"

    def test_geocoder_failure_degrades_to_unresolved(self):
        class FailingGeocoder:
            def geocode(self, address):
                raise UpstreamUnavailable("geocoder", "boom")

        plan = plan_location(FailingGeocoder(), "Castle Hill")
        assert isinstance(plan, UnresolvedPlan)
        assert "geocoder" in plan.diagnostic

    def test_fan_out_cap_and_total(self):
        places = tuple(Place("Springfield", state, -30.0 - i, 150.0)
                       for i, state in enumerate((
                           "New South Wales", "Queensland", "Victoria",
                           "Tasmania", "South Australia", "Western Australia",
                           "Northern Territory")))
        plan = plan_location(OfflineGeocodeClient(places), "Springfield",
                             fan_out_cap=5)
        assert isinstance(plan, FanOutPlan)
        assert len(plan.locations) == 5
        assert plan.total_matches == 7

    def test_hint_matching_none_fans_out_over_all(self):
        plan = plan_location(OfflineGeocodeClient(TWO_CASTLE_HILLS),
                             "Castle Hill", state_hint="Victoria")
        assert isinstance(plan, FanOutPlan)
        assert len(plan.locations) == 2

    def test_plan_is_pure(self):
        geocoder = OfflineGeocodeClient(TWO_CASTLE_HILLS)
        first = plan_location(geocoder, "Castle Hill", state_hint="NSW")
        second = plan_location(geocoder, "Castle Hill", state_hint="NSW")
        assert first == second


class TestRetryWithResolution:
    def _resolution(self, *names):
        return NameResolution("christmas beetle",
                              Direction.VERNACULAR_TO_SCIENTIFIC,
                              matches=tuple(NameMatch(n, confidence_rank=i)
                                            for i, n in enumerate(names)))

    def test_swaps_common_for_scientific(self):
        params = SearchSpecimensParams(common_name="christmas beetle")
        retried = retry_with_resolution(params, self._resolution("Anoplognathus"))
        assert retried.common_name is None
        assert retried.scientific_name == "Anoplognathus"

    def test_other_fields_preserved(self):
        params = SearchSpecimensParams(common_name="christmas beetle",
                                       state_province="New South Wales",
                                       year_range=YearRange(2000, 2010),
                                       limit=25)
        retried = retry_with_resolution(params, self._resolution("Anoplognathus"))
        assert retried.year_range == YearRange(2000, 2010)
        assert retried.state_province == "New South Wales"
        assert retried.limit == 25

    def test_empty_matches_raise(self):
        with pytest.raises(NoResolutionAvailable):
            retry_with_resolution(SearchSpecimensParams(common_name="x"),
                                  self._resolution())
