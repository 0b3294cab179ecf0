"""Shared fixtures: the seeded dataset, offline clients, and a deny-all
network guard active for the entire suite."""
from __future__ import annotations

import random
import socket

import pytest

from collection_explorer.clients.fixtures import generate_fixture
from collection_explorer.clients.offline import (OfflineGeocodeClient,
                                                 OfflineNameClient,
                                                 OfflineOccurrenceClient)
from collection_explorer.clients.scripted import ScriptedChatClient
from collection_explorer.filters import (ExactPhrase, FilterClause, Range,
                                         Wildcard, make_query)
from collection_explorer.orchestrator import ChatSession, Orchestrator
from collection_explorer.records import GeoCircle

SEARCH_UI_BASE = "https://biocache.ala.org.au/occurrences/search"


def _deny(*args, **kwargs):
    raise RuntimeError("network egress blocked by test guard")


@pytest.fixture(scope="session", autouse=True)
def network_guard():
    """Deny-all guard: any attempt to open a connection fails loudly."""
    saved = (socket.socket.connect, socket.create_connection, socket.getaddrinfo)
    socket.socket.connect = _deny
    socket.create_connection = _deny
    socket.getaddrinfo = _deny
    yield "active"
    socket.socket.connect, socket.create_connection, socket.getaddrinfo = saved


@pytest.fixture(scope="session")
def fixture_store():
    return generate_fixture(seed=42, count=5000)


@pytest.fixture()
def offline_clients(fixture_store):
    """Fresh clients each test so call counters start at zero."""
    return {
        "occurrence": OfflineOccurrenceClient(fixture_store),
        "geocode": OfflineGeocodeClient(fixture_store.places),
        "names": OfflineNameClient(fixture_store.name_table),
    }


def build_orchestrator(store, steps, *, geocode_places=None, **overrides):
    """Offline orchestrator around a scripted conversation."""
    clients = {
        "occurrence_client": OfflineOccurrenceClient(store),
        "geocode_client": OfflineGeocodeClient(
            geocode_places if geocode_places is not None else store.places),
        "name_client": OfflineNameClient(store.name_table),
        "chat_client": ScriptedChatClient(steps),
        "search_ui_base_url": SEARCH_UI_BASE,
        "known_names": store.name_table,
    }
    clients.update(overrides)
    return Orchestrator(**clients)


def new_session(session_id="s1") -> ChatSession:
    return ChatSession(session_id=session_id)


# ---- seeded random query generation (shared by equivalence tests) ----

_STATES = ("New South Wales", "Queensland", "Victoria", "Tasmania",
           "South Australia", "Western Australia", "Northern Territory",
           "Australian Capital Territory")
_NAME_FRAGMENTS = ("glider", "pigeon", "frog", "kangaroo", "spider", "blue",
                   "tree", "eastern", "red", "seahorse", "snail", "crab",
                   "cockatoo", "monitor", "owl", "zz", "beetle", "jelly")
_SCIENTIFIC = ("Petaurus breviceps", "Macropus giganteus", "Anoplognathus",
               "Litoria caerulea", "Atrax robustus", "Lates calcarifer",
               "Nosuchus fakeus")
_FAMILIES = ("Petauridae", "Papilionidae", "Scincidae", "Atracidae",
             "Syngnathidae", "Nonexistidae")


def random_query(rng: random.Random):
    clauses = []
    if rng.random() < 0.25:
        clauses.append(FilterClause("scientificName",
                                    ExactPhrase(rng.choice(_SCIENTIFIC))))
    if rng.random() < 0.5:
        clauses.append(FilterClause("vernacularName",
                                    Wildcard(f"*{rng.choice(_NAME_FRAGMENTS)}*")))
    if rng.random() < 0.4:
        clauses.append(FilterClause("stateProvince",
                                    ExactPhrase(rng.choice(_STATES))))
    if rng.random() < 0.4:
        lo = rng.randint(1900, 2020)
        clauses.append(FilterClause("year", Range(lo, lo + rng.randint(0, 40))))
    if rng.random() < 0.25:
        clauses.append(FilterClause("multimedia",
                                    ExactPhrase(rng.choice(("Image", "None")))))
    if rng.random() < 0.15:
        clauses.append(FilterClause("family",
                                    ExactPhrase(rng.choice(_FAMILIES))))

    spatial = None
    roll = rng.random()
    if roll < 0.15:
        spatial = GeoCircle(-33.731, 151.004, rng.choice((5.0, 25.0, 100.0)))
    elif roll < 0.3:
        spatial = GeoCircle(round(rng.uniform(-44.0, -10.0), 4),
                            round(rng.uniform(112.0, 154.0), 4),
                            round(rng.uniform(5.0, 900.0), 2))

    facet_pool = ["stateProvince", "year", "family", "collector"]
    rng.shuffle(facet_pool)
    facets = tuple(facet_pool[:rng.randint(0, 3)])

    return make_query(clauses, spatial=spatial,
                      page_size=rng.randint(1, 50),
                      start_index=rng.choice((0, 0, 0, rng.randint(0, 30))),
                      facet_fields=facets)


def assert_responses_equivalent(actual, expected):
    """Total exact, record-id sets exact, facet counts exact."""
    assert actual.total_records == expected.total_records
    actual_ids = [r.record_id for r in actual.records]
    expected_ids = [r.record_id for r in expected.records]
    assert len(actual_ids) == len(expected_ids)
    assert set(actual_ids) == set(expected_ids)
    actual_facets = {f.facet_field: f.as_dict() for f in actual.facets}
    expected_facets = {f.facet_field: f.as_dict() for f in expected.facets}
    assert actual_facets == expected_facets
