"""Live adapters exercised against a faked transport: parameter shapes,
response translation, retry policy. No network is touched."""
import json

import pytest
import requests

from collection_explorer.clients import live
from collection_explorer.clients.base import (ChatTurnRequest, Attachment,
                                              Message, UpstreamUnavailable)
from collection_explorer.filters import make_query
from collection_explorer.resolvers import Direction
from collection_explorer.tools import ToolCall, ToolResult


class FakeResponse:
    def __init__(self, status_code=200, body=None):
        self.status_code = status_code
        self._body = body or {}

    def json(self):
        return self._body


class TestBiocacheClient:
    def test_sends_serialized_multimap(self, monkeypatch):
        captured = {}

        def fake_get(url, params=None, timeout=None):
            captured.update(url=url, params=params, timeout=timeout)
            return FakeResponse(body={"totalRecords": 1, "occurrences": [
                {"uuid": "u1", "scientificName": "Litoria caerulea"}]})

        monkeypatch.setattr(live.requests, "get", fake_get)
        client = live.BiocacheOccurrenceClient("https://api.example/ws")
        response = client.search_occurrences(make_query())
        assert captured["url"] == "https://api.example/ws/occurrences/search"
        assert captured["params"]["fq"] == ['dataResourceUid:"dr368"']
        assert captured["timeout"] == 60
        assert response.total_records == 1
        assert response.records[0].record_id == "u1"

    def test_facets_decoded(self, monkeypatch):
        body = {"totalRecords": 0, "occurrences": [], "facetResults": [
            {"fieldName": "stateProvince",
             "fieldResult": [{"label": "Queensland", "count": 3}]}]}
        monkeypatch.setattr(live.requests, "get",
                            lambda *a, **k: FakeResponse(body=body))
        response = live.BiocacheOccurrenceClient("https://x/ws").search_occurrences(
            make_query())
        assert response.facets[0].facet_field == "stateProvince"
        assert response.facets[0].as_dict() == {"Queensland": 3}

    def test_transient_error_retried_once(self, monkeypatch):
        calls = []

        def flaky(url, params=None, timeout=None):
            calls.append(1)
            if len(calls) == 1:
                raise requests.ConnectionError("reset")
            return FakeResponse(body={"totalRecords": 0, "occurrences": []})

        monkeypatch.setattr(live.requests, "get", flaky)
        live.BiocacheOccurrenceClient("https://x/ws").search_occurrences(make_query())
        assert len(calls) == 2

    def test_client_error_not_retried(self, monkeypatch):
        calls = []

        def bad_request(url, params=None, timeout=None):
            calls.append(1)
            return FakeResponse(status_code=400)

        monkeypatch.setattr(live.requests, "get", bad_request)
        with pytest.raises(UpstreamUnavailable):
            live.BiocacheOccurrenceClient("https://x/ws").search_occurrences(
                make_query())
        assert len(calls) == 1


class TestGeocodeClient:
    def test_request_parameters(self, monkeypatch):
        captured = {}

        def fake_get(url, params=None, timeout=None):
            captured.update(url=url, params=params)
            return FakeResponse(body={"status": "OK", "results": [{
                "geometry": {"location": {"lat": -33.731, "lng": 151.004}},
                "formatted_address": "Castle Hill NSW, Australia",
                "address_components": [
                    {"types": ["administrative_area_level_1"],
                     "long_name": "New South Wales"}]}]})

        monkeypatch.setattr(live.requests, "get", fake_get)
        client = live.GoogleGeocodeClient("https://geo.example/json", "KEY")
        matches = client.geocode("Castle Hill, Australia")
        assert captured["params"] == {"address": "Castle Hill, Australia",
                                      "region": "au",
                                      "components": "country:AU", "key": "KEY"}
        assert len(matches) == 1
        assert matches[0].latitude == -33.731
        assert matches[0].state_province == "New South Wales"

    def test_zero_results(self, monkeypatch):
        monkeypatch.setattr(live.requests, "get", lambda *a, **k: FakeResponse(
            body={"status": "ZERO_RESULTS", "results": []}))
        assert live.GoogleGeocodeClient("https://g/j", "K").geocode("Nowhere") == []

    def test_error_status_raises(self, monkeypatch):
        monkeypatch.setattr(live.requests, "get", lambda *a, **k: FakeResponse(
            body={"status": "REQUEST_DENIED"}))
        with pytest.raises(UpstreamUnavailable):
            live.GoogleGeocodeClient("https://g/j", "K").geocode("x")


class TestNameClient:
    def test_translation_isolated(self, monkeypatch):
        body = {"searchResults": {"results": [
            {"name": "Anoplognathus", "commonNameSingle": "Christmas Beetle",
             "guid": "urn:lsid:1"},
            {"name": "Anoplognathus porosus", "guid": "urn:lsid:2"}]}}
        monkeypatch.setattr(live.requests, "get",
                            lambda *a, **k: FakeResponse(body=body))
        client = live.BieNameClient("https://bie.example/ws")
        forward = client.resolve("christmas beetle",
                                 Direction.VERNACULAR_TO_SCIENTIFIC)
        assert [m.resolved_name for m in forward] == \
            ["Anoplognathus", "Anoplognathus porosus"]
        assert forward[0].taxon_id == "urn:lsid:1"
        backward = client.resolve("Anoplognathus",
                                  Direction.SCIENTIFIC_TO_VERNACULAR)
        assert [m.resolved_name for m in backward] == ["Christmas Beetle"]


class TestChatClient:
    def _client(self):
        return live.OpenAiChatClient("https://llm.example/v1", "KEY",
                                     "test-model", system_prompt="Be helpful.")

    def test_wire_message_mapping(self, monkeypatch):
        captured = {}

        def fake_post(url, json=None, timeout=None, headers=None):
            captured.update(url=url, body=json, headers=headers)
            return FakeResponse(body={"choices": [{"message": {
                "content": "All good."}}]})

        monkeypatch.setattr(live.requests, "post", fake_post)
        request = ChatTurnRequest(messages=(
            Message("user", "Show me frogs",
                    images=(Attachment("image/png", b"\x89PNG\r\n\x1a\npayload"),)),
            Message("assistant", "", tool_calls=(
                ToolCall("call_1", "search_specimens", '{"common_name": "frog"}'),)),
            Message("tool", tool_result=ToolResult("call_1", {"total_records": 3})),
        ), tools=({"type": "function", "function": {"name": "search_specimens"}},))
        response = self._client().chat(request)

        body = captured["body"]
        assert body["model"] == "test-model"
        assert body["messages"][0] == {"role": "system", "content": "Be helpful."}
        user = body["messages"][1]
        assert user["content"][0] == {"type": "text", "text": "Show me frogs"}
        assert user["content"][1]["image_url"]["url"].startswith(
            "data:image/png;base64,")
        assistant = body["messages"][2]
        assert assistant["tool_calls"][0]["function"]["name"] == "search_specimens"
        tool = body["messages"][3]
        assert tool == {"role": "tool", "tool_call_id": "call_1",
                        "content": '{"total_records": 3}'}
        assert body["tools"]
        assert captured["headers"]["Authorization"] == "Bearer KEY"
        assert response.assistant_text == "All good."

    def test_tool_call_response_decoded(self, monkeypatch):
        body = {"choices": [{"message": {"content": None, "tool_calls": [
            {"id": "abc", "type": "function", "function": {
                "name": "search_specimens",
                "arguments": '{"common_name": "frog"}'}}]}}]}
        monkeypatch.setattr(live.requests, "post",
                            lambda *a, **k: FakeResponse(body=body))
        response = self._client().chat(ChatTurnRequest((Message("user", "hi"),)))
        assert response.assistant_text is None
        call = response.tool_calls[0]
        assert call.call_id == "abc"
        assert json.loads(call.arguments_text) == {"common_name": "frog"}

    def test_http_error_raises_upstream(self, monkeypatch):
        monkeypatch.setattr(live.requests, "post",
                            lambda *a, **k: FakeResponse(status_code=500))
        with pytest.raises(UpstreamUnavailable):
            self._client().chat(ChatTurnRequest((Message("user", "hi"),)))
