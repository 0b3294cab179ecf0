"""Thin adapters for the real upstream services.

These speak the live wire formats (occurrence search, geocoding, name
search, chat completions) behind the same interfaces as the offline
clients. They are excluded from the offline test suite: everything here
needs network access and, for two of the services, API keys.
"""
from __future__ import annotations

import base64
import json
from typing import Optional

import requests

from ..filters import FilterQuery, serialize
from ..records import validate_record
from ..resolvers import Direction, NameMatch, ResolvedLocation
from ..tools import ToolCall
from .base import (ChatTurnRequest, ChatTurnResponse, DecodeError,
                   OccurrenceResponse, UpstreamUnavailable)

DEFAULT_TIMEOUT_S = 60


def _get_with_retry(url: str, params, timeout: int, service: str) -> requests.Response:
    """One retry on transient transport errors; none on HTTP 4xx."""
    last_exc = None
    for attempt in range(2):
        try:
            response = requests.get(url, params=params, timeout=timeout)
        except (requests.ConnectionError, requests.Timeout) as exc:
            last_exc = exc
            continue
        if response.status_code >= 500 and attempt == 0:
            continue
        if response.status_code != 200:
            raise UpstreamUnavailable(service, f"HTTP {response.status_code}")
        return response
    raise UpstreamUnavailable(service, str(last_exc))


class BiocacheOccurrenceClient:
    """GET {base}/occurrences/search with the serialized parameter map."""

    def __init__(self, base_url: str, timeout: int = DEFAULT_TIMEOUT_S):
        self._url = base_url.rstrip("/") + "/occurrences/search"
        self._timeout = timeout

    def search_occurrences(self, query: FilterQuery) -> OccurrenceResponse:
        response = _get_with_retry(self._url, serialize(query),
                                   self._timeout, "occurrence search")
        try:
            data = response.json()
            records = tuple(validate_record(doc)
                            for doc in data.get("occurrences", ()))
            facets = tuple(_decode_facet(f) for f in data.get("facetResults", ()))
            return OccurrenceResponse(total_records=int(data["totalRecords"]),
                                      records=records, facets=facets)
        except (KeyError, ValueError, TypeError) as exc:
            raise DecodeError(f"bad occurrence response: {exc}") from exc


def _decode_facet(raw: dict):
    from ..records import FacetDistribution
    buckets = tuple((item["label"], int(item["count"]))
                    for item in raw.get("fieldResult", ()))
    return FacetDistribution(facet_field=raw.get("fieldName", ""), buckets=buckets)


class GoogleGeocodeClient:
    """GET the geocoding endpoint with address/region/components/key."""

    def __init__(self, base_url: str, api_key: str, timeout: int = DEFAULT_TIMEOUT_S):
        self._url = base_url
        self._key = api_key
        self._timeout = timeout

    def geocode(self, address: str) -> list:
        params = {"address": address, "region": "au",
                  "components": "country:AU", "key": self._key}
        response = _get_with_retry(self._url, params, self._timeout, "geocoder")
        data = response.json()
        status = data.get("status")
        if status == "ZERO_RESULTS":
            return []
        if status != "OK":
            raise UpstreamUnavailable("geocoder", f"status {status}")
        return [self._decode_result(address, item) for item in data["results"]]

    @staticmethod
    def _decode_result(address: str, item: dict) -> ResolvedLocation:
        location = item["geometry"]["location"]
        state = None
        for component in item.get("address_components", ()):
            if "administrative_area_level_1" in component.get("types", ()):
                state = component.get("long_name")
        return ResolvedLocation(query_text=address,
                                latitude=location["lat"], longitude=location["lng"],
                                state_province=state,
                                formatted_name=item.get("formatted_address", address))


class BieNameClient:
    """Name search against the species-search service.

    The response shape is assumed (it is not pinned by any contract we
    control): {"searchResults": {"results": [{"name", "commonNameSingle",
    "guid"}, ...]}}. All shape knowledge stays inside _decode_result.
    """

    def __init__(self, base_url: str, timeout: int = DEFAULT_TIMEOUT_S):
        self._url = base_url.rstrip("/") + "/search.json"
        self._timeout = timeout

    def resolve(self, name: str, direction: Direction) -> list:
        params = {"q": name, "fq": "idxtype:TAXON"}
        response = _get_with_retry(self._url, params, self._timeout, "name search")
        try:
            results = response.json()["searchResults"]["results"]
        except (KeyError, ValueError) as exc:
            raise DecodeError(f"bad name-search response: {exc}") from exc
        matches = []
        for rank, item in enumerate(results):
            match = self._decode_result(item, direction, rank)
            if match is not None:
                matches.append(match)
        return matches

    @staticmethod
    def _decode_result(item: dict, direction: Direction, rank: int) -> Optional[NameMatch]:
        if direction is Direction.VERNACULAR_TO_SCIENTIFIC:
            resolved = item.get("name")
        else:
            resolved = item.get("commonNameSingle")
        if not resolved:
            return None
        return NameMatch(resolved_name=resolved, taxon_id=item.get("guid"),
                         confidence_rank=rank)


class OpenAiChatClient:
    """Chat-completions adapter with tool use and image attachments."""

    def __init__(self, base_url: str, api_key: str, model: str,
                 system_prompt: str = "", timeout: int = DEFAULT_TIMEOUT_S):
        self._url = base_url.rstrip("/") + "/chat/completions"
        self._key = api_key
        self._model = model
        self._system_prompt = system_prompt
        self._timeout = timeout

    def chat(self, request: ChatTurnRequest) -> ChatTurnResponse:
        body = {"model": self._model, "messages": self._wire_messages(request)}
        if request.tools:
            body["tools"] = list(request.tools)
        try:
            response = requests.post(
                self._url, json=body, timeout=self._timeout,
                headers={"Authorization": f"Bearer {self._key}"})
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise UpstreamUnavailable("chat model", str(exc)) from exc
        if response.status_code != 200:
            raise UpstreamUnavailable("chat model", f"HTTP {response.status_code}")
        return self._decode(response.json())

    def _wire_messages(self, request: ChatTurnRequest) -> list:
        wire = []
        if self._system_prompt:
            wire.append({"role": "system", "content": self._system_prompt})
        for message in request.messages:
            if message.role == "user":
                if message.images:
                    content = [{"type": "text", "text": message.text}]
                    for image in message.images:
                        b64 = base64.b64encode(image.data).decode("ascii")
                        content.append({"type": "image_url", "image_url": {
                            "url": f"data:{image.media_type};base64,{b64}"}})
                    wire.append({"role": "user", "content": content})
                else:
                    wire.append({"role": "user", "content": message.text})
            elif message.role == "assistant":
                entry: dict = {"role": "assistant", "content": message.text or None}
                if message.tool_calls:
                    entry["tool_calls"] = [
                        {"id": call.call_id, "type": "function",
                         "function": {"name": call.function_name,
                                      "arguments": call.arguments_text}}
                        for call in message.tool_calls]
                wire.append(entry)
            elif message.role == "tool":
                result = message.tool_result
                wire.append({"role": "tool", "tool_call_id": result.call_id,
                             "content": json.dumps(result.payload, ensure_ascii=False)})
        return wire

    @staticmethod
    def _decode(data: dict) -> ChatTurnResponse:
        try:
            message = data["choices"][0]["message"]
        except (KeyError, IndexError) as exc:
            raise DecodeError(f"bad chat response: {exc}") from exc
        raw_calls = message.get("tool_calls") or ()
        calls = tuple(ToolCall(call_id=c.get("id", f"call_{i}"),
                               function_name=c["function"]["name"],
                               arguments_text=c["function"]["arguments"])
                      for i, c in enumerate(raw_calls))
        return ChatTurnResponse(assistant_text=message.get("content") or None,
                                tool_calls=calls)
