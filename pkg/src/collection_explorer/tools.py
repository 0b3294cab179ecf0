"""Callable tools exposed to the language model.

Declares the three tool schemas, validates incoming tool-call arguments
against them, and converts arguments into typed parameter objects.
Validation failures are typed errors that the conversation loop feeds
back to the model as tool results, so it can correct itself and retry.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from typing import Any, Optional, Union

from .records import YearRange

SEARCH_SPECIMENS = "search_specimens"
GET_SPECIMEN_STATISTICS = "get_specimen_statistics"
GET_SPECIMEN_BY_ID = "get_specimen_by_id"
TOOL_NAMES = (SEARCH_SPECIMENS, GET_SPECIMEN_STATISTICS, GET_SPECIMEN_BY_ID)

SEARCH_LIMIT_CAP = 50
DEFAULT_SEARCH_LIMIT = 10
DEFAULT_FACET_FIELDS = ("stateProvince", "year", "family")
DEFAULT_PAYLOAD_BYTE_BUDGET = 32 * 1024


class ToolArgumentError(ValueError):
    """Base class for argument-validation failures."""


class UnknownFunction(ToolArgumentError):
    pass


class ArgumentDecodeError(ToolArgumentError):
    pass


class SchemaViolation(ToolArgumentError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


_TOOL_DEFINITIONS = [
    {
        "type": "function",
        "function": {
            "name": SEARCH_SPECIMENS,
            "description": "Search the OZCAM specimen dataset via ALA Biocache API",
            "parameters": {
                "type": "object",
                "properties": {
                    "scientific_name": {
                        "type": "string",
                        "description": "Scientific name at any taxonomic level",
                    },
                    "common_name": {
                        "type": "string",
                        "description": "Common/vernacular name of the organism",
                    },
                    "state_province": {
                        "type": "string",
                        "description": "Australian state or territory",
                    },
                    "locality": {
                        "type": "string",
                        "description": "Specific location (suburb, city, or region)",
                    },
                    "year_range": {
                        "type": "object",
                        "properties": {
                            "start_year": {"type": "integer"},
                            "end_year": {"type": "integer"},
                        },
                    },
                    "has_image": {
                        "type": "boolean",
                        "description": "Filter by image availability",
                    },
                    "limit": {
                        "type": "integer",
                        "description": "Maximum results to return",
                    },
                },
            },
        },
    },
    {
        "type": "function",
        "function": {
            "name": GET_SPECIMEN_STATISTICS,
            "description": "Return aggregated counts and faceted distributions",
            "parameters": {
                "type": "object",
                "properties": {
                    "scientific_name": {
                        "type": "string",
                        "description": "Scientific name at any taxonomic level",
                    },
                    "common_name": {
                        "type": "string",
                        "description": "Common/vernacular name of the organism",
                    },
                    "include_facets": {
                        "type": "array",
                        "items": {"type": "string"},
                        "description": "Facet fields to aggregate over",
                    },
                },
            },
        },
    },
    {
        "type": "function",
        "function": {
            "name": GET_SPECIMEN_BY_ID,
            "description": "Retrieve detailed specimen information",
            "parameters": {
                "type": "object",
                "properties": {
                    "specimen_id": {
                        "type": "string",
                        "description": "Catalogue number or occurrence identifier",
                    },
                },
                "required": ["specimen_id"],
            },
        },
    },
]


def tool_definitions() -> list:
    """The three tool schema documents, in declaration order.

    Returns fresh copies so callers cannot perturb later calls; output is
    byte-stable across invocations.
    """
    return copy.deepcopy(_TOOL_DEFINITIONS)


@dataclass(frozen=True)
class SearchSpecimensParams:
    scientific_name: Optional[str] = None
    common_name: Optional[str] = None
    state_province: Optional[str] = None
    locality: Optional[str] = None
    year_range: Optional[YearRange] = None
    has_image: Optional[bool] = None
    limit: Optional[int] = None


@dataclass(frozen=True)
class SpecimenStatisticsParams:
    scientific_name: Optional[str] = None
    common_name: Optional[str] = None
    include_facets: Optional[tuple] = None


@dataclass(frozen=True)
class SpecimenByIdParams:
    specimen_id: str


ToolParams = Union[SearchSpecimensParams, SpecimenStatisticsParams, SpecimenByIdParams]


@dataclass(frozen=True)
class ToolCall:
    """One function invocation requested by the model."""

    call_id: str
    function_name: str
    arguments_text: str


@dataclass(frozen=True)
class ToolResult:
    """Structured data handed back to the model for one call."""

    call_id: str
    payload: dict

    @classmethod
    def bounded(cls, call_id: str, payload: dict,
                byte_budget: int = DEFAULT_PAYLOAD_BYTE_BUDGET) -> "ToolResult":
        """Truncate oversize payloads by dropping trailing specimens.

        Records are never split or corrupted; only whole entries drop off
        the end of the specimens list until the payload fits.
        """
        payload = copy.deepcopy(payload)
        dropped = 0
        while (len(cls._encode(payload)) > byte_budget
               and payload.get("specimens")):
            payload["specimens"].pop()
            dropped += 1
        if dropped:
            diagnostics = payload.setdefault("diagnostics", {})
            diagnostics["truncated_specimens"] = dropped
        return cls(call_id=call_id, payload=payload)

    @staticmethod
    def _encode(payload: dict) -> bytes:
        return json.dumps(payload, ensure_ascii=False).encode("utf-8")

    def payload_bytes(self) -> bytes:
        return self._encode(self.payload)


def _require_str(key: str, value: Any) -> str:
    if not isinstance(value, str):
        raise SchemaViolation(key, f"expected string, got {type(value).__name__}")
    return value


def _require_int(key: str, value: Any) -> int:
    # lossless coercion only: 1980.0 is fine, 1980.5 and "1980" are not
    if isinstance(value, bool):
        raise SchemaViolation(key, "expected integer, got boolean")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise SchemaViolation(key, f"expected integer, got {type(value).__name__}")
    return value


def _check_keys(args: dict, allowed: tuple, function_name: str) -> None:
    for key in args:
        if key not in allowed:
            raise SchemaViolation(key, f"unknown key for {function_name}")


def _decode_arguments(call: ToolCall) -> dict:
    try:
        args = json.loads(call.arguments_text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ArgumentDecodeError(f"arguments are not valid JSON: {exc}") from exc
    if not isinstance(args, dict):
        raise ArgumentDecodeError("arguments must decode to an object")
    return args


def _validate_search(args: dict) -> SearchSpecimensParams:
    allowed = ("scientific_name", "common_name", "state_province", "locality",
               "year_range", "has_image", "limit")
    _check_keys(args, allowed, SEARCH_SPECIMENS)
    if not any(args.get(k) is not None for k in allowed):
        raise SchemaViolation("arguments", "at least one search field must be present")

    year_range = None
    if args.get("year_range") is not None:
        yr = args["year_range"]
        if not isinstance(yr, dict):
            raise SchemaViolation("year_range", "expected object")
        _check_keys(yr, ("start_year", "end_year"), "year_range")
        if "start_year" not in yr or "end_year" not in yr:
            raise SchemaViolation("year_range", "needs both start_year and end_year")
        start = _require_int("year_range.start_year", yr["start_year"])
        end = _require_int("year_range.end_year", yr["end_year"])
        if start > end:
            raise SchemaViolation("year_range", f"start_year {start} after end_year {end}")
        year_range = YearRange(start, end)

    limit = None
    if args.get("limit") is not None:
        limit = _require_int("limit", args["limit"])
        if limit < 1:
            raise SchemaViolation("limit", "must be >= 1")
        if limit > SEARCH_LIMIT_CAP:
            raise SchemaViolation("limit", f"exceeds the maximum of {SEARCH_LIMIT_CAP}")

    has_image = args.get("has_image")
    if has_image is not None and not isinstance(has_image, bool):
        raise SchemaViolation("has_image", "expected boolean")

    def opt_str(key):
        return _require_str(key, args[key]) if args.get(key) is not None else None

    return SearchSpecimensParams(
        scientific_name=opt_str("scientific_name"),
        common_name=opt_str("common_name"),
        state_province=opt_str("state_province"),
        locality=opt_str("locality"),
        year_range=year_range,
        has_image=has_image,
        limit=limit,
    )


def _validate_statistics(args: dict, facet_allowlist: tuple) -> SpecimenStatisticsParams:
    allowed = ("scientific_name", "common_name", "include_facets")
    _check_keys(args, allowed, GET_SPECIMEN_STATISTICS)

    include_facets = None
    if args.get("include_facets") is not None:
        raw = args["include_facets"]
        if not isinstance(raw, list):
            raise SchemaViolation("include_facets", "expected array of strings")
        facets = []
        for item in raw:
            name = _require_str("include_facets", item)
            if name not in facet_allowlist:
                raise SchemaViolation("include_facets", f"facet {name!r} not in allowlist")
            if name not in facets:
                facets.append(name)
        include_facets = tuple(facets)

    def opt_str(key):
        return _require_str(key, args[key]) if args.get(key) is not None else None

    return SpecimenStatisticsParams(
        scientific_name=opt_str("scientific_name"),
        common_name=opt_str("common_name"),
        include_facets=include_facets,
    )


def _validate_by_id(args: dict) -> SpecimenByIdParams:
    _check_keys(args, ("specimen_id",), GET_SPECIMEN_BY_ID)
    if "specimen_id" not in args:
        raise SchemaViolation("specimen_id", "required")
    specimen_id = _require_str("specimen_id", args["specimen_id"])
    if not specimen_id:
        raise SchemaViolation("specimen_id", "must be non-empty")
    return SpecimenByIdParams(specimen_id=specimen_id)


def validate_arguments(call: ToolCall,
                       facet_allowlist: tuple = DEFAULT_FACET_FIELDS) -> ToolParams:
    """Decode and check a tool call's arguments, returning typed params.

    Unknown keys are rejected outright rather than ignored: a misspelled
    key silently dropped would lose a filter the user asked for.
    """
    if call.function_name not in TOOL_NAMES:
        raise UnknownFunction(f"no tool named {call.function_name!r}")
    args = _decode_arguments(call)
    if call.function_name == SEARCH_SPECIMENS:
        return _validate_search(args)
    if call.function_name == GET_SPECIMEN_STATISTICS:
        return _validate_statistics(args, facet_allowlist)
    return _validate_by_id(args)


def encode_arguments(params: ToolParams) -> str:
    """Canonical argument rendering; inverse of validate_arguments."""
    if isinstance(params, SearchSpecimensParams):
        args: dict = {}
        for key in ("scientific_name", "common_name", "state_province", "locality"):
            value = getattr(params, key)
            if value is not None:
                args[key] = value
        if params.year_range is not None:
            args["year_range"] = {"start_year": params.year_range.start_year,
                                  "end_year": params.year_range.end_year}
        if params.has_image is not None:
            args["has_image"] = params.has_image
        if params.limit is not None:
            args["limit"] = params.limit
    elif isinstance(params, SpecimenStatisticsParams):
        args = {}
        if params.scientific_name is not None:
            args["scientific_name"] = params.scientific_name
        if params.common_name is not None:
            args["common_name"] = params.common_name
        if params.include_facets is not None:
            args["include_facets"] = list(params.include_facets)
    else:
        args = {"specimen_id": params.specimen_id}
    return json.dumps(args, ensure_ascii=False)


def function_name_for(params: ToolParams) -> str:
    if isinstance(params, SearchSpecimensParams):
        return SEARCH_SPECIMENS
    if isinstance(params, SpecimenStatisticsParams):
        return GET_SPECIMEN_STATISTICS
    return GET_SPECIMEN_BY_ID
