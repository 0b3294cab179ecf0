"""The conversation engine.

Runs the full query pipeline for each user turn: hand the message and
tool schemas to the model, execute any tool calls it makes (building
filter queries, resolving names and places, querying occurrences),
return results for synthesis, then clean the final text. Tool execution
failures are embedded in tool results so the model can recover; only a
failure of the model upstream itself aborts the turn.
"""
from __future__ import annotations

import enum
import threading
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .clients.base import (Attachment, ChatTurnRequest, Message,
                           UpstreamUnavailable)
from .filters import (ExactPhrase, FilterClause, FilterQuery, Range,
                      build_ala_url, make_query, wildcard_contains)
from .postprocess import postprocess
from .records import GeoCircle
from .resolvers import (Direction, FanOutPlan, SinglePlan, UnresolvedPlan,
                        expand_state, plan_location, resolve_name,
                        retry_with_resolution)
from .tools import (DEFAULT_FACET_FIELDS, DEFAULT_PAYLOAD_BYTE_BUDGET,
                    DEFAULT_SEARCH_LIMIT, SearchSpecimensParams,
                    SpecimenByIdParams, SpecimenStatisticsParams,
                    ToolArgumentError, ToolCall, ToolResult,
                    tool_definitions, validate_arguments)

IMAGE_RESULT_CAP = 5
ATTACHMENT_CAP_BYTES = 8 * 1024 * 1024
TOOL_ROUND_CAP = 4

_IMAGE_SIGNATURES = (
    ("image/png", lambda d: d.startswith(b"\x89PNG\r\n\x1a\n")),
    ("image/jpeg", lambda d: d.startswith(b"\xff\xd8\xff")),
    ("image/webp", lambda d: d[:4] == b"RIFF" and d[8:12] == b"WEBP"),
)


class ToolLoopOverflow(RuntimeError):
    pass


class AttachmentTooLarge(ValueError):
    pass


class UnsupportedFormat(ValueError):
    pass


class SessionBusy(RuntimeError):
    pass


class PipelineStep(enum.IntEnum):
    USER_QUERY = 1
    LLM_REQUEST = 2
    TOOL_CALL = 3
    LOCATION_RESOLUTION = 4
    DATA_RETRIEVAL = 5
    RESULTS_TO_LLM = 6
    RESPONSE_GENERATION = 7
    POSTPROCESS = 8


@dataclass(frozen=True)
class TraceEvent:
    step: PipelineStep
    detail: str = ""
    duration_ms: float = 0.0


class PipelineTrace:
    """Ordered step events for one turn.

    Step indices are strictly increasing: when the tool loop revisits a
    stage (validation retry, taxonomic retry) only the first occurrence
    is kept. Each event's duration is the time since the previous one.
    """

    def __init__(self):
        self.events: list = []
        self._last_step = 0
        self._last_time = time.perf_counter()

    def record(self, step: PipelineStep, detail: str = "") -> None:
        now = time.perf_counter()
        if step <= self._last_step:
            return
        elapsed_ms = (now - self._last_time) * 1000.0 if self.events else 0.0
        self.events.append(TraceEvent(step=step, detail=detail,
                                      duration_ms=max(elapsed_ms, 0.0)))
        self._last_step = step
        self._last_time = now

    def steps(self) -> list:
        return [event.step for event in self.events]

    def as_dicts(self) -> list:
        return [{"step": int(e.step), "name": e.step.name.lower(),
                 "detail": e.detail, "duration_ms": round(e.duration_ms, 3)}
                for e in self.events]


@dataclass
class ChatSession:
    """Append-only message history for one conversation."""

    session_id: str
    messages: list = field(default_factory=list)
    created_at: float = field(default_factory=time.time)

    def __post_init__(self):
        self._lock = threading.Lock()

    def append(self, message: Message) -> None:
        if message.role == "tool":
            known = {call.call_id for m in self.messages for call in m.tool_calls}
            if message.tool_result is None or message.tool_result.call_id not in known:
                raise ValueError("tool message must answer a prior tool call")
        if (message.role == "assistant" and not message.tool_calls
                and self.messages and self.messages[-1].role == "assistant"
                and not self.messages[-1].tool_calls):
            raise ValueError("two assistant replies without a user turn")
        self.messages.append(message)

    def try_acquire(self) -> bool:
        return self._lock.acquire(blocking=False)

    def release(self) -> None:
        self._lock.release()


class TurnResult(NamedTuple):
    assistant_text: str
    trace: PipelineTrace
    session: ChatSession


def summarize_record(record) -> dict:
    """Specimen summary in the tool-payload shape."""
    return {
        "scientific_name": record.scientific_name,
        "common_name": record.vernacular_name,
        "location": {"state": record.state_province},
        "date": {"year": record.event_year},
        "catalogue_number": record.catalogue_number,
        "image_urls": list(record.image_urls),
    }


def full_record_document(record) -> dict:
    return {
        "record_id": record.record_id,
        "catalogue_number": record.catalogue_number,
        "scientific_name": record.scientific_name,
        "common_name": record.vernacular_name,
        "taxonomy": dict(record.taxonomy),
        "latitude": record.latitude,
        "longitude": record.longitude,
        "locality": record.locality,
        "state_province": record.state_province,
        "year": record.event_year,
        "event_date": record.event_date,
        "collector": record.collector,
        "image_urls": list(record.image_urls),
    }


def facets_payload(facets) -> list:
    return [{"field": f.facet_field,
             "buckets": [{"value": v, "count": c} for v, c in f.buckets]}
            for f in facets]


def format_tool_result(response, query: FilterQuery, limit: int,
                       ala_url: Optional[str] = None) -> dict:
    """Restructure an occurrence response into the tool-payload shape."""
    return {
        "total_records": response.total_records,
        "specimens": [summarize_record(r) for r in response.records[:limit]],
        "facets": facets_payload(response.facets),
        "ala_url": ala_url,
    }


def build_search_clauses(params: SearchSpecimensParams) -> list:
    """Non-spatial filter clauses for a specimen search."""
    clauses = []
    if params.scientific_name:
        clauses.append(FilterClause("scientificName", ExactPhrase(params.scientific_name)))
    if params.common_name:
        clauses.append(FilterClause("vernacularName", wildcard_contains(params.common_name)))
    if params.state_province:
        clauses.append(FilterClause("stateProvince",
                                    ExactPhrase(expand_state(params.state_province))))
    if params.year_range:
        clauses.append(FilterClause("year", Range(params.year_range.start_year,
                                                  params.year_range.end_year)))
    if params.has_image is not None:
        clauses.append(FilterClause("multimedia",
                                    ExactPhrase("Image" if params.has_image else "None")))
    return clauses


def build_search_query(params: SearchSpecimensParams, *,
                       spatial: Optional[GeoCircle] = None,
                       locality_fallback: Optional[str] = None,
                       data_resource_uid: str = "dr368",
                       page_size: Optional[int] = None,
                       facet_fields=DEFAULT_FACET_FIELDS) -> FilterQuery:
    """Compose the full filter query for one search location."""
    clauses = build_search_clauses(params)
    if locality_fallback:
        clauses.append(FilterClause("locality", wildcard_contains(locality_fallback)))
    return make_query(clauses, data_resource_uid=data_resource_uid,
                      spatial=spatial,
                      page_size=page_size or params.limit or DEFAULT_SEARCH_LIMIT,
                      facet_fields=facet_fields)


def _merge_facets(responses) -> list:
    merged: dict = {}
    order: list = []
    for response in responses:
        for facet in response.facets:
            if facet.facet_field not in merged:
                merged[facet.facet_field] = {}
                order.append(facet.facet_field)
            counts = merged[facet.facet_field]
            for value, count in facet.buckets:
                counts[value] = counts.get(value, 0) + count
    out = []
    for fieldname in order:
        buckets = sorted(merged[fieldname].items(), key=lambda kv: (-kv[1], kv[0]))
        out.append({"field": fieldname,
                    "buckets": [{"value": v, "count": c} for v, c in buckets]})
    return out


class Orchestrator:
    """Wires the chat model, the resolvers and the occurrence store."""

    def __init__(self, *, occurrence_client, geocode_client, name_client,
                 chat_client, search_ui_base_url: str,
                 data_resource_uid: str = "dr368",
                 default_limit: int = DEFAULT_SEARCH_LIMIT,
                 default_radius_km: float = 5.0, fan_out_cap: int = 5,
                 tool_round_cap: int = TOOL_ROUND_CAP,
                 payload_byte_budget: int = DEFAULT_PAYLOAD_BYTE_BUDGET,
                 facet_allowlist: tuple = DEFAULT_FACET_FIELDS,
                 attachment_cap_bytes: int = ATTACHMENT_CAP_BYTES,
                 known_names: Sequence = ()):
        self._occurrences = occurrence_client
        self._geocoder = geocode_client
        self._names = name_client
        self._chat = chat_client
        self._ui_base = search_ui_base_url
        self._resource_uid = data_resource_uid
        self._default_limit = default_limit
        self._radius_km = default_radius_km
        self._fan_out_cap = fan_out_cap
        self._round_cap = tool_round_cap
        self._byte_budget = payload_byte_budget
        self._facet_allowlist = tuple(facet_allowlist)
        self._attachment_cap = attachment_cap_bytes
        self._known_names = tuple(known_names)

    # -- public pipeline entry points ---------------------------------

    def handle_message(self, session: ChatSession, user_text: str = "",
                       images: Sequence[Attachment] = ()) -> TurnResult:
        """Process one user turn through the tool loop."""
        if not user_text and not images:
            raise ValueError("user_text or images required")
        if not session.try_acquire():
            raise SessionBusy(session.session_id)
        try:
            return self._run_turn(session, user_text, tuple(images))
        finally:
            session.release()

    def analyze_image(self, session: ChatSession, attachments: Sequence[Attachment],
                      user_text: str = "") -> TurnResult:
        """Vision pass-through: describe uploaded images, and when a known
        species is named in the reply, append a records link for it."""
        if not attachments:
            raise ValueError("at least one attachment required")
        for attachment in attachments:
            self.validate_attachment(attachment)
        if not session.try_acquire():
            raise SessionBusy(session.session_id)
        try:
            trace = PipelineTrace()
            trace.record(PipelineStep.USER_QUERY, user_text or "(image upload)")
            base_len = len(session.messages)
            session.append(Message("user", user_text, images=tuple(attachments)))
            trace.record(PipelineStep.LLM_REQUEST)
            try:
                response = self._chat.chat(
                    ChatTurnRequest(tuple(session.messages)))
            except UpstreamUnavailable as exc:
                del session.messages[base_len + 1:]
                return TurnResult(self._apology(exc), trace, session)
            text = response.assistant_text or ""
            trace.record(PipelineStep.RESPONSE_GENERATION)
            link = self._species_link(text)
            if link:
                text = f"{text}\n\nSpecimen records for this species: {link}"
            cleaned = postprocess(text)
            trace.record(PipelineStep.POSTPROCESS)
            session.append(Message("assistant", cleaned))
            return TurnResult(cleaned, trace, session)
        finally:
            session.release()

    def dispatch(self, call: ToolCall, trace: Optional[PipelineTrace] = None) -> ToolResult:
        """Validate and execute one tool call.

        Every failure mode is embedded in the result payload as a
        machine-readable error so the model can retry; nothing escapes
        the tool loop.
        """
        if trace is None:
            trace = PipelineTrace()
        try:
            params = validate_arguments(call, self._facet_allowlist)
        except ToolArgumentError as exc:
            return ToolResult(call.call_id, _error_payload(exc))
        try:
            if isinstance(params, SearchSpecimensParams):
                payload = self._run_search(params, trace)
            elif isinstance(params, SpecimenStatisticsParams):
                payload = self._run_statistics(params, trace)
            else:
                payload = self._run_by_id(params, trace)
        except UpstreamUnavailable as exc:
            payload = _error_payload(exc)
        return ToolResult.bounded(call.call_id, payload, self._byte_budget)

    # -- turn loop -----------------------------------------------------

    def _run_turn(self, session, user_text, images) -> TurnResult:
        trace = PipelineTrace()
        trace.record(PipelineStep.USER_QUERY, user_text[:80])
        base_len = len(session.messages)
        session.append(Message("user", user_text, images=images))
        tools = tuple(tool_definitions())
        rounds = 0
        while True:
            trace.record(PipelineStep.LLM_REQUEST if rounds == 0
                         else PipelineStep.RESULTS_TO_LLM)
            try:
                response = self._chat.chat(
                    ChatTurnRequest(tuple(session.messages), tools))
            except UpstreamUnavailable as exc:
                del session.messages[base_len + 1:]
                return TurnResult(self._apology(exc), trace, session)
            if response.tool_calls:
                rounds += 1
                if rounds > self._round_cap:
                    del session.messages[base_len + 1:]
                    raise ToolLoopOverflow(
                        f"no final answer after {self._round_cap} tool rounds")
                trace.record(PipelineStep.TOOL_CALL,
                             ", ".join(c.function_name for c in response.tool_calls))
                session.append(Message("assistant", response.assistant_text or "",
                                       tool_calls=response.tool_calls))
                for call in response.tool_calls:
                    result = self.dispatch(call, trace)
                    session.append(Message("tool", tool_result=result))
                continue
            trace.record(PipelineStep.RESPONSE_GENERATION)
            cleaned = postprocess(response.assistant_text)
            trace.record(PipelineStep.POSTPROCESS)
            session.append(Message("assistant", cleaned))
            return TurnResult(cleaned, trace, session)

    # -- tool implementations -------------------------------------------

    def _run_search(self, params: SearchSpecimensParams, trace) -> dict:
        limit = params.limit or self._default_limit
        if params.has_image:
            limit = min(limit, IMAGE_RESULT_CAP)
        diagnostics: dict = {}

        plan = None
        if params.locality:
            trace.record(PipelineStep.LOCATION_RESOLUTION, params.locality)
            plan = plan_location(self._geocoder, params.locality,
                                 state_hint=params.state_province,
                                 default_radius_km=self._radius_km,
                                 fan_out_cap=self._fan_out_cap)
            diagnostics["locality"] = _plan_diagnostics(plan, self._fan_out_cap)

        trace.record(PipelineStep.DATA_RETRIEVAL)
        payload = self._execute_search(params, plan, limit)

        if payload["total_records"] == 0 and params.common_name:
            resolution = self._try_resolve(params.common_name, diagnostics)
            if resolution is not None and resolution.matches:
                retried = retry_with_resolution(params, resolution)
                diagnostics["taxonomic_retry"] = {
                    "from_common_name": params.common_name,
                    "to_scientific_name": retried.scientific_name,
                }
                payload = self._execute_search(retried, plan, limit)

        if diagnostics:
            payload.setdefault("diagnostics", {}).update(diagnostics)
        return payload

    def _execute_search(self, params: SearchSpecimensParams, plan, limit: int) -> dict:
        facets = DEFAULT_FACET_FIELDS

        def query_for(spatial=None, fallback=None):
            return build_search_query(params, spatial=spatial,
                                      locality_fallback=fallback,
                                      data_resource_uid=self._resource_uid,
                                      page_size=limit, facet_fields=facets)

        if isinstance(plan, FanOutPlan):
            queries = [query_for(spatial=GeoCircle(loc.latitude, loc.longitude,
                                                   plan.radius_km))
                       for loc in plan.locations]
            responses = [self._occurrences.search_occurrences(q) for q in queries]
            merged, duplicates = _merge_records(responses)
            payload = {
                "total_records": sum(r.total_records for r in responses) - duplicates,
                "specimens": [summarize_record(r) for r in merged[:limit]],
                "facets": _merge_facets(responses),
                "ala_url": build_ala_url(queries[0], self._ui_base),
            }
            return payload

        if isinstance(plan, SinglePlan):
            query = query_for(spatial=GeoCircle(plan.location.latitude,
                                                plan.location.longitude,
                                                plan.radius_km))
        elif isinstance(plan, UnresolvedPlan):
            query = query_for(fallback=plan.query_text)
        else:
            query = query_for()
        response = self._occurrences.search_occurrences(query)
        return format_tool_result(response, query, limit,
                                  build_ala_url(query, self._ui_base))

    def _run_statistics(self, params: SpecimenStatisticsParams, trace) -> dict:
        facets = params.include_facets or DEFAULT_FACET_FIELDS
        diagnostics: dict = {}

        def run(scientific, common):
            clauses = []
            if scientific:
                clauses.append(FilterClause("scientificName", ExactPhrase(scientific)))
            if common:
                clauses.append(FilterClause("vernacularName", wildcard_contains(common)))
            query = make_query(clauses, data_resource_uid=self._resource_uid,
                               page_size=1, facet_fields=facets)
            return self._occurrences.search_occurrences(query), query

        trace.record(PipelineStep.DATA_RETRIEVAL)
        response, query = run(params.scientific_name, params.common_name)

        if response.total_records == 0 and params.common_name:
            resolution = self._try_resolve(params.common_name, diagnostics)
            if resolution is not None and resolution.matches:
                best = resolution.best.resolved_name
                diagnostics["taxonomic_retry"] = {
                    "from_common_name": params.common_name,
                    "to_scientific_name": best,
                }
                response, query = run(best, None)

        payload = {
            "total_records": response.total_records,
            "facets": facets_payload(response.facets),
            "ala_url": build_ala_url(query, self._ui_base),
        }
        if diagnostics:
            payload["diagnostics"] = diagnostics
        return payload

    def _run_by_id(self, params: SpecimenByIdParams, trace) -> dict:
        trace.record(PipelineStep.DATA_RETRIEVAL)
        record, query = self.find_specimen(params.specimen_id)
        if record is None:
            return {"found": False, "total_records": 0,
                    "specimen_id": params.specimen_id,
                    "message": f"no specimen matched {params.specimen_id!r}"}
        return {"found": True, "total_records": 1,
                "specimen": full_record_document(record),
                "ala_url": build_ala_url(query, self._ui_base)}

    def find_specimen(self, specimen_id: str):
        """Catalogue-number match wins over occurrence-id match."""
        for fieldname in ("catalogueNumber", "uuid"):
            query = make_query([FilterClause(fieldname, ExactPhrase(specimen_id))],
                               data_resource_uid=self._resource_uid, page_size=1)
            response = self._occurrences.search_occurrences(query)
            if response.records:
                return response.records[0], query
        return None, None

    # -- helpers ---------------------------------------------------------

    def _try_resolve(self, common_name: str, diagnostics: dict):
        try:
            return resolve_name(self._names, common_name,
                                Direction.VERNACULAR_TO_SCIENTIFIC)
        except UpstreamUnavailable as exc:
            diagnostics["taxonomic_retry_skipped"] = str(exc)
            return None

    def _species_link(self, text: str) -> Optional[str]:
        lowered = text.lower()
        best = None
        for pair in self._known_names:
            for name, fieldname in ((pair.vernacular, "vernacularName"),
                                    (pair.scientific, "scientificName")):
                if name and name.lower() in lowered:
                    if best is None or len(name) > len(best[0]):
                        best = (name, fieldname)
        if best is None:
            return None
        name, fieldname = best
        if fieldname == "scientificName":
            clause = FilterClause(fieldname, ExactPhrase(name))
        else:
            clause = FilterClause(fieldname, wildcard_contains(name))
        query = make_query([clause], data_resource_uid=self._resource_uid)
        return build_ala_url(query, self._ui_base)

    def validate_attachment(self, attachment: Attachment) -> None:
        if len(attachment.data) > self._attachment_cap:
            raise AttachmentTooLarge(
                f"attachment of {len(attachment.data)} bytes exceeds "
                f"{self._attachment_cap}")
        for _, sniff in _IMAGE_SIGNATURES:
            if sniff(attachment.data):
                return
        raise UnsupportedFormat("only PNG, JPEG and WebP images are accepted")

    @staticmethod
    def _apology(exc: UpstreamUnavailable) -> str:
        return ("Sorry - I couldn't reach the data service needed to answer "
                f"that (code: upstream_unavailable, service: {exc.service}). "
                "Please try again in a moment.")


def _merge_records(responses):
    """Concatenate fan-out pages in plan order, deduplicated by record id."""
    merged = []
    seen = set()
    duplicates = 0
    for response in responses:
        for record in response.records:
            if record.record_id in seen:
                duplicates += 1
                continue
            seen.add(record.record_id)
            merged.append(record)
    return merged, duplicates


def _plan_diagnostics(plan, cap: int) -> dict:
    if isinstance(plan, SinglePlan):
        return {"plan": "single",
                "resolved": plan.location.formatted_name,
                "latitude": plan.location.latitude,
                "longitude": plan.location.longitude,
                "radius_km": plan.radius_km}
    if isinstance(plan, FanOutPlan):
        return {"plan": "fan_out",
                "locations": [loc.formatted_name for loc in plan.locations],
                "total_matches": plan.total_matches,
                "cap": cap,
                "radius_km": plan.radius_km}
    return {"plan": "unresolved", "query_text": plan.query_text,
            "detail": plan.diagnostic}


def _error_payload(exc: Exception) -> dict:
    code = {
        "UnknownFunction": "unknown_function",
        "ArgumentDecodeError": "argument_decode_error",
        "SchemaViolation": "schema_violation",
        "UpstreamUnavailable": "upstream_unavailable",
    }.get(type(exc).__name__, "tool_error")
    return {"error": {"code": code, "detail": str(exc)}}
