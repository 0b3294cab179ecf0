"""HTTP surface: chat, viewport markers, record lookup, health.

The app factory wires the configured mode's clients into the
orchestrator and map service. Offline mode is fully hermetic: every
endpoint works against the fixture store with zero network egress; the
chat endpoint additionally needs a scripted conversation unless a chat
client is injected.
"""
from __future__ import annotations

import base64
import binascii
import json
import threading
import time
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .clients.base import Attachment
from .clients.fixtures import load_fixture
from .clients.offline import (OfflineGeocodeClient, OfflineNameClient,
                              OfflineOccurrenceClient)
from .clients.scripted import ScriptedChatClient, ScriptStep
from .config import ServiceConfig
from .map_service import ViewportRequest, records_in_viewport
from .orchestrator import (AttachmentTooLarge, ChatSession, Orchestrator,
                           SessionBusy, ToolLoopOverflow, UnsupportedFormat,
                           full_record_document)
from .records import BoundingBox

_IMAGE_SNIFFS = (
    ("image/png", lambda d: d.startswith(b"\x89PNG\r\n\x1a\n")),
    ("image/jpeg", lambda d: d.startswith(b"\xff\xd8\xff")),
    ("image/webp", lambda d: d[:4] == b"RIFF" and d[8:12] == b"WEBP"),
)


class SessionStore:
    """In-memory sessions with idle-TTL eviction."""

    def __init__(self, ttl_seconds: float, clock=time.monotonic):
        self._ttl = ttl_seconds
        self._clock = clock
        self._sessions: dict = {}
        self._lock = threading.Lock()

    def get_or_create(self, session_id: Optional[str] = None) -> ChatSession:
        with self._lock:
            self._sweep()
            if session_id and session_id in self._sessions:
                session, _ = self._sessions[session_id]
                self._sessions[session_id] = (session, self._clock())
                return session
            session = ChatSession(session_id=session_id or uuid.uuid4().hex)
            self._sessions[session.session_id] = (session, self._clock())
            return session

    def _sweep(self) -> None:
        now = self._clock()
        expired = [sid for sid, (_, touched) in self._sessions.items()
                   if now - touched > self._ttl]
        for sid in expired:
            del self._sessions[sid]

    def __len__(self):
        with self._lock:
            self._sweep()
            return len(self._sessions)


class RateLimiter:
    """Token bucket per client key."""

    def __init__(self, per_minute: int, clock=time.monotonic):
        self._rate = per_minute
        self._clock = clock
        self._buckets: dict = {}
        self._lock = threading.Lock()

    def allow(self, key: str) -> bool:
        if self._rate <= 0:
            return True
        with self._lock:
            now = self._clock()
            tokens, last = self._buckets.get(key, (float(self._rate), now))
            tokens = min(float(self._rate), tokens + (now - last) * self._rate / 60.0)
            if tokens < 1.0:
                self._buckets[key] = (tokens, now)
                return False
            self._buckets[key] = (tokens - 1.0, now)
            return True


class ChatRequestBody(BaseModel):
    session_id: Optional[str] = None
    text: Optional[str] = None
    images: Optional[list] = None


def load_script(path) -> ScriptedChatClient:
    """Read a chat script file (a JSON list of step objects)."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    steps = []
    for entry in raw:
        steps.append(ScriptStep(
            match=entry.get("match", ""),
            text=entry.get("text"),
            template=entry.get("template"),
            tool_calls=tuple((name, args) for name, args in entry.get("tool_calls", ()))))
    return ScriptedChatClient(steps)


def _decode_image(raw: str) -> bytes:
    if raw.startswith("data:"):
        _, _, raw = raw.partition(",")
    try:
        return base64.b64decode(raw, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ValueError(f"invalid base64 image payload: {exc}") from exc


def _sniff_media_type(data: bytes) -> str:
    for media_type, sniff in _IMAGE_SNIFFS:
        if sniff(data):
            return media_type
    return "application/octet-stream"


def _marker_payload(result) -> dict:
    groups = []
    for group in result.groups:
        groups.append({
            "latitude": group.latitude,
            "longitude": group.longitude,
            "has_any_image": group.has_any_image,
            "records": [{
                "record_id": r.record_id,
                "catalogue_number": r.catalogue_number,
                "scientific_name": r.scientific_name,
                "common_name": r.vernacular_name,
                "state_province": r.state_province,
                "locality": r.locality,
                "year": r.event_year,
                "event_date": r.event_date,
                "collector": r.collector,
                "image_urls": list(r.image_urls),
            } for r in group.records],
        })
    return {"groups": groups, "truncated": result.truncated,
            "total_groups": len(groups)}


def _error(status: int, code: str, detail: str = "") -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": code, "detail": detail})


def create_app(config: ServiceConfig, *, store=None, occurrence_client=None,
               geocode_client=None, name_client=None, chat_client=None,
               clock=time.monotonic) -> FastAPI:
    """Build the service; injected clients take precedence over config."""
    if store is None and config.fixture_path:
        store = load_fixture(config.fixture_path)

    if config.mode == "offline":
        occurrence_client = occurrence_client or OfflineOccurrenceClient(store)
        geocode_client = geocode_client or OfflineGeocodeClient(store.places)
        name_client = name_client or OfflineNameClient(store.name_table)
        if chat_client is None and config.script_path:
            chat_client = load_script(config.script_path)
    else:
        # imported lazily so offline deployments never load the live stack
        from .clients import live
        occurrence_client = occurrence_client or live.BiocacheOccurrenceClient(
            config.occurrence_base_url)
        geocode_client = geocode_client or live.GoogleGeocodeClient(
            config.geocode_base_url, config.geocoder_api_key)
        name_client = name_client or live.BieNameClient(config.name_search_base_url)
        if chat_client is None:
            from importlib import resources
            prompt = resources.files("collection_explorer.data").joinpath(
                "system_prompt.txt").read_text(encoding="utf-8")
            chat_client = live.OpenAiChatClient(
                config.chat_base_url, config.llm_api_key, config.chat_model,
                system_prompt=prompt)

    orchestrator = Orchestrator(
        occurrence_client=occurrence_client,
        geocode_client=geocode_client,
        name_client=name_client,
        chat_client=chat_client,
        search_ui_base_url=config.search_ui_base_url,
        data_resource_uid=config.data_resource_uid,
        default_limit=config.default_limit,
        default_radius_km=config.default_radius_km,
        fan_out_cap=config.fan_out_cap,
        tool_round_cap=config.tool_round_cap,
        payload_byte_budget=config.payload_byte_budget,
        facet_allowlist=config.facet_allowlist,
        attachment_cap_bytes=config.attachment_cap_bytes,
        known_names=store.name_table if store else (),
    )

    app = FastAPI(title="collection-explorer", docs_url=None, redoc_url=None)
    app.state.config = config
    app.state.store = store
    app.state.orchestrator = orchestrator
    app.state.sessions = SessionStore(config.session_ttl_seconds, clock=clock)
    app.state.rate_limiter = RateLimiter(config.rate_limit_per_minute, clock=clock)

    if config.cors_allow_origins:
        app.add_middleware(CORSMiddleware,
                           allow_origins=list(config.cors_allow_origins),
                           allow_methods=["GET", "POST"],
                           allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return _error(400, "malformed_body", str(exc))

    @app.get("/api/health")
    def health():
        return {"status": "ok", "mode": config.mode,
                "record_count": len(store.records) if store else 0}

    @app.post("/api/chat")
    def chat(body: ChatRequestBody, request: Request):
        client_key = request.client.host if request.client else "unknown"
        if not app.state.rate_limiter.allow(client_key):
            return _error(429, "rate_limited", "too many chat requests")
        if chat_client is None:
            return _error(502, "chat_unconfigured",
                          "no chat model is configured in this mode")
        text = body.text or ""
        raw_images = body.images or []
        if not text and not raw_images:
            return _error(400, "malformed_body", "text or images required")

        attachments = []
        for raw in raw_images:
            if not isinstance(raw, str):
                return _error(400, "malformed_body", "images must be base64 strings")
            try:
                data = _decode_image(raw)
            except ValueError as exc:
                return _error(400, "malformed_body", str(exc))
            attachments.append(Attachment(media_type=_sniff_media_type(data),
                                          data=data))
        for attachment in attachments:
            try:
                orchestrator.validate_attachment(attachment)
            except AttachmentTooLarge as exc:
                return _error(413, "attachment_too_large", str(exc))
            except UnsupportedFormat as exc:
                return _error(400, "unsupported_format", str(exc))

        session = app.state.sessions.get_or_create(body.session_id)
        try:
            if attachments:
                result = orchestrator.analyze_image(session, attachments, text)
            else:
                result = orchestrator.handle_message(session, text)
        except SessionBusy:
            return _error(429, "session_busy", "a message is already being processed")
        except ToolLoopOverflow as exc:
            return _error(502, "tool_loop_overflow", str(exc))

        payload = {"session_id": session.session_id, "reply": result.assistant_text}
        if config.include_trace:
            payload["trace"] = result.trace.as_dicts()
        return payload

    @app.get("/api/specimens")
    def specimens(bbox: str, zoom: int = 10, images_only: bool = False,
                  max: Optional[int] = None):
        if store is None:
            return _error(503, "map_unavailable", "no fixture store loaded")
        parts = bbox.split(",")
        if len(parts) != 4:
            return _error(400, "malformed_bbox", "expected bbox=S,W,N,E")
        try:
            south, west, north, east = (float(p) for p in parts)
            box = BoundingBox(south=south, west=west, north=north, east=east)
            request_ = ViewportRequest(
                bbox=box, zoom=zoom, images_only=images_only,
                max_markers=min(max or config.default_max_markers, config.marker_cap))
        except ValueError as exc:
            return _error(400, "malformed_bbox", str(exc))
        return _marker_payload(records_in_viewport(request_, store))

    @app.get("/api/specimens/{specimen_id}")
    def specimen_by_id(specimen_id: str):
        record, _ = orchestrator.find_specimen(specimen_id)
        if record is None:
            return _error(404, "not_found", f"no specimen matched {specimen_id!r}")
        return full_record_document(record)

    static_dir = config.static_dir
    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
