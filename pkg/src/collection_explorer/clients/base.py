"""Shared client-facing types and the interfaces the orchestrator uses.

The conversation engine and map service depend only on the protocols in
this module, so live and offline adapters are interchangeable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, runtime_checkable

from ..records import FacetDistribution, SpecimenRecord
from ..tools import ToolCall, ToolResult


class UpstreamUnavailable(RuntimeError):
    """An external service could not be reached or answered abnormally."""

    def __init__(self, service: str, detail: str = ""):
        super().__init__(f"{service} unavailable{': ' + detail if detail else ''}")
        self.service = service


class DecodeError(RuntimeError):
    """An upstream response could not be decoded into domain types."""


@dataclass(frozen=True)
class OccurrenceResponse:
    total_records: int
    records: tuple = ()
    facets: tuple = ()

    def __post_init__(self):
        if self.total_records < 0:
            raise ValueError("total_records must be non-negative")
        if self.total_records < len(self.records):
            raise ValueError("total_records below returned record count")


@dataclass(frozen=True)
class Attachment:
    """One user-uploaded image."""

    media_type: str
    data: bytes


@dataclass(frozen=True)
class Message:
    """One chat turn: user text/images, assistant text or tool calls, or
    a tool result."""

    role: str  # "user" | "assistant" | "tool"
    text: str = ""
    images: tuple = ()
    tool_calls: tuple = ()
    tool_result: Optional[ToolResult] = None


@dataclass(frozen=True)
class ChatTurnRequest:
    messages: tuple
    tools: tuple = ()

    def __post_init__(self):
        if not self.messages:
            raise ValueError("chat request needs at least one message")


@dataclass(frozen=True)
class ChatTurnResponse:
    assistant_text: Optional[str] = None
    tool_calls: tuple = ()

    def __post_init__(self):
        if not self.assistant_text and not self.tool_calls:
            raise ValueError("response must carry text or tool calls")


@runtime_checkable
class OccurrenceClient(Protocol):
    def search_occurrences(self, query) -> OccurrenceResponse: ...


@runtime_checkable
class GeocodeClient(Protocol):
    def geocode(self, address: str) -> list: ...


@runtime_checkable
class NameClient(Protocol):
    def resolve(self, name: str, direction) -> list: ...


@runtime_checkable
class ChatClient(Protocol):
    def chat(self, request: ChatTurnRequest) -> ChatTurnResponse: ...
