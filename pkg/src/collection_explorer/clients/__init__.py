"""Clients for the four upstream services (occurrence search, geocoding,
name resolution, chat), each with a deterministic offline implementation
and a thin live adapter."""

from .base import (  # noqa: F401
    Attachment,
    ChatTurnRequest,
    ChatTurnResponse,
    DecodeError,
    Message,
    OccurrenceResponse,
    UpstreamUnavailable,
)
