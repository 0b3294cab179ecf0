"""Scripted stand-in for the chat-model client.

A script is an ordered list of steps, one per expected model call. Every
step carries a pattern that must appear in the latest user message, and
either a fixed text reply, tool calls to emit, or a synthesis template.
Templates can only interpolate fields of the latest tool payload, which
is what keeps scripted replies grounded by construction.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Optional

from ..tools import ToolCall
from .base import ChatTurnRequest, ChatTurnResponse


class ScriptExhausted(RuntimeError):
    """The stub was asked for more turns than the script provides."""


class ScriptMismatch(RuntimeError):
    """The conversation diverged from what the script expects."""


@dataclass(frozen=True)
class ScriptStep:
    """One expected model call and its canned response.

    Exactly one of ``text``, ``tool_calls`` or ``template`` must be set.
    ``tool_calls`` is a list of (function_name, arguments dict).
    """

    match: str = ""
    text: Optional[str] = None
    tool_calls: tuple = ()
    template: Optional[str] = None

    def __post_init__(self):
        provided = sum([self.text is not None, bool(self.tool_calls),
                        self.template is not None])
        if provided != 1:
            raise ValueError("step needs exactly one of text/tool_calls/template")


def _template_context(payload: dict) -> dict:
    """Derive the placeholder values a template may interpolate."""
    context = dict(payload)
    specimens = payload.get("specimens") or []
    years = sorted(s["date"]["year"] for s in specimens
                   if isinstance(s.get("date"), dict)
                   and s["date"].get("year") is not None)
    if years:
        context["min_year"] = years[0]
        context["max_year"] = years[-1]
    names = []
    for s in specimens:
        common, scientific = s.get("common_name"), s.get("scientific_name")
        if common and scientific:
            label = f"{common}s ({scientific})"
            if label not in names:
                names.append(label)
    context["species_list"] = ", ".join(names[:3])
    if specimens:
        context["first_scientific_name"] = specimens[0].get("scientific_name")
        context["first_common_name"] = specimens[0].get("common_name")
    return context


class ScriptedChatClient:
    """Replays a script; turn consumption is serialised per client."""

    def __init__(self, steps):
        self._steps = tuple(steps)
        self._next = 0
        self._lock = threading.Lock()

    @property
    def call_count(self) -> int:
        return self._next

    def chat(self, request: ChatTurnRequest) -> ChatTurnResponse:
        with self._lock:
            if self._next >= len(self._steps):
                raise ScriptExhausted(
                    f"script has {len(self._steps)} steps, turn {self._next + 1} requested")
            step = self._steps[self._next]
            self._next += 1

        user_text = self._latest_user_text(request)
        if step.match and step.match.lower() not in user_text.lower():
            raise ScriptMismatch(
                f"expected user text matching {step.match!r}, got {user_text!r}")

        if step.text is not None:
            return ChatTurnResponse(assistant_text=step.text)
        if step.tool_calls:
            calls = tuple(
                ToolCall(call_id=f"call_{self._next - 1}_{i}",
                         function_name=name,
                         arguments_text=json.dumps(args, ensure_ascii=False))
                for i, (name, args) in enumerate(step.tool_calls))
            return ChatTurnResponse(tool_calls=calls)
        payload = self._latest_tool_payload(request)
        if payload is None:
            raise ScriptMismatch("template step but no tool result in the request")
        text = step.template.format(**_template_context(payload))
        return ChatTurnResponse(assistant_text=text)

    @staticmethod
    def _latest_user_text(request: ChatTurnRequest) -> str:
        for message in reversed(request.messages):
            if message.role == "user":
                return message.text
        return ""

    @staticmethod
    def _latest_tool_payload(request: ChatTurnRequest) -> Optional[dict]:
        for message in reversed(request.messages):
            if message.role == "tool" and message.tool_result is not None:
                return message.tool_result.payload
        return None
