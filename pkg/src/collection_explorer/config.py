"""Service configuration.

Values come from environment variables (prefix ``EXPLORER_``) with an
optional JSON file override (``EXPLORER_CONFIG_FILE``). API keys are
held in plain fields but excluded from ``redacted()``, which is the only
form that may be logged.
"""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

_ENV_PREFIX = "EXPLORER_"
_SECRET_FIELDS = ("llm_api_key", "geocoder_api_key")


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    mode: str = "offline"  # offline | live
    fixture_path: Optional[str] = None
    script_path: Optional[str] = None  # offline chat script
    occurrence_base_url: str = "https://biocache-ws.ala.org.au/ws"
    search_ui_base_url: str = "https://biocache.ala.org.au/occurrences/search"
    geocode_base_url: str = "https://maps.googleapis.com/maps/api/geocode/json"
    name_search_base_url: str = "https://bie-ws.ala.org.au/ws"
    chat_base_url: str = "https://api.openai.com/v1"
    chat_model: str = "gpt-5-mini"
    llm_api_key: Optional[str] = None
    geocoder_api_key: Optional[str] = None
    data_resource_uid: str = "dr368"
    default_limit: int = 10
    default_max_markers: int = 500
    marker_cap: int = 2000
    attachment_cap_bytes: int = 8 * 1024 * 1024
    session_ttl_seconds: float = 3600.0
    tool_round_cap: int = 4
    payload_byte_budget: int = 32 * 1024
    fan_out_cap: int = 5
    default_radius_km: float = 5.0
    rate_limit_per_minute: int = 30
    cors_allow_origins: tuple = ()
    include_trace: bool = False
    static_dir: Optional[str] = None
    extra_facet_fields: tuple = ()

    def __post_init__(self):
        if self.mode not in ("offline", "live"):
            raise ValueError(f"mode must be 'offline' or 'live', got {self.mode!r}")
        if self.mode == "live":
            if not self.llm_api_key or not self.geocoder_api_key:
                raise ValueError("live mode requires llm_api_key and geocoder_api_key")
        elif not self.fixture_path:
            raise ValueError("offline mode requires fixture_path")

    @property
    def facet_allowlist(self) -> tuple:
        return ("stateProvince", "year", "family") + tuple(self.extra_facet_fields)

    def redacted(self) -> dict:
        """Loggable view: secrets replaced, never the raw keys."""
        out = dataclasses.asdict(self)
        for key in _SECRET_FIELDS:
            out[key] = "***" if out[key] else None
        return out


def _parse(name: str, raw: str, current):
    if isinstance(current, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, tuple):
        return tuple(part.strip() for part in raw.split(",") if part.strip())
    return raw


def load_config(environ=None) -> ServiceConfig:
    """Build config from the environment plus an optional file override."""
    environ = os.environ if environ is None else environ
    values: dict = {}
    defaults = ServiceConfig.__dataclass_fields__

    for name, field in defaults.items():
        env_name = _ENV_PREFIX + name.upper()
        if env_name in environ:
            default = field.default if field.default is not dataclasses.MISSING else None
            values[name] = _parse(name, environ[env_name], default)

    override_path = environ.get(_ENV_PREFIX + "CONFIG_FILE")
    if override_path:
        with open(Path(override_path), encoding="utf-8") as fh:
            overrides = json.load(fh)
        for name, value in overrides.items():
            if name not in defaults:
                raise ValueError(f"unknown config key {name!r} in {override_path}")
            if isinstance(value, list):
                value = tuple(value)
            values[name] = value

    return ServiceConfig(**values)
