"""Runtime configuration, read from TEXTOSHOP_* environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from .backend import MockBackend, RemoteBackend, ResponseCache

DEFAULT_TIMEOUT_MS = 30_000
DEFAULT_RESIZE_VARIANTS = 8


class ConfigError(Exception):
    pass


def _int_env(env: Mapping[str, str], key: str, default: int, minimum: int) -> int:
    raw = env.get(key, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    backend: str = "mock"
    api_key: str = ""
    model: str = ""
    base_url: str = ""
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    resize_variants: int = DEFAULT_RESIZE_VARIANTS
    cache_dir: Optional[Path] = None

    @classmethod
    def from_env(cls, env: Optional[Mapping[str, str]] = None) -> "Settings":
        env = os.environ if env is None else env
        backend = (env.get("TEXTOSHOP_BACKEND") or "mock").strip().lower()
        if backend not in ("mock", "remote"):
            raise ConfigError(
                f"TEXTOSHOP_BACKEND must be mock or remote, got {backend!r}"
            )
        cache_dir = env.get("TEXTOSHOP_CACHE_DIR", "").strip()
        return cls(
            backend=backend,
            api_key=env.get("TEXTOSHOP_API_KEY", "").strip(),
            model=env.get("TEXTOSHOP_MODEL", "").strip(),
            base_url=env.get("TEXTOSHOP_BASE_URL", "").strip(),
            timeout_ms=_int_env(env, "TEXTOSHOP_TIMEOUT_MS", DEFAULT_TIMEOUT_MS, 1),
            resize_variants=_int_env(
                env, "TEXTOSHOP_RESIZE_VARIANTS", DEFAULT_RESIZE_VARIANTS, 1
            ),
            cache_dir=Path(cache_dir) if cache_dir else None,
        )


def build_backend(settings: Settings):
    if settings.backend == "mock":
        return MockBackend()
    missing = [
        name
        for name, value in (
            ("TEXTOSHOP_BASE_URL", settings.base_url),
            ("TEXTOSHOP_MODEL", settings.model),
            ("TEXTOSHOP_API_KEY", settings.api_key),
        )
        if not value
    ]
    if missing:
        raise ConfigError(f"remote backend needs {', '.join(missing)}")
    return RemoteBackend(
        settings.base_url,
        settings.model,
        api_key=settings.api_key,
        timeout_ms=settings.timeout_ms,
        cache=ResponseCache(spill_dir=settings.cache_dir),
    )
