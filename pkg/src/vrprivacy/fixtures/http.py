"""Scripted HTTP for offline probing: a replayable transcript client and a fake clock.

A transcript maps URL -> response spec::

    {"status": 301, "headers": {"Location": "/b"}, "body": "...", "delay_ms": 0}
    {"error": "dns"} | {"error": "timeout"} | {"error": "connect"}

URLs absent from the transcript answer 404.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

from ..web_probe import DnsError, FetchTimeout, HttpResponse, TransportError


class FakeClock:
    def __init__(self, start: float = 0.0):
        self._now = start
        self._lock = threading.Lock()

    def __call__(self) -> float:
        with self._lock:
            return self._now

    def advance(self, seconds: float) -> None:
        with self._lock:
            self._now += seconds

    sleep = advance


@dataclass
class TranscriptClient:
    transcript: Mapping[str, Mapping]
    clock: FakeClock | None = None
    real_sleep: Callable[[float], None] = time.sleep
    log: list[tuple[float, str]] = field(default_factory=list)
    max_in_flight: int = 0
    _in_flight: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock)

    @classmethod
    def from_file(cls, path: str | Path, **kwargs) -> "TranscriptClient":
        return cls(json.loads(Path(path).read_text("utf-8")), **kwargs)

    def _now(self) -> float:
        return self.clock() if self.clock else time.monotonic()

    def _wait(self, seconds: float) -> None:
        if self.clock:
            self.clock.advance(seconds)
        elif seconds > 0:
            self.real_sleep(seconds)

    def get(self, url: str, timeout_s: float, max_bytes: int) -> HttpResponse:
        with self._lock:
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
            self.log.append((self._now(), url))
        try:
            spec = self.transcript.get(url, {"status": 404})
            delay = spec.get("delay_ms", 0) / 1000
            if spec.get("error") == "timeout" or delay > timeout_s:
                self._wait(timeout_s)
                raise FetchTimeout(f"{url}: no response within {timeout_s:.3f}s")
            self._wait(delay)
            if spec.get("error") == "dns":
                raise DnsError(f"{url}: name does not resolve")
            if spec.get("error"):
                raise TransportError(f"{url}: {spec['error']}")
            body = spec.get("body", "")
            body = body.encode("utf-8") if isinstance(body, str) else bytes(body)
            return HttpResponse(int(spec["status"]), dict(spec.get("headers", {})), body[:max_bytes])
        finally:
            with self._lock:
                self._in_flight -= 1
