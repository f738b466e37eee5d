"""Policy-link accessibility checks and language-variant discovery.

Every request goes through an injected ``HttpClient`` so the module runs
offline against a scripted stub; ``UrllibClient`` is the live implementation.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from html.parser import HTMLParser
from typing import Callable, Iterable, Mapping, Protocol
from urllib.parse import urljoin, urlsplit, urlunsplit

from .errors import InvalidUrl

DEFAULT_TIMEOUT_MS = 10_000
DEFAULT_CONCURRENCY = 8
DEFAULT_HOST_DELAY_MS = 500
MAX_REDIRECTS = 5
BODY_CAP = 2 * 1024 * 1024
REDIRECT_CODES = frozenset({301, 302, 303, 307, 308})
MAX_LANGUAGE_LINKS = 10

LANGUAGE_NAMES = {
    "en": ("english",),
    "zh": ("chinese", "中文", "简体中文", "繁體中文"),
    "ja": ("japanese", "日本語"),
    "de": ("german", "deutsch"),
    "fr": ("french", "français", "francais"),
    "vi": ("vietnamese", "tiếng việt"),
    "es": ("spanish", "español", "espanol"),
    "ko": ("korean", "한국어"),
}


# transport failures a client may raise
class TransportError(Exception):
    pass


class FetchTimeout(TransportError):
    pass


class DnsError(TransportError):
    pass


@dataclass(frozen=True)
class HttpResponse:
    status: int
    headers: Mapping[str, str] = field(default_factory=dict)
    body: bytes = b""

    def header(self, name: str) -> str | None:
        for k, v in self.headers.items():
            if k.lower() == name.lower():
                return v
        return None


class HttpClient(Protocol):
    def get(self, url: str, timeout_s: float, max_bytes: int) -> HttpResponse:
        """One GET without following redirects. Raises TransportError subclasses."""


class Status(str, Enum):
    Ok = "Ok"
    Code404 = "Code404"
    Code400 = "Code400"
    Code500 = "Code500"
    Code503 = "Code503"
    Code410 = "Code410"
    OtherCode = "OtherCode"
    Timeout = "Timeout"
    DnsFailure = "DnsFailure"


NAMED_CODES = {404: Status.Code404, 400: Status.Code400, 500: Status.Code500, 503: Status.Code503,
               410: Status.Code410}


def classify_code(code: int) -> Status:
    if 200 <= code < 300:
        return Status.Ok
    return NAMED_CODES.get(code, Status.OtherCode)


@dataclass(frozen=True)
class ProbeResult:
    url: str
    status: Status
    elapsed_ms: int
    code: int | None = None
    final_url: str | None = None
    detail: str = ""

    @property
    def label(self) -> str:
        if self.status is Status.OtherCode:
            return f"OtherCode({self.code})"
        return self.status.value

    def to_dict(self) -> dict:
        return {"url": self.url, "status": self.label, "code": self.code, "elapsed_ms": self.elapsed_ms,
                "final_url": self.final_url, "detail": self.detail}


@dataclass(frozen=True)
class ProbeConfig:
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    concurrency: int = DEFAULT_CONCURRENCY
    host_delay_ms: int = DEFAULT_HOST_DELAY_MS
    max_redirects: int = MAX_REDIRECTS
    body_cap: int = BODY_CAP


def validate_url(url: str) -> str:
    parts = urlsplit(url.strip())
    if parts.scheme not in ("http", "https") or not parts.hostname:
        raise InvalidUrl(f"not an http(s) URL: {url!r}")
    return url.strip()


class HostThrottle:
    """Spaces requests to the same host at least ``delay_s`` apart."""

    def __init__(self, delay_s: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.delay_s = delay_s
        self.clock, self.sleep = clock, sleep
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._next: dict[str, float] = {}

    def wait(self, url: str) -> None:
        if self.delay_s <= 0:
            return
        host = (urlsplit(url).hostname or "").lower()
        with self._guard:
            lock = self._locks.setdefault(host, threading.Lock())
        with lock:
            now = self.clock()
            ready = self._next.get(host, now)
            if ready > now:
                self.sleep(ready - now)
                now = self.clock()
            self._next[host] = now + self.delay_s


def _fetch(url: str, client: HttpClient, config: ProbeConfig, clock, throttle: HostThrottle | None):
    """Follow redirects within the total timeout budget; returns (result, response or None)."""
    url = validate_url(url)
    start = clock()
    budget = config.timeout_ms / 1000
    current = url

    def elapsed_ms() -> int:
        return int(round((clock() - start) * 1000))

    def timed_out() -> ProbeResult:
        return ProbeResult(url, Status.Timeout, config.timeout_ms, None, current, "timeout budget exhausted")

    for hop in range(config.max_redirects + 1):
        if throttle is not None:
            throttle.wait(current)
        remaining = budget - (clock() - start)
        if remaining <= 0:
            return timed_out(), None
        try:
            resp = client.get(current, remaining, config.body_cap)
        except FetchTimeout:
            return timed_out(), None
        except DnsError as exc:
            return ProbeResult(url, Status.DnsFailure, min(elapsed_ms(), config.timeout_ms), None, current,
                               str(exc)), None
        except TransportError as exc:
            return ProbeResult(url, Status.OtherCode, min(elapsed_ms(), config.timeout_ms), 0, current,
                               f"transport error: {exc}"), None
        if clock() - start > budget:
            return timed_out(), None
        location = resp.header("Location")
        if resp.status in REDIRECT_CODES and location:
            if hop == config.max_redirects:
                return ProbeResult(url, Status.OtherCode, elapsed_ms(), resp.status, current,
                                   f"more than {config.max_redirects} redirects"), None
            current = urljoin(current, location)
            continue
        status = classify_code(resp.status)
        return ProbeResult(url, status, elapsed_ms(), resp.status, current), resp
    raise AssertionError("unreachable")


def check_link(url: str, timeout_ms: int = DEFAULT_TIMEOUT_MS, client: HttpClient | None = None, *,
               clock: Callable[[], float] = time.monotonic, throttle: HostThrottle | None = None) -> ProbeResult:
    if client is None:
        client = UrllibClient()
    result, _ = _fetch(url, client, ProbeConfig(timeout_ms=timeout_ms), clock, throttle)
    return result


def check_links(urls: Iterable[str], client: HttpClient, config: ProbeConfig = ProbeConfig(), *,
                clock: Callable[[], float] = time.monotonic,
                sleep: Callable[[float], None] = time.sleep) -> dict[str, ProbeResult]:
    """Probe many URLs with a bounded pool and per-host spacing."""
    urls = sorted(set(urls))
    for u in urls:
        validate_url(u)
    throttle = HostThrottle(config.host_delay_ms / 1000, clock, sleep)

    def one(u: str) -> ProbeResult:
        return _fetch(u, client, config, clock, throttle)[0]

    with ThreadPoolExecutor(max_workers=max(1, config.concurrency)) as pool:
        return dict(zip(urls, pool.map(one, urls)))


class _PageParser(HTMLParser):
    SKIP = frozenset({"script", "style", "noscript", "template"})

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.text: list[str] = []
        self.anchors: list[tuple[str, str]] = []
        self._skip = 0
        self._href: str | None = None
        self._anchor_text: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag in self.SKIP:
            self._skip += 1
        elif tag == "a":
            self._href = dict(attrs).get("href")
            self._anchor_text = []
        elif tag in ("p", "br", "div", "li", "h1", "h2", "h3", "h4", "section", "tr"):
            self.text.append("\n\n" if tag != "br" else "\n")

    def handle_endtag(self, tag):
        if tag in self.SKIP and self._skip:
            self._skip -= 1
        elif tag == "a" and self._href is not None:
            self.anchors.append((self._href, " ".join("".join(self._anchor_text).split())))
            self._href = None

    def handle_data(self, data):
        if self._skip:
            return
        self.text.append(data)
        if self._href is not None:
            self._anchor_text.append(data)


def decode_body(resp: HttpResponse) -> str:
    charset = "utf-8"
    ctype = resp.header("Content-Type") or ""
    for part in ctype.split(";")[1:]:
        key, _, value = part.strip().partition("=")
        if key.lower() == "charset" and value:
            charset = value.strip("\"'")
    try:
        return resp.body.decode(charset, "replace")
    except LookupError:
        return resp.body.decode("utf-8", "replace")


def page_text(html: str) -> tuple[str, list[tuple[str, str]]]:
    """Visible text (paragraph breaks kept) and ``(href, anchor text)`` pairs."""
    parser = _PageParser()
    parser.feed(html)
    parser.close()
    lines = [" ".join(line.split()) for line in "".join(parser.text).split("\n")]
    text = "\n".join(lines)
    while "\n\n\n" in text:
        text = text.replace("\n\n\n", "\n\n")
    return text.strip(), parser.anchors


def _is_language_code(segment: str) -> bool:
    head = segment.split("-")[0].split("_")[0]
    return len(head) == 2 and head.isalpha() and head.islower() and len(segment) in (2, 5)


def mutate_language(url: str, lang: str) -> list[str]:
    """URLs with each 2-letter path segment (``en`` / ``en-us``) replaced by ``lang``."""
    parts = urlsplit(url)
    segments = parts.path.split("/")
    out = []
    for i, seg in enumerate(segments):
        if _is_language_code(seg.lower()) and seg.lower().split("-")[0].split("_")[0] != lang:
            mutated = segments[:i] + [lang] + segments[i + 1:]
            out.append(urlunsplit(parts._replace(path="/".join(mutated))))
    return out


def _language_anchor(text: str) -> bool:
    low = text.lower()
    return "language" in low or any(name in low for names in LANGUAGE_NAMES.values() for name in names)


class Coverage(str, Enum):
    Covered = "Covered"
    Missing = "Missing"


def discover_language_variants(url: str, claimed_langs: Iterable[str], client: HttpClient,
                               detector: Callable[[str], str] | None = None, *,
                               config: ProbeConfig = ProbeConfig(), min_words: int = 100,
                               clock: Callable[[], float] = time.monotonic) -> dict[str, Coverage]:
    from .policy import detect_language, segment

    detector = detector or detect_language
    claimed = sorted(set(claimed_langs))
    pages: dict[str, tuple[str, list] | None] = {}

    def visit(u: str):
        if u not in pages:
            result, resp = _fetch(u, client, config, clock, None)
            if result.status is Status.Ok and resp is not None:
                pages[u] = page_text(decode_body(resp))
            else:
                pages[u] = None
        return pages[u]

    def qualifies(page, lang: str) -> bool:
        if page is None:
            return False
        text, _ = page
        return segment(text).word_count >= min_words and detector(text) == lang

    base = visit(validate_url(url))
    candidates = [url]
    if base is not None:
        for href, text in base[1]:
            if len(candidates) > MAX_LANGUAGE_LINKS:
                break
            target = urljoin(url, href)
            if _language_anchor(text) and urlsplit(target).scheme in ("http", "https") and target not in candidates:
                candidates.append(target)

    result = {}
    for lang in claimed:
        urls = candidates + [m for m in mutate_language(url, lang) if m not in candidates]
        result[lang] = Coverage.Covered if any(qualifies(visit(u), lang) for u in urls) else Coverage.Missing
    return result


class UrllibClient:
    """Live HTTP client over urllib, never following redirects itself."""

    user_agent = "vrprivacy-auditor/0.1"

    def get(self, url: str, timeout_s: float, max_bytes: int) -> HttpResponse:
        import socket
        import urllib.error
        import urllib.request

        class _NoRedirect(urllib.request.HTTPRedirectHandler):
            def redirect_request(self, *args, **kwargs):
                return None

        opener = urllib.request.build_opener(_NoRedirect)
        req = urllib.request.Request(url, headers={"User-Agent": self.user_agent})
        try:
            with opener.open(req, timeout=timeout_s) as resp:
                return HttpResponse(resp.status, dict(resp.headers.items()), resp.read(max_bytes))
        except urllib.error.HTTPError as exc:
            return HttpResponse(exc.code, dict(exc.headers.items()) if exc.headers else {}, b"")
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, socket.gaierror):
                raise DnsError(str(exc.reason)) from None
            if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                raise FetchTimeout(str(exc.reason)) from None
            raise TransportError(str(exc.reason)) from None
        except (socket.timeout, TimeoutError) as exc:
            raise FetchTimeout(str(exc)) from None
        except OSError as exc:
            raise TransportError(str(exc)) from None
