"""Generic rate-limited HTTP fetching with retries and backoff.

The live scrapers this replaces were brittle and site-specific, so the
shipped client is a deliberately generic skeleton: configurable headers,
a retry budget with exponential backoff, and a minimum delay between
requests. Site-specific anti-bot work is out of scope.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field

from ..errors import SourceUnreachableError

logger = logging.getLogger(__name__)

RETRYABLE_STATUS = {403, 408, 425, 429, 500, 502, 503, 504}


def requests_transport(url: str, headers: dict[str, str]) -> tuple[int, bytes]:
    """Default transport: a plain GET via requests."""
    import requests

    try:
        resp = requests.get(url, headers=headers, timeout=30)
    except requests.RequestException as exc:
        raise ConnectionError(str(exc)) from exc
    return resp.status_code, resp.content


@dataclass
class HttpClient:
    """GET with per-request delay, retry budget, and exponential backoff.

    ``transport`` is a callable (url, headers) -> (status, body bytes);
    tests inject fakes, production uses :func:`requests_transport`.
    The rate limit is enforced internally, so concurrent callers still
    observe the configured minimum spacing between requests.
    """

    headers: dict[str, str] = field(default_factory=dict)
    retries: int = 3
    delay_seconds: float = 1.0
    backoff_factor: float = 2.0
    transport: object = requests_transport

    def __post_init__(self):
        self._lock = threading.Lock()
        self._last_request = 0.0

    def _throttle(self):
        with self._lock:
            wait = self._last_request + self.delay_seconds - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()

    def get(self, url: str) -> bytes:
        """Fetch url, retrying transient failures; raises
        SourceUnreachableError once the retry budget is spent."""
        attempts = self.retries + 1
        last_error = None
        for attempt in range(attempts):
            if attempt > 0:
                backoff = self.delay_seconds * self.backoff_factor ** (attempt - 1)
                logger.info("retry %d/%d for %s after %.1fs", attempt, self.retries, url, backoff)
                time.sleep(backoff)
            self._throttle()
            try:
                status, body = self.transport(url, self.headers)
            except ConnectionError as exc:
                last_error = f"connection error: {exc}"
                continue
            if status == 200:
                return body
            last_error = f"HTTP {status}"
            if status not in RETRYABLE_STATUS:
                break
        raise SourceUnreachableError(f"{url}: {last_error} (after {attempts} attempts)")
