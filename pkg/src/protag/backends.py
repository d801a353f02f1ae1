"""Completion backends: a generic HTTP chat-completions client and scripted mocks.

A backend turns (prompt, decoding) into raw text. Backends must be safe to
call from multiple threads. The mock strategies answer in the standard output
format by reading the candidate block out of the prompt itself, which makes
whole-pipeline runs reproducible without any model service.
"""

import hashlib
import os
import re
import threading
from abc import ABC, abstractmethod

import httpx

from .errors import BackendError, InputError
from .prompts import Decoding, format_selection

AUTH_TOKEN_ENV = "PROTAG_API_TOKEN"


class CompletionBackend(ABC):
    """Minimal completion interface: prompt + decoding parameters -> text."""

    identity: str = "backend"

    @abstractmethod
    def complete(self, prompt: str, decoding: Decoding) -> str:
        raise NotImplementedError


class HttpBackend(CompletionBackend):
    """Chat-completions style HTTP client.

    POSTs to {base_url}/chat/completions with a single user message. The auth
    token comes from the PROTAG_API_TOKEN environment variable when set.
    HTTP 429/5xx and transport errors are transient (retryable); other
    statuses are hard failures.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.identity = f"http:{model}@{self.base_url}"
        headers = {}
        token = os.environ.get(AUTH_TOKEN_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def complete(self, prompt: str, decoding: Decoding) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": decoding.temperature,
            "max_tokens": decoding.max_output_tokens,
        }
        try:
            response = self._client.post(f"{self.base_url}/chat/completions", json=payload)
        except httpx.HTTPError as exc:
            raise BackendError(f"request failed: {exc}", transient=True) from exc
        if response.status_code == 429 or response.status_code >= 500:
            raise BackendError(
                f"backend returned HTTP {response.status_code}", transient=True
            )
        if response.status_code != 200:
            raise BackendError(
                f"backend returned HTTP {response.status_code}: {response.text[:500]}"
            )
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendError(f"unexpected response shape: {exc}") from exc

    def close(self) -> None:
        self._client.close()


_CANDIDATE_HEADER = "Candidate organizations:"
_NUMBERED = re.compile(r"^\d+\.\s+(.*)$")


def candidates_in_prompt(prompt: str) -> list[str]:
    """Names from the last numbered candidate block in the prompt."""
    lines = prompt.splitlines()
    header_positions = [i for i, ln in enumerate(lines) if ln.strip() == _CANDIDATE_HEADER]
    if not header_positions:
        return []
    names = []
    for ln in lines[header_positions[-1] + 1 :]:
        m = _NUMBERED.match(ln.strip())
        if not m:
            break
        names.append(m.group(1))
    return names


class MockBackend(CompletionBackend):
    """Deterministic scripted backend for tests and desk-scale runs.

    Strategies (the `mock:<strategy>` CLI form):
      first              select the first candidate
      all                select every candidate (over-selector)
      none               select nothing (answers NONE)
      calibrated:R:SEED  first candidate, plus the second on a deterministic
                         pseudo-random draw with rate R (noise around a
                         first-candidate reference policy)
      echo:A|B           always answer the literal names A, B
      garbage            answer without sentinels (forces parse failures)
      flaky:N:STRATEGY   raise a transient error on the first N calls, then
                         behave like STRATEGY
    Every response is a pure function of the prompt, so runs are reproducible
    at any parallelism.
    """

    def __init__(self, strategy: str = "first"):
        self.strategy = strategy
        self.identity = f"mock:{strategy}"
        self.calls = 0
        self._lock = threading.Lock()
        self._fail_remaining = 0
        self._inner = strategy
        if strategy.startswith("flaky:"):
            parts = strategy.split(":", 2)
            if len(parts) != 3:
                raise InputError(f"flaky strategy needs flaky:N:STRATEGY, got {strategy!r}")
            self._fail_remaining = int(parts[1])
            self._inner = parts[2]

    def complete(self, prompt: str, decoding: Decoding) -> str:
        with self._lock:
            self.calls += 1
            if self._fail_remaining > 0:
                self._fail_remaining -= 1
                raise BackendError("scripted transient failure", transient=True)
        return self._respond(self._inner, prompt)

    def _respond(self, strategy: str, prompt: str) -> str:
        names = candidates_in_prompt(prompt)
        if strategy == "first":
            picked = names[:1]
        elif strategy == "all":
            picked = list(names)
        elif strategy == "none":
            picked = []
        elif strategy.startswith("calibrated"):
            picked = self._calibrated(strategy, names, prompt)
        elif strategy.startswith("echo:"):
            picked = [n for n in strategy[len("echo:") :].split("|") if n]
        elif strategy == "garbage":
            return "I think the protagonist might be the first one mentioned."
        else:
            raise InputError(f"unknown mock strategy {strategy!r}")
        label = "no candidate anchors this story" if not picked else "these organizations drive the story"
        return format_selection(picked, f"Scripted selection; {label}.")

    @staticmethod
    def _calibrated(strategy: str, names: list[str], prompt: str) -> list[str]:
        parts = strategy.split(":")
        rate = float(parts[1]) if len(parts) > 1 else 0.1
        seed = int(parts[2]) if len(parts) > 2 else 0
        picked = names[:1]
        if len(names) >= 2:
            digest = hashlib.sha256(f"{seed}:{prompt}".encode("utf-8")).digest()
            draw = int.from_bytes(digest[:8], "big") / 2**64
            if draw < rate:
                picked = names[:2]
        return picked


def make_backend(spec: str, timeout: float = 60.0, model: str = "") -> CompletionBackend:
    """Build a backend from its CLI form: an http(s) URL or mock:<strategy>."""
    if spec.startswith("mock:"):
        return MockBackend(spec[len("mock:") :])
    if spec.startswith("http://") or spec.startswith("https://"):
        if not model:
            raise InputError("an HTTP backend needs --model")
        return HttpBackend(spec, model=model, timeout=timeout)
    raise InputError(f"backend must be an http(s) URL or mock:<strategy>, got {spec!r}")
