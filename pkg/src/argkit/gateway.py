"""Chat-completion access and the prompt protocols built on top of it.

Two backends satisfy the same contract: `HttpBackend` talks to any
OpenAI-compatible endpoint (POST {url}/chat/completions, bearer auth,
reply at choices[0].message.content); `MockBackend` is a network-free
stand-in whose replies are a pure function of (mock_seed, message
contents) via a stable hash, so every transcript is reproducible across
runs and platforms.  The mock recognises which protocol a prompt speaks
by the fixed instruction sentences the shipped templates contain, and a
scripted mode (prompt substring -> canned reply) covers end-to-end tests
that need specific behaviour.

The three protocols:

* base-score elicitation by direct questioning (reply parsed as the
  first decimal literal, percent-aware, clamped to [0,1], one strict
  retry, then a flagged 0.5 default);
* argument generation (strict numbered list of exactly `count` items,
  one retry);
* chat-message classification into attack/support contributions against
  existing arguments (single JSON object reply).

API keys are never logged and never leave the process except in the
Authorization header of the configured endpoint.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
from dataclasses import dataclass, field
from importlib import resources

import httpx

from . import qbaf
from .qbaf import Qbaf

logger = logging.getLogger("argkit.gateway")

REDACTED = "***"
ENV_API_KEY = "LLM_API_KEY"

# instruction sentences the mock keys on; kept in lockstep with prompts/*.txt
SCORE_MARKER = "Reply with only a number between 0 and 1"
LIST_MARKER = "Reply with a numbered list only"
CLASSIFY_MARKER = "Reply with a single JSON object"


class GatewayError(Exception):
    code = "gateway-error"


class BackendConfigError(GatewayError):
    code = "invalid-backend-config"


class NetworkError(GatewayError):
    code = "network-failure"


class AuthError(GatewayError):
    code = "auth-failure"


class RateLimitedError(GatewayError):
    code = "rate-limited"

    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class TimeoutError_(GatewayError):
    code = "timeout"


class MalformedResponseError(GatewayError):
    code = "malformed-response"


class MalformedListError(GatewayError):
    code = "malformed-list"


@dataclass(frozen=True)
class BackendConfig:
    """Connection settings; `kind` picks the realisation."""

    kind: str = "mock"
    endpoint_url: str = ""
    model: str = ""
    api_key: str = ""
    temperature: float = 0.0
    timeout: float = 30.0
    mock_seed: int = 0
    mock_script: tuple[tuple[str, str], ...] = ()
    max_concurrency: int = 4

    def __post_init__(self):
        if self.kind not in ("http", "mock"):
            raise BackendConfigError(f"unknown backend kind {self.kind!r}")
        if self.temperature < 0:
            raise BackendConfigError("temperature must be >= 0")

    def describe(self) -> dict:
        """Loggable / wire-safe view: the key never appears in clear."""
        return {
            "kind": self.kind,
            "endpoint_url": self.endpoint_url,
            "model": self.model,
            "api_key": REDACTED if self.api_key else "",
            "temperature": self.temperature,
            "timeout": self.timeout,
            "mock_seed": self.mock_seed,
        }


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown role {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise ValueError(f"{self.role} message must have content")


@dataclass(frozen=True)
class ChatContribution:
    target: str
    polarity: str
    text: str


@dataclass(frozen=True)
class ElicitedScore:
    value: float
    defaulted: bool = False


class MockBackend:
    """Deterministic stand-in; replies depend only on (seed, contents)."""

    def __init__(self, config: BackendConfig):
        self.config = config
        self._semaphore = threading.Semaphore(config.max_concurrency)

    def complete(self, messages: list[ChatMessage]) -> str:
        if not messages:
            raise ValueError("messages must be non-empty")
        prompt = "\n".join(m.content for m in messages)
        with self._semaphore:
            logger.debug("mock completion seed=%d chars=%d", self.config.mock_seed, len(prompt))
            return self._reply(prompt)

    def _tag(self, prompt: str, salt: str = "") -> str:
        digest = hashlib.blake2b(
            f"{self.config.mock_seed}|{salt}|{prompt}".encode("utf-8"), digest_size=8
        ).hexdigest()
        return digest

    def _unit(self, prompt: str, salt: str = "") -> float:
        h = int(self._tag(prompt, salt), 16)
        return 0.05 + 0.9 * (h % 10_000) / 10_000.0

    def _reply(self, prompt: str) -> str:
        for needle, canned in self.config.mock_script:
            if needle in prompt:
                return canned
        if SCORE_MARKER in prompt:
            return f"{self._unit(prompt):.4f}"
        if LIST_MARKER in prompt:
            m = re.search(r"exactly (\d+) distinct", prompt)
            count = int(m.group(1)) if m else 1
            stance = "challenging" if " attack the target" in prompt else "backing"
            lines = [
                f"{i}. Synthetic point {self._tag(prompt, str(i))} {stance} the statement under discussion."
                for i in range(1, count + 1)
            ]
            return "\n".join(lines)
        if CLASSIFY_MARKER in prompt:
            return json.dumps(
                {"reply": f"Noted; nothing to add. [mock {self._tag(prompt)}]", "contributions": []}
            )
        return f"mock-reply-{self._tag(prompt)}"


class HttpBackend:
    """One OpenAI-compatible chat-completion call per `complete`."""

    def __init__(self, config: BackendConfig, transport: httpx.BaseTransport | None = None):
        api_key = config.api_key or os.environ.get(ENV_API_KEY, "")
        if not (config.endpoint_url and config.model and api_key):
            raise BackendConfigError("http backend requires endpoint_url, model and api_key")
        self.config = config
        self._api_key = api_key
        self._transport = transport
        self._semaphore = threading.Semaphore(config.max_concurrency)

    def complete(self, messages: list[ChatMessage]) -> str:
        if not messages:
            raise ValueError("messages must be non-empty")
        url = self.config.endpoint_url.rstrip("/") + "/chat/completions"
        body = {
            "model": self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": self.config.temperature,
        }
        logger.debug("chat completion endpoint=%s model=%s messages=%d", url, self.config.model, len(messages))
        with self._semaphore:
            try:
                with httpx.Client(transport=self._transport, timeout=self.config.timeout) as client:
                    response = client.post(url, json=body, headers={"Authorization": f"Bearer {self._api_key}"})
            except httpx.TimeoutException as exc:
                raise TimeoutError_(f"request timed out after {self.config.timeout}s") from exc
            except httpx.HTTPError as exc:
                raise NetworkError(f"request failed: {exc.__class__.__name__}") from exc
        if response.status_code in (401, 403):
            raise AuthError(f"authentication rejected (HTTP {response.status_code})")
        if response.status_code == 429:
            retry_after = None
            if "retry-after" in response.headers:
                try:
                    retry_after = float(response.headers["retry-after"])
                except ValueError:
                    pass
            raise RateLimitedError("rate limited (HTTP 429)", retry_after=retry_after)
        if response.status_code >= 400:
            raise NetworkError(f"HTTP {response.status_code} from backend")
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected completion payload: {exc}") from exc
        if not isinstance(content, str):
            raise MalformedResponseError("completion content is not text")
        return content


LlmBackend = MockBackend | HttpBackend


def make_backend(config: BackendConfig) -> LlmBackend:
    if config.kind == "mock":
        return MockBackend(config)
    return HttpBackend(config)


def _load_template(name: str) -> str:
    raw = resources.files("argkit").joinpath(f"prompts/{name}").read_text("utf-8")
    lines = raw.splitlines()
    while lines and lines[0].startswith("#"):
        lines.pop(0)
    return "\n".join(lines).strip() + "\n"


def _fill(template: str, values: dict[str, str]) -> str:
    # plain replacement: templates contain literal JSON braces, so str.format is out
    for key, value in values.items():
        template = template.replace("{" + key + "}", value)
    return template


def _context_block(context: str | None) -> str:
    if not context:
        return ""
    return f"Background documents:\n{context}\n\n"


_SCORE_RE = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)")


def parse_score(reply: str) -> float | None:
    """First decimal literal, percent-aware, clamped to [0,1]; None if absent."""
    m = _SCORE_RE.search(reply)
    if not m:
        return None
    value = float(m.group(0))
    tail = reply[m.end():].lstrip()
    if tail.startswith("%"):
        value /= 100.0
    return min(1.0, max(0.0, value))


def elicit_base_score(
    backend: LlmBackend,
    statement: str,
    context: str | None = None,
    parent: str | None = None,
) -> ElicitedScore:
    """Direct questioning for the intrinsic confidence in one statement."""
    if not statement:
        raise ValueError("statement must be non-empty")
    parent_block = f"The statement responds to: {parent}\n\n" if parent else ""
    prompt = _fill(
        _load_template("elicit_score.txt"),
        {"context": _context_block(context), "parent": parent_block, "statement": statement},
    )
    messages = [ChatMessage("user", prompt)]
    reply = backend.complete(messages)
    score = parse_score(reply)
    if score is None:
        retry = messages + [
            ChatMessage("assistant", reply),
            ChatMessage("user", "That could not be parsed. Reply with only a number between 0 and 1, nothing else."),
        ]
        score = parse_score(backend.complete(retry))
    if score is None:
        return ElicitedScore(0.5, defaulted=True)
    return ElicitedScore(score, defaulted=False)


_LIST_LINE_RE = re.compile(r"^\s*\d+[.)]\s+(.+?)\s*$")


def _parse_numbered_list(reply: str, count: int) -> list[str] | None:
    items = [m.group(1) for line in reply.splitlines() if (m := _LIST_LINE_RE.match(line))]
    if len(items) != count or len(set(items)) != count or not all(items):
        return None
    return items


def generate_arguments(
    backend: LlmBackend,
    target_text: str,
    polarity: str,
    count: int,
    context: str | None = None,
) -> list[str]:
    """Exactly `count` distinct statements opposing or favouring the target."""
    if polarity not in qbaf.POLARITIES:
        raise ValueError(f"unknown polarity {polarity!r}")
    if not 1 <= count <= 4:
        raise ValueError(f"count must be in 1..4, got {count}")
    prompt = _fill(
        _load_template("generate_args.txt"),
        {
            "context": _context_block(context),
            "statement": target_text,
            "polarity": polarity,
            "count": str(count),
        },
    )
    messages = [ChatMessage("user", prompt)]
    reply = backend.complete(messages)
    items = _parse_numbered_list(reply, count)
    if items is None:
        retry = messages + [
            ChatMessage("assistant", reply),
            ChatMessage(
                "user",
                f"That was not the requested format. Reply with a numbered list only: "
                f"exactly {count} distinct statements, one per line, in the form \"1. <statement>\".",
            ),
        ]
        items = _parse_numbered_list(backend.complete(retry), count)
    if items is None:
        raise MalformedListError(f"could not parse {count} statements from the model reply")
    return items


def _arguments_listing(qb: Qbaf, strengths: dict[str, float]) -> str:
    lines = []
    for argument in qb.arguments:
        edge = qb.parent_edge(argument.id)
        relation = "claim" if argument.id == qb.root else f"{edge.polarity}s {edge.target}"
        confidence = strengths.get(argument.id)
        suffix = f" [confidence {confidence:.2f}]" if confidence is not None else ""
        lines.append(f"{argument.id} ({relation}): {argument.text}{suffix}")
    return "\n".join(lines)


def classify_chat_contribution(
    backend: LlmBackend,
    qb: Qbaf,
    strengths: dict[str, float],
    message: str,
) -> tuple[str, list[ChatContribution]]:
    """Turn a chat message into attack/support contributions where it can.

    Contributions naming unknown argument ids are dropped; ones targeting
    arguments already at the depth cap are filtered out and noted in the
    reply.  A reply that is not the requested JSON object degrades to
    plain conversation with no contributions.
    """
    if not message:
        raise ValueError("message must be non-empty")
    report = qbaf.validate(qb)
    if not report.ok:
        raise qbaf.InvariantError(report)
    prompt = _fill(
        _load_template("chat_classify.txt"),
        {"qbaf": _arguments_listing(qb, strengths), "message": message},
    )
    raw = backend.complete([ChatMessage("user", prompt)])

    reply, entries = raw.strip(), []
    start, end = raw.find("{"), raw.rfind("}")
    if start != -1 and end > start:
        try:
            doc = json.loads(raw[start : end + 1])
            if isinstance(doc, dict):
                reply = str(doc.get("reply", "")) or reply
                if isinstance(doc.get("contributions"), list):
                    entries = doc["contributions"]
        except json.JSONDecodeError:
            pass

    contributions: list[ChatContribution] = []
    capped = 0
    for entry in entries:
        if not isinstance(entry, dict):
            continue
        target, polarity, text = entry.get("target"), entry.get("polarity"), entry.get("text")
        if not (isinstance(target, str) and isinstance(text, str) and text):
            continue
        if polarity not in qbaf.POLARITIES or not qb.has_argument(target):
            continue
        if qbaf.depth_of(qb, target) >= qbaf.MAX_DEPTH:
            capped += 1
            continue
        contributions.append(ChatContribution(target=target, polarity=polarity, text=text))
    if capped:
        reply += f" (Note: {capped} suggestion(s) targeted arguments at the depth limit and were not applied.)"
    return reply, contributions
