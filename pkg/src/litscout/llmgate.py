"""Model backend gateway: prompt bundles, backends, and structured output.

Two backends speak the same interface.  The remote backend posts chat
requests to an HTTP endpoint; the mock backend answers from a script keyed
by a digest of the exact prompt text, which makes every test and fixture
run deterministic and network-free.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Any, Callable, Mapping, Protocol

from litscout.errors import (
    BackendConfigError,
    ExtractionError,
    InvariantError,
    SchemaValidationError,
    StructuredOutputError,
    TransportError,
)

BACKEND_KINDS = ("remote", "mock")


@dataclass(frozen=True)
class Decoding:
    """Decoding parameters forwarded to the backend."""

    temperature: float = 0.0
    max_output_tokens: int = 1024
    seed: int | None = None

    def __post_init__(self):
        if not (isinstance(self.temperature, (int, float)) and self.temperature >= 0):
            raise InvariantError("temperature must be >= 0")
        if not (isinstance(self.max_output_tokens, int) and self.max_output_tokens > 0):
            raise InvariantError("max_output_tokens must be a positive integer")
        if self.seed is not None and not isinstance(self.seed, int):
            raise InvariantError("seed must be None or an integer")


@dataclass(frozen=True)
class PromptBundle:
    """A complete, ready-to-send prompt."""

    system: str
    user: str
    decoding: Decoding = field(default_factory=Decoding)

    def __post_init__(self):
        if not isinstance(self.system, str) or not isinstance(self.user, str):
            raise InvariantError("system and user prompts must be strings")
        if not isinstance(self.decoding, Decoding):
            raise InvariantError("decoding must be a Decoding value")

    def digest(self) -> str:
        return prompt_digest(self.system, self.user)


@dataclass(frozen=True)
class BackendConfig:
    kind: str
    model_name: str
    endpoint: str | None = None
    timeout: float = 60.0
    max_retries: int = 3

    def __post_init__(self):
        if self.kind not in BACKEND_KINDS:
            raise InvariantError(f"backend kind must be one of {BACKEND_KINDS}")
        if not isinstance(self.model_name, str) or self.model_name == "":
            raise InvariantError("model_name must be non-empty")
        if self.kind == "remote" and not self.endpoint:
            raise InvariantError("a remote backend needs an endpoint")
        if not (isinstance(self.timeout, (int, float)) and self.timeout > 0):
            raise InvariantError("timeout must be positive")
        if not (isinstance(self.max_retries, int) and 1 <= self.max_retries <= 5):
            raise InvariantError("max_retries must be an integer in [1, 5]")


class Backend(Protocol):
    max_retries: int

    def complete(self, bundle: PromptBundle) -> str: ...


def prompt_digest(system: str, user: str) -> str:
    """Stable key for a prompt: SHA-256 over system and user text."""
    payload = system.encode("utf-8") + b"\x00" + user.encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


class MockBackend:
    """Deterministic backend answering from a digest-keyed script.

    The script maps :func:`prompt_digest` keys to raw response strings.
    A ``__default__`` entry answers any prompt without its own entry;
    with neither, completion fails so that fixtures stay explicit.
    """

    def __init__(self, script: Mapping[str, str], *, model_name: str = "mock", max_retries: int = 3):
        self.script = dict(script)
        self.model_name = model_name
        self.max_retries = max_retries
        self.calls: list[str] = []

    @classmethod
    def from_file(cls, path, **kwargs) -> "MockBackend":
        with open(path, encoding="utf-8") as handle:
            script = json.load(handle)
        if not isinstance(script, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in script.items()
        ):
            raise BackendConfigError(f"mock script {path} must map digest strings to response strings")
        return cls(script, **kwargs)

    def complete(self, bundle: PromptBundle) -> str:
        digest = bundle.digest()
        self.calls.append(digest)
        if digest in self.script:
            return self.script[digest]
        if "__default__" in self.script:
            return self.script["__default__"]
        raise BackendConfigError(f"mock script has no entry for digest {digest}")


def _requests_transport(endpoint: str, payload: dict, timeout: float, headers: dict) -> str:
    import requests

    response = requests.post(endpoint, json=payload, headers=headers, timeout=timeout)
    response.raise_for_status()
    return response.text


class RemoteBackend:
    """Chat-completions client over HTTP.

    Transport failures (connection errors, timeouts, bad status, unusable
    response bodies) are retried up to ``config.max_retries`` total
    attempts, then surfaced as :class:`TransportError`.
    """

    def __init__(
        self,
        config: BackendConfig,
        *,
        api_key: str | None = None,
        transport: Callable[[str, dict, float, dict], str] | None = None,
    ):
        if config.kind != "remote":
            raise BackendConfigError("RemoteBackend needs a config with kind='remote'")
        self.config = config
        self.api_key = api_key
        self.max_retries = config.max_retries
        self._transport = transport or _requests_transport

    def _payload(self, bundle: PromptBundle) -> dict:
        payload: dict[str, Any] = {
            "model": self.config.model_name,
            "messages": [
                {"role": "system", "content": bundle.system},
                {"role": "user", "content": bundle.user},
            ],
            "temperature": bundle.decoding.temperature,
            "max_tokens": bundle.decoding.max_output_tokens,
        }
        if bundle.decoding.seed is not None:
            payload["seed"] = bundle.decoding.seed
        return payload

    def complete(self, bundle: PromptBundle) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = self._payload(bundle)
        last_error: Exception | None = None
        for _ in range(self.config.max_retries):
            try:
                body = self._transport(self.config.endpoint, payload, self.config.timeout, headers)
                data = json.loads(body)
                return data["choices"][0]["message"]["content"]
            except Exception as exc:  # noqa: BLE001 - every failure mode is retryable
                last_error = exc
        raise TransportError(
            f"backend request failed after {self.config.max_retries} attempts: {last_error}",
            attempts=self.config.max_retries,
        )


def create_backend(
    config: BackendConfig,
    *,
    script_path: str | None = None,
    api_key: str | None = None,
    transport: Callable | None = None,
) -> Backend:
    """Build a backend from its config.

    For mocks the script file comes from ``script_path`` or, failing that,
    ``config.endpoint``.
    """
    if config.kind == "mock":
        path = script_path or config.endpoint
        if not path:
            raise BackendConfigError("a mock backend needs a script file path")
        return MockBackend.from_file(path, model_name=config.model_name, max_retries=config.max_retries)
    return RemoteBackend(config, api_key=api_key, transport=transport)


def extract_structured(raw: str) -> Any:
    """Extract the first balanced top-level JSON object from model output.

    Tolerates markdown fences and surrounding prose; string contents are
    tracked so braces inside them never confuse the scan.  Raises
    :class:`ExtractionError` when no parseable object exists.
    """
    if not isinstance(raw, str):
        raise ExtractionError("model output is not text", raw=repr(raw))
    start = raw.find("{")
    while start != -1:
        end = _balanced_end(raw, start)
        if end is not None:
            try:
                return json.loads(raw[start : end + 1])
            except json.JSONDecodeError:
                pass
        start = raw.find("{", start + 1)
    raise ExtractionError("no balanced JSON object in model output", raw=raw)


def _balanced_end(text: str, start: int) -> int | None:
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i
    return None


_REPAIR_HEADER = (
    "Your previous response was not valid. Fix the following issues and "
    "respond again with a single JSON object only:"
)


def repair_bundle(bundle: PromptBundle, violations: list[str]) -> PromptBundle:
    """Append a repair instruction naming each violated constraint."""
    lines = "\n".join(f"- {v}" for v in violations)
    return replace(bundle, user=f"{bundle.user}\n\n{_REPAIR_HEADER}\n{lines}")


@dataclass(frozen=True)
class GenerationResult:
    value: Any
    attempts: int
    raw: str


def generate_with_schema(
    bundle: PromptBundle,
    backend: Backend,
    schema_check: Callable[[Any], Any],
    *,
    max_retries: int | None = None,
) -> GenerationResult:
    """Run a completion until ``schema_check`` accepts the extracted JSON.

    ``schema_check`` either returns the validated (possibly converted)
    value or raises :class:`SchemaValidationError` listing every
    violation.  Each retry re-issues the original bundle with a repair
    instruction naming the latest violations appended to the user prompt.
    After ``max_retries`` total attempts (default: the backend's setting)
    a :class:`StructuredOutputError` carries all attempts' violations.
    """
    limit = max_retries if max_retries is not None else getattr(backend, "max_retries", 3)
    if not (isinstance(limit, int) and 1 <= limit <= 5):
        raise InvariantError("max_retries must be an integer in [1, 5]")
    attempt_violations: list[list[str]] = []
    current = bundle
    for attempt in range(1, limit + 1):
        raw = backend.complete(current)
        try:
            value = extract_structured(raw)
            checked = schema_check(value)
            return GenerationResult(value=checked, attempts=attempt, raw=raw)
        except ExtractionError as exc:
            violations = [str(exc)]
        except SchemaValidationError as exc:
            violations = list(exc.violations)
        attempt_violations.append(violations)
        current = repair_bundle(bundle, violations)
    raise StructuredOutputError(attempt_violations)


_PLACEHOLDER = re.compile(r"\{([a-z][a-z0-9_]*)\}")


def load_template(name: str) -> str:
    """Read a prompt template shipped with the package."""
    text = resources.files("litscout.prompts").joinpath(name).read_text(encoding="utf-8")
    return text.rstrip("\n")


def render_template(template: str, values: Mapping[str, str]) -> str:
    """Substitute ``{name}`` placeholders; unknown names are an error.

    Only lowercase identifier placeholders are recognized, so JSON
    skeletons inside templates pass through untouched.
    """

    def substitute(match: re.Match) -> str:
        name = match.group(1)
        if name not in values:
            raise InvariantError(f"template placeholder {{{name}}} has no value")
        return values[name]

    return _PLACEHOLDER.sub(substitute, template)


def unresolved_placeholders(text: str) -> list[str]:
    """Placeholder names still present in a rendered prompt."""
    return _PLACEHOLDER.findall(text)
