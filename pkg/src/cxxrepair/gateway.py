"""Chat-completion client for the five pipeline model roles, with record/replay fixtures.

Live and record modes talk to an OpenAI-style chat-completion endpoint; replay
mode answers purely from a content-addressed fixture store and never touches
the network, which makes every pipeline built on top of it bit-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import requests

from cxxrepair.errors import GatewayError, ReplayMissError, TransportError

logger = logging.getLogger(__name__)

ENDPOINT_ENV_VAR = "CXXREPAIR_ENDPOINT"
TOKEN_ENV_VAR = "CXXREPAIR_API_TOKEN"


class ModelRole(str, Enum):
    AUGMENTER = "augmenter"
    GENERATOR = "generator"
    VALIDATOR_JUDGE = "validator_judge"
    SEMANTIC_JUDGE = "semantic_judge"
    ACTOR = "actor"


class GatewayMode(str, Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"


# Placeholders each role's prompt template must expose.
ROLE_BINDINGS: dict[ModelRole, frozenset[str]] = {
    ModelRole.AUGMENTER: frozenset(
        {"fragment", "error_type", "error_number", "error_detail", "attempt"}
    ),
    ModelRole.GENERATOR: frozenset(
        {"error_type", "error_number", "error_detail", "variant"}
    ),
    ModelRole.VALIDATOR_JUDGE: frozenset(
        {"error_type", "error_number", "error_detail", "compiler_output"}
    ),
    ModelRole.SEMANTIC_JUDGE: frozenset(
        {"buggy_source", "compiler_message", "fixed_source"}
    ),
    ModelRole.ACTOR: frozenset({"buggy_source", "compiler_message"}),
}

_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")


@dataclass(frozen=True)
class PromptTemplate:
    """Template text with {{name}} placeholders and the set of names it must bind."""

    template_text: str
    required_bindings: frozenset[str] = frozenset()

    def __post_init__(self):
        present = set(_PLACEHOLDER_RE.findall(self.template_text))
        missing = self.required_bindings - present
        if missing:
            raise ValueError(
                f"template lacks required placeholders: {', '.join(sorted(missing))}"
            )


def render_prompt(template: PromptTemplate, bindings: dict[str, str], strict: bool = True) -> str:
    """Substitute every placeholder; after rendering no {{name}} markers remain.

    Raises ValueError naming any required binding that is absent, and (in
    strict mode) any placeholder left unbound.
    """
    missing = sorted(template.required_bindings - bindings.keys())
    if missing:
        raise ValueError(f"missing bindings: {', '.join(missing)}")

    def substitute(match: re.Match) -> str:
        name = match.group(1)
        if name in bindings:
            return str(bindings[name])
        if strict:
            raise ValueError(f"unbound placeholder: {name}")
        return match.group(0)

    return _PLACEHOLDER_RE.sub(substitute, template.template_text)


def fixture_key(role: ModelRole, prompt: str) -> str:
    """Stable content hash of (role, rendered prompt); identical across platforms."""
    return hashlib.sha256(f"{role.value}\n{prompt}".encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ModelResponse:
    text: str
    role: ModelRole
    fixture_key: str
    latency: float


class FixtureStore:
    """One response per file, keyed by fixture_key; concurrent reads, serialized writes."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._write_lock = threading.Lock()

    def path_for(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, key: str) -> str | None:
        path = self.path_for(key)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))["text"]

    def put(self, key: str, role: ModelRole, prompt: str, text: str) -> Path:
        path = self.path_for(key)
        payload = json.dumps(
            {"role": role.value, "prompt": prompt, "text": text}, ensure_ascii=False
        )
        with self._write_lock:
            self.root.mkdir(parents=True, exist_ok=True)
            path.write_text(payload, encoding="utf-8")
        return path


def load_role_template(role: ModelRole) -> PromptTemplate:
    """Load the packaged prompt asset for a role."""
    text = (resources.files("cxxrepair") / "prompts" / f"{role.value}.txt").read_text(
        encoding="utf-8"
    )
    return PromptTemplate(template_text=text, required_bindings=ROLE_BINDINGS[role])


@dataclass
class RoleConfig:
    """Per-role overrides; unset fields fall back to the gateway-wide settings."""

    model: str = "default"
    endpoint: str | None = None
    template_path: str | None = None


class ModelGateway:
    """Shared client for all model roles; thread-safe, with a bounded in-flight limit."""

    def __init__(
        self,
        mode: GatewayMode = GatewayMode.REPLAY,
        fixtures_dir: str | Path | None = None,
        endpoint: str | None = None,
        api_token: str | None = None,
        roles: dict[ModelRole, RoleConfig] | None = None,
        max_retries: int = 3,
        backoff: float = 0.5,
        max_in_flight: int = 8,
        request_timeout: float = 120.0,
    ):
        self.mode = GatewayMode(mode)
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV_VAR)
        self.api_token = api_token or os.environ.get(TOKEN_ENV_VAR)
        self.roles = dict(roles or {})
        self.max_retries = max_retries
        self.backoff = backoff
        self.request_timeout = request_timeout
        self.store = FixtureStore(fixtures_dir) if fixtures_dir is not None else None
        self._in_flight = threading.BoundedSemaphore(max_in_flight)
        self._template_cache: dict[ModelRole, PromptTemplate] = {}

    def role_config(self, role: ModelRole) -> RoleConfig:
        return self.roles.get(role, RoleConfig())

    def model_for(self, role: ModelRole) -> str:
        return self.role_config(role).model

    def template_for(self, role: ModelRole) -> PromptTemplate:
        if role not in self._template_cache:
            override = self.role_config(role).template_path
            if override:
                self._template_cache[role] = PromptTemplate(
                    template_text=Path(override).read_text(encoding="utf-8"),
                    required_bindings=ROLE_BINDINGS[role],
                )
            else:
                self._template_cache[role] = load_role_template(role)
        return self._template_cache[role]

    def complete(self, prompt: str, role: ModelRole, mode: GatewayMode | None = None) -> ModelResponse:
        """Resolve a prompt for a role under the gateway mode.

        Replay returns the stored response byte-exact and performs no network
        IO; record performs the live call and persists the response under its
        fixture key before returning it.
        """
        mode = GatewayMode(mode) if mode is not None else self.mode
        key = fixture_key(role, prompt)
        if mode is GatewayMode.REPLAY:
            if self.store is None:
                raise GatewayError("replay mode requires a fixture store")
            text = self.store.get(key)
            if text is None:
                raise ReplayMissError(key)
            return ModelResponse(text=text, role=role, fixture_key=key, latency=0.0)
        started = time.monotonic()
        text = self._post_chat(prompt, role)
        latency = time.monotonic() - started
        if mode is GatewayMode.RECORD:
            if self.store is None:
                raise GatewayError("record mode requires a fixture store")
            self.store.put(key, role, prompt, text)
        return ModelResponse(text=text, role=role, fixture_key=key, latency=latency)

    def _post_chat(self, prompt: str, role: ModelRole) -> str:
        config = self.role_config(role)
        url = config.endpoint or self.endpoint
        if not url:
            raise GatewayError(
                f"{self.mode.value} mode requires an endpoint (flag, config, or ${ENDPOINT_ENV_VAR})"
            )
        headers = {"Content-Type": "application/json"}
        if self.api_token:
            headers["Authorization"] = f"Bearer {self.api_token}"
        payload = {
            "model": config.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                with self._in_flight:
                    response = requests.post(
                        url, json=payload, headers=headers, timeout=self.request_timeout
                    )
            except requests.RequestException as exc:
                last_error = exc
                if attempt < self.max_retries:
                    delay = self.backoff * (2**attempt)
                    logger.warning(
                        "transport error for %s (attempt %d/%d), retrying in %.1fs: %s",
                        role.value, attempt + 1, self.max_retries + 1, delay, exc,
                    )
                    time.sleep(delay)
                continue
            if response.status_code != 200:
                raise GatewayError(
                    f"model endpoint returned HTTP {response.status_code}: {response.text[:200]}"
                )
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise GatewayError(f"unexpected chat-completion response shape: {exc}") from exc
        raise TransportError(
            f"model endpoint unreachable after {self.max_retries + 1} attempts: {last_error}"
        )


_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


def extract_code(response_text: str) -> str:
    """Return the first fenced code block, or the whole text trimmed when unfenced."""
    match = _FENCE_RE.search(response_text)
    code = match.group(1) if match else response_text
    code = code.strip()
    if not code:
        raise ValueError("model response contained no code")
    return code
