"""Shared exception types. Anything raised as CxxRepairError maps to CLI exit code 1."""

from __future__ import annotations


class CxxRepairError(Exception):
    """Base class for domain errors raised by this package."""


class CorpusError(CxxRepairError):
    """Dataset file or record violates the corpus contract."""


class GatewayError(CxxRepairError):
    """Model gateway misconfiguration or endpoint failure."""


class TransportError(GatewayError):
    """Endpoint unreachable after the configured number of retries."""


class ReplayMissError(GatewayError):
    """Replay mode found no fixture for the requested (role, prompt) pair."""

    def __init__(self, fixture_key: str):
        super().__init__(f"no replay fixture for key {fixture_key}")
        self.fixture_key = fixture_key


class JudgeProtocolError(CxxRepairError):
    """A judge response did not contain the expected label token."""


class ForgeError(CxxRepairError):
    """Dataset construction step failed (augmentation, generation, review export)."""


class CompilerToolError(CxxRepairError):
    """The compiler binary was missing or could not be started."""


class PanelError(CxxRepairError):
    """Annotation session constraint violated."""
