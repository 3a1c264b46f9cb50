"""Exception hierarchy.

The provider layer distinguishes transport problems (retried internally
with backoff, never charged against annotation patience by default) from
semantic failures (unparsable or refused content, charged against
patience). ``consumes_patience`` reflects that split; the pipeline only
ever inspects the flag.
"""

from __future__ import annotations


class ForgeError(Exception):
    """Base class for all styleforge errors."""


class ConfigError(ForgeError):
    """Invalid or missing configuration."""


class RequestValidationError(ForgeError):
    """A request violated a precondition before any I/O happened."""


class SchemaError(ForgeError):
    """A manifest, record, or file failed schema validation."""

    def __init__(self, message: str, *, record_id: str | None = None, field: str | None = None):
        parts = [message]
        if record_id is not None:
            parts.append(f"record={record_id}")
        if field is not None:
            parts.append(f"field={field}")
        super().__init__(" ".join(parts))
        self.record_id = record_id
        self.field = field


class ProviderError(ForgeError):
    """Base class for provider-side failures."""

    #: whether this failure should count against annotation patience
    consumes_patience = False


class TransportError(ProviderError):
    """Network or HTTP-level failure (connection, 5xx, timeout)."""


class RateLimitError(TransportError):
    """Provider asked us to slow down (HTTP 429)."""


class MalformedResponseError(ProviderError):
    """The provider answered but the body was not in the expected shape."""

    consumes_patience = True


class ContentRefusalError(ProviderError):
    """The model declined to produce content for this request."""

    consumes_patience = True


class SafetyRejectionError(ProviderError):
    """The image generator rejected the prompt on safety grounds."""

    consumes_patience = True


class EmptyResponseError(ProviderError):
    """The provider returned an empty completion."""

    consumes_patience = True


class ParseError(ForgeError):
    """A model reply did not match the constrained response format."""

    consumes_patience = True


class ReplayMissError(ProviderError):
    """Replay session has no (remaining) response for a request digest."""

    def __init__(self, digest: str, *, served: int | None = None):
        if served is None:
            msg = f"replay session has no entry for digest {digest}"
        else:
            msg = (
                f"replay session exhausted for digest {digest}: "
                f"{served} response(s) recorded, one more requested"
            )
        super().__init__(msg)
        self.digest = digest
