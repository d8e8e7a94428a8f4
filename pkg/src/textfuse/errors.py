"""Exception taxonomy shared across the package."""


class TextFuseError(Exception):
    """Base class for all errors raised by this package."""


class EncodingFailure(TextFuseError):
    """The tokenizer cannot represent the given text."""


class UnsupportedCategory(TextFuseError):
    """Operation requires word boundary information the tokenizer lacks."""


class WindowMismatch(TextFuseError):
    """Incremental codec context does not decode to the supplied words."""


class EmptySegment(TextFuseError):
    """A non-empty segment or token list was required."""


class SegmentCapExceeded(TextFuseError):
    """No decodable text found within the per-segment token cap."""


class StreamEnded(TextFuseError):
    """Token stream exhausted before a decodable prefix appeared."""


class SessionFinished(TextFuseError):
    """The session emitted end-of-sequence and rejects further calls."""


class SessionNotFound(TextFuseError):
    """Unknown session id (remote protocol)."""


class BackendUnavailable(TextFuseError):
    """Backend unreachable, or retries exhausted."""


class DisqualifiedSegment(TextFuseError):
    """A per-model score is unavailable; the candidate cannot be averaged."""


class NoQualifiedCandidate(TextFuseError):
    """Every candidate segment was disqualified."""


class ProtocolError(TextFuseError):
    """Malformed request or response on the wire protocol."""


class ConfigError(TextFuseError):
    """Run configuration is missing or invalid; message names the field."""


# Wire protocol error codes <-> exception classes.  Servers map raised
# exceptions to the code string; clients map codes back when re-raising.
ERROR_CODES = {
    EncodingFailure: "encoding_failure",
    UnsupportedCategory: "unsupported_category",
    WindowMismatch: "window_mismatch",
    EmptySegment: "empty_segment",
    SessionFinished: "session_finished",
    SessionNotFound: "session_not_found",
    ProtocolError: "bad_request",
}

CODE_TO_ERROR = {code: exc for exc, code in ERROR_CODES.items()}


def error_code(exc: Exception) -> str:
    for cls, code in ERROR_CODES.items():
        if isinstance(exc, cls):
            return code
    return "internal_error"


def raise_for_code(code: str, message: str = ""):
    cls = CODE_TO_ERROR.get(code, ProtocolError)
    raise cls(message or code)
