from .base import (
    Backend,
    BackendDescriptor,
    Session,
    SessionTokenSource,
)
from .ngram import NGramBackend, NGramModel, NGramSession
from .protocol import BackendHTTPServer
from .remote import RemoteBackend, RemoteSession
from .scripted import ScriptedBackend, ScriptedSession

__all__ = [
    "Backend",
    "BackendDescriptor",
    "BackendHTTPServer",
    "NGramBackend",
    "NGramModel",
    "NGramSession",
    "RemoteBackend",
    "RemoteSession",
    "ScriptedBackend",
    "ScriptedSession",
    "Session",
    "SessionTokenSource",
]
