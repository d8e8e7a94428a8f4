from .model import ModelSession, ServedModel
from .server import AdapterHTTPServer
from .tiny import build_tiny_gpt2

__all__ = ["AdapterHTTPServer", "ModelSession", "ServedModel", "build_tiny_gpt2"]
