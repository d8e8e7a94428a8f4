from .config import BackendSpec, RunConfig, build_backends, load_config, parse_mode
from .evaluate import ItemResult, ModeRow, RunReport, default_modes, run
from .tasks import TaskSpec, extract_answer

__all__ = [
    "BackendSpec",
    "ItemResult",
    "ModeRow",
    "RunConfig",
    "RunReport",
    "TaskSpec",
    "build_backends",
    "default_modes",
    "extract_answer",
    "load_config",
    "parse_mode",
    "run",
]
