"""Task-guiding dialogue assistant for home improvement and cooking."""

from .config import EngineConfig, load_config
from .engine import Engine, TurnResult
from .state import ConversationState, DialoguePhase

__all__ = [
    "Engine",
    "EngineConfig",
    "TurnResult",
    "ConversationState",
    "DialoguePhase",
    "load_config",
]

__version__ = "0.1.0"
