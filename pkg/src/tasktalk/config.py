"""Engine configuration.

All tunables live in one frozen dataclass so a run is reproducible from a
single JSON file. Missing fields fall back to defaults; unknown fields are
rejected so typos fail loudly."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class EngineConfig:
    task_corpus_path: Optional[str] = None
    recipe_corpus_path: Optional[str] = None
    confirmation_threshold: float = 0.3
    domain_threshold: float = 0.5
    fun_fact_threshold: float = 0.2
    qa_overlap_threshold: float = 0.15
    qa_history_turns: int = 1
    paraphrase_count: int = 3
    max_social_turns: int = 2
    speech_budget: int = 600
    persona_sentence: str = (
        "I enjoy helping people with cooking and home improvement projects."
    )
    scoring_endpoint: Optional[str] = None
    commonsense_endpoint: Optional[str] = None
    entailment_endpoint: Optional[str] = None
    extractive_endpoint: Optional[str] = None
    log_path: Optional[str] = None

    def __post_init__(self):
        if self.qa_history_turns not in (0, 1, 5):
            raise ConfigError("qa_history_turns must be 0, 1, or 5")
        for name in ("confirmation_threshold", "domain_threshold",
                     "fun_fact_threshold", "qa_overlap_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be within [0, 1]")
        if self.speech_budget <= 0:
            raise ConfigError("speech_budget must be positive")


def load_config(path: str | Path) -> EngineConfig:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    known = {f.name for f in dataclasses.fields(EngineConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    return EngineConfig(**data)
