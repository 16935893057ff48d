"""Session state model and the key-value state store.

Every processing module is a pure function; all mutable dialogue context
lives in ConversationState values kept in a StateStore. State values are
treated as immutable once returned: mutators produce new values.
"""
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, asdict, replace
from enum import Enum
from typing import Optional

STATE_FORMAT_VERSION = 1


class StateError(Exception):
    """Contract violation in state handling."""


class StateDecodeError(StateError):
    """Stored payload could not be decoded."""


class DialoguePhase(str, Enum):
    INITIALIZATION = "Initialization"
    SELECTION = "Selection"
    COMPLETION = "Completion"
    ENDED = "Ended"


# Legal phase transitions; self-loops are always allowed (turn did not
# advance the phase), plus Selection->Selection covers re-retrieval.
PHASE_TRANSITIONS = {
    DialoguePhase.INITIALIZATION: {
        DialoguePhase.INITIALIZATION,
        DialoguePhase.SELECTION,
        DialoguePhase.ENDED,
    },
    DialoguePhase.SELECTION: {
        DialoguePhase.SELECTION,
        DialoguePhase.COMPLETION,
        DialoguePhase.ENDED,
    },
    DialoguePhase.COMPLETION: {
        DialoguePhase.COMPLETION,
        DialoguePhase.ENDED,
        # a finished task lets the user pick a new one
        DialoguePhase.SELECTION,
    },
    DialoguePhase.ENDED: {DialoguePhase.ENDED},
}


@dataclass(frozen=True)
class AnnotationSet:
    """Per-turn NLU outputs attached to a Turn."""

    domain: str = "OutOfDomain"
    domain_score: float = 0.0
    domain_label: str = "contradiction"
    avoid: bool = False
    intent: str = "Chitchat"
    initiative: str = "Low"
    is_question: bool = False
    question_confidence: float = 0.0
    entities: tuple = ()
    degraded: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["entities"] = list(self.entities)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationSet":
        d = dict(d)
        d["entities"] = tuple(tuple(e) if isinstance(e, list) else e for e in d.get("entities", ()))
        return cls(**d)


@dataclass(frozen=True)
class Turn:
    index: int
    user_text: str
    bot_text: str
    annotations: AnnotationSet
    responder_id: str
    timestamp: int = 0

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "user_text": self.user_text,
            "bot_text": self.bot_text,
            "annotations": self.annotations.to_dict(),
            "responder_id": self.responder_id,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Turn":
        return cls(
            index=d["index"],
            user_text=d["user_text"],
            bot_text=d["bot_text"],
            annotations=AnnotationSet.from_dict(d["annotations"]),
            responder_id=d["responder_id"],
            timestamp=d.get("timestamp", 0),
        )


@dataclass(frozen=True)
class TaskSession:
    doc_id: str
    doc_kind: str  # "Task" | "Recipe"
    step_index: int = 0
    started: bool = False
    completed: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TaskSession":
        return cls(**d)


@dataclass(frozen=True)
class ConversationState:
    session_id: str
    turns: tuple[Turn, ...] = ()
    phase: DialoguePhase = DialoguePhase.INITIALIZATION
    task_session: Optional[TaskSession] = None
    social_chat_turns_used: int = 0
    candidate_options: tuple[str, ...] = ()
    pending_confirmation: Optional[str] = None
    recommended_ids: tuple[str, ...] = ()
    launch_done: bool = False

    def validate(self) -> None:
        for i, turn in enumerate(self.turns):
            if turn.index != i:
                raise StateError(f"turn index {turn.index} at position {i}")
        if self.social_chat_turns_used > 2:
            raise StateError("social chat budget exceeded")
        if self.pending_confirmation and self.phase is not DialoguePhase.SELECTION:
            raise StateError("pending_confirmation outside Selection phase")
        if (
            self.task_session
            and self.task_session.started
            and not self.task_session.completed
            and self.phase not in (DialoguePhase.COMPLETION, DialoguePhase.ENDED)
        ):
            raise StateError("active task session outside Completion phase")

    def to_dict(self) -> dict:
        return {
            "version": STATE_FORMAT_VERSION,
            "session_id": self.session_id,
            "turns": [t.to_dict() for t in self.turns],
            "phase": self.phase.value,
            "task_session": self.task_session.to_dict() if self.task_session else None,
            "social_chat_turns_used": self.social_chat_turns_used,
            "candidate_options": list(self.candidate_options),
            "pending_confirmation": self.pending_confirmation,
            "recommended_ids": list(self.recommended_ids),
            "launch_done": self.launch_done,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConversationState":
        try:
            return cls(
                session_id=d["session_id"],
                turns=tuple(Turn.from_dict(t) for t in d["turns"]),
                phase=DialoguePhase(d["phase"]),
                task_session=TaskSession.from_dict(d["task_session"]) if d.get("task_session") else None,
                social_chat_turns_used=d.get("social_chat_turns_used", 0),
                candidate_options=tuple(d.get("candidate_options", ())),
                pending_confirmation=d.get("pending_confirmation"),
                recommended_ids=tuple(d.get("recommended_ids", ())),
                launch_done=d.get("launch_done", False),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise StateDecodeError(str(exc)) from exc

    def equals_ignoring_timestamps(self, other: "ConversationState") -> bool:
        a, b = self.to_dict(), other.to_dict()
        for d in (a, b):
            for t in d["turns"]:
                t["timestamp"] = 0
        return a == b


def append_turn(state: ConversationState, turn: Turn) -> ConversationState:
    """Return a new state with `turn` appended; the input is untouched."""
    if turn.index != len(state.turns):
        raise StateError(
            f"turn index {turn.index} does not follow {len(state.turns)} existing turns"
        )
    return replace(state, turns=state.turns + (turn,))


def encode_state(state: ConversationState) -> str:
    try:
        return json.dumps(state.to_dict(), ensure_ascii=False, sort_keys=True)
    except (TypeError, ValueError) as exc:
        raise StateError(f"serialization failed: {exc}") from exc


def decode_state(payload: str) -> ConversationState:
    try:
        d = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise StateDecodeError(f"corrupt state payload: {exc}") from exc
    if not isinstance(d, dict) or d.get("version") != STATE_FORMAT_VERSION:
        raise StateDecodeError("unknown state format version")
    return ConversationState.from_dict(d)


_MISS = object()


class StateStore:
    """Keyed store of serialized ConversationState; subclasses add backends."""

    def put_state(self, session_id: str, state: ConversationState) -> None:
        state.validate()
        self._write(session_id, encode_state(state))

    def get_state(self, session_id: str) -> Optional[ConversationState]:
        """Returns None on a miss; raises StateDecodeError on corruption."""
        payload = self._read(session_id)
        if payload is _MISS:
            return None
        return decode_state(payload)

    def _write(self, session_id: str, payload: str) -> None:
        raise NotImplementedError

    def _read(self, session_id: str):
        raise NotImplementedError


class InMemoryStateStore(StateStore):
    def __init__(self) -> None:
        self._data: dict[str, str] = {}
        self._lock = threading.Lock()

    def _write(self, session_id: str, payload: str) -> None:
        with self._lock:
            self._data[session_id] = payload

    def _read(self, session_id: str):
        with self._lock:
            return self._data.get(session_id, _MISS)


class FileStateStore(StateStore):
    """One `<session_id>.state` file per session under a root directory."""

    def __init__(self, root: str) -> None:
        self.root = root
        os.makedirs(root, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, session_id: str) -> str:
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in session_id)
        return os.path.join(self.root, f"{safe}.state")

    def _write(self, session_id: str, payload: str) -> None:
        path = self._path(session_id)
        tmp = path + ".tmp"
        with self._lock:
            with open(tmp, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, path)

    def _read(self, session_id: str):
        path = self._path(session_id)
        with self._lock:
            if not os.path.exists(path):
                return _MISS
            with open(path, encoding="utf-8") as fh:
                return fh.read()
