"""Three-phase dialogue control: generator routing, response ranking,
task-session navigation, and the no-task-change rule."""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .generators import ResponseCandidate
from .nlu import Intent
from .retrieval import RecipeDocument, TaskDocument
from .state import AnnotationSet, ConversationState, DialoguePhase, TaskSession


class ManagerError(Exception):
    pass


class NavAction(str, Enum):
    NEXT = "Next"
    PREVIOUS = "Previous"
    REPEAT = "Repeat"
    JUMP_TO = "JumpTo"
    SHOW_INGREDIENTS = "ShowIngredients"
    LAST_STEP = "LastStep"
    COMPLETE = "Complete"
    STOP = "Stop"


@dataclass(frozen=True)
class NavigationCommand:
    action: NavAction
    step: Optional[int] = None  # 1-based, JumpTo only


@dataclass(frozen=True)
class RoutingDecision:
    selected_generators: tuple[str, ...]
    phase_after: DialoguePhase

    def __post_init__(self):
        if not self.selected_generators:
            raise ManagerError("at least one generator must be selected")


def route(state: ConversationState, annotations: AnnotationSet) -> RoutingDecision:
    """Select candidate generators for this turn and the intended phase.

    Sensitive domains short-circuit to the deflection generator; detected
    questions always add the QA generator on top of the phase routing."""
    phase = state.phase
    intent = annotations.intent

    if annotations.avoid:
        return RoutingDecision(("safety-deflection",), phase)

    gens: list[str] = []
    phase_after = phase

    if intent == Intent.STOP.value:
        return RoutingDecision(("stop",), DialoguePhase.ENDED)

    if phase is DialoguePhase.INITIALIZATION:
        if annotations.initiative == "High":
            gens.append("retrieval")
            phase_after = DialoguePhase.SELECTION
        elif annotations.initiative == "RecommendationRequest":
            gens.append("recommender")
            phase_after = DialoguePhase.SELECTION
        else:
            if len(state.turns) == 0 and not state.launch_done:
                gens.append("launch")
            elif state.social_chat_turns_used < 2:
                gens.append("social-chat")
                gens.append("elicitation")
            else:
                gens.append("elicitation")
    elif phase is DialoguePhase.SELECTION:
        if intent == Intent.RECOMMEND.value:
            gens.append("recommender")
        elif annotations.initiative == "High":
            # task not started yet: re-retrieval is allowed
            gens.append("retrieval")
        else:
            gens.append("selection")
    elif phase is DialoguePhase.COMPLETION:
        if intent == Intent.REQUEST.value:
            gens.append("changing-task")
        elif intent == Intent.RECOMMEND.value:
            gens.append("changing-task")
        else:
            gens.append("navigation")
    else:  # Ended
        gens.append("fallback")

    if annotations.is_question:
        gens.append("qa")
    gens.append("fallback")
    return RoutingDecision(tuple(dict.fromkeys(gens)), phase_after)


def rank_responses(candidates: list[ResponseCandidate]) -> ResponseCandidate:
    """Deterministic ranking: tier first, then confidence, then text."""
    if not candidates:
        raise ManagerError("no response candidates to rank")
    return min(candidates, key=lambda c: (c.tier, -c.confidence, c.text))


# --- navigation ---------------------------------------------------------------

_ORDINALS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9, "tenth": 10,
}
_JUMP_RE = re.compile(r"\bstep\s+(\d+|one|two|three|four|five|six|seven|eight|nine|ten)\b")
_NEXT_RE = re.compile(r"\b(next|continue|go on|what's next|done with this step)\b")
_PREV_RE = re.compile(r"\b(previous|go back|back up|last one)\b|^back$")
_REPEAT_RE = re.compile(r"\b(repeat|again|say that again|one more time)\b")
_INGREDIENTS_RE = re.compile(r"\bingredients?\b")
_LAST_RE = re.compile(r"\b(last|final)\s+step\b|\bskip to the end\b")
_COMPLETE_RE = re.compile(r"\b(i'?m done|all done|finished|complete[d]?)\b")
_STOP_RE = re.compile(r"^(stop|quit|exit|cancel)$")


def parse_navigation(utterance: str, intent: str = "") -> Optional[NavigationCommand]:
    text = utterance.casefold().strip().rstrip(".!?")
    if _STOP_RE.match(text) or intent == Intent.STOP.value:
        return NavigationCommand(NavAction.STOP)
    if _LAST_RE.search(text):
        return NavigationCommand(NavAction.LAST_STEP)
    m = _JUMP_RE.search(text)
    if m:
        raw = m.group(1)
        step = int(raw) if raw.isdigit() else _ORDINALS[raw]
        return NavigationCommand(NavAction.JUMP_TO, step=step)
    if _INGREDIENTS_RE.search(text):
        return NavigationCommand(NavAction.SHOW_INGREDIENTS)
    if _REPEAT_RE.search(text):
        return NavigationCommand(NavAction.REPEAT)
    if _PREV_RE.search(text):
        return NavigationCommand(NavAction.PREVIOUS)
    if _NEXT_RE.search(text) or intent == Intent.AFFIRM.value:
        return NavigationCommand(NavAction.NEXT)
    if _COMPLETE_RE.search(text):
        return NavigationCommand(NavAction.COMPLETE)
    return None


def apply_navigation(
    session: TaskSession,
    cmd: NavigationCommand,
    doc: Union[TaskDocument, RecipeDocument],
) -> tuple[TaskSession, str]:
    """Apply a navigation command; returns (new session, content key).

    Content keys name what to render: step, ingredients, completed, or one
    of the error keys. Out-of-bounds jumps leave the session unchanged."""
    if not session.started:
        raise ManagerError("navigation requires a started task session")
    n = len(doc.steps)
    last = n - 1
    if cmd.action is NavAction.NEXT:
        if session.step_index >= last:
            return _finish(session, last), "completed"
        return _at(session, session.step_index + 1), "step"
    if cmd.action is NavAction.PREVIOUS:
        if session.step_index == 0:
            return session, "already-at-first-step"
        return _at(session, session.step_index - 1), "step"
    if cmd.action is NavAction.REPEAT:
        return session, "step"
    if cmd.action is NavAction.JUMP_TO:
        target = (cmd.step or 0) - 1
        if target < 0 or target > last:
            return session, "step-out-of-range"
        return _at(session, target), "step"
    if cmd.action is NavAction.LAST_STEP:
        return _at(session, last), "step"
    if cmd.action is NavAction.SHOW_INGREDIENTS:
        if session.doc_kind != "Recipe":
            return session, "no-ingredients-for-diy"
        return session, "ingredients"
    if cmd.action is NavAction.COMPLETE:
        return _finish(session, last), "completed"
    if cmd.action is NavAction.STOP:
        return session, "stopped"
    raise ManagerError(f"unhandled navigation action {cmd.action}")


def _at(session: TaskSession, index: int) -> TaskSession:
    return TaskSession(
        doc_id=session.doc_id,
        doc_kind=session.doc_kind,
        step_index=index,
        started=session.started,
        completed=session.completed,
    )


def _finish(session: TaskSession, last: int) -> TaskSession:
    return TaskSession(
        doc_id=session.doc_id,
        doc_kind=session.doc_kind,
        step_index=last,
        started=session.started,
        completed=True,
    )


def handle_change_task(state: ConversationState) -> "ResponseCandidate":
    """Fixed deflection when the user asks for a new task mid-task."""
    from .generators import changing_task_deflection

    if not (state.task_session and state.task_session.started):
        raise ManagerError("change-task deflection applies only after a task starts")
    return changing_task_deflection()
