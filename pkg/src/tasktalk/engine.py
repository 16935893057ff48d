"""Per-turn pipeline shared by the CLI REPL and the HTTP service.

Each turn runs understanding, routing, candidate generation, ranking, and a
pure state update, then persists the new state and emits one log record."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

from . import generators as gen
from . import manager, nlu, qa
from .config import EngineConfig
from .diy import (
    RemoteCommonsenseProvider,
    RemoteEntailmentProvider,
    default_commonsense_provider,
    default_entailment_provider,
)
from .nlu import Intent, RemoteScoringProvider, default_domain_provider
from .qa import RemoteExtractiveProvider, default_extractive_provider
from .recipes import build_recipe_search_plan, tag_cooking_entities, tag_dish_name
from .retrieval import (
    RecipeDocument,
    RecipeIndex,
    TaskDocument,
    TaskIndex,
    execute_recipe_plan,
    load_recipe_corpus,
    load_task_corpus,
    match_selection,
    retrieve_diy,
)
from .state import (
    AnnotationSet,
    ConversationState,
    DialoguePhase,
    InMemoryStateStore,
    StateStore,
    TaskSession,
    Turn,
    append_turn,
)

MAX_UTTERANCE_CHARS = 1024


class EngineError(Exception):
    pass


@dataclass(frozen=True)
class TurnResult:
    session_id: str
    reply: str
    responder_id: str
    phase: str
    options: tuple[tuple[str, str], ...] = ()
    step_index: Optional[int] = None
    step_total: Optional[int] = None
    ended: bool = False
    degraded: bool = False
    log_record: dict = field(default_factory=dict)


@dataclass
class _Proposal:
    """A ranked candidate plus the state changes applied if it wins."""

    candidate: gen.ResponseCandidate
    effects: dict
    options: tuple[tuple[str, str], ...] = ()


class Engine:
    def __init__(
        self,
        config: Optional[EngineConfig] = None,
        store: Optional[StateStore] = None,
        task_docs: Optional[list[TaskDocument]] = None,
        recipe_docs: Optional[list[RecipeDocument]] = None,
        log_sink: Optional[Callable[[dict], None]] = None,
    ):
        self.config = config or EngineConfig()
        self.store = store or InMemoryStateStore()
        self.task_docs = task_docs if task_docs is not None else load_task_corpus(self.config.task_corpus_path)
        self.recipe_docs = (
            recipe_docs if recipe_docs is not None else load_recipe_corpus(self.config.recipe_corpus_path)
        )
        self.task_index = TaskIndex(self.task_docs)
        self.recipe_index = RecipeIndex(self.recipe_docs)
        self._tasks_by_id = {d.id: d for d in self.task_docs}
        self._recipes_by_id = {d.id: d for d in self.recipe_docs}
        self._titles = {d.id: d.title for d in self.task_docs}
        self._titles.update({d.id: d.name for d in self.recipe_docs})
        self._log_sink = log_sink
        self._log_fh = None
        if log_sink is None and self.config.log_path:
            self._log_fh = open(self.config.log_path, "a", encoding="utf-8")

        heur_scoring = default_domain_provider()
        self.scoring = (
            RemoteScoringProvider(self.config.scoring_endpoint, fallback=heur_scoring)
            if self.config.scoring_endpoint
            else heur_scoring
        )
        heur_cs = default_commonsense_provider()
        self.commonsense = (
            RemoteCommonsenseProvider(self.config.commonsense_endpoint, fallback=heur_cs)
            if self.config.commonsense_endpoint
            else heur_cs
        )
        heur_ent = default_entailment_provider()
        self.entailment = (
            RemoteEntailmentProvider(self.config.entailment_endpoint, fallback=heur_ent)
            if self.config.entailment_endpoint
            else heur_ent
        )
        heur_qa = default_extractive_provider()
        self.extractive = (
            RemoteExtractiveProvider(self.config.extractive_endpoint, fallback=heur_qa)
            if self.config.extractive_endpoint
            else heur_qa
        )

    # --- public API -----------------------------------------------------------

    def handle_turn(self, session_id: str, utterance: str) -> TurnResult:
        started_at = time.perf_counter()
        if not session_id or not session_id.strip():
            raise EngineError("session_id must be non-empty")
        utterance = utterance[:MAX_UTTERANCE_CHARS]
        state = self.store.get_state(session_id) or ConversationState(session_id=session_id)

        annotations = self._annotate(utterance, state)
        decision = manager.route(state, annotations)
        proposals = self._generate(utterance, state, annotations, decision)
        winner = self._pick(proposals)
        new_state = self._apply(state, annotations, utterance, winner)
        self.store.put_state(session_id, new_state)

        latency_ms = (time.perf_counter() - started_at) * 1000.0
        record = {
            "session_id": session_id,
            "turn_index": len(new_state.turns) - 1,
            "phase": new_state.phase.value,
            "initiative": annotations.initiative,
            "intent": annotations.intent,
            "responder_id": winner.candidate.responder_id,
            "latency_ms": round(latency_ms, 3),
        }
        self._log(record)

        step_index = step_total = None
        ts = new_state.task_session
        if ts and ts.started and not ts.completed:
            doc = self._doc_for(ts)
            step_index, step_total = ts.step_index, len(doc.steps)
        return TurnResult(
            session_id=session_id,
            reply=winner.candidate.text,
            responder_id=winner.candidate.responder_id,
            phase=new_state.phase.value,
            options=winner.options,
            step_index=step_index,
            step_total=step_total,
            ended=new_state.phase is DialoguePhase.ENDED,
            degraded=annotations.degraded,
            log_record=record,
        )

    def get_state(self, session_id: str) -> Optional[ConversationState]:
        return self.store.get_state(session_id)

    def close(self) -> None:
        if self._log_fh:
            self._log_fh.close()
            self._log_fh = None

    # --- understanding ----------------------------------------------------------

    def _annotate(self, utterance: str, state: ConversationState) -> AnnotationSet:
        prediction = nlu.detect_domain(
            utterance, provider=self.scoring, threshold=self.config.domain_threshold
        )
        intent = nlu.classify_intent(utterance, phase=state.phase.value)
        is_q, q_conf = nlu.detect_question(utterance)
        initiative = nlu.classify_initiative(prediction, intent, utterance)
        degraded = bool(getattr(self.scoring, "last_degraded", False))
        return AnnotationSet(
            domain=prediction.chosen.value,
            domain_score=prediction.scores[prediction.chosen],
            domain_label=prediction.label,
            avoid=prediction.avoid,
            intent=intent.value,
            initiative=initiative.value,
            is_question=is_q,
            question_confidence=q_conf,
            degraded=degraded,
        )

    # --- generation -------------------------------------------------------------

    def _generate(
        self,
        utterance: str,
        state: ConversationState,
        ann: AnnotationSet,
        decision: manager.RoutingDecision,
    ) -> list[_Proposal]:
        proposals: list[_Proposal] = []
        for name in decision.selected_generators:
            handler = getattr(self, f"_gen_{name.replace('-', '_')}", None)
            if handler is None:
                continue
            made = handler(utterance, state, ann)
            if made:
                proposals.extend(made)
        if not proposals:
            proposals.append(_Proposal(gen.fallback_response(), {}))
        return proposals

    def _gen_safety_deflection(self, utterance, state, ann):
        return [_Proposal(gen.safety_deflection(), {})]

    def _gen_stop(self, utterance, state, ann):
        cand = gen.make_candidate(
            "Okay, we can stop here. Thanks for working with me, goodbye!",
            "task-completed",
        )
        return [_Proposal(cand, {"phase": DialoguePhase.ENDED})]

    def _gen_launch(self, utterance, state, ann):
        cand = gen.launch_greeting(state.session_id, len(state.turns))
        return [_Proposal(cand, {"launch_done": True})]

    def _gen_social_chat(self, utterance, state, ann):
        persona = gen.PersonaConfig(
            persona_sentence=self.config.persona_sentence,
            max_social_turns=self.config.max_social_turns,
        )
        cand = gen.social_chat(utterance, state, persona=persona)
        if cand is None:
            return []
        return [_Proposal(cand, {"social_chat_turns_used": state.social_chat_turns_used + 1})]

    def _gen_elicitation(self, utterance, state, ann):
        return [_Proposal(gen.elicitation(), {})]

    def _gen_fallback(self, utterance, state, ann):
        return [_Proposal(gen.fallback_response(), {})]

    def _gen_changing_task(self, utterance, state, ann):
        if not (state.task_session and state.task_session.started):
            return []
        return [_Proposal(manager.handle_change_task(state), {})]

    def _gen_recommender(self, utterance, state, ann):
        domain = ann.domain if ann.domain in ("DIY", "Cooking") else None
        cand, picks = gen.recommend(domain, state, self.task_docs, self.recipe_docs)
        if not picks:
            return [_Proposal(cand, {})]
        effects = {
            "candidate_options": tuple(i for i, _ in picks),
            "recommended_ids": state.recommended_ids + tuple(i for i, _ in picks),
            "pending_confirmation": None,
            "phase": DialoguePhase.SELECTION,
        }
        return [_Proposal(cand, effects, options=tuple(picks))]

    def _gen_retrieval(self, utterance, state, ann):
        if ann.domain == "Cooking":
            results = self._retrieve_recipes(utterance)
        else:
            results = retrieve_diy(utterance, self.task_index, entailment_provider=self.entailment)
        cand, shown = gen.present_options(results, self._titles)
        if not shown:
            return [_Proposal(cand, {})]
        effects = {
            "candidate_options": tuple(i for i, _ in shown),
            "pending_confirmation": None,
            "phase": DialoguePhase.SELECTION,
        }
        return [_Proposal(cand, effects, options=tuple(shown))]

    def _retrieve_recipes(self, utterance: str):
        dish_spans = tag_dish_name(utterance)
        entity_spans = tag_cooking_entities(utterance)
        plan = build_recipe_search_plan(dish_spans, entity_spans, utterance)
        results, _ = execute_recipe_plan(plan, self.recipe_index)
        return results

    def _gen_selection(self, utterance, state, ann):
        if state.pending_confirmation:
            if ann.intent == Intent.AFFIRM.value:
                return [self._start_task(state.pending_confirmation)]
            if ann.intent == Intent.DENY.value:
                cand, shown = gen.present_options(
                    [_as_result(i) for i in state.candidate_options], self._titles
                )
                return [_Proposal(cand, {"pending_confirmation": None}, options=tuple(shown))]
        if not state.candidate_options:
            return [_Proposal(gen.elicitation(), {})]
        titles = [self._titles[i] for i in state.candidate_options]
        idx, dist, needs_confirm = match_selection(
            utterance, titles, threshold=self.config.confirmation_threshold
        )
        doc_id = state.candidate_options[idx]
        if needs_confirm:
            cand = gen.make_candidate(
                f"Did you mean {titles[idx]}? Please say yes or no.",
                "confirm-step",
                confidence=1.0 - dist,
            )
            return [_Proposal(cand, {"pending_confirmation": doc_id})]
        return [self._start_task(doc_id)]

    def _start_task(self, doc_id: str) -> _Proposal:
        kind = "Recipe" if doc_id in self._recipes_by_id else "Task"
        session = TaskSession(doc_id=doc_id, doc_kind=kind, step_index=0, started=True)
        doc = self._doc_for(session)
        title = self._titles[doc_id]
        step = gen.render_step(session, doc, fact_threshold=self.config.fun_fact_threshold)
        cand = gen.make_candidate(f"Great, let's start {title}. {step.text}", "task-content")
        effects = {
            "task_session": session,
            "phase": DialoguePhase.COMPLETION,
            "pending_confirmation": None,
            "candidate_options": (),
        }
        return _Proposal(cand, effects)

    def _gen_navigation(self, utterance, state, ann):
        ts = state.task_session
        if not (ts and ts.started):
            return []
        cmd = manager.parse_navigation(utterance, intent=ann.intent)
        if cmd is None:
            return []
        doc = self._doc_for(ts)
        new_session, content = manager.apply_navigation(ts, cmd, doc)
        effects: dict = {"task_session": new_session}
        if content == "step":
            cand = gen.render_step(new_session, doc, fact_threshold=self.config.fun_fact_threshold)
        elif content == "ingredients":
            cand = gen.render_ingredients(doc)
        elif content == "completed":
            title = self._titles[ts.doc_id]
            cand = gen.make_candidate(
                f"Nice work, you finished {title}! Want to try another project or recipe?",
                "task-completed",
            )
            effects["phase"] = DialoguePhase.SELECTION
            effects["candidate_options"] = ()
        elif content == "stopped":
            cand = gen.make_candidate(
                "Okay, we can stop here. Thanks for working with me, goodbye!",
                "task-completed",
            )
            effects["phase"] = DialoguePhase.ENDED
        elif content == "already-at-first-step":
            cand = gen.make_candidate(
                "We're already at the first step, so there is nothing to go back to.",
                "navigation",
            )
        elif content == "step-out-of-range":
            cand = gen.make_candidate(
                f"That step doesn't exist. This one has {len(doc.steps)} steps.",
                "navigation",
            )
        elif content == "no-ingredients-for-diy":
            cand = gen.make_candidate(
                "This project doesn't have an ingredient list, but I can show the steps.",
                "navigation",
            )
        else:
            return []
        return [_Proposal(cand, effects)]

    def _gen_qa(self, utterance, state, ann):
        ts = state.task_session
        if not (ts and ts.started):
            return []
        doc = self._doc_for(ts)
        recipe = doc if isinstance(doc, RecipeDocument) else None
        qtype = qa.classify_question_type(utterance, history=[t.user_text for t in state.turns])
        answer = None
        if recipe and qtype is qa.QuestionType.QUANTITY_RELATED:
            answer = qa.answer_quantity(recipe, utterance)
        if (answer is None or answer.source == "None") and any(
            cue in utterance.casefold() for cue in qa.SUBSTITUTION_CUES
        ):
            answer = qa.answer_substitution(recipe, utterance)
        if answer is None or answer.source == "None":
            context = self._task_context(doc)
            history = tuple((t.user_text, t.bot_text) for t in state.turns)
            ctx = qa.QAContext(
                task_context=context,
                history=history,
                question=utterance,
                k=self.config.qa_history_turns,
            )
            answer = qa.extractive_answer(
                ctx, provider=self.extractive, threshold=self.config.qa_overlap_threshold
            )
        if answer.source == "None":
            fact = gen.fun_fact_lookup(utterance, threshold=self.config.fun_fact_threshold)
            if fact:
                return [_Proposal(gen.make_candidate(fact.text, "qa", confidence=0.3), {})]
            return [_Proposal(gen.make_candidate(answer.text, "qa", confidence=0.05), {})]
        return [_Proposal(gen.make_candidate(answer.text, "qa", confidence=answer.confidence), {})]

    def _task_context(self, doc: Union[TaskDocument, RecipeDocument]) -> str:
        if isinstance(doc, RecipeDocument):
            ings = ", ".join(
                f"{i.quantity} {i.name}".strip() if i.quantity else i.name for i in doc.ingredients
            )
            return f"{doc.name}. Ingredients: {ings}. " + " ".join(doc.steps)
        return f"{doc.title}. " + " ".join(doc.steps)

    # --- ranking and state update -------------------------------------------------

    def _pick(self, proposals: list[_Proposal]) -> _Proposal:
        best = manager.rank_responses([p.candidate for p in proposals])
        for p in proposals:
            if p.candidate is best:
                return p
        raise EngineError("ranked candidate lost its proposal")

    def _apply(
        self,
        state: ConversationState,
        ann: AnnotationSet,
        utterance: str,
        winner: _Proposal,
    ) -> ConversationState:
        new_state = replace(state, **winner.effects) if winner.effects else state
        turn = Turn(
            index=len(state.turns),
            user_text=utterance,
            bot_text=winner.candidate.text,
            annotations=ann,
            responder_id=winner.candidate.responder_id,
            timestamp=int(time.time()),
        )
        new_state = append_turn(new_state, turn)
        new_state.validate()
        return new_state

    def _doc_for(self, session: TaskSession) -> Union[TaskDocument, RecipeDocument]:
        if session.doc_kind == "Recipe":
            return self._recipes_by_id[session.doc_id]
        return self._tasks_by_id[session.doc_id]

    def _log(self, record: dict) -> None:
        if self._log_sink:
            self._log_sink(record)
        elif self._log_fh:
            self._log_fh.write(json.dumps(record, sort_keys=True) + "\n")
            self._log_fh.flush()


def _as_result(doc_id: str):
    from .retrieval import RankedResult

    return RankedResult(doc_id=doc_id, score=0.0, source_query_kind="")
