"""
Collaboration primitives: Critique-Correct-Verify and Debate-Judge.

Both are agent-agnostic. Agents are any objects with a ``tag`` and the methods named in
the protocols below; the workflow supplies prompt-backed adapters, tests supply
scripted ones.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Protocol, TypeVar

from ..errors import AgentError
from ..models import (
    CCVResult,
    CollaborationStep,
    Critique,
    DebateResult,
    DialogueHistory,
    Judgment,
    Verdict,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")


class ActionAgent(Protocol):
    tag: str

    def respond(self, history: DialogueHistory) -> str: ...


class CriticAgent(Protocol):
    tag: str

    def critique(self, history: DialogueHistory, response: str) -> str: ...

    def verify(self, context: str, instruction: str, response: str, critique: str) -> Verdict: ...


class DebatePeer(Protocol):
    tag: str

    def respond(self, history: DialogueHistory) -> str: ...

    def review(self, history: DialogueHistory, own: str, other: str, received: Optional[str]) -> str: ...

    def revise(self, own: str, feedback: str) -> str: ...


class DebateJudge(Protocol):
    tag: str

    def judge(
        self,
        history: DialogueHistory,
        position_p: str,
        position_q: str,
        feedback_p: str,
        feedback_q: str,
    ) -> Judgment: ...


def _call(tag: str, phase: str, round: int, step: Callable[[], T]) -> T:
    try:
        return step()
    except AgentError:
        raise
    except Exception as exc:
        raise AgentError(tag, phase, round, cause=exc) from exc


def critique_correct_verify(
    action: ActionAgent,
    critic: CriticAgent,
    context: str,
    instruction: str,
    max_rounds: int,
    literal_loop_guard: bool = False,
) -> CCVResult:
    """Run the critique-correct-verify loop.

    The action agent produces at most ``max_rounds`` responses. With
    ``literal_loop_guard`` the loop body runs ``max_rounds + 1`` times instead.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")

    history = DialogueHistory.start(context, instruction)
    limit = max_rounds + 1 if literal_loop_guard else max_rounds
    steps: List[CollaborationStep] = []
    critiques: List[Critique] = []
    response = ""
    critique = ""
    verified = False
    rounds = 0

    for m in range(1, limit + 1):
        rounds = m
        response = _call(action.tag, "respond", m, lambda: action.respond(history))
        steps.append(CollaborationStep(agent_tag=action.tag, phase="respond", round=m, text=response))

        if m > 1:
            verdict = _call(critic.tag, "verify", m, lambda: critic.verify(context, instruction, response, critique))
            steps.append(CollaborationStep(
                agent_tag=critic.tag, phase="verify", round=m,
                text=json.dumps(verdict.model_dump(), ensure_ascii=False),
            ))
            if verdict.finalize:
                verified = True
                break

        critique = _call(critic.tag, "critique", m, lambda: critic.critique(history, response))
        critiques.append(Critique(author=critic.tag, content=critique, round=m))
        steps.append(CollaborationStep(agent_tag=critic.tag, phase="critique", round=m, text=critique))
        history.append(action.tag, response)
        history.append(critic.tag, critique)

    if not verified:
        logger.warning(f"{action.tag}/{critic.tag} loop ended unverified after {rounds} round(s)")
    return CCVResult(response=response, rounds=rounds, verified=verified, critiques=critiques, steps=steps)


def debate_judge(
    peer_p: DebatePeer,
    peer_q: DebatePeer,
    judge: DebateJudge,
    context: str,
    instruction: str,
    rounds: int,
    concurrent: bool = False,
) -> DebateResult:
    """Two peers respond, trade feedback for ``rounds`` rounds, and a judge picks one.

    Feedback authored by one peer is applied by the other through ``revise``. Peer
    calls total 4 + 2 * rounds; the judge is called once and sees the revised positions.
    """
    if rounds < 0:
        raise ValueError("rounds must not be negative")

    history = DialogueHistory.start(context, instruction)
    steps: List[CollaborationStep] = []

    def record(tag: str, phase: str, round: int, text: str) -> None:
        steps.append(CollaborationStep(agent_tag=tag, phase=phase, round=round, text=text))
        history.append(tag, text)

    if concurrent:
        with ThreadPoolExecutor(max_workers=2) as pool:
            future_p = pool.submit(_call, peer_p.tag, "respond", 0, lambda: peer_p.respond(history))
            future_q = pool.submit(_call, peer_q.tag, "respond", 0, lambda: peer_q.respond(history))
            position_p, position_q = future_p.result(), future_q.result()
    else:
        position_p = _call(peer_p.tag, "respond", 0, lambda: peer_p.respond(history))
        position_q = _call(peer_q.tag, "respond", 0, lambda: peer_q.respond(history))
    record(peer_p.tag, "respond", 0, position_p)
    record(peer_q.tag, "respond", 0, position_q)

    feedback_p: Optional[str] = None  # authored by Q about P
    feedback_q: Optional[str] = None  # authored by P about Q
    for round, phase in [(0, "feedback")] + [(r, "debate") for r in range(1, rounds + 1)]:
        received_p = feedback_p
        feedback_q = _call(peer_p.tag, phase, round,
                           lambda: peer_p.review(history, position_p, position_q, received_p))
        record(peer_p.tag, phase, round, feedback_q)
        position_q = _call(peer_q.tag, "revise", round, lambda: peer_q.revise(position_q, feedback_q))

        received_q = feedback_q
        feedback_p = _call(peer_q.tag, phase, round,
                           lambda: peer_q.review(history, position_q, position_p, received_q))
        record(peer_q.tag, phase, round, feedback_p)
        position_p = _call(peer_p.tag, "revise", round, lambda: peer_p.revise(position_p, feedback_p))

    judgment = _call(judge.tag, "judge", rounds + 1,
                     lambda: judge.judge(history, position_p, position_q, feedback_p, feedback_q))
    record(judge.tag, "judge", rounds + 1, json.dumps(judgment.model_dump(mode="json"), ensure_ascii=False))
    logger.info(f"Judge {judge.tag} preferred peer {judgment.winner.value}")

    return DebateResult(judgment=judgment, position_p=position_p, position_q=position_q, steps=steps)
