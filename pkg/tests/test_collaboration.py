"""
Tests for the critique-correct-verify loop and the debate-judge protocol, with scripted agents.
"""

from collections import Counter

import pytest

from src.errors import AgentError
from src.models import Judgment, Peer, Verdict
from src.services.collaboration import critique_correct_verify, debate_judge


class ScriptedWriter:
    def __init__(self, tag="screenwriter", fail_on=None):
        self.tag = tag
        self.calls = Counter()
        self.fail_on = fail_on

    def respond(self, history):
        self.calls["respond"] += 1
        if self.calls["respond"] == self.fail_on:
            raise RuntimeError("provider went away")
        return f"draft {self.calls['respond']}"


class ScriptedCritic:
    def __init__(self, accept_round=None, tag="director"):
        self.tag = tag
        self.calls = Counter()
        self.accept_round = accept_round
        self.verified = []

    def critique(self, history, response):
        self.calls["critique"] += 1
        return f"fix {response}"

    def verify(self, context, instruction, response, critique):
        self.calls["verify"] += 1
        self.verified.append((response, critique))
        return Verdict(finalize=self.accept_round is not None and self.calls["verify"] + 1 >= self.accept_round)


class TestCritiqueCorrectVerify:
    @pytest.mark.parametrize("rounds", [1, 2, 3, 5])
    def test_unverified_call_counts(self, rounds):
        writer, critic = ScriptedWriter(), ScriptedCritic()
        result = critique_correct_verify(writer, critic, "ctx", "write", rounds)

        assert writer.calls["respond"] == rounds
        assert critic.calls["critique"] == rounds
        assert critic.calls["verify"] == rounds - 1
        assert result.rounds == rounds
        assert not result.verified
        assert result.response == f"draft {rounds}"

    def test_accepted_in_second_round(self):
        writer, critic = ScriptedWriter(), ScriptedCritic(accept_round=2)
        result = critique_correct_verify(writer, critic, "ctx", "write", 3)

        assert result.verified
        assert result.rounds == 2
        assert result.response == "draft 2"
        assert (writer.calls["respond"], critic.calls["critique"], critic.calls["verify"]) == (2, 1, 1)
        assert critic.verified == [("draft 2", "fix draft 1")]
        assert [c.round for c in result.critiques] == [1]

    def test_steps_are_audited_in_order(self):
        result = critique_correct_verify(ScriptedWriter(), ScriptedCritic(accept_round=2), "ctx", "write", 3)
        assert [(s.agent_tag, s.phase, s.round) for s in result.steps] == [
            ("screenwriter", "respond", 1),
            ("director", "critique", 1),
            ("screenwriter", "respond", 2),
            ("director", "verify", 2),
        ]

    def test_loop_guard_adds_a_round(self):
        writer, critic = ScriptedWriter(), ScriptedCritic()
        result = critique_correct_verify(writer, critic, "ctx", "write", 2, literal_loop_guard=True)

        assert result.rounds == 3
        assert writer.calls["respond"] == 3

    def test_history_grows(self):
        seen = []

        class Recorder(ScriptedWriter):
            def respond(self, history):
                seen.append(len(history))
                return super().respond(history)

        critique_correct_verify(Recorder(), ScriptedCritic(), "ctx", "write", 3)
        assert seen == [2, 4, 6]

    def test_failure_names_agent_phase_and_round(self):
        with pytest.raises(AgentError) as exc_info:
            critique_correct_verify(ScriptedWriter(fail_on=2), ScriptedCritic(), "ctx", "write", 3)

        error = exc_info.value
        assert (error.agent_tag, error.phase, error.round) == ("screenwriter", "respond", 2)
        assert "provider went away" in str(error)

    def test_rounds_must_be_positive(self):
        with pytest.raises(ValueError):
            critique_correct_verify(ScriptedWriter(), ScriptedCritic(), "ctx", "write", 0)


class ScriptedPeer:
    def __init__(self, tag, position):
        self.tag = tag
        self.position = position
        self.calls = Counter()
        self.received = []

    def respond(self, history):
        self.calls["respond"] += 1
        return self.position

    def review(self, history, own, other, received):
        self.calls["review"] += 1
        self.received.append(received)
        return f"{self.tag} on {other}"

    def revise(self, own, feedback):
        self.calls["revise"] += 1
        return f"{own}+"


class ScriptedJudge:
    def __init__(self, winner=Peer.Q, fail=False):
        self.tag = "director"
        self.winner = winner
        self.fail = fail
        self.seen = None

    def judge(self, history, position_p, position_q, feedback_p, feedback_q):
        if self.fail:
            raise ValueError("no verdict")
        self.seen = (position_p, position_q, feedback_p, feedback_q)
        return Judgment(winner=self.winner)


class TestDebateJudge:
    @pytest.mark.parametrize("rounds", [0, 1, 2])
    def test_call_counts(self, rounds):
        p, q, judge = ScriptedPeer("cinematographer-1", "P0"), ScriptedPeer("cinematographer-2", "Q0"), ScriptedJudge()
        result = debate_judge(p, q, judge, "ctx", "shoot", rounds)

        peer_calls = sum(p.calls[k] + q.calls[k] for k in ("respond", "review"))
        assert peer_calls == 4 + 2 * rounds
        assert p.calls["revise"] == q.calls["revise"] == 1 + rounds
        assert len([s for s in result.steps if s.phase == "judge"]) == 1

    def test_feedback_is_applied_by_the_other_peer(self):
        p, q, judge = ScriptedPeer("c1", "P0"), ScriptedPeer("c2", "Q0"), ScriptedJudge()
        result = debate_judge(p, q, judge, "ctx", "shoot", 1)

        assert result.position_p == "P0++"
        assert result.position_q == "Q0++"
        assert p.received == [None, "c2 on P0"]
        assert q.received == ["c1 on Q0", "c1 on Q0+"]

    def test_judge_sees_revised_positions(self):
        judge = ScriptedJudge(winner=Peer.P)
        result = debate_judge(ScriptedPeer("c1", "P0"), ScriptedPeer("c2", "Q0"), judge, "ctx", "shoot", 0)

        assert judge.seen[:2] == ("P0+", "Q0+")
        assert result.winning_position == "P0+"
        assert result.judged_positions == "post-debate"

    def test_concurrent_matches_sequential(self):
        def run(concurrent):
            return debate_judge(
                ScriptedPeer("c1", "P0"), ScriptedPeer("c2", "Q0"), ScriptedJudge(), "ctx", "shoot", 2,
                concurrent=concurrent,
            )

        assert run(True) == run(False)

    def test_judge_failure(self):
        with pytest.raises(AgentError) as exc_info:
            debate_judge(ScriptedPeer("c1", "P0"), ScriptedPeer("c2", "Q0"), ScriptedJudge(fail=True), "ctx", "shoot", 2)
        assert (exc_info.value.phase, exc_info.value.round) == ("judge", 3)

    def test_negative_rounds(self):
        with pytest.raises(ValueError):
            debate_judge(ScriptedPeer("c1", "P0"), ScriptedPeer("c2", "Q0"), ScriptedJudge(), "ctx", "shoot", -1)
