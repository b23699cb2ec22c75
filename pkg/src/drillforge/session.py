"""Drill-mode and exam-mode item serving.

Drill-mode serves an unbounded stream of items, avoiding the most recently
served ones; exam-mode fixes a sequence up front and accepts each answer
exactly once, in order. Answer recording and reward emission are owned by
the platform layer, which calls back into these helpers.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConflictError, ValidationError
from .grading import AnswerHistory, GradeState, GradingConfig, drill_grade
from .itemgen import DrillSet, Item

DRILL = "drill"
EXAM = "exam"


@dataclass
class SessionState:
    student_id: str
    drillset_id: str
    mode: str = DRILL
    served: list[str] = field(default_factory=list)
    exam_sequence: Optional[list[str]] = None
    cursor: int = 0
    responses: list[int] = field(default_factory=list)  # exam-mode correctness bits
    recent_window: int = 10

    def __post_init__(self):
        if self.mode not in (DRILL, EXAM):
            raise ValidationError(f"unknown session mode {self.mode!r}")
        if (self.exam_sequence is not None) != (self.mode == EXAM):
            raise ValidationError("exam_sequence present iff mode is exam")


@dataclass(frozen=True)
class StoppingCriteria:
    min_answers: Optional[int] = None
    min_grade: Optional[float] = None


@dataclass(frozen=True)
class RewardGrant:
    rule: str
    amount: int

    def to_dict(self) -> dict:
        return {"rule": self.rule, "amount": self.amount}


@dataclass(frozen=True)
class AnswerOutcome:
    correct: bool
    explanation: str
    grade_state: GradeState
    rewards: tuple[RewardGrant, ...] = ()

    def to_dict(self) -> dict:
        return {
            "correct": self.correct,
            "explanation": self.explanation,
            "grade_state": self.grade_state.to_dict(),
            "rewards": [r.to_dict() for r in self.rewards],
        }


# ---------------------------------------------------------------------------
# Item serving
# ---------------------------------------------------------------------------

def next_drill_item(state: SessionState, drill_set: DrillSet, rng: random.Random) -> Item:
    """Uniform draw among items outside the recently-served window."""
    if state.mode != DRILL:
        raise ValidationError("next_drill_item requires a drill-mode session")
    if not drill_set.items:
        raise ValidationError(f"drill set {drill_set.id!r} is empty")
    window = min(state.recent_window, len(drill_set.items) - 1)
    recent = set(state.served[-window:]) if window > 0 else set()
    candidates = [item for item in drill_set.items if item.id not in recent]
    item = rng.choice(candidates)
    state.served.append(item.id)
    return item


def begin_exam(
    drill_set: DrillSet,
    n: int,
    rng: random.Random,
    student_id: str = "",
) -> SessionState:
    """Fix an n-item exam sequence by sampling without replacement."""
    if n < 1:
        raise ValidationError("an exam needs at least one item")
    if n > len(drill_set.items):
        raise ValidationError(
            f"exam of {n} items exceeds drill set size {len(drill_set.items)}"
        )
    sequence = [item.id for item in rng.sample(drill_set.items, n)]
    return SessionState(
        student_id=student_id,
        drillset_id=drill_set.id,
        mode=EXAM,
        exam_sequence=sequence,
        cursor=0,
    )


def exam_cursor_item_id(state: SessionState) -> Optional[str]:
    """The next unanswered exam slot, or None when the exam is finished."""
    if state.mode != EXAM:
        raise ValidationError("not an exam session")
    if state.cursor >= len(state.exam_sequence):
        return None
    return state.exam_sequence[state.cursor]


def validate_exam_submission(state: SessionState, item_id: str) -> None:
    """Reject out-of-order or duplicate exam submissions."""
    if state.mode != EXAM:
        raise ValidationError("not an exam session")
    if state.cursor >= len(state.exam_sequence):
        raise ConflictError("exam is already complete")
    expected = state.exam_sequence[state.cursor]
    if item_id == expected:
        return
    if item_id in state.exam_sequence[:state.cursor]:
        raise ConflictError(f"exam slot for item {item_id!r} was already answered")
    raise ConflictError(
        f"exam answers must be in order: expected item {expected!r}, got {item_id!r}"
    )


def check_answer(item: Item, selected_index: int) -> bool:
    if not (0 <= selected_index < len(item.options)):
        raise ValidationError(
            f"selected index {selected_index} out of range for {len(item.options)} options"
        )
    return item.options[selected_index].is_correct


def stopping_satisfied(
    history: AnswerHistory,
    criteria: StoppingCriteria,
    grading_cfg: GradingConfig = GradingConfig(),
) -> bool:
    """True once every stated criterion is met; absent criteria never block."""
    if criteria.min_answers is not None and len(history) < criteria.min_answers:
        return False
    if criteria.min_grade is not None:
        if drill_grade(history, grading_cfg).grade < criteria.min_grade:
            return False
    return True
