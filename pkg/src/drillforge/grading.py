"""Tapered mastery grading.

Grades a drill set from the recent answer history using a sliding window
whose length grows with recent errors: a clean run of 7 correct answers
earns a complete 1.0 grade ("ace"), while each error inside the lookback
stretches the window by 2, up to a cap of the 30 most recent answers.
Newer answers weigh more (linearly decreasing weights L..1).

Also covers exam grading (plain mean), collection progress, and the
course-level interim/final combination with the pass/fail exit option.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import ValidationError


# ---------------------------------------------------------------------------
# Answer history
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HistoryEntry:
    correct: bool
    item_id: str
    timestamp: int  # UTC seconds


@dataclass
class AnswerHistory:
    """Append-only per-(student, drill set) correctness sequence, oldest first."""

    entries: list[HistoryEntry] = field(default_factory=list)

    def append(self, correct: bool, item_id: str, timestamp: int) -> None:
        if self.entries and timestamp < self.entries[-1].timestamp:
            raise ValidationError(
                f"timestamp {timestamp} decreases below {self.entries[-1].timestamp}"
            )
        self.entries.append(HistoryEntry(bool(correct), item_id, timestamp))

    def bits(self) -> list[int]:
        return [int(e.correct) for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_bits(cls, bits: Iterable[int], start_ts: int = 0) -> "AnswerHistory":
        h = cls()
        for i, b in enumerate(bits):
            h.append(bool(b), f"item-{i}", start_ts + i)
        return h


# ---------------------------------------------------------------------------
# Configs and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradingConfig:
    """Taper parameters: 7-correct minimal ace, 30-answer cap, +2 per error."""

    base_window: int = 7
    max_window: int = 30
    error_growth: int = 2
    lookback: int = 30
    ace_epsilon: float = 1e-9

    def __post_init__(self):
        if not (1 <= self.base_window <= self.max_window):
            raise ValidationError("require 1 <= base_window <= max_window")
        if self.error_growth < 0:
            raise ValidationError("error_growth must be >= 0")
        if self.lookback < self.max_window:
            raise ValidationError("lookback must be >= max_window")
        if self.ace_epsilon < 0:
            raise ValidationError("ace_epsilon must be >= 0")


@dataclass(frozen=True)
class GradeState:
    grade: float
    taper_len: int
    complete: bool
    aced: bool

    def to_dict(self) -> dict:
        return {
            "grade": self.grade,
            "taper_len": self.taper_len,
            "complete": self.complete,
            "aced": self.aced,
        }


@dataclass(frozen=True)
class CourseGradeConfig:
    """Weights for the interim composite and the final/interim mix."""

    component_weights: Mapping[str, float]
    final_weight: float = 0.5
    pass_threshold: float = 5.0

    def __post_init__(self):
        if not self.component_weights:
            raise ValidationError("component_weights must not be empty")
        total = sum(self.component_weights.values())
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"component weights sum to {total}, expected 1")
        if not (0.0 <= self.final_weight <= 1.0):
            raise ValidationError("final_weight must be in [0, 1]")


@dataclass(frozen=True)
class CourseOutcome:
    """Pass / Fail (exit option) or a combined numeric grade on the 0-10 scale."""

    status: str  # "pass" | "fail" | "numeric"
    grade: Optional[float] = None

    @classmethod
    def passed(cls) -> "CourseOutcome":
        return cls("pass")

    @classmethod
    def failed(cls) -> "CourseOutcome":
        return cls("fail")

    @classmethod
    def numeric(cls, grade: float) -> "CourseOutcome":
        return cls("numeric", grade)


@dataclass(frozen=True)
class CollectionProgress:
    sets_aced: int
    total_attempts: int
    collection_aced: bool


# ---------------------------------------------------------------------------
# Drill grading
# ---------------------------------------------------------------------------

def taper_length(history: AnswerHistory, cfg: GradingConfig = GradingConfig()) -> int:
    """Target window length: base_window + error_growth per error in the lookback,
    capped at max_window. The effective window is min(len(history), result)."""
    bits = history.bits()
    window = bits[-cfg.lookback:] if cfg.lookback else []
    errors = sum(1 for b in window if not b)
    return min(cfg.max_window, cfg.base_window + cfg.error_growth * errors)


def drill_grade(history: AnswerHistory, cfg: GradingConfig = GradingConfig()) -> GradeState:
    """Weighted grade over the effective window, newest answer weighted heaviest.

    The i-th most recent answer (i = 1..L) has weight L - i + 1. A grade is
    complete once the history is at least as long as the target window, and
    aced when additionally the grade reaches 1 (within ace_epsilon).
    """
    bits = history.bits()
    total = len(bits)
    target = taper_length(history, cfg)
    effective = min(total, target)
    if effective == 0:
        grade = 0.0
    else:
        window = bits[-effective:]  # oldest-first within the window
        # oldest entry in the window gets weight 1, newest gets weight L
        num = sum((i + 1) * b for i, b in enumerate(window))
        den = effective * (effective + 1) // 2
        grade = num / den
    complete = total >= target
    aced = complete and grade >= 1.0 - cfg.ace_epsilon
    return GradeState(grade=grade, taper_len=target, complete=complete, aced=aced)


def exam_grade(responses: Sequence[int]) -> float:
    """Unweighted mean of correctness bits for a fixed exam sequence."""
    if len(responses) == 0:
        raise ValidationError("exam has no answers")
    return sum(1 for r in responses if r) / len(responses)


def course_grade(
    interim_components: Mapping[str, float],
    final: Optional[float],
    cfg: CourseGradeConfig,
    opted_out: bool,
) -> CourseOutcome:
    """Combine interim components (and optionally the final) into a course outcome.

    With the exit option the interim composite alone decides Pass/Fail against
    pass_threshold; otherwise a final grade is required and the result is the
    final_weight-mix of final and interim on the 0-10 scale.
    """
    if set(interim_components) != set(cfg.component_weights):
        raise ValidationError("interim components do not match configured weights")
    for name, value in interim_components.items():
        if not (0.0 <= value <= 10.0):
            raise ValidationError(f"component {name!r} grade {value} outside [0, 10]")
    if final is not None and not (0.0 <= final <= 10.0):
        raise ValidationError(f"final grade {final} outside [0, 10]")

    interim = sum(cfg.component_weights[k] * v for k, v in interim_components.items())
    if opted_out:
        if interim >= cfg.pass_threshold:
            return CourseOutcome.passed()
        return CourseOutcome.failed()
    if final is None:
        raise ValidationError("final grade required unless the exit option is taken")
    return CourseOutcome.numeric(cfg.final_weight * final + (1.0 - cfg.final_weight) * interim)


def collection_progress(
    histories: Mapping[str, AnswerHistory],
    collection: Sequence[str],
    cfg: GradingConfig = GradingConfig(),
) -> CollectionProgress:
    """Aced-set count, total attempts, and whether every set in the collection is aced."""
    if not collection:
        raise ValidationError("collection must not be empty")
    sets_aced = 0
    total_attempts = 0
    for set_id in collection:
        history = histories.get(set_id)
        if history is None:
            continue
        total_attempts += len(history)
        if drill_grade(history, cfg).aced:
            sets_aced += 1
    return CollectionProgress(
        sets_aced=sets_aced,
        total_attempts=total_attempts,
        collection_aced=sets_aced == len(collection),
    )
