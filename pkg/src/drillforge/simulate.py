"""Cohort simulation driving the real platform code paths.

Students are Bernoulli(ability) answerers. Everything flows through the
same commands the HTTP service uses, so simulated runs exercise grading,
rewards, and the event log for real; a rerun with the same spec yields a
byte-identical report.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from statistics import fmean
from typing import Optional

from .errors import ValidationError
from .grading import GradingConfig
from .itemgen import GenConfig, OptionPools, PoolEntry, generate_drill_set
from .ledger import AccountKind, RewardRuleSet
from .platform import Platform
from .storage import canonical_json

UNTIL_ACE = "until_ace"
FIXED = "fixed"

COLLECTION_ID = "sim-course"


@dataclass(frozen=True)
class CohortSpec:
    n_students: int = 10
    ability: float = 0.8
    sets: int = 5
    policy: str = UNTIL_ACE
    answers_per_set: int = 30     # per set, when policy is "fixed"
    max_answers_per_set: int = 1000  # safety cap for "until_ace"
    items_per_set: int = 10
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.ability <= 1.0):
            raise ValidationError("ability must be in [0, 1]")
        if self.n_students < 1 or self.sets < 1:
            raise ValidationError("n_students and sets must be >= 1")
        if self.policy not in (UNTIL_ACE, FIXED):
            raise ValidationError(f"unknown policy {self.policy!r}")
        if self.answers_per_set < 1 or self.max_answers_per_set < 1:
            raise ValidationError("answer budgets must be >= 1")
        if self.items_per_set < 1:
            raise ValidationError("items_per_set must be >= 1")

    def to_dict(self) -> dict:
        return {
            "n_students": self.n_students,
            "ability": self.ability,
            "sets": self.sets,
            "policy": self.policy,
            "answers_per_set": self.answers_per_set,
            "max_answers_per_set": self.max_answers_per_set,
            "items_per_set": self.items_per_set,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CohortSpec":
        return cls(**{k: data[k] for k in cls().to_dict() if k in data})


@dataclass
class StudentResult:
    student: str
    attempts: int
    sets_aced: int
    collection_aced: bool
    smly: int
    final_grades: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "student": self.student,
            "attempts": self.attempts,
            "sets_aced": self.sets_aced,
            "collection_aced": self.collection_aced,
            "smly": self.smly,
            "final_grades": dict(sorted(self.final_grades.items())),
        }


@dataclass
class SimulationReport:
    spec: CohortSpec
    students: list[StudentResult]
    total_minted: int

    @property
    def total_attempts(self) -> int:
        return sum(s.attempts for s in self.students)

    @property
    def total_smly(self) -> int:
        return sum(s.smly for s in self.students)

    def to_dict(self) -> dict:
        grades = [g for s in self.students for g in s.final_grades.values()]
        return {
            "spec": self.spec.to_dict(),
            "students": [s.to_dict() for s in self.students],
            "aggregate": {
                "total_attempts": self.total_attempts,
                "total_smly": self.total_smly,
                "total_minted": self.total_minted,
                "sets_aced_total": sum(s.sets_aced for s in self.students),
                "collections_aced": sum(1 for s in self.students if s.collection_aced),
                "mean_final_grade": fmean(grades) if grades else 0.0,
            },
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict()) + "\n"


def _sim_pools() -> OptionPools:
    return OptionPools(
        correct_pool=[PoolEntry(f"correct {i}", f"worked solution {i}") for i in range(8)],
        distractor_pool=[PoolEntry(f"distractor {i}") for i in range(14)],
    )


def _pick_index(item, intend_correct: bool, rng: random.Random) -> int:
    if intend_correct:
        return item.correct_index
    wrong = [i for i in range(len(item.options)) if i != item.correct_index]
    return rng.choice(wrong)


def run_simulation(
    spec: CohortSpec,
    grading_cfg: GradingConfig = GradingConfig(),
    reward_rules: RewardRuleSet = RewardRuleSet(),
    platform: Optional[Platform] = None,
) -> SimulationReport:
    if platform is None:
        platform = Platform(grading_cfg=grading_cfg, reward_rules=reward_rules,
                            seed=spec.seed)
    library_id = platform.register_library(name="sim-library", tablet_count=10)

    pools = _sim_pools()
    set_ids = []
    for k in range(spec.sets):
        ds = generate_drill_set(
            pools,
            f"Simulated set {k + 1}",
            GenConfig(n_items=spec.items_per_set, seed=spec.seed * 10_000 + k),
        )
        platform.upload_drill_set(ds, collection_id=COLLECTION_ID)
        set_ids.append(ds.id)

    results = []
    t = 0  # synthetic clock: one tick per answer
    for idx in range(spec.n_students):
        profile = platform.create_account(
            AccountKind.PRE_REGISTERED, library_id=library_id
        )
        rng = random.Random(f"{spec.seed}/{idx}")
        attempts = 0
        for set_id in set_ids:
            budget = (
                spec.answers_per_set if spec.policy == FIXED
                else spec.max_answers_per_set
            )
            for _ in range(budget):
                item = platform.next_item(profile.account_id, set_id)
                pick = _pick_index(item, rng.random() < spec.ability, rng)
                t += 1
                outcome = platform.submit_answer(
                    profile.account_id, set_id, item.id, pick, timestamp=t
                )
                attempts += 1
                if spec.policy == UNTIL_ACE and outcome.grade_state.aced:
                    break
        grades = {
            set_id: platform.grade(profile.account_id, set_id).grade
            for set_id in set_ids
        }
        aced = sum(
            1 for set_id in set_ids
            if (profile.account_id, set_id) in platform.state.rewarded_sets
        )
        results.append(
            StudentResult(
                student=profile.account_id,
                attempts=attempts,
                sets_aced=aced,
                collection_aced=(profile.account_id, COLLECTION_ID)
                in platform.state.rewarded_collections,
                smly=platform.balance(profile.account_id),
                final_grades=grades,
            )
        )

    platform.state.ledger.assert_conservation()
    return SimulationReport(
        spec=spec,
        students=results,
        total_minted=platform.state.ledger.total_minted,
    )
