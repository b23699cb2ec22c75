"""Adaptive drilling platform: item generation, tapered mastery grading,
drill/exam sessions, an SMLY reward ledger, and an event-sourced service."""

from .errors import (
    ConflictError,
    DrillforgeError,
    NotFoundError,
    ValidationError,
)
from .grading import (
    AnswerHistory,
    CourseGradeConfig,
    CourseOutcome,
    GradeState,
    GradingConfig,
    collection_progress,
    course_grade,
    drill_grade,
    exam_grade,
    taper_length,
)
from .itemgen import (
    DrillSet,
    GenConfig,
    Item,
    Option,
    OptionPools,
    PoolEntry,
    generate_drill_set,
)
from .ledger import (
    AccountKind,
    Ledger,
    LibraryInventory,
    PurchaseReceipt,
    RewardRuleSet,
    Tablet,
    parse_payment_payload,
    payment_payload,
    purchase_tablet,
    reward_for_event,
)
from .platform import Platform, PlatformState, apply_event, replay
from .session import (
    AnswerOutcome,
    SessionState,
    StoppingCriteria,
    begin_exam,
    next_drill_item,
    stopping_satisfied,
)
from .simulate import CohortSpec, SimulationReport, run_simulation
from .storage import (
    EventLog,
    EventRecord,
    anonymized_export,
    decode_drill_set,
    encode_drill_set,
    load_drill_set,
    save_drill_set,
)
from .templates import Template, generate_from_template

__all__ = [
    "AccountKind",
    "AnswerHistory",
    "AnswerOutcome",
    "CohortSpec",
    "ConflictError",
    "CourseGradeConfig",
    "CourseOutcome",
    "DrillSet",
    "DrillforgeError",
    "EventLog",
    "EventRecord",
    "GenConfig",
    "GradeState",
    "GradingConfig",
    "Item",
    "Ledger",
    "LibraryInventory",
    "NotFoundError",
    "Option",
    "OptionPools",
    "Platform",
    "PlatformState",
    "PoolEntry",
    "PurchaseReceipt",
    "RewardRuleSet",
    "SessionState",
    "SimulationReport",
    "StoppingCriteria",
    "Tablet",
    "Template",
    "ValidationError",
    "anonymized_export",
    "apply_event",
    "begin_exam",
    "collection_progress",
    "course_grade",
    "decode_drill_set",
    "drill_grade",
    "encode_drill_set",
    "exam_grade",
    "generate_drill_set",
    "generate_from_template",
    "load_drill_set",
    "next_drill_item",
    "parse_payment_payload",
    "payment_payload",
    "purchase_tablet",
    "replay",
    "reward_for_event",
    "run_simulation",
    "save_drill_set",
    "stopping_satisfied",
    "taper_length",
]
