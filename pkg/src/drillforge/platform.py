"""Event-sourced platform state and the command facade over it.

Commands validate, apply the event to live state, then append it to the log;
replay folds the same apply function over the stored records, so live state
and replayed state are equal field for field. Every apply handler validates
before mutating, which keeps a rejected command out of both state and log.
"""

from __future__ import annotations

import random
import secrets
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import ConflictError, NotFoundError, ValidationError
from .grading import (
    AnswerHistory,
    CollectionProgress,
    GradeState,
    GradingConfig,
    collection_progress,
    drill_grade,
    exam_grade,
)
from .itemgen import DrillSet, Item
from .ledger import (
    COLLECTION_ACED,
    MINT,
    SET_ACED,
    AccountKind,
    Ledger,
    LibraryInventory,
    PurchaseReceipt,
    RewardRuleSet,
    Tablet,
    purchase_tablet,
    reward_for_event,
)
from .session import (
    DRILL,
    EXAM,
    AnswerOutcome,
    RewardGrant,
    SessionState,
    begin_exam,
    check_answer,
    next_drill_item,
    validate_exam_submission,
)
from .storage import EventLog, EventRecord


@dataclass
class Profile:
    """Account identity outside the ledger: class, home library, auth token."""

    account_id: str
    kind: AccountKind
    library_id: Optional[str] = None
    token: str = ""
    display_name: str = ""


@dataclass
class PlatformState:
    drill_sets: dict[str, DrillSet] = field(default_factory=dict)
    collections: dict[str, list[str]] = field(default_factory=dict)
    profiles: dict[str, Profile] = field(default_factory=dict)
    ledger: Ledger = field(default_factory=Ledger)
    histories: dict[tuple[str, str], AnswerHistory] = field(default_factory=dict)
    tablets: dict[str, Tablet] = field(default_factory=dict)
    inventories: dict[str, LibraryInventory] = field(default_factory=dict)
    rewarded_sets: set[tuple[str, str]] = field(default_factory=set)
    rewarded_collections: set[tuple[str, str]] = field(default_factory=set)

    def history(self, account_id: str, drillset_id: str) -> AnswerHistory:
        return self.histories.get((account_id, drillset_id), AnswerHistory())

    def account_histories(self, account_id: str) -> dict[str, AnswerHistory]:
        return {
            set_id: hist
            for (acct, set_id), hist in self.histories.items()
            if acct == account_id
        }

    def snapshot(self) -> dict:
        """JSON-able dump of every field, for state-equality comparisons."""
        grading = GradingConfig()
        return {
            "drill_sets": {sid: ds.to_dict() for sid, ds in self.drill_sets.items()},
            "collections": {cid: list(sids) for cid, sids in self.collections.items()},
            "profiles": {
                aid: {
                    "kind": p.kind.value,
                    "library_id": p.library_id,
                    "token": p.token,
                    "display_name": p.display_name,
                }
                for aid, p in self.profiles.items()
            },
            "accounts": {
                aid: {"kind": a.kind.value, "balance": a.balance}
                for aid, a in self.ledger.accounts.items()
            },
            "transactions": [t.to_dict() for t in self.ledger.transactions],
            "histories": {
                f"{acct}::{sid}": [[e.correct, e.item_id, e.timestamp] for e in h.entries]
                for (acct, sid), h in self.histories.items()
            },
            "grades": {
                f"{acct}::{sid}": drill_grade(h, grading).to_dict()
                for (acct, sid), h in self.histories.items()
            },
            "tablets": {
                tid: {
                    "library_id": t.library_id,
                    "payment_address": t.payment_address,
                    "price": t.price,
                    "status": t.status.value,
                }
                for tid, t in self.tablets.items()
            },
            "inventories": {
                lid: {
                    "tablet_count": inv.tablet_count,
                    "first_sale_bonus_paid": inv.first_sale_bonus_paid,
                }
                for lid, inv in self.inventories.items()
            },
            "rewarded_sets": sorted(f"{a}::{s}" for a, s in self.rewarded_sets),
            "rewarded_collections": sorted(f"{a}::{c}" for a, c in self.rewarded_collections),
        }


# ---------------------------------------------------------------------------
# Event application (shared by live commands and replay)
# ---------------------------------------------------------------------------

def _apply_account_created(state: PlatformState, p: dict, ts: int):
    account_id = p["account_id"]
    kind = AccountKind(p["kind"])
    library_id = p.get("library_id")
    if library_id is not None and library_id not in state.inventories:
        raise NotFoundError(f"unknown library {library_id!r}")
    if account_id in state.profiles:
        raise ConflictError(f"account {account_id!r} already exists")
    state.ledger.create_account(account_id, kind)
    state.profiles[account_id] = Profile(
        account_id=account_id,
        kind=kind,
        library_id=library_id,
        token=p.get("token", ""),
        display_name=p.get("display_name", ""),
    )


def _apply_library_registered(state: PlatformState, p: dict, ts: int):
    library_id = p["library_id"]
    if library_id in state.inventories:
        raise ConflictError(f"library {library_id!r} already exists")
    tablets = [
        Tablet(
            id=t["id"],
            library_id=library_id,
            payment_address=t["payment_address"],
            price=int(t["price"]),
        )
        for t in p.get("tablets", [])
    ]
    for tablet in tablets:
        if tablet.id in state.tablets:
            raise ConflictError(f"tablet {tablet.id!r} already exists")
    state.inventories[library_id] = LibraryInventory(
        library_id=library_id, tablet_count=int(p["tablet_count"])
    )
    for tablet in tablets:
        state.tablets[tablet.id] = tablet


def _apply_set_uploaded(state: PlatformState, p: dict, ts: int):
    ds = DrillSet.from_dict(p["drillset"])
    if ds.id in state.drill_sets:
        raise ConflictError(f"drill set {ds.id!r} already exists")
    collection_id = p.get("collection_id")
    state.drill_sets[ds.id] = ds
    if collection_id:
        state.collections.setdefault(collection_id, []).append(ds.id)


def _apply_answer(state: PlatformState, p: dict, ts: int):
    account_id, set_id = p["account_id"], p["drillset_id"]
    if account_id not in state.profiles:
        raise NotFoundError(f"unknown account {account_id!r}")
    if set_id not in state.drill_sets:
        raise NotFoundError(f"unknown drill set {set_id!r}")
    key = (account_id, set_id)
    if key not in state.histories:
        state.histories[key] = AnswerHistory()
    state.histories[key].append(bool(p["correct"]), p["item_id"], ts)


def _apply_reward(state: PlatformState, p: dict, ts: int):
    account_id, rule, ref = p["account_id"], p["rule"], p["ref"]
    amount = int(p["amount"])
    if rule == SET_ACED:
        marker, markers = (account_id, ref), state.rewarded_sets
    elif rule == COLLECTION_ACED:
        marker, markers = (account_id, ref), state.rewarded_collections
    else:
        raise ValidationError(f"unknown reward rule {rule!r}")
    if marker in markers:
        raise ConflictError(f"reward {rule} for {marker} already granted")
    markers.add(marker)
    # zero-amount rewards still mark the milestone, but mint nothing
    if amount > 0:
        state.ledger.mint(account_id, amount, memo=f"{rule}:{ref}", timestamp=ts)


def _apply_transfer(state: PlatformState, p: dict, ts: int):
    src, dst, amount = p["src"], p["dst"], int(p["amount"])
    memo = p.get("memo", "")
    if src == MINT:
        state.ledger.mint(dst, amount, memo=memo, timestamp=ts)
    else:
        state.ledger.transfer(src, dst, amount, memo=memo, timestamp=ts)


def _apply_purchase(state: PlatformState, p: dict, ts: int) -> PurchaseReceipt:
    return purchase_tablet(
        state.ledger,
        p["account_id"],
        p["payload"],
        state.tablets,
        state.inventories,
        timestamp=ts,
    )


_APPLY = {
    "account_created": _apply_account_created,
    "library_registered": _apply_library_registered,
    "set_uploaded": _apply_set_uploaded,
    "answer": _apply_answer,
    "reward": _apply_reward,
    "transfer": _apply_transfer,
    "purchase": _apply_purchase,
}


def apply_event(state: PlatformState, record: EventRecord):
    handler = _APPLY.get(record.kind)
    if handler is None:
        raise ValidationError(f"unknown event kind {record.kind!r}")
    return handler(state, record.payload, record.timestamp)


def replay(records: Iterable[EventRecord]) -> PlatformState:
    state = PlatformState()
    for record in records:
        apply_event(state, record)
    return state


# ---------------------------------------------------------------------------
# Command facade
# ---------------------------------------------------------------------------

class Platform:
    """Single-writer command surface; all mutation flows through the log."""

    def __init__(
        self,
        log: Optional[EventLog] = None,
        grading_cfg: GradingConfig = GradingConfig(),
        reward_rules: RewardRuleSet = RewardRuleSet(),
        seed: Optional[int] = None,
    ):
        self.log = log if log is not None else EventLog()
        self.grading_cfg = grading_cfg
        self.reward_rules = reward_rules
        self.state = replay(self.log)
        self._last_ts = max((r.timestamp for r in self.log), default=0)
        self._rng = random.Random(seed)
        # transient serving state; not part of PlatformState, never replayed
        self.drill_sessions: dict[tuple[str, str], SessionState] = {}
        self.exams: dict[str, SessionState] = {}
        self._exam_counter = 0

    # -- plumbing ----------------------------------------------------------

    def _stamp(self, timestamp: int) -> int:
        self._last_ts = max(int(timestamp), self._last_ts)
        return self._last_ts

    def _commit(self, kind: str, payload: dict, timestamp: int):
        record = EventRecord(
            seq=len(self.log) + 1, kind=kind, timestamp=timestamp, payload=payload
        )
        result = apply_event(self.state, record)  # validates; raises before any append
        self.log.append(kind, payload, timestamp)
        return result

    # -- registration ------------------------------------------------------

    def register_library(
        self,
        name: str = "",
        tablet_count: int = 10,
        tablet_price: int = 1_000_000,
        library_id: Optional[str] = None,
        timestamp: int = 0,
    ) -> str:
        if tablet_count < 0:
            raise ValidationError("tablet_count must be >= 0")
        ts = self._stamp(timestamp)
        library_id = library_id or f"lib-{len(self.state.inventories) + 1}"
        base = len(self.state.tablets)
        tablets = []
        for i in range(tablet_count):
            tablet_id = f"TBL-{base + i + 1:04d}"
            tablets.append(
                {
                    "id": tablet_id,
                    "payment_address": f"ADDR-{tablet_id}",
                    "price": tablet_price,
                }
            )
        self._commit(
            "library_registered",
            {
                "library_id": library_id,
                "name": name,
                "tablet_count": tablet_count,
                "tablets": tablets,
            },
            ts,
        )
        return library_id

    def create_account(
        self,
        kind: AccountKind,
        library_id: Optional[str] = None,
        display_name: str = "",
        account_id: Optional[str] = None,
        token: Optional[str] = None,
        timestamp: int = 0,
    ) -> Profile:
        ts = self._stamp(timestamp)
        account_id = account_id or f"acct-{len(self.state.profiles) + 1}"
        token = token or secrets.token_hex(16)
        self._commit(
            "account_created",
            {
                "account_id": account_id,
                "kind": AccountKind(kind).value,
                "library_id": library_id,
                "token": token,
                "display_name": display_name,
            },
            ts,
        )
        return self.state.profiles[account_id]

    def upload_drill_set(
        self,
        drill_set: DrillSet,
        collection_id: Optional[str] = None,
        timestamp: int = 0,
    ) -> str:
        ts = self._stamp(timestamp)
        self._commit(
            "set_uploaded",
            {"drillset": drill_set.to_dict(), "collection_id": collection_id},
            ts,
        )
        return drill_set.id

    # -- serving -----------------------------------------------------------

    def drill_set(self, drillset_id: str) -> DrillSet:
        ds = self.state.drill_sets.get(drillset_id)
        if ds is None:
            raise NotFoundError(f"unknown drill set {drillset_id!r}")
        return ds

    def profile(self, account_id: str) -> Profile:
        profile = self.state.profiles.get(account_id)
        if profile is None:
            raise NotFoundError(f"unknown account {account_id!r}")
        return profile

    def next_item(self, account_id: str, drillset_id: str) -> Item:
        self.profile(account_id)
        ds = self.drill_set(drillset_id)
        key = (account_id, drillset_id)
        session = self.drill_sessions.get(key)
        if session is None:
            session = SessionState(student_id=account_id, drillset_id=drillset_id)
            self.drill_sessions[key] = session
        return next_drill_item(session, ds, self._rng)

    def begin_exam(
        self, account_id: str, drillset_id: str, n: int, timestamp: int = 0
    ) -> tuple[str, SessionState]:
        self.profile(account_id)
        ds = self.drill_set(drillset_id)
        session = begin_exam(ds, n, self._rng, student_id=account_id)
        self._exam_counter += 1
        exam_id = f"exam-{self._exam_counter}"
        self.exams[exam_id] = session
        return exam_id, session

    def exam(self, exam_id: str) -> SessionState:
        session = self.exams.get(exam_id)
        if session is None:
            raise NotFoundError(f"unknown exam {exam_id!r}")
        return session

    # -- answering and rewards ----------------------------------------------

    def submit_answer(
        self,
        account_id: str,
        drillset_id: str,
        item_id: str,
        selected_index: int,
        mode: str = DRILL,
        timestamp: int = 0,
    ) -> AnswerOutcome:
        profile = self.profile(account_id)
        ds = self.drill_set(drillset_id)
        item = ds.item(item_id)
        correct = check_answer(item, selected_index)
        ts = self._stamp(timestamp)

        self._commit(
            "answer",
            {
                "account_id": account_id,
                "drillset_id": drillset_id,
                "item_id": item_id,
                "selected_index": selected_index,
                "correct": correct,
                "mode": mode,
            },
            ts,
        )

        grade = drill_grade(self.state.history(account_id, drillset_id), self.grading_cfg)
        rewards: list[RewardGrant] = []
        if grade.aced and (account_id, drillset_id) not in self.state.rewarded_sets:
            rewards.append(self._grant(profile, SET_ACED, drillset_id, ts))
            # a collection can only newly ace when one of its sets newly aces
            for collection_id, set_ids in self.state.collections.items():
                if drillset_id not in set_ids:
                    continue
                if (account_id, collection_id) in self.state.rewarded_collections:
                    continue
                progress = self._collection_progress(account_id, set_ids)
                if progress.collection_aced:
                    rewards.append(self._grant(profile, COLLECTION_ACED, collection_id, ts))

        return AnswerOutcome(
            correct=correct,
            explanation=item.explanation,
            grade_state=grade,
            rewards=tuple(rewards),
        )

    def _grant(self, profile: Profile, rule: str, ref: str, ts: int) -> RewardGrant:
        amount = reward_for_event(rule, profile.kind, self.reward_rules)
        self._commit(
            "reward",
            {"account_id": profile.account_id, "rule": rule, "ref": ref, "amount": amount},
            ts,
        )
        return RewardGrant(rule=rule, amount=amount)

    def _collection_progress(self, account_id: str, set_ids: list[str]) -> CollectionProgress:
        histories = {
            sid: self.state.histories[(account_id, sid)]
            for sid in set_ids
            if (account_id, sid) in self.state.histories
        }
        return collection_progress(histories, set_ids, self.grading_cfg)

    def submit_exam_answer(
        self, exam_id: str, item_id: str, selected_index: int, timestamp: int = 0
    ) -> AnswerOutcome:
        session = self.exam(exam_id)
        validate_exam_submission(session, item_id)
        outcome = self.submit_answer(
            session.student_id,
            session.drillset_id,
            item_id,
            selected_index,
            mode=EXAM,
            timestamp=timestamp,
        )
        session.cursor += 1
        session.responses.append(int(outcome.correct))
        return outcome

    def exam_score(self, exam_id: str) -> float:
        session = self.exam(exam_id)
        if session.cursor < len(session.exam_sequence):
            raise ConflictError(
                f"exam {exam_id!r} has {len(session.exam_sequence) - session.cursor} "
                "unanswered items"
            )
        return exam_grade(session.responses)

    # -- ledger and purchases ------------------------------------------------

    def grade(self, account_id: str, drillset_id: str) -> GradeState:
        self.profile(account_id)
        self.drill_set(drillset_id)
        return drill_grade(self.state.history(account_id, drillset_id), self.grading_cfg)

    def balance(self, account_id: str) -> int:
        self.profile(account_id)
        return self.state.ledger.balance(account_id)

    def purchase(self, account_id: str, payload: str, timestamp: int = 0) -> PurchaseReceipt:
        self.profile(account_id)
        ts = self._stamp(timestamp)
        return self._commit(
            "purchase", {"account_id": account_id, "payload": payload}, ts
        )

    def mint(self, dst: str, amount: int, memo: str = "", timestamp: int = 0):
        ts = self._stamp(timestamp)
        self._commit(
            "transfer", {"src": MINT, "dst": dst, "amount": amount, "memo": memo}, ts
        )

    def transfer(self, src: str, dst: str, amount: int, memo: str = "", timestamp: int = 0):
        ts = self._stamp(timestamp)
        self._commit(
            "transfer", {"src": src, "dst": dst, "amount": amount, "memo": memo}, ts
        )
