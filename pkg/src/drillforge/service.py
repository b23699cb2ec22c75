"""HTTP layer: sessions, grading, rewards, purchases, and library stats.

Items sent to clients never carry correctness markers or explanations;
those are revealed only in the answer outcome. Library stats are anonymized
aggregates behind a TTL cache. All errors come back as {code, message}.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse

from .errors import DrillforgeError, NotFoundError, ValidationError
from .grading import drill_grade
from .itemgen import Item
from .ledger import AccountKind
from .platform import Platform, PlatformState, Profile

_STATUS_BY_CODE = {
    "validation": 400,
    "bad_payload": 400,
    "unauthorized": 401,
    "insufficient_funds": 402,
    "forbidden": 403,
    "not_found": 404,
    "conflict": 409,
}


class AuthError(DrillforgeError):
    code = "unauthorized"


class ForbiddenError(DrillforgeError):
    code = "forbidden"


# ---------------------------------------------------------------------------
# Library stats
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LibraryStats:
    library_id: str
    n_students: int
    total_attempts: int
    sets_aced_total: int
    collections_aced: int
    as_of: float

    def to_dict(self) -> dict:
        return {
            "library_id": self.library_id,
            "n_students": self.n_students,
            "total_attempts": self.total_attempts,
            "sets_aced_total": self.sets_aced_total,
            "collections_aced": self.collections_aced,
            "as_of": self.as_of,
        }


def compute_library_stats(state: PlatformState, library_id: str, now: float) -> LibraryStats:
    """Aggregate counts for one library; no student identifiers leave here."""
    if library_id not in state.inventories:
        raise NotFoundError(f"unknown library {library_id!r}")
    members = [
        aid for aid, profile in state.profiles.items()
        if profile.library_id == library_id
    ]
    n_students = 0
    total_attempts = 0
    sets_aced_total = 0
    collections_aced = 0
    for account_id in members:
        histories = state.account_histories(account_id)
        attempts = sum(len(h) for h in histories.values())
        if attempts == 0:
            continue
        n_students += 1
        total_attempts += attempts
        aced_sets = {sid for sid, h in histories.items() if drill_grade(h).aced}
        sets_aced_total += len(aced_sets)
        # a student counts once however many collections they ace
        if any(
            set_ids and all(sid in aced_sets for sid in set_ids)
            for set_ids in state.collections.values()
        ):
            collections_aced += 1
    return LibraryStats(
        library_id=library_id,
        n_students=n_students,
        total_attempts=total_attempts,
        sets_aced_total=sets_aced_total,
        collections_aced=collections_aced,
        as_of=now,
    )


@dataclass
class StatsCache:
    ttl: float = 600.0
    entries: dict[str, LibraryStats] = field(default_factory=dict)

    def get(self, state: PlatformState, library_id: str, now: float) -> LibraryStats:
        cached = self.entries.get(library_id)
        if cached is not None and self.ttl > 0 and now - cached.as_of < self.ttl:
            return cached
        stats = compute_library_stats(state, library_id, now)
        self.entries[library_id] = stats
        return stats

    def get_all(self, state: PlatformState, now: float) -> list[LibraryStats]:
        return [self.get(state, lid, now) for lid in sorted(state.inventories)]


# ---------------------------------------------------------------------------
# Views
# ---------------------------------------------------------------------------

def public_item_view(item: Item) -> dict:
    """What a client may see before answering: no is_correct, no explanation."""
    return {
        "id": item.id,
        "stem": item.stem,
        "options": [{"text": o.text, "kind": o.kind.value} for o in item.options],
    }


def _require(body: dict, key: str):
    if key not in body:
        raise ValidationError(f"missing field {key!r}")
    return body[key]


def _int_field(body: dict, key: str) -> int:
    value = _require(body, key)
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"field {key!r} must be an integer")


# ---------------------------------------------------------------------------
# Application factory
# ---------------------------------------------------------------------------

def create_app(
    platform: Platform,
    librarian_token: str,
    stats_ttl: float = 600.0,
    clock: Callable[[], float] = time.time,
) -> FastAPI:
    app = FastAPI(title="drillforge")
    cache = StatsCache(ttl=stats_ttl)
    lock = threading.Lock()

    def authenticated(request: Request) -> Profile:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise AuthError("missing bearer token")
        token = header[7:].strip()
        for profile in platform.state.profiles.values():
            if profile.token and profile.token == token:
                return profile
        raise AuthError("unknown token")

    def bearer_token(request: Request) -> Optional[str]:
        header = request.headers.get("authorization", "")
        if header.lower().startswith("bearer "):
            return header[7:].strip()
        return None

    @app.exception_handler(DrillforgeError)
    async def on_domain_error(request: Request, err: DrillforgeError):
        status = _STATUS_BY_CODE.get(err.code, 400)
        return JSONResponse(
            status_code=status, content={"code": err.code, "message": str(err)}
        )

    # -- drill sets and items ------------------------------------------------

    @app.get("/api/drillsets")
    def list_drillsets():
        with lock:
            return [
                {"id": ds.id, "title": ds.title, "n_items": len(ds.items)}
                for ds in platform.state.drill_sets.values()
            ]

    @app.get("/api/drillsets/{drillset_id}/next")
    def next_item(drillset_id: str, request: Request):
        with lock:
            profile = authenticated(request)
            item = platform.next_item(profile.account_id, drillset_id)
            return public_item_view(item)

    @app.post("/api/answers")
    def submit_answer(request: Request, body: dict = Body(...)):
        with lock:
            profile = authenticated(request)
            outcome = platform.submit_answer(
                profile.account_id,
                _require(body, "drillset_id"),
                _require(body, "item_id"),
                _int_field(body, "selected_index"),
                timestamp=int(clock()),
            )
            return outcome.to_dict()

    # -- exams ---------------------------------------------------------------

    @app.post("/api/exams")
    def begin_exam(request: Request, body: dict = Body(...)):
        with lock:
            profile = authenticated(request)
            drillset_id = _require(body, "drillset_id")
            n = _int_field(body, "n")
            exam_id, session = platform.begin_exam(profile.account_id, drillset_id, n)
            ds = platform.drill_set(drillset_id)
            return {
                "exam_id": exam_id,
                "n": len(session.exam_sequence),
                "first_item": public_item_view(ds.item(session.exam_sequence[0])),
            }

    @app.post("/api/exams/{exam_id}/answers")
    def answer_exam(exam_id: str, request: Request, body: dict = Body(...)):
        with lock:
            profile = authenticated(request)
            session = platform.exam(exam_id)
            if session.student_id != profile.account_id:
                raise ForbiddenError("exam belongs to another account")
            outcome = platform.submit_exam_answer(
                exam_id,
                _require(body, "item_id"),
                _int_field(body, "selected_index"),
                timestamp=int(clock()),
            )
            ds = platform.drill_set(session.drillset_id)
            done = session.cursor >= len(session.exam_sequence)
            return {
                **outcome.to_dict(),
                "next_item": None if done else public_item_view(
                    ds.item(session.exam_sequence[session.cursor])
                ),
                "score": platform.exam_score(exam_id) if done else None,
            }

    # -- grades, balance, purchases -------------------------------------------

    @app.get("/api/grades/{drillset_id}")
    def get_grade(drillset_id: str, request: Request):
        with lock:
            profile = authenticated(request)
            return platform.grade(profile.account_id, drillset_id).to_dict()

    @app.get("/api/balance")
    def get_balance(request: Request):
        with lock:
            profile = authenticated(request)
            return {
                "account_id": profile.account_id,
                "balance": platform.balance(profile.account_id),
            }

    @app.post("/api/purchase")
    def purchase(request: Request, body: dict = Body(...)):
        with lock:
            profile = authenticated(request)
            receipt = platform.purchase(
                profile.account_id, _require(body, "payload"), timestamp=int(clock())
            )
            return receipt.to_dict()

    # -- accounts and stats ----------------------------------------------------

    @app.post("/api/accounts")
    def create_account(request: Request, body: dict = Body(...)):
        with lock:
            kind_raw = _require(body, "kind")
            try:
                kind = AccountKind(kind_raw)
            except ValueError:
                raise ValidationError(f"unknown account kind {kind_raw!r}")
            if kind != AccountKind.SELF_REGISTERED:
                if bearer_token(request) != librarian_token:
                    raise ForbiddenError(
                        f"creating {kind.value} accounts requires the librarian token"
                    )
            profile = platform.create_account(
                kind,
                library_id=body.get("library_id"),
                display_name=body.get("display_name", ""),
                timestamp=int(clock()),
            )
            return {
                "account_id": profile.account_id,
                "kind": profile.kind.value,
                "library_id": profile.library_id,
                "token": profile.token,
            }

    @app.get("/api/stats/libraries")
    def library_stats():
        with lock:
            now = clock()
            return [stats.to_dict() for stats in cache.get_all(platform.state, now)]

    return app
