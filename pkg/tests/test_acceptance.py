"""Release acceptance suite: one test per shipped guarantee.

Each test prints a single "[acceptance] criterion N PASS/FAIL" line (visible
under pytest -s) and enforces the stated tolerance and time budget.
"""

from __future__ import annotations

import random
import time
from contextlib import contextmanager
from fractions import Fraction
from math import sqrt

import pytest
from fastapi.testclient import TestClient

from drillforge.grading import (
    AnswerHistory,
    CourseGradeConfig,
    course_grade,
    drill_grade,
    taper_length,
)
from drillforge.itemgen import (
    GenConfig,
    OptionKind,
    OptionPools,
    PoolEntry,
    generate_drill_set,
    sample_truncated_poisson,
    special_kind,
    truncated_poisson_pmf,
)
from drillforge.ledger import (
    AccountKind,
    ConflictError,
    InsufficientFundsError,
    Ledger,
    LibraryInventory,
    RewardRuleSet,
    Tablet,
    payment_payload,
    purchase_tablet,
)
from drillforge.platform import Platform, replay
from drillforge.service import create_app
from drillforge.simulate import UNTIL_ACE, CohortSpec, run_simulation
from drillforge.storage import EventLog, anonymized_export, canonical_json


@contextmanager
def criterion(num: int, label: str):
    try:
        yield
    except BaseException:
        print(f"[acceptance] criterion {num:2d} FAIL: {label}")
        raise
    print(f"[acceptance] criterion {num:2d} PASS: {label}")


def make_pools(n_correct: int, n_distractors: int) -> OptionPools:
    return OptionPools(
        correct_pool=[PoolEntry(f"right answer {i}", f"because {i}") for i in range(n_correct)],
        distractor_pool=[PoolEntry(f"tempting mistake {i}") for i in range(n_distractors)],
    )


def wrong_index(item, rng: random.Random) -> int:
    return rng.choice([i for i in range(len(item.options)) if i != item.correct_index])


# ---------------------------------------------------------------------------
# 1. Minimal ace
# ---------------------------------------------------------------------------

def test_01_minimal_ace():
    with criterion(1, "exactly 7 straight correct answers ace a fresh drill set"):
        drill_grade(AnswerHistory.from_bits([1] * 7))  # warm up before timing
        start = time.perf_counter()
        state = drill_grade(AnswerHistory.from_bits([1] * 7))
        assert state.grade == 1.0
        assert state.complete
        assert state.aced
        for shorter in range(7):
            partial = drill_grade(AnswerHistory.from_bits([1] * shorter))
            assert not partial.aced
            assert not partial.complete
        assert time.perf_counter() - start < 1e-3


# ---------------------------------------------------------------------------
# 2. Taper cap, fuzzed
# ---------------------------------------------------------------------------

def test_02_taper_cap_fuzz():
    with criterion(2, "taper length never exceeds 30 over 100000 random histories"):
        rng = random.Random(0xD0_17)
        for _ in range(100_000):
            length = rng.randint(0, 40)
            bits = [rng.getrandbits(1) for _ in range(length)]
            history = AnswerHistory.from_bits(bits)
            target = taper_length(history)
            errors = sum(1 for b in bits[-30:] if not b)
            assert target == min(30, 7 + 2 * errors)
            assert target <= 30


# ---------------------------------------------------------------------------
# 3. Grade-oracle equivalence
# ---------------------------------------------------------------------------

def weight_formula_oracle(bits: list[int]):
    """Brute-force restatement of the grade: taper from errors in the last 30,
    window of min(len, taper), weights 1..L oldest to newest, exact ratio."""
    errors = sum(1 for b in bits[-30:] if not b)
    target = min(30, 7 + 2 * errors)
    effective = min(len(bits), target)
    window = bits[len(bits) - effective:]
    weights = list(range(1, effective + 1))
    if effective == 0:
        grade = 0.0
    else:
        grade = float(Fraction(sum(w * b for w, b in zip(weights, window)), sum(weights)))
    complete = len(bits) >= target
    aced = complete and grade >= 1.0 - 1e-9
    return grade, target, complete, aced


def test_03_grade_oracle_equivalence():
    with criterion(3, "drill grade matches the brute-force weight oracle on all histories up to length 12"):
        start = time.perf_counter()
        checked = 0
        for length in range(13):
            for mask in range(1 << length):
                bits = [(mask >> i) & 1 for i in range(length)]
                state = drill_grade(AnswerHistory.from_bits(bits))
                grade, target, complete, aced = weight_formula_oracle(bits)
                assert state.grade == grade
                assert state.taper_len == target
                assert state.complete == complete
                assert state.aced == aced
                checked += 1
        assert checked == (1 << 13) - 1  # all bit histories of length 0..12
        assert time.perf_counter() - start < 1.0


# ---------------------------------------------------------------------------
# 4. Generation at published scale
# ---------------------------------------------------------------------------

# (correct pool, distractor pool, items to generate) for the eight sets
PUBLISHED_SETS = [
    (43, 60, 280),
    (41, 53, 300),
    (15, 24, 300),
    (13, 23, 300),
    (45, 62, 300),
    (16, 38, 300),
    (26, 35, 300),
    (24, 38, 300),
]


def test_04_generation_at_scale():
    with criterion(4, "2380 generated items: NOTA within 517 +/- 60, AOTA within 470 +/- 60, specials fourth"):
        start = time.perf_counter()
        nota = aota = total = 0
        for k, (n_correct, n_distractors, n_items) in enumerate(PUBLISHED_SETS):
            pools = make_pools(n_correct, n_distractors)
            ds = generate_drill_set(
                pools, f"Set {k}", GenConfig(n_items=n_items, seed=4000 + k)
            )
            assert len(ds.items) == n_items
            total += n_items
            for item in ds.items:
                kind = special_kind(item)
                if kind is None:
                    continue
                assert len(item.options) == 4
                assert item.options[3].kind == kind
                assert all(o.kind == OptionKind.PLAIN for o in item.options[:3])
                if kind == OptionKind.NOTA:
                    nota += 1
                else:
                    aota += 1
        assert total == 2380
        assert abs(nota - 517) <= 60
        assert abs(aota - 470) <= 60
        assert time.perf_counter() - start < 5.0


# ---------------------------------------------------------------------------
# 5. Truncated-Poisson sampler
# ---------------------------------------------------------------------------

def test_05_truncated_poisson_sampler():
    with criterion(5, "empirical option-count pmf within 3 sigma per bucket for lambda 1 and 3"):
        start = time.perf_counter()
        draws = 100_000
        for lam in (1.0, 3.0):
            pmf = truncated_poisson_pmf(lam, 2, 7)
            rng = random.Random(int(lam * 1000))
            counts = {k: 0 for k in range(2, 8)}
            for _ in range(draws):
                counts[sample_truncated_poisson(lam, 2, 7, rng)] += 1
            for k, p in zip(range(2, 8), pmf):
                sigma = sqrt(draws * p * (1 - p))
                assert abs(counts[k] - draws * p) <= 3 * sigma, (lam, k)
        assert time.perf_counter() - start < 2.0


# ---------------------------------------------------------------------------
# 6. Perfect student over a 50-set collection
# ---------------------------------------------------------------------------

def test_06_perfect_student_collection():
    with criterion(6, "ability-1.0 student aces a 50-set collection in exactly 350 answers for 1,500,000 SMLY"):
        start = time.perf_counter()
        spec = CohortSpec(n_students=1, ability=1.0, sets=50, policy=UNTIL_ACE, seed=11)
        report = run_simulation(spec)
        student = report.students[0]
        rules = RewardRuleSet()
        assert student.attempts == 350
        assert report.total_attempts == 350
        assert student.sets_aced == 50
        assert student.collection_aced
        assert student.smly == rules.per_collection_ace + 50 * rules.per_set_ace
        assert student.smly == 1_500_000
        assert time.perf_counter() - start < 1.0


# ---------------------------------------------------------------------------
# 7. Ledger safety fuzz
# ---------------------------------------------------------------------------

def test_07_ledger_safety_fuzz():
    with criterion(7, "1000-op ledger fuzz conserves supply with no negative balance or double sale"):
        start = time.perf_counter()
        rng = random.Random(1007)
        ledger = Ledger()
        students = [f"fuzz-student-{i}" for i in range(8)]
        for sid in students:
            ledger.create_account(sid, AccountKind.PRE_REGISTERED)

        tablets: dict[str, Tablet] = {}
        inventories: dict[str, LibraryInventory] = {}
        for lib in range(3):
            library_id = f"fuzz-lib-{lib}"
            inventories[library_id] = LibraryInventory(library_id, tablet_count=4)
            for t in range(4):
                tablet_id = f"FZT-{lib}{t}"
                tablets[tablet_id] = Tablet(
                    id=tablet_id,
                    library_id=library_id,
                    payment_address=f"ADDR-{tablet_id}",
                    price=1_000,
                )

        minted = 0
        sold: set[str] = set()
        for op in range(1_000):
            roll = rng.random()
            if roll < 0.45:
                amount = rng.randint(1, 5_000)
                ledger.mint(rng.choice(students), amount, "reward", timestamp=op)
                minted += amount
            elif roll < 0.80:
                src, dst = rng.sample(students, 2)
                try:
                    ledger.transfer(src, dst, rng.randint(1, 8_000), timestamp=op)
                except InsufficientFundsError:
                    pass
            else:
                tablet = rng.choice(list(tablets.values()))
                payload = payment_payload(tablet)
                try:
                    receipt = purchase_tablet(
                        ledger, rng.choice(students), payload, tablets, inventories,
                        timestamp=op,
                    )
                except InsufficientFundsError:
                    assert tablet.id not in sold
                except ConflictError:
                    assert tablet.id in sold  # only a sold tablet conflicts here
                else:
                    assert tablet.id not in sold, "tablet sold twice"
                    sold.add(tablet.id)
                    assert receipt.tablet_id == tablet.id

            balances = [a.balance for a in ledger.accounts.values()]
            assert min(balances) >= 0
            assert sum(balances) == minted
        assert time.perf_counter() - start < 2.0


# ---------------------------------------------------------------------------
# 8. Purchase + replenishment
# ---------------------------------------------------------------------------

def test_08_purchase_replenishment():
    with criterion(8, "first sale in a 10-tablet library leaves 19 in stock and costs exactly 1,000,000"):
        platform = Platform(seed=8)
        library_id = platform.register_library("Village library", tablet_count=10)
        buyer = platform.create_account(
            AccountKind.PRE_REGISTERED, library_id=library_id, display_name="Buyer"
        )
        platform.mint(buyer.account_id, 2_500_000, "grant", timestamp=1)
        before = platform.balance(buyer.account_id)
        tablet = platform.state.tablets["TBL-0001"]
        receipt = platform.purchase(buyer.account_id, payment_payload(tablet), timestamp=2)
        assert receipt.stock_after == 19
        assert platform.state.inventories[library_id].tablet_count == 19
        assert before - platform.balance(buyer.account_id) == 1_000_000


# ---------------------------------------------------------------------------
# 9. Replay determinism
# ---------------------------------------------------------------------------

def test_09_replay_determinism(tmp_path):
    with criterion(9, "replaying a 10000-event log reproduces live state; a torn final line is skipped"):
        start = time.perf_counter()
        platform = Platform(seed=9)
        library_id = platform.register_library("Replay library", tablet_count=10)
        pools = make_pools(30, 40)
        sets = []
        for k in range(3):
            ds = generate_drill_set(
                pools, f"Replay set {k}", GenConfig(n_items=12, seed=900 + k),
                title=f"Replay {k}",
            )
            platform.upload_drill_set(ds, collection_id="replay-course")
            sets.append(ds)
        students = [
            platform.create_account(
                AccountKind.PRE_REGISTERED, library_id=library_id, display_name=f"Student {i}"
            ).account_id
            for i in range(10)
        ]
        platform.mint(students[0], 2_000_000, "grant", timestamp=1)
        tablet = platform.state.tablets["TBL-0001"]
        platform.purchase(students[0], payment_payload(tablet), timestamp=2)

        rng = random.Random(99)
        ts = 3
        while len(platform.log) < 10_000:
            account_id = rng.choice(students)
            ds = rng.choice(sets)
            item = platform.next_item(account_id, ds.id)
            if rng.random() < 0.75:
                idx = item.correct_index
            else:
                idx = wrong_index(item, rng)
            platform.submit_answer(account_id, ds.id, item.id, idx, timestamp=ts)
            ts += 1
        assert len(platform.log) >= 10_000

        path = tmp_path / "events.jsonl"
        path.write_bytes(
            b"".join(
                canonical_json(r.to_dict()).encode("utf-8") + b"\n" for r in platform.log
            )
        )
        live = platform.state.snapshot()

        reopened = EventLog(path)
        assert len(reopened) == len(platform.log)
        assert replay(reopened).snapshot() == live
        reopened.close()

        # a torn final line (crash mid-write) is dropped on open, nothing else
        with path.open("ab") as fh:
            fh.write(b'{"seq": 999999, "kind": "answer", "timestamp": 1, "payl')
        repaired = EventLog(path)
        assert len(repaired) == len(platform.log)
        assert replay(repaired).snapshot() == live
        repaired.close()
        assert time.perf_counter() - start < 5.0


# ---------------------------------------------------------------------------
# 10. Anonymization
# ---------------------------------------------------------------------------

def test_10_anonymization():
    with criterion(10, "stats responses and anonymized exports contain no roster identifier"):
        platform = Platform(seed=10)
        library_id = platform.register_library("Anonymization library", tablet_count=3)
        ds = generate_drill_set(
            make_pools(20, 30), "Scan set", GenConfig(n_items=10, seed=55), title="Scan"
        )
        platform.upload_drill_set(ds, collection_id="scan-course")

        markers: list[str] = []
        students = []
        for i in range(3):
            profile = platform.create_account(
                AccountKind.PRE_REGISTERED,
                library_id=library_id,
                display_name=f"Vandelay Ostrich {i}",
                account_id=f"ROSTER-STUDENT-{i}-QQ",
                token=f"ROSTERTOKEN{i}SECRETVALUE",
            )
            students.append(profile.account_id)
            markers += [profile.account_id, profile.display_name, profile.token]

        rng = random.Random(3)
        for ts, account_id in enumerate(students * 4):
            item = platform.next_item(account_id, ds.id)
            platform.submit_answer(account_id, ds.id, item.id, item.correct_index, timestamp=ts)

        # every marker really is present upstream, so a clean scan means something
        raw_log = "\n".join(canonical_json(r.to_dict()) for r in platform.log)
        for marker in markers:
            assert marker in raw_log

        export = anonymized_export(platform.log)
        assert export  # non-empty: the scan has material to miss
        for marker in markers:
            assert marker.encode("utf-8") not in export

        librarian_token = "LIBRARIAN-SHARED-SECRET-42"
        client = TestClient(create_app(platform, librarian_token, stats_ttl=0.0))
        response = client.get("/api/stats/libraries")
        assert response.status_code == 200
        stats = response.json()[0]
        assert stats["n_students"] == 3
        for marker in markers + [librarian_token]:
            assert marker not in response.text


# ---------------------------------------------------------------------------
# 11. Exam mode
# ---------------------------------------------------------------------------

def test_11_exam_mode():
    with criterion(11, "a 50-item exam grades as the exact fraction correct; order and duplicates enforced"):
        platform = Platform(seed=111)
        platform.register_library("Exam library", tablet_count=1)
        ds = generate_drill_set(
            make_pools(60, 80), "Exam set", GenConfig(n_items=60, seed=42), title="Exam"
        )
        platform.upload_drill_set(ds)
        student = platform.create_account(AccountKind.PRE_REGISTERED, library_id="lib-1")

        rng = random.Random(7)
        exam_id, session = platform.begin_exam(student.account_id, ds.id, 50)
        assert len(session.exam_sequence) == 50
        wrong_at = {3, 11, 19, 27, 35, 41, 47}
        for pos, item_id in enumerate(session.exam_sequence):
            item = ds.item(item_id)
            if pos in wrong_at:
                idx = wrong_index(item, rng)
            else:
                idx = item.correct_index
            platform.submit_exam_answer(exam_id, item_id, idx, timestamp=pos)
        assert platform.exam_score(exam_id) == 43 / 50

        exam2, session2 = platform.begin_exam(student.account_id, ds.id, 50)
        with pytest.raises(ConflictError):
            platform.submit_exam_answer(exam2, session2.exam_sequence[1], 0, timestamp=60)
        platform.submit_exam_answer(exam2, session2.exam_sequence[0], 0, timestamp=61)
        with pytest.raises(ConflictError):
            platform.submit_exam_answer(exam2, session2.exam_sequence[0], 0, timestamp=62)


# ---------------------------------------------------------------------------
# 12. Exit-option logic
# ---------------------------------------------------------------------------

def test_12_exit_option():
    with criterion(12, "interim 8.0 opt-out passes, 4.0 opt-out fails, 9.0 with final 10.0 blends to 9.5"):
        cfg = CourseGradeConfig(component_weights={"drills": 1.0}, final_weight=0.5)
        assert course_grade({"drills": 8.0}, None, cfg, opted_out=True).status == "pass"
        assert course_grade({"drills": 4.0}, None, cfg, opted_out=True).status == "fail"
        blended = course_grade({"drills": 9.0}, 10.0, cfg, opted_out=False)
        assert blended.status == "numeric"
        assert blended.grade == 9.5
