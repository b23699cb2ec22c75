"""Integer-unit SMLY ledger: accounts, transfers, milestone rewards,
QR-style payment payloads, tablet purchase and library stock replenishment.

The real cryptocurrency is replaced by a centralized append-only transaction
list; conservation (sum of balances == sum minted) holds at every step.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

from .errors import ConflictError, NotFoundError, ValidationError

MINT = "MINT"
ESCROW_ACCOUNT = "tablet-escrow"

SET_ACED = "set_aced"
COLLECTION_ACED = "collection_aced"


class AccountKind(str, Enum):
    PRE_REGISTERED = "pre_registered"
    SELF_REGISTERED = "self_registered"
    CHARITY = "charity"
    TABLET_ESCROW = "tablet_escrow"


class TabletStatus(str, Enum):
    AVAILABLE = "available"
    LENT = "lent"
    SOLD = "sold"


class InsufficientFundsError(ConflictError):
    code = "insufficient_funds"


class PayloadError(ValidationError):
    code = "bad_payload"


# ---------------------------------------------------------------------------
# Core records
# ---------------------------------------------------------------------------

@dataclass
class Account:
    id: str
    kind: AccountKind
    balance: int = 0


@dataclass(frozen=True)
class Transaction:
    seq: int
    src: str  # account id or MINT
    dst: str
    amount: int
    memo: str
    timestamp: int

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "from": self.src,
            "to": self.dst,
            "amount": self.amount,
            "memo": self.memo,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Transaction":
        return cls(
            seq=int(data["seq"]),
            src=data["from"],
            dst=data["to"],
            amount=int(data["amount"]),
            memo=data.get("memo", ""),
            timestamp=int(data.get("timestamp", 0)),
        )


@dataclass(frozen=True)
class RewardRuleSet:
    per_set_ace: int = 10_000
    per_collection_ace: int = 1_000_000
    self_registered_multiplier: float = 0.0

    def __post_init__(self):
        if self.per_set_ace < 0 or self.per_collection_ace < 0:
            raise ValidationError("reward amounts must be >= 0")
        if not (0.0 <= self.self_registered_multiplier <= 1.0):
            raise ValidationError("self_registered_multiplier must be in [0, 1]")


def reward_for_event(event: str, account_kind: AccountKind, rules: RewardRuleSet) -> int:
    """Reward amount for an ace milestone, scaled down for self-registered accounts."""
    if event == SET_ACED:
        base = rules.per_set_ace
    elif event == COLLECTION_ACED:
        base = rules.per_collection_ace
    else:
        raise ValidationError(f"unknown reward event {event!r}")
    if account_kind == AccountKind.SELF_REGISTERED:
        return int(base * rules.self_registered_multiplier)
    return base


# ---------------------------------------------------------------------------
# Ledger
# ---------------------------------------------------------------------------

class Ledger:
    """Single-writer account store with an append-only transaction list."""

    def __init__(self):
        self.accounts: dict[str, Account] = {}
        self.transactions: list[Transaction] = []

    # -- accounts ----------------------------------------------------------

    def create_account(self, account_id: str, kind: AccountKind) -> Account:
        if account_id in self.accounts:
            raise ConflictError(f"account {account_id!r} already exists")
        if account_id == MINT:
            raise ValidationError(f"{MINT!r} is reserved")
        account = Account(id=account_id, kind=AccountKind(kind))
        self.accounts[account_id] = account
        return account

    def account(self, account_id: str) -> Account:
        try:
            return self.accounts[account_id]
        except KeyError:
            raise NotFoundError(f"unknown account {account_id!r}") from None

    def balance(self, account_id: str) -> int:
        return self.account(account_id).balance

    # -- movements ---------------------------------------------------------

    def _append(self, src: str, dst: str, amount: int, memo: str, timestamp: int) -> Transaction:
        txn = Transaction(
            seq=len(self.transactions) + 1,
            src=src,
            dst=dst,
            amount=amount,
            memo=memo,
            timestamp=timestamp,
        )
        self.transactions.append(txn)
        return txn

    def mint(self, dst: str, amount: int, memo: str = "", timestamp: int = 0) -> Transaction:
        if amount <= 0:
            raise ValidationError("mint amount must be > 0")
        account = self.account(dst)
        account.balance += amount
        return self._append(MINT, dst, amount, memo, timestamp)

    def transfer(self, src: str, dst: str, amount: int, memo: str = "", timestamp: int = 0) -> Transaction:
        if amount <= 0:
            raise ValidationError("transfer amount must be > 0")
        if src == dst:
            raise ValidationError("transfer source and destination must differ")
        source = self.account(src)
        destination = self.account(dst)
        if source.balance < amount:
            raise InsufficientFundsError(
                f"account {src!r} holds {source.balance}, needs {amount}"
            )
        source.balance -= amount
        destination.balance += amount
        return self._append(src, dst, amount, memo, timestamp)

    # -- invariants and replay ----------------------------------------------

    @property
    def total_minted(self) -> int:
        return sum(t.amount for t in self.transactions if t.src == MINT)

    def assert_conservation(self) -> None:
        total = sum(a.balance for a in self.accounts.values())
        if total != self.total_minted:
            raise AssertionError(
                f"conservation violated: balances {total} != minted {self.total_minted}"
            )

    @classmethod
    def replay(cls, accounts: Iterable[tuple[str, AccountKind]],
               transactions: Iterable[Transaction]) -> "Ledger":
        """Rebuild a ledger by re-applying the transaction log onto fresh accounts."""
        ledger = cls()
        for account_id, kind in accounts:
            ledger.create_account(account_id, kind)
        for txn in transactions:
            if txn.seq != len(ledger.transactions) + 1:
                raise ValidationError(f"transaction seq {txn.seq} out of order")
            if txn.src == MINT:
                ledger.mint(txn.dst, txn.amount, txn.memo, txn.timestamp)
            else:
                ledger.transfer(txn.src, txn.dst, txn.amount, txn.memo, txn.timestamp)
        return ledger


# ---------------------------------------------------------------------------
# Tablets and purchases
# ---------------------------------------------------------------------------

@dataclass
class Tablet:
    id: str
    library_id: str
    payment_address: str
    price: int = 1_000_000
    status: TabletStatus = TabletStatus.AVAILABLE


@dataclass
class LibraryInventory:
    library_id: str
    tablet_count: int
    first_sale_bonus_paid: bool = False

    def __post_init__(self):
        if self.tablet_count < 0:
            raise ValidationError("tablet_count must be >= 0")


@dataclass(frozen=True)
class PurchaseReceipt:
    tablet_id: str
    library_id: str
    buyer: str
    price: int
    transaction_seq: int
    stock_after: int
    timestamp: int

    def to_dict(self) -> dict:
        return {
            "tablet_id": self.tablet_id,
            "library_id": self.library_id,
            "buyer": self.buyer,
            "price": self.price,
            "transaction_seq": self.transaction_seq,
            "stock_after": self.stock_after,
            "timestamp": self.timestamp,
        }


_PAYLOAD_RE = re.compile(r"^smly:([A-Za-z0-9._-]+)\?amount=(\d+)&tablet=([A-Za-z0-9._-]+)$")


def payment_payload(tablet: Tablet) -> str:
    """Canonical scan-to-pay string; stable for QR encoding."""
    return f"smly:{tablet.payment_address}?amount={tablet.price}&tablet={tablet.id}"


def parse_payment_payload(payload: str) -> dict:
    match = _PAYLOAD_RE.match(payload)
    if not match:
        raise PayloadError(f"malformed payment payload: {payload!r}")
    address, amount, tablet_id = match.groups()
    return {"payment_address": address, "amount": int(amount), "tablet_id": tablet_id}


def purchase_tablet(
    ledger: Ledger,
    buyer_id: str,
    payload: str,
    tablets: Mapping[str, Tablet],
    inventories: Mapping[str, LibraryInventory],
    timestamp: int = 0,
    escrow_id: str = ESCROW_ACCOUNT,
) -> PurchaseReceipt:
    """Pay for a tablet: transfer price to escrow, mark sold, restock.

    The first sale in a library triggers the +10 donation bonus; later sales
    replenish one-for-one. All checks run before any state changes.
    """
    request = parse_payment_payload(payload)
    tablet = tablets.get(request["tablet_id"])
    if tablet is None:
        raise NotFoundError(f"unknown tablet {request['tablet_id']!r}")
    if tablet.payment_address != request["payment_address"]:
        raise PayloadError("payment address does not match the tablet")
    if request["amount"] != tablet.price:
        raise PayloadError(f"payload amount {request['amount']} != tablet price {tablet.price}")
    if tablet.status == TabletStatus.SOLD:
        raise ConflictError(f"tablet {tablet.id!r} is already sold")
    inventory = inventories.get(tablet.library_id)
    if inventory is None:
        raise NotFoundError(f"unknown library {tablet.library_id!r}")
    if inventory.tablet_count < 1:
        raise ConflictError(f"library {tablet.library_id!r} has no stock on record")
    buyer = ledger.account(buyer_id)
    if buyer.balance < tablet.price:
        raise InsufficientFundsError(
            f"account {buyer_id!r} holds {buyer.balance}, tablet costs {tablet.price}"
        )
    if escrow_id not in ledger.accounts:
        ledger.create_account(escrow_id, AccountKind.TABLET_ESCROW)

    txn = ledger.transfer(buyer_id, escrow_id, tablet.price,
                          memo=f"tablet:{tablet.id}", timestamp=timestamp)
    tablet.status = TabletStatus.SOLD
    inventory.tablet_count -= 1
    if not inventory.first_sale_bonus_paid:
        inventory.tablet_count += 10
        inventory.first_sale_bonus_paid = True
    else:
        inventory.tablet_count += 1
    return PurchaseReceipt(
        tablet_id=tablet.id,
        library_id=tablet.library_id,
        buyer=buyer_id,
        price=tablet.price,
        transaction_seq=txn.seq,
        stock_after=inventory.tablet_count,
        timestamp=timestamp,
    )


# ---------------------------------------------------------------------------
# JSON Lines serialization of the transaction log
# ---------------------------------------------------------------------------

def transactions_to_jsonl(transactions: Iterable[Transaction]) -> str:
    import json

    return "".join(
        json.dumps(t.to_dict(), sort_keys=True, ensure_ascii=False) + "\n"
        for t in transactions
    )


def transactions_from_jsonl(text: str) -> list[Transaction]:
    import json

    out = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(Transaction.from_dict(json.loads(line)))
        except (ValueError, KeyError) as err:
            raise ValidationError(f"bad transaction at line {line_no}: {err}") from err
    return out
