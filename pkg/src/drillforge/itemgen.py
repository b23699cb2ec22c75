"""Drill set generation from option pools.

Items are built by drawing one correct option and a truncated-Poisson number
of distractors from curated pools, with an occasional "None of the Above" /
"All of the Above" item whose special option always sits fourth and last.
Generation is fully deterministic given the config seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import ValidationError

NOTA_TEXT = "None of the above"
AOTA_TEXT = "All of the above"


class OptionKind(str, Enum):
    PLAIN = "plain"
    NOTA = "nota"
    AOTA = "aota"


# ---------------------------------------------------------------------------
# Pools
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoolEntry:
    text: str
    explanation: str = ""


@dataclass
class OptionPools:
    """Disjoint pools of correct options and distractors."""

    correct_pool: list[PoolEntry]
    distractor_pool: list[PoolEntry]

    def __post_init__(self):
        if not self.correct_pool:
            raise ValidationError("correct pool must not be empty")
        for pool, name in ((self.correct_pool, "correct"), (self.distractor_pool, "distractor")):
            texts = [e.text for e in pool]
            if any(not t for t in texts):
                raise ValidationError(f"{name} pool contains an empty text")
            if len(set(texts)) != len(texts):
                raise ValidationError(f"{name} pool contains duplicate texts")
            reserved = {NOTA_TEXT.lower(), AOTA_TEXT.lower()}
            if any(t.strip().lower() in reserved for t in texts):
                raise ValidationError(f"{name} pool uses a reserved special-option text")
        overlap = {e.text for e in self.correct_pool} & {e.text for e in self.distractor_pool}
        if overlap:
            raise ValidationError(f"pools overlap on texts: {sorted(overlap)[:3]}")

    @classmethod
    def from_dict(cls, data: dict) -> "OptionPools":
        try:
            correct = [PoolEntry(e["text"], e.get("explanation", "")) for e in data["correct"]]
            distractors = [PoolEntry(e["text"], e.get("explanation", "")) for e in data["distractors"]]
        except (KeyError, TypeError) as err:
            raise ValidationError(f"malformed pools document: {err}") from err
        return cls(correct, distractors)

    def to_dict(self) -> dict:
        return {
            "correct": [{"text": e.text, "explanation": e.explanation} for e in self.correct_pool],
            "distractors": [{"text": e.text, "explanation": e.explanation} for e in self.distractor_pool],
        }


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenConfig:
    """Generation parameters; the p_* defaults follow observed NOTA/AOTA ratios."""

    n_items: int = 100
    lam: float = 3.0
    k_min: int = 2
    k_max: int = 7
    p_nota: float = 0.217
    p_aota: float = 0.197
    p_nota_correct: float = 0.277
    p_aota_correct: float = 0.321
    seed: int = 0

    def __post_init__(self):
        if self.n_items < 0:
            raise ValidationError("n_items must be >= 0")
        if self.lam <= 0:
            raise ValidationError("lambda must be > 0")
        if self.k_min > self.k_max:
            raise ValidationError("k_min must be <= k_max")
        if self.k_min < 0:
            raise ValidationError("k_min must be >= 0")
        for name in ("p_nota", "p_aota", "p_nota_correct", "p_aota_correct"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValidationError(f"{name} must be in [0, 1]")
        if self.p_nota + self.p_aota > 1.0:
            raise ValidationError("p_nota + p_aota must be <= 1")

    def to_dict(self) -> dict:
        return {
            "n_items": self.n_items,
            "lambda": self.lam,
            "k_min": self.k_min,
            "k_max": self.k_max,
            "p_nota": self.p_nota,
            "p_aota": self.p_aota,
            "p_nota_correct": self.p_nota_correct,
            "p_aota_correct": self.p_aota_correct,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenConfig":
        kwargs = dict(data)
        if "lambda" in kwargs:
            kwargs["lam"] = kwargs.pop("lambda")
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# Items and drill sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Option:
    text: str
    is_correct: bool
    kind: OptionKind = OptionKind.PLAIN


@dataclass
class Item:
    id: str
    options: list[Option]
    explanation: str
    stem: str = ""  # per-item question text; empty when the set header serves

    def __post_init__(self):
        texts = [o.text for o in self.options]
        if len(set(texts)) != len(texts):
            raise ValidationError(f"item {self.id}: duplicate option texts")
        if sum(1 for o in self.options if o.is_correct) != 1:
            raise ValidationError(f"item {self.id}: exactly one option must be correct")
        specials = [i for i, o in enumerate(self.options) if o.kind != OptionKind.PLAIN]
        if specials and (specials != [3] or len(self.options) != 4):
            raise ValidationError(f"item {self.id}: special option must be fourth of four")

    @property
    def correct_index(self) -> int:
        return next(i for i, o in enumerate(self.options) if o.is_correct)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "stem": self.stem,
            "options": [
                {"text": o.text, "is_correct": o.is_correct, "kind": o.kind.value}
                for o in self.options
            ],
            "explanation": self.explanation,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Item":
        options = [
            Option(o["text"], bool(o["is_correct"]), OptionKind(o.get("kind", "plain")))
            for o in data["options"]
        ]
        return cls(
            id=data["id"],
            options=options,
            explanation=data["explanation"],
            stem=data.get("stem", ""),
        )


@dataclass
class DrillSet:
    id: str
    title: str
    header: str
    items: list[Item]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [item.id for item in self.items]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"drill set {self.id}: duplicate item ids")

    def item(self, item_id: str) -> Item:
        for it in self.items:
            if it.id == item_id:
                return it
        raise ValidationError(f"drill set {self.id}: no item {item_id!r}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "header": self.header,
            "items": [item.to_dict() for item in self.items],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DrillSet":
        return cls(
            id=data["id"],
            title=data.get("title", ""),
            header=data.get("header", ""),
            items=[Item.from_dict(i) for i in data["items"]],
            provenance=data.get("provenance", {}),
        )


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def truncated_poisson_pmf(lam: float, k_min: int, k_max: int) -> list[float]:
    """Normalized Poisson pmf restricted to [k_min, k_max]."""
    if k_min > k_max:
        raise ValidationError("k_min must be <= k_max")
    if lam <= 0:
        raise ValidationError("lambda must be > 0")
    raw = [math.exp(-lam) * lam ** k / math.factorial(k) for k in range(k_min, k_max + 1)]
    total = sum(raw)
    return [p / total for p in raw]


def sample_truncated_poisson(lam: float, k_min: int, k_max: int, rng: random.Random) -> int:
    """Inverse-CDF draw from the truncated Poisson pmf."""
    pmf = truncated_poisson_pmf(lam, k_min, k_max)
    u = rng.random()
    cumulative = 0.0
    for offset, p in enumerate(pmf):
        cumulative += p
        if u < cumulative:
            return k_min + offset
    return k_max  # float rounding fallback


# ---------------------------------------------------------------------------
# Item generation
# ---------------------------------------------------------------------------

def _explanation_for(entry: PoolEntry) -> str:
    return entry.explanation or f"The correct answer is: {entry.text}"


def generate_plain_item(
    pools: OptionPools,
    cfg: GenConfig,
    rng: random.Random,
    item_id: str = "item",
) -> Item:
    """One correct option plus k ~ truncated-Poisson distractors, shuffled."""
    if len(pools.distractor_pool) < cfg.k_max:
        raise ValidationError(
            f"distractor pool of {len(pools.distractor_pool)} is smaller than k_max={cfg.k_max}"
        )
    correct = rng.choice(pools.correct_pool)
    k = sample_truncated_poisson(cfg.lam, cfg.k_min, cfg.k_max, rng)
    distractors = rng.sample(pools.distractor_pool, k)
    options = [Option(correct.text, True)] + [Option(d.text, False) for d in distractors]
    rng.shuffle(options)
    return Item(id=item_id, options=options, explanation=_explanation_for(correct))


def generate_special_item(
    kind: OptionKind,
    special_correct: bool,
    pools: OptionPools,
    rng: random.Random,
    item_id: str = "item",
) -> Item:
    """Four options with NOTA/AOTA fixed at the fourth slot.

    Leading three: NOTA-correct -> 3 distractors; AOTA-correct -> 3 correct-pool
    entries; either-incorrect -> 1 correct + 2 distractors.
    """
    if kind not in (OptionKind.NOTA, OptionKind.AOTA):
        raise ValidationError(f"kind must be NOTA or AOTA, got {kind}")
    special_text = NOTA_TEXT if kind == OptionKind.NOTA else AOTA_TEXT

    if special_correct and kind == OptionKind.NOTA:
        if len(pools.distractor_pool) < 3:
            raise ValidationError("NOTA-correct item needs 3 distractor entries")
        leading = [Option(d.text, False) for d in rng.sample(pools.distractor_pool, 3)]
        explanation = "None of the listed options is correct."
    elif special_correct and kind == OptionKind.AOTA:
        if len(pools.correct_pool) < 3:
            raise ValidationError("AOTA-correct item needs 3 correct entries")
        leading = [Option(c.text, False) for c in rng.sample(pools.correct_pool, 3)]
        explanation = "Every listed option is correct."
    else:
        if len(pools.distractor_pool) < 2:
            raise ValidationError("special item needs 2 distractor entries")
        correct = rng.choice(pools.correct_pool)
        leading = [Option(correct.text, True)] + [
            Option(d.text, False) for d in rng.sample(pools.distractor_pool, 2)
        ]
        rng.shuffle(leading)
        explanation = _explanation_for(correct)

    options = leading + [Option(special_text, special_correct, kind)]
    return Item(id=item_id, options=options, explanation=explanation)


def generate_drill_set(
    pools: OptionPools,
    header: str,
    cfg: GenConfig,
    rng: Optional[random.Random] = None,
    set_id: Optional[str] = None,
    title: str = "",
) -> DrillSet:
    """Generate n_items items; each is independently NOTA / AOTA / plain."""
    if rng is None:
        rng = random.Random(cfg.seed)
    if cfg.n_items > 0:
        if len(pools.distractor_pool) < cfg.k_max:
            raise ValidationError(
                f"distractor pool of {len(pools.distractor_pool)} is smaller than k_max={cfg.k_max}"
            )
        if len(pools.distractor_pool) < 3 and cfg.p_nota > 0:
            raise ValidationError("pools too small for NOTA items")
        if len(pools.correct_pool) < 3 and cfg.p_aota > 0:
            raise ValidationError("pools too small for AOTA items")
    if set_id is None:
        set_id = f"ds-{cfg.seed:08x}"

    items = []
    for i in range(cfg.n_items):
        item_id = f"{set_id}-{i:04d}"
        u = rng.random()
        if u < cfg.p_nota:
            special_correct = rng.random() < cfg.p_nota_correct
            item = generate_special_item(OptionKind.NOTA, special_correct, pools, rng, item_id)
        elif u < cfg.p_nota + cfg.p_aota:
            special_correct = rng.random() < cfg.p_aota_correct
            item = generate_special_item(OptionKind.AOTA, special_correct, pools, rng, item_id)
        else:
            item = generate_plain_item(pools, cfg, rng, item_id)
        items.append(item)

    provenance = {
        "generator": "pools",
        "config": cfg.to_dict(),
        "correct_pool_size": len(pools.correct_pool),
        "distractor_pool_size": len(pools.distractor_pool),
    }
    return DrillSet(id=set_id, title=title, header=header, items=items, provenance=provenance)


def special_kind(item: Item) -> Optional[OptionKind]:
    """The item's NOTA/AOTA kind, or None for a plain item."""
    for option in item.options:
        if option.kind != OptionKind.PLAIN:
            return option.kind
    return None
