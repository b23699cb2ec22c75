"""Parametric drill set generation from a single item template.

A template renders its body with random integer bindings and derives the
correct option plus distractors from arithmetic expressions evaluated
exactly. Distractors that collide with the correct value (or each other)
are dropped; an item draw survives only if at least two distractors remain.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import ValidationError
from .expressions import (
    EvaluationError,
    Node,
    evaluate,
    format_rational,
    parse_expression,
    variables_in,
)
from .itemgen import DrillSet, Item, Option

_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")
_RETRIES_PER_ITEM = 50


class TemplateError(ValidationError):
    code = "template"


@dataclass
class Template:
    body: str
    vars: dict[str, tuple[int, int]]  # name -> inclusive [lo, hi]
    answer_expr: str
    distractor_exprs: list[str]
    n_items: int = 100
    seed: int = 0
    id: Optional[str] = None
    title: str = ""
    explanation: str = ""  # optional; may reference {answer} and any var
    _answer_tree: Node = field(init=False, repr=False)
    _distractor_trees: list[Node] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.distractor_exprs:
            raise TemplateError("template needs at least one distractor expression")
        if self.n_items < 0:
            raise TemplateError("n_items must be >= 0")
        for name, (lo, hi) in self.vars.items():
            if lo > hi:
                raise TemplateError(f"variable {name!r} has empty range [{lo}, {hi}]")

        normalize = lambda s: "".join(s.split())
        if any(normalize(d) == normalize(self.answer_expr) for d in self.distractor_exprs):
            raise TemplateError("a distractor expression equals the answer expression")

        self._answer_tree = parse_expression(self.answer_expr)
        self._distractor_trees = [parse_expression(d) for d in self.distractor_exprs]

        declared = set(self.vars)
        used = set(_PLACEHOLDER.findall(self.body)) | variables_in(self._answer_tree)
        for tree in self._distractor_trees:
            used |= variables_in(tree)
        if self.explanation:
            used |= set(_PLACEHOLDER.findall(self.explanation)) - {"answer"}
        undeclared = used - declared
        if undeclared:
            raise TemplateError(f"undeclared variables: {sorted(undeclared)}")

    @classmethod
    def from_dict(cls, data: dict) -> "Template":
        try:
            vars_ = {name: (int(lo), int(hi)) for name, (lo, hi) in data["vars"].items()}
            return cls(
                body=data["body"],
                vars=vars_,
                answer_expr=data["answer"],
                distractor_exprs=list(data["distractors"]),
                n_items=int(data.get("n_items", 100)),
                seed=int(data.get("seed", 0)),
                id=data.get("id"),
                title=data.get("title", ""),
                explanation=data.get("explanation", ""),
            )
        except (KeyError, TypeError, ValueError) as err:
            raise TemplateError(f"malformed template document: {err}") from err

    def to_dict(self) -> dict:
        return {
            "body": self.body,
            "vars": {k: [lo, hi] for k, (lo, hi) in self.vars.items()},
            "answer": self.answer_expr,
            "distractors": list(self.distractor_exprs),
            "n_items": self.n_items,
            "seed": self.seed,
            "id": self.id,
            "title": self.title,
            "explanation": self.explanation,
        }


def _render(text: str, values: dict[str, str]) -> str:
    return _PLACEHOLDER.sub(lambda m: values.get(m.group(1), m.group(0)), text)


def _draw_item(tmpl: Template, rng: random.Random, item_id: str) -> Optional[Item]:
    """One attempted draw; None when too few distractors survive."""
    bindings = {name: rng.randint(lo, hi) for name, (lo, hi) in sorted(tmpl.vars.items())}
    try:
        answer_value = evaluate(tmpl._answer_tree, bindings)
    except EvaluationError:
        return None  # e.g. a drawn zero denominator; redraw

    seen = {answer_value}
    distractor_values: list[Fraction] = []
    for tree in tmpl._distractor_trees:
        try:
            value = evaluate(tree, bindings)
        except EvaluationError:
            continue  # drop distractors that fail to evaluate for this draw
        if value in seen:
            continue
        seen.add(value)
        distractor_values.append(value)
    if len(distractor_values) < 2:
        return None

    rendered = {name: str(value) for name, value in bindings.items()}
    answer_text = format_rational(answer_value)
    options = [Option(answer_text, True)] + [
        Option(format_rational(v), False) for v in distractor_values
    ]
    rng.shuffle(options)
    if tmpl.explanation:
        explanation = _render(tmpl.explanation, {**rendered, "answer": answer_text})
    else:
        explanation = f"The correct answer is {answer_text}."
    return Item(
        id=item_id,
        options=options,
        explanation=explanation,
        stem=_render(tmpl.body, rendered),
    )


def generate_from_template(tmpl: Template, rng: Optional[random.Random] = None) -> DrillSet:
    """Deterministically expand a template into a drill set of n_items items."""
    if rng is None:
        rng = random.Random(tmpl.seed)
    set_id = tmpl.id or f"tmpl-{tmpl.seed:08x}"

    items = []
    for i in range(tmpl.n_items):
        item = None
        for _ in range(_RETRIES_PER_ITEM):
            item = _draw_item(tmpl, rng, f"{set_id}-{i:04d}")
            if item is not None:
                break
        if item is None:
            raise TemplateError(
                f"template is degenerate: {_RETRIES_PER_ITEM} draws for item {i} "
                "all left fewer than 2 distinct distractors"
            )
        items.append(item)

    provenance = {"generator": "template", "template": tmpl.to_dict()}
    return DrillSet(
        id=set_id,
        title=tmpl.title,
        header="",
        items=items,
        provenance=provenance,
    )
