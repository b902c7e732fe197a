"""Precision/recall/Hmean for semantic entity recognition and relation extraction.

Entities match on (label, whitespace-trimmed text); relations match on the
ordered pair of their endpoint entities' (text, label). Matching is greedy
and one-to-one in prediction order, which is optimal here because a match
only depends on key equality. Batch scores aggregate raw counts over all
images (micro average).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, NamedTuple, Sequence

from ..errors import ValidationError
from ..geometry import Box


@dataclass(frozen=True)
class Entity:
    id: str
    label: str
    text: str
    box: Box | None = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.label, self.text.strip())


@dataclass(frozen=True)
class Relation:
    question_id: str
    answer_id: str


@dataclass
class KieDocument:
    """Entities and question-to-answer links of one image."""

    image_id: str
    entities: list[Entity] = field(default_factory=list)
    relations: list[Relation] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        ids = Counter(e.id for e in self.entities)
        dup = [i for i, n in ids.items() if n > 1]
        if dup:
            raise ValidationError(f"image {self.image_id}: duplicate entity ids {sorted(dup)}")
        for r in self.relations:
            for end in (r.question_id, r.answer_id):
                if end not in ids:
                    raise ValidationError(f"image {self.image_id}: relation references unknown entity id {end!r}")

    def relation_keys(self) -> list[tuple]:
        by_id = {e.id: e for e in self.entities}
        return [by_id[r.question_id].key + by_id[r.answer_id].key for r in self.relations]


class PRF(NamedTuple):
    precision: float
    recall: float
    hmean: float


class Counts(NamedTuple):
    correct: int
    n_pred: int
    n_gt: int

    def __add__(self, other):  # type: ignore[override]
        return Counts(self.correct + other.correct, self.n_pred + other.n_pred, self.n_gt + other.n_gt)


def prf(counts: Counts) -> PRF:
    """P/R/Hmean from counts.

    An empty side scores 0 against a non-empty one; both empty is a perfect 1.
    """
    correct, n_pred, n_gt = counts
    if n_pred == 0 and n_gt == 0:
        return PRF(1.0, 1.0, 1.0)
    p = correct / n_pred if n_pred else 0.0
    r = correct / n_gt if n_gt else 0.0
    h = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return PRF(p, r, h)


def match_count(pred: Sequence[Hashable], gt: Sequence[Hashable]) -> int:
    available = Counter(gt)
    correct = 0
    for key in pred:
        if available[key] > 0:
            available[key] -= 1
            correct += 1
    return correct


def ser_counts(pred: Sequence[Entity], gt: Sequence[Entity]) -> Counts:
    return Counts(match_count([e.key for e in pred], [e.key for e in gt]), len(pred), len(gt))


def re_counts(pred: KieDocument, gt: KieDocument) -> Counts:
    pred.validate()
    gt.validate()
    p, g = pred.relation_keys(), gt.relation_keys()
    return Counts(match_count(p, g), len(p), len(g))


def ser_hmean(pred: Sequence[Entity], gt: Sequence[Entity]) -> PRF:
    return prf(ser_counts(pred, gt))


def re_hmean(pred: KieDocument, gt: KieDocument) -> PRF:
    return prf(re_counts(pred, gt))


def kie_scores(pred_docs: Iterable[KieDocument], gt_docs: Iterable[KieDocument], task: str) -> PRF:
    """Micro-averaged SER or RE score over images paired by ``image_id``.

    Images missing on the prediction side count as empty predictions.
    """
    if task not in ("ser", "re"):
        raise ValidationError(f"unknown KIE task {task!r}")
    preds = {d.image_id: d for d in pred_docs}
    total = Counts(0, 0, 0)
    seen = set()
    for gt in gt_docs:
        seen.add(gt.image_id)
        pred = preds.get(gt.image_id, KieDocument(gt.image_id))
        total = total + (ser_counts(pred.entities, gt.entities) if task == "ser" else re_counts(pred, gt))
    for image_id, pred in preds.items():
        if image_id not in seen:
            n = len(pred.entities) if task == "ser" else len(pred.relations)
            total = total + Counts(0, n, 0)
    return prf(total)
