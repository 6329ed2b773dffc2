"""Dataset splitting and multilabel evaluation."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EmptyDatasetError
from ..labeling import LabelSet


def split_dataset(
    labels: Sequence[LabelSet],
    ratio: float = 0.7,
    seed: int = 0,
) -> tuple[list[int], list[int]]:
    """Deterministic stratified split; returns (train, validation) indices.

    Stratification groups by exact label combination; a group contributes
    round(ratio * size) members to train. Groups too small to split land
    wherever the rounding puts them.
    """
    if len(labels) < 2:
        raise EmptyDatasetError("need at least 2 examples to split")
    groups: dict[tuple, list[int]] = {}
    for idx, label in enumerate(labels):
        groups.setdefault(label.flags(), []).append(idx)
    rng = random.Random(seed)
    train: list[int] = []
    val: list[int] = []
    for _, members in sorted(groups.items()):
        rng.shuffle(members)
        cut = round(ratio * len(members))
        train.extend(members[:cut])
        val.extend(members[cut:])
    # Both sides must be usable downstream.
    if not val and train:
        val.append(train.pop())
    if not train and val:
        train.append(val.pop())
    return sorted(train), sorted(val)


@dataclass
class LabelConfusion:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def accuracy(self) -> float:
        total = self.tp + self.fp + self.tn + self.fn
        return (self.tp + self.tn) / total if total else 0.0


@dataclass
class EvalReport:
    """Exact-match plus per-persona accuracy for one dataset split."""

    split: str
    exact_match_accuracy: float
    per_label_accuracy: tuple[float, float, float]
    confusion: dict[str, LabelConfusion]
    count: int

    def as_dict(self) -> dict:
        return {
            "split": self.split,
            "count": self.count,
            "exactMatchAccuracy": self.exact_match_accuracy,
            "perLabelAccuracy": {
                "runner": self.per_label_accuracy[0],
                "treasure_collector": self.per_label_accuracy[1],
                "monster_killer": self.per_label_accuracy[2],
            },
            "confusion": {
                name: {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn}
                for name, c in self.confusion.items()
            },
        }


PERSONA_FIELDS = ("runner", "treasure_collector", "monster_killer")


def evaluate_predictions(
    predicted: Sequence[LabelSet],
    actual: Sequence[LabelSet],
    split: str = "eval",
) -> EvalReport:
    if len(predicted) != len(actual):
        raise ValueError("prediction and label counts differ")
    n = len(actual)
    exact = sum(p == a for p, a in zip(predicted, actual))
    confusion = {name: LabelConfusion() for name in PERSONA_FIELDS}
    for p, a in zip(predicted, actual):
        for name in PERSONA_FIELDS:
            pf, af = getattr(p, name), getattr(a, name)
            cell = confusion[name]
            if pf and af:
                cell.tp += 1
            elif pf and not af:
                cell.fp += 1
            elif not pf and af:
                cell.fn += 1
            else:
                cell.tn += 1
    return EvalReport(
        split=split,
        exact_match_accuracy=exact / n if n else 0.0,
        per_label_accuracy=tuple(confusion[name].accuracy() for name in PERSONA_FIELDS),
        confusion=confusion,
        count=n,
    )


def evaluate(model, inputs: Sequence, labels: Sequence[LabelSet], split: str = "eval") -> EvalReport:
    """Run any model exposing predict_labels over prepared inputs."""
    predicted = [model.predict_labels(x) for x in inputs]
    return evaluate_predictions(predicted, labels, split)


def aggregate_reports(reports: Sequence[EvalReport]) -> dict:
    """Mean and population std across replica reports (same split)."""
    if not reports:
        raise EmptyDatasetError("no reports to aggregate")
    exact = np.array([r.exact_match_accuracy for r in reports])
    per_label = np.array([r.per_label_accuracy for r in reports])
    return {
        "split": reports[0].split,
        "replicas": len(reports),
        "exactMatchAccuracy": {"mean": float(exact.mean()), "std": float(exact.std())},
        "perLabelAccuracy": {
            name: {
                "mean": float(per_label[:, i].mean()),
                "std": float(per_label[:, i].std()),
            }
            for i, name in enumerate(PERSONA_FIELDS)
        },
    }
