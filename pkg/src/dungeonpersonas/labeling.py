"""Ground-truth label producers.

Two labelers exist: the action-agreement replayer (a persona re-plans at
every recorded state and scores a point when it matches the recorded move)
and the questionnaire scorer (per-category answer means compared against
corpus means). Both thresholds are strict: exactly 50% agreement or exactly
the corpus mean earns no label.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyTraceError
from .personas import (
    ALL_PERSONAS,
    DEFAULT_BUDGET,
    PersonaKind,
    PersonaSpec,
    PlanBudget,
    plan_next_action,
)
from .trace import Playtrace, replay

AAR_THRESHOLD = 0.5


@dataclass(frozen=True)
class LabelSet:
    """Multilabel over the three personas; any subset is valid."""

    runner: bool = False
    treasure_collector: bool = False
    monster_killer: bool = False

    def flags(self) -> tuple[bool, bool, bool]:
        return (self.runner, self.treasure_collector, self.monster_killer)

    def combo_name(self) -> str:
        parts = [
            name
            for flag, name in zip(self.flags(), ("R", "TC", "MK"))
            if flag
        ]
        return " & ".join(parts) if parts else "No Label"

    @classmethod
    def from_flags(cls, flags: Sequence[bool]) -> "LabelSet":
        r, tc, mk = flags
        return cls(bool(r), bool(tc), bool(mk))

    @classmethod
    def for_persona(cls, kind: PersonaKind) -> "LabelSet":
        return cls(
            runner=kind == PersonaKind.RUNNER,
            treasure_collector=kind == PersonaKind.TREASURE_COLLECTOR,
            monster_killer=kind == PersonaKind.MONSTER_KILLER,
        )


ALL_COMBOS = (
    "No Label",
    "R",
    "TC",
    "MK",
    "R & TC",
    "R & MK",
    "TC & MK",
    "R & TC & MK",
)


@dataclass
class AgreementReport:
    """Per-persona (agreed, total, ratio); total is the trace's turn count."""

    per_persona: dict[PersonaKind, tuple[int, int, float]]

    def ratio(self, kind: PersonaKind) -> float:
        return self.per_persona[kind][2]


def action_agreement(
    trace: Playtrace,
    spec: PersonaSpec,
    budget: PlanBudget = DEFAULT_BUDGET,
) -> tuple[int, int, float]:
    """Replay the trace, re-planning at every recorded pre-action state."""
    if not trace.turns:
        raise EmptyTraceError("cannot score an empty trace")
    agreed = 0
    total = 0
    for pre_state, record, _ in replay(trace):
        planned = plan_next_action(pre_state, spec, budget)
        if planned == record.action:
            agreed += 1
        total += 1
    return agreed, total, agreed / total


def labels_from_ratios(ratios: Sequence[float]) -> LabelSet:
    """Strictly-greater-than-half rule applied to the (R, TC, MK) ratios."""
    return LabelSet.from_flags([r > AAR_THRESHOLD for r in ratios])


def aar_labels(
    trace: Playtrace,
    personas: Sequence[PersonaSpec] = ALL_PERSONAS,
    budget: PlanBudget = DEFAULT_BUDGET,
) -> tuple[LabelSet, AgreementReport]:
    per_persona: dict[PersonaKind, tuple[int, int, float]] = {}
    for spec in personas:
        per_persona[spec.kind] = action_agreement(trace, spec, budget)
    ratios = {kind: stats[2] for kind, stats in per_persona.items()}
    labels = LabelSet(
        runner=ratios.get(PersonaKind.RUNNER, 0.0) > AAR_THRESHOLD,
        treasure_collector=ratios.get(PersonaKind.TREASURE_COLLECTOR, 0.0) > AAR_THRESHOLD,
        monster_killer=ratios.get(PersonaKind.MONSTER_KILLER, 0.0) > AAR_THRESHOLD,
    )
    return labels, AgreementReport(per_persona)


# -- questionnaire -------------------------------------------------------------

ANSWER_MIN, ANSWER_MAX = 0, 4

# Question numbering is 2..10; index i in ``answers`` is question i + 2.
RUNNER_QUESTIONS = (2, 7, 9)
TREASURE_QUESTIONS = (3, 6, 8)
MONSTER_QUESTIONS = (4, 5, 10)


@dataclass(frozen=True)
class QuestionnaireResponse:
    """One respondent: play frequency plus the nine persona questions."""

    play_frequency: int
    answers: tuple[int, ...]  # questions 2..10, each 0 (never) .. 4 (always)

    def __post_init__(self):
        if len(self.answers) != 9:
            raise ValueError("expected 9 persona answers (questions 2-10)")
        values = (self.play_frequency, *self.answers)
        if any(not (ANSWER_MIN <= v <= ANSWER_MAX) for v in values):
            raise ValueError("answers must be integers in [0, 4]")

    def question(self, number: int) -> int:
        return self.answers[number - 2]


def questionnaire_scores(resp: QuestionnaireResponse) -> tuple[float, float, float]:
    """(runner, treasure collector, monster killer) per-category answer means."""

    def mean(questions: tuple[int, ...]) -> float:
        return sum(resp.question(q) for q in questions) / len(questions)

    return mean(RUNNER_QUESTIONS), mean(TREASURE_QUESTIONS), mean(MONSTER_QUESTIONS)


def questionnaire_means(responses: Iterable[QuestionnaireResponse]) -> tuple[float, float, float]:
    """Corpus-wide category means used as the labeling thresholds."""
    scores = [questionnaire_scores(r) for r in responses]
    if not scores:
        raise ValueError("no questionnaire responses")
    n = len(scores)
    return tuple(sum(s[i] for s in scores) / n for i in range(3))


def questionnaire_labels(
    scores: tuple[float, float, float],
    dataset_means: tuple[float, float, float],
) -> LabelSet:
    """Flag a persona only when the score strictly exceeds the corpus mean."""
    return LabelSet.from_flags([s > m for s, m in zip(scores, dataset_means)])


def read_questionnaires(path) -> list[QuestionnaireResponse]:
    """One respondent per line: 10 whitespace-separated integers."""
    return [resp for _, resp in read_questionnaires_with_ids(path)]


def read_questionnaires_with_ids(path) -> list[tuple[str, QuestionnaireResponse]]:
    """Like read_questionnaires, with an optional leading respondent id.

    A line is either 10 integers (id defaults to the 0-based row index) or
    an id token followed by 10 integers.
    """
    responses: list[tuple[str, QuestionnaireResponse]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) == 10:
                rid = str(len(responses))
            elif len(tokens) == 11:
                rid, tokens = tokens[0], tokens[1:]
            else:
                raise ValueError(
                    f"line {line_number}: expected 10 integers (optionally preceded by an id)"
                )
            values = [int(tok) for tok in tokens]
            responses.append(
                (rid, QuestionnaireResponse(values[0], tuple(values[1:])))
            )
    return responses


# -- label file io --------------------------------------------------------------


def _budget_json(budget: PlanBudget) -> dict:
    mode, value = budget.key()
    return {"mode": mode, "value": value}


def write_labels(
    entries: Sequence[tuple[Playtrace, LabelSet, AgreementReport | None]],
    path,
    budget: PlanBudget | None = None,
    personas: Sequence[PersonaSpec] = ALL_PERSONAS,
    labeler: str = "aar",
) -> None:
    """Per-trace record: 3 flags, 3 ratios (when known), and provenance."""
    provenance: dict = {"labeler": labeler}
    if budget is not None:
        provenance["budget"] = _budget_json(budget)
    provenance["personas"] = [
        {"kind": spec.kind.value, "c": spec.c, "k": spec.k} for spec in personas
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"record": "provenance", **provenance}) + "\n")
        for trace, labels, report in entries:
            row = {
                "record": "labels",
                "trace": trace.digest(),
                "map": trace.map_name,
                "source": str(trace.source),
                "labels": {
                    "runner": labels.runner,
                    "treasure_collector": labels.treasure_collector,
                    "monster_killer": labels.monster_killer,
                },
            }
            if report is not None:
                row["ratios"] = {
                    kind.value: stats[2] for kind, stats in report.per_persona.items()
                }
            fh.write(json.dumps(row) + "\n")


def read_labels(path) -> dict[str, LabelSet]:
    """Trace digest -> LabelSet mapping from a label file."""
    result: dict[str, LabelSet] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            data = json.loads(line)
            if data.get("record") != "labels":
                continue
            flags = data["labels"]
            result[data["trace"]] = LabelSet(
                runner=flags["runner"],
                treasure_collector=flags["treasure_collector"],
                monster_killer=flags["monster_killer"],
            )
    return result
