"""Experiment orchestration: corpus generation, labeling, training, eval.

The synthetic corpus is one episode per (persona, map, run). Planning is
deterministic under a node budget, so all runs of a (persona, map) pair are
identical; the generator plans each pair once and replicates the trace,
which is byte-identical to re-running the planner per run.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .engine.level import Level
from .errors import PipelineError
from .labeling import (
    ALL_COMBOS,
    ALL_PERSONAS,
    AgreementReport,
    LabelSet,
    aar_labels,
    questionnaire_labels,
    questionnaire_means,
    questionnaire_scores,
    read_questionnaires_with_ids,
    write_labels,
)
from .learn import (
    LstmConfig,
    SvmConfig,
    aggregate_reports,
    evaluate,
    save_lstm,
    save_svm,
    split_dataset,
    train_lstm,
    train_svm,
)
from .maps import resolve_maps
from .personas import (
    DEFAULT_BUDGET,
    NodeBudget,
    PersonaKind,
    PersonaSpec,
    PlanBudget,
    WallClock,
    persona_action_provider,
    plan_next_action,
)
from .trace import (
    Playtrace,
    TraceSource,
    crop_sequence,
    fit_normalizer,
    mechanic_frequencies,
    read_traces,
    replay,
    write_feature_csv,
    write_traces,
)

DEFAULT_RUNS_PER_PERSONA = 100
DEFAULT_MAX_TURNS = 500


@dataclass
class ExperimentConfig:
    output_dir: str
    maps: list[str] = field(default_factory=lambda: ["reference"])
    runs_per_persona: int = DEFAULT_RUNS_PER_PERSONA
    labeler: str = "known"  # known | aar | questionnaire
    model: str = "svm"  # svm | lstm
    budget_nodes: int = 5000
    budget_seconds: float | None = None
    split_ratio: float = 0.7
    seed: int = 0
    max_turns: int = DEFAULT_MAX_TURNS
    traces_file: str | None = None  # load instead of generating
    holdout_maps: list[str] = field(default_factory=list)
    questionnaire_file: str | None = None
    persona_c: float = 45.0
    persona_k: float = 1e9
    lstm_epochs: int = 200
    lstm_hidden: int = 100
    lstm_learning_rate: float = 0.001
    lstm_replicas: int = 3

    def __post_init__(self):
        if self.runs_per_persona < 1:
            raise ValueError("runs_per_persona must be at least 1")
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError("split_ratio must be in (0, 1)")

    def budget(self) -> PlanBudget:
        if self.budget_seconds is not None:
            return WallClock(self.budget_seconds)
        return NodeBudget(self.budget_nodes)

    def personas(self) -> tuple[PersonaSpec, ...]:
        return tuple(
            PersonaSpec(kind, self.persona_c, self.persona_k) for kind in PersonaKind
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(**data)


@dataclass
class BenchReport:
    aar_seconds_per_trace: float
    svm_inference_seconds_per_trace: float
    speedup_ratio: float
    trace_count: int
    budget: dict

    def as_dict(self) -> dict:
        return {
            "aarSecondsPerTrace": self.aar_seconds_per_trace,
            "svmInferenceSecondsPerTrace": self.svm_inference_seconds_per_trace,
            "speedupRatio": self.speedup_ratio,
            "traceCount": self.trace_count,
            "budget": self.budget,
        }


def speedup_ratio(aar_seconds: float, inference_seconds: float) -> float:
    if inference_seconds <= 0:
        raise ValueError("inference time must be positive")
    return aar_seconds / inference_seconds


# -- synthetic corpus ------------------------------------------------------------


def generate_synthetic(
    levels: list[Level],
    runs_per_persona: int = DEFAULT_RUNS_PER_PERSONA,
    budget: PlanBudget = DEFAULT_BUDGET,
    personas: tuple[PersonaSpec, ...] = ALL_PERSONAS,
    max_turns: int = DEFAULT_MAX_TURNS,
    warn=None,
) -> list[Playtrace]:
    """One trace per (persona, map, run), ordered persona-major.

    Node-budget planning is deterministic, so runs within a (persona, map)
    pair are identical; each pair is planned once and replicated.
    """
    traces: list[Playtrace] = []
    for spec in personas:
        for level in levels:
            episode = record_persona_episode(level, spec, budget, max_turns)
            if episode.outcome.value == "abandoned" and warn is not None:
                warn(
                    f"{spec.kind.value} on {level.name} hit the {max_turns}-turn "
                    "cap; trace kept with abandoned outcome"
                )
            traces.extend(replicate_trace(episode) for _ in range(runs_per_persona))
    return traces


def record_persona_episode(
    level: Level,
    spec: PersonaSpec,
    budget: PlanBudget = DEFAULT_BUDGET,
    max_turns: int = DEFAULT_MAX_TURNS,
) -> Playtrace:
    from .trace import record_episode

    return record_episode(
        level,
        persona_action_provider(spec, budget),
        max_turns=max_turns,
        source=TraceSource("synthetic", spec.kind.value),
    )


def replicate_trace(trace: Playtrace) -> Playtrace:
    """A run-identical copy (shallow; traces are treated as immutable)."""
    return replace(trace)


def known_labels(trace: Playtrace) -> LabelSet:
    if trace.source.kind != "synthetic":
        raise PipelineError("label", f"no known persona for source {trace.source}")
    return LabelSet.for_persona(PersonaKind(trace.source.detail))


# -- labeling --------------------------------------------------------------------


def label_traces(
    traces: list[Playtrace],
    labeler: str,
    budget: PlanBudget = DEFAULT_BUDGET,
    personas: tuple[PersonaSpec, ...] = ALL_PERSONAS,
    questionnaire_file=None,
) -> tuple[list[LabelSet], list[AgreementReport | None]]:
    if labeler == "known":
        return [known_labels(t) for t in traces], [None] * len(traces)
    if labeler == "aar":
        # Identical traces (same digest) get identical labels; compute once.
        cache: dict[str, tuple[LabelSet, AgreementReport]] = {}
        labels: list[LabelSet] = []
        reports: list[AgreementReport | None] = []
        for trace in traces:
            digest = trace.digest()
            if digest not in cache:
                cache[digest] = aar_labels(trace, personas, budget)
            labels.append(cache[digest][0])
            reports.append(cache[digest][1])
        return labels, reports
    if labeler == "questionnaire":
        if questionnaire_file is None:
            raise PipelineError("label", "questionnaire labeler needs a responses file")
        responses = read_questionnaires_with_ids(questionnaire_file)
        by_id = {rid: resp for rid, resp in responses}
        means = questionnaire_means([resp for _, resp in responses])
        labels = []
        for trace in traces:
            resp = by_id.get(trace.source.detail)
            if resp is None:
                raise PipelineError(
                    "label",
                    f"no questionnaire response for respondent {trace.source.detail!r}",
                )
            labels.append(questionnaire_labels(questionnaire_scores(resp), means))
        return labels, [None] * len(traces)
    raise PipelineError("label", f"unknown labeler {labeler!r}")


# -- experiment ------------------------------------------------------------------


def run_experiment(config: ExperimentConfig) -> dict:
    """Full protocol: data -> labels -> 70/30 split -> train -> evaluate.

    Returns the report dict; all artifacts land under config.output_dir with
    a manifest.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"config": config.__dict__.copy(), "stages": [], "artifacts": []}
    report: dict = {}

    def stage(name, fn):
        started = time.perf_counter()
        try:
            result = fn()
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(name, str(exc)) from exc
        manifest["stages"].append(
            {"name": name, "seconds": round(time.perf_counter() - started, 3)}
        )
        return result

    budget = config.budget()

    def _load_data() -> list[Playtrace]:
        if config.traces_file:
            return read_traces(config.traces_file)
        levels = resolve_maps(config.maps)
        return generate_synthetic(
            levels,
            config.runs_per_persona,
            budget,
            config.personas(),
            config.max_turns,
        )

    traces = stage("data", _load_data)
    labels, agreement = stage(
        "label",
        lambda: label_traces(
            traces, config.labeler, budget, config.personas(), config.questionnaire_file
        ),
    )

    def _write_corpus():
        write_traces(traces, out / "traces.jsonl")
        write_labels(
            list(zip(traces, labels, agreement)),
            out / "labels.jsonl",
            budget=budget,
            personas=config.personas(),
            labeler=config.labeler,
        )
        manifest["artifacts"] += ["traces.jsonl", "labels.jsonl"]

    stage("write-corpus", _write_corpus)

    train_idx, val_idx = stage(
        "split", lambda: split_dataset(labels, config.split_ratio, config.seed)
    )

    vectors = stage("features", lambda: [mechanic_frequencies(t) for t in traces])
    normalizer = stage(
        "normalizer", lambda: fit_normalizer([vectors[i] for i in train_idx])
    )

    holdout: tuple[list, list[LabelSet]] | None = None
    if config.holdout_maps:

        def _holdout():
            levels = resolve_maps(config.holdout_maps)
            hold_traces = generate_synthetic(
                levels, 1, budget, config.personas(), config.max_turns
            )
            return hold_traces, [known_labels(t) for t in hold_traces]

        holdout = stage("holdout", _holdout)

    if config.model == "svm":

        def _train():
            train_vecs = normalizer.apply_all(vectors[i] for i in train_idx)
            train_labels = [labels[i] for i in train_idx]
            return train_svm(train_vecs, train_labels, normalizer, SvmConfig(seed=config.seed))

        model = stage("train", _train)

        def _evaluate():
            result = {}
            for split_name, idx in (("training", train_idx), ("validation", val_idx)):
                split_vecs = normalizer.apply_all(vectors[i] for i in idx)
                result[split_name] = evaluate(
                    model, split_vecs, [labels[i] for i in idx], split_name
                ).as_dict()
            if holdout is not None:
                hold_traces, hold_labels = holdout
                hold_vecs = normalizer.apply_all(
                    mechanic_frequencies(t) for t in hold_traces
                )
                result["testing"] = evaluate(
                    model, hold_vecs, hold_labels, "testing"
                ).as_dict()
            return result

        report["svm"] = stage("evaluate", _evaluate)
        stage("save-model", lambda: save_svm(model, out / "model-svm.json"))
        manifest["artifacts"].append("model-svm.json")
        degenerate = model.degenerate_personas()
        if degenerate:
            report["svm"]["degeneratePersonas"] = degenerate
    elif config.model == "lstm":

        def _train():
            sequences = [crop_sequence(t) for t in traces]
            lstm_config = LstmConfig(
                hidden_size=config.lstm_hidden,
                epochs=config.lstm_epochs,
                learning_rate=config.lstm_learning_rate,
                seed=config.seed,
                replicas=config.lstm_replicas,
            )
            models = train_lstm(
                [sequences[i] for i in train_idx],
                [labels[i] for i in train_idx],
                lstm_config,
            )
            return models, sequences

        models, sequences = stage("train", _train)

        def _evaluate():
            result = {}
            splits = [("training", train_idx), ("validation", val_idx)]
            for split_name, idx in splits:
                split_reports = [
                    evaluate(m, [sequences[i] for i in idx], [labels[i] for i in idx], split_name)
                    for m in models
                ]
                result[split_name] = aggregate_reports(split_reports)
            if holdout is not None:
                hold_traces, hold_labels = holdout
                hold_seqs = [crop_sequence(t) for t in hold_traces]
                result["testing"] = aggregate_reports(
                    [evaluate(m, hold_seqs, hold_labels, "testing") for m in models]
                )
            return result

        report["lstm"] = stage("evaluate", _evaluate)

        def _save():
            for i, model in enumerate(models):
                name = f"model-lstm-{i}.json"
                save_lstm(model, out / name)
                manifest["artifacts"].append(name)

        stage("save-model", _save)
    else:
        raise PipelineError("train", f"unknown model {config.model!r}")

    def _write_outputs():
        write_feature_csv(vectors, labels, out / "features.csv")
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
        manifest["artifacts"] += ["features.csv", "report.json", "manifest.json"]
        with open(out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)

    stage("write-outputs", _write_outputs)
    report["manifest"] = manifest
    return report


# -- benchmark -------------------------------------------------------------------


def bench_aar_vs_inference(
    traces: list[Playtrace],
    model,
    budget: PlanBudget = WallClock(0.05),
    personas: tuple[PersonaSpec, ...] = ALL_PERSONAS,
) -> BenchReport:
    """Wall-clock the expensive labeling path against frequency inference.

    Runs both paths over the same traces, serially. Planner caching is
    bypassed so the AAR timing reflects true replay cost.
    """
    if not traces:
        raise ValueError("no traces to benchmark")
    aar_start = time.perf_counter()
    for trace in traces:
        for spec in personas:
            for pre_state, record, _ in replay(trace):
                plan_next_action(pre_state, spec, budget, use_cache=False)
    aar_seconds = (time.perf_counter() - aar_start) / len(traces)

    inference_start = time.perf_counter()
    for trace in traces:
        vector = model.normalizer.apply(mechanic_frequencies(trace))
        model.predict(vector)
    inference_seconds = (time.perf_counter() - inference_start) / len(traces)

    mode, value = budget.key()
    return BenchReport(
        aar_seconds_per_trace=aar_seconds,
        svm_inference_seconds_per_trace=inference_seconds,
        speedup_ratio=speedup_ratio(aar_seconds, inference_seconds),
        trace_count=len(traces),
        budget={"mode": mode, "value": value},
    )


# -- descriptive stats -----------------------------------------------------------


def stats_report(traces: list[Playtrace], labels: list[LabelSet]) -> list[dict]:
    """Per-label-combination count and mean/std of steps, treasures, kills."""
    if len(traces) != len(labels):
        raise ValueError("traces and labels differ in length")
    groups: dict[str, list[tuple[int, int, int]]] = {name: [] for name in ALL_COMBOS}
    for trace, label in zip(traces, labels):
        counts = mechanic_frequencies(trace).counts
        groups[label.combo_name()].append(
            (len(trace.turns), int(counts[10]), int(counts[0]))
        )
    rows = []
    for name in ALL_COMBOS:
        members = groups[name]
        row = {"combo": name, "count": len(members)}
        for metric, pos in (("steps", 0), ("treasures", 1), ("kills", 2)):
            values = np.array([m[pos] for m in members], dtype=float)
            row[metric] = {
                "mean": float(values.mean()) if len(values) else 0.0,
                "std": float(values.std()) if len(values) else 0.0,
            }
        rows.append(row)
    return rows


def stats_by_map(traces: list[Playtrace], labels: list[LabelSet]) -> dict[str, list[dict]]:
    by_map: dict[str, tuple[list[Playtrace], list[LabelSet]]] = {}
    for trace, label in zip(traces, labels):
        slot = by_map.setdefault(trace.map_name, ([], []))
        slot[0].append(trace)
        slot[1].append(label)
    return {name: stats_report(ts, ls) for name, (ts, ls) in sorted(by_map.items())}
