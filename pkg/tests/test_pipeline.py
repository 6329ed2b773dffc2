import json

import pytest

from dungeonpersonas.errors import PipelineError
from dungeonpersonas.labeling import LabelSet
from dungeonpersonas.learn import load_svm
from dungeonpersonas.maps import load_builtin
from dungeonpersonas.personas import NodeBudget, PersonaKind, PersonaSpec
from dungeonpersonas.pipeline import (
    ExperimentConfig,
    bench_aar_vs_inference,
    generate_synthetic,
    known_labels,
    label_traces,
    run_experiment,
    speedup_ratio,
    stats_by_map,
    stats_report,
)
from dungeonpersonas.trace import read_traces

SMALL_BUDGET = NodeBudget(300)
PERSONAS = tuple(PersonaSpec(kind) for kind in PersonaKind)


@pytest.fixture(scope="module")
def small_corpus():
    levels = [load_builtin("tutorial-2"), load_builtin("arena")]
    return generate_synthetic(levels, runs_per_persona=2, budget=SMALL_BUDGET)


def test_corpus_shape_and_order(small_corpus):
    # 3 personas x 2 maps x 2 runs
    assert len(small_corpus) == 12
    sources = {t.source.detail for t in small_corpus}
    assert sources == {k.value for k in PersonaKind}


def test_runs_within_pair_identical(small_corpus):
    by_pair = {}
    for trace in small_corpus:
        by_pair.setdefault((trace.source.detail, trace.map_name), []).append(trace)
    for pair, traces in by_pair.items():
        assert len(traces) == 2
        assert traces[0] == traces[1]
        assert traces[0].digest() == traces[1].digest()


def test_runner_takes_fewest_steps(small_corpus):
    for map_name in ("tutorial-2", "arena"):
        steps = {
            trace.source.detail: len(trace.turns)
            for trace in small_corpus
            if trace.map_name == map_name
        }
        assert steps["runner"] <= steps["monster_killer"]
        assert steps["runner"] <= steps["treasure_collector"]


def test_known_labels_from_source(small_corpus):
    labels, reports = label_traces(small_corpus, "known")
    for trace, label in zip(small_corpus, labels):
        assert label == LabelSet.for_persona(PersonaKind(trace.source.detail))
    assert all(r is None for r in reports)


def test_aar_labeling_dedupes_identical_traces(small_corpus):
    labels, reports = label_traces(small_corpus, "aar", SMALL_BUDGET, PERSONAS)
    by_digest = {}
    for trace, label in zip(small_corpus, labels):
        by_digest.setdefault(trace.digest(), set()).add(label)
    assert all(len(variants) == 1 for variants in by_digest.values())
    # the generating persona always self-agrees
    for trace, label in zip(small_corpus, labels):
        assert getattr(
            label,
            {
                "runner": "runner",
                "treasure_collector": "treasure_collector",
                "monster_killer": "monster_killer",
            }[trace.source.detail],
        )


def test_max_turns_warning_path():
    # a map with an unreachable exit cannot be won; the cap kicks in
    from dungeonpersonas.engine import load_map

    level = load_map("@.#S\n..#.")
    warnings = []
    traces = generate_synthetic(
        [level],
        runs_per_persona=1,
        budget=NodeBudget(50),
        personas=(PersonaSpec(PersonaKind.RUNNER),),
        max_turns=8,
        warn=warnings.append,
    )
    assert traces[0].outcome.value == "abandoned"
    assert len(traces[0].turns) == 8
    assert warnings and "cap" in warnings[0]


def test_run_experiment_svm_end_to_end(tmp_path):
    # enough duplicated runs that the C=1 soft margin prefers separation
    config = ExperimentConfig(
        output_dir=str(tmp_path / "out"),
        maps=["tutorial-2", "arena"],
        runs_per_persona=20,
        labeler="known",
        model="svm",
        budget_nodes=300,
        holdout_maps=["tutorial-1"],
    )
    report = run_experiment(config)
    svm = report["svm"]
    assert svm["training"]["exactMatchAccuracy"] >= 0.99
    assert "testing" in svm
    out = tmp_path / "out"
    for artifact in ("traces.jsonl", "labels.jsonl", "features.csv",
                     "model-svm.json", "report.json", "manifest.json"):
        assert (out / artifact).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert [s["name"] for s in manifest["stages"]][0] == "data"
    reloaded = read_traces(out / "traces.jsonl")
    assert len(reloaded) == 120


def test_run_experiment_lstm_replicas(tmp_path):
    config = ExperimentConfig(
        output_dir=str(tmp_path / "out"),
        maps=["tutorial-2"],
        runs_per_persona=2,
        labeler="known",
        model="lstm",
        budget_nodes=200,
        lstm_epochs=3,
        lstm_hidden=4,
        lstm_replicas=3,
        seed=11,
    )
    report = run_experiment(config)
    lstm = report["lstm"]
    assert lstm["training"]["replicas"] == 3
    assert "mean" in lstm["training"]["exactMatchAccuracy"]
    assert "std" in lstm["training"]["exactMatchAccuracy"]
    out = tmp_path / "out"
    assert all((out / f"model-lstm-{i}.json").exists() for i in range(3))


def test_experiment_determinism(tmp_path):
    def run(where):
        config = ExperimentConfig(
            output_dir=str(tmp_path / where),
            maps=["tutorial-2"],
            runs_per_persona=2,
            labeler="known",
            model="svm",
            budget_nodes=200,
            seed=4,
        )
        return run_experiment(config)

    a, b = run("a"), run("b")
    a["manifest"].pop("stages")
    b["manifest"].pop("stages")
    a["manifest"].pop("config")
    b["manifest"].pop("config")
    assert a == b
    traces_a = (tmp_path / "a" / "traces.jsonl").read_text()
    traces_b = (tmp_path / "b" / "traces.jsonl").read_text()
    assert traces_a == traces_b


def test_stage_error_carries_stage_name(tmp_path):
    config = ExperimentConfig(
        output_dir=str(tmp_path),
        maps=["no-such-map"],
    )
    with pytest.raises(PipelineError) as err:
        run_experiment(config)
    assert err.value.stage == "data"


def test_unknown_labeler_rejected(small_corpus):
    with pytest.raises(PipelineError):
        label_traces(small_corpus, "telepathy")


def test_config_file_round_trip(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "output_dir": str(tmp_path / "out"),
        "maps": ["tutorial-1"],
        "runs_per_persona": 1,
        "budget_nodes": 100,
    }))
    config = ExperimentConfig.from_json(path)
    assert config.maps == ["tutorial-1"]
    assert config.runs_per_persona == 1


# -- bench -------------------------------------------------------------------------


def test_speedup_ratio_arithmetic():
    assert speedup_ratio(40.0, 0.4) == pytest.approx(100.0)
    with pytest.raises(ValueError):
        speedup_ratio(1.0, 0.0)


def test_bench_reports_budget_provenance(tmp_path, small_corpus):
    config = ExperimentConfig(
        output_dir=str(tmp_path / "out"),
        maps=["tutorial-2"],
        runs_per_persona=1,
        labeler="known",
        model="svm",
        budget_nodes=150,
    )
    run_experiment(config)
    model = load_svm(tmp_path / "out" / "model-svm.json")
    report = bench_aar_vs_inference(
        small_corpus[:1], model, budget=NodeBudget(50)
    )
    assert report.trace_count == 1
    assert report.budget == {"mode": "nodes", "value": 50}
    assert report.speedup_ratio > 0
    assert report.as_dict()["aarSecondsPerTrace"] > 0


# -- stats -------------------------------------------------------------------------


def test_stats_identical_pair_zero_std(small_corpus):
    runner_traces = [
        t for t in small_corpus
        if t.source.detail == "runner" and t.map_name == "arena"
    ]
    labels = [LabelSet(runner=True)] * len(runner_traces)
    rows = stats_report(runner_traces, labels)
    pure_r = next(r for r in rows if r["combo"] == "R")
    assert pure_r["count"] == 2
    assert pure_r["steps"]["std"] == 0.0
    assert pure_r["steps"]["mean"] == len(runner_traces[0].turns)


def test_stats_rows_partition_dataset(small_corpus):
    labels = [known_labels(t) for t in small_corpus]
    rows = stats_report(small_corpus, labels)
    assert [r["combo"] for r in rows] == [
        "No Label", "R", "TC", "MK", "R & TC", "R & MK", "TC & MK", "R & TC & MK",
    ]
    assert sum(r["count"] for r in rows) == len(small_corpus)


def test_stats_runner_min_steps_per_map(small_corpus):
    labels = [known_labels(t) for t in small_corpus]
    per_map = stats_by_map(small_corpus, labels)
    for map_name, rows in per_map.items():
        by_combo = {r["combo"]: r for r in rows}
        assert by_combo["R"]["steps"]["mean"] <= by_combo["MK"]["steps"]["mean"]
        assert by_combo["R"]["steps"]["mean"] <= by_combo["TC"]["steps"]["mean"]
        assert by_combo["TC"]["treasures"]["mean"] >= by_combo["R"]["treasures"]["mean"]
