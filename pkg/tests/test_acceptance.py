"""Acceptance suite: one test per release criterion, one PASS line each.

The expensive fixtures (full-budget persona corpus, AAR labels) are
session-scoped and shared across criteria, mirroring how the pipeline would
run the protocol once end to end.
"""
import random
import time

import numpy as np
import pytest

from dungeonpersonas.engine import Mechanic, Move, apply_action, initial_state, load_map
from dungeonpersonas.labeling import (
    LabelSet,
    QuestionnaireResponse,
    aar_labels,
    action_agreement,
    questionnaire_labels,
    questionnaire_means,
    questionnaire_scores,
)
from dungeonpersonas.learn import (
    LstmConfig,
    LstmModel,
    SvmConfig,
    evaluate,
    init_params,
    loss_and_grads,
    split_dataset,
    train_binary_svm,
    train_svm,
    zero_params,
)
from dungeonpersonas.maps import HELD_OUT_MAP, REFERENCE_MAPS, load_builtin
from dungeonpersonas.personas import ALL_PERSONAS, NodeBudget, PersonaKind, WallClock
from dungeonpersonas.pipeline import (
    bench_aar_vs_inference,
    generate_synthetic,
    known_labels,
    label_traces,
    stats_by_map,
)
from dungeonpersonas.trace import (
    fit_normalizer,
    mechanic_frequencies,
    record_episode,
    verify_replay,
)

from conftest import random_walk_trace, scripted_provider

BUDGET = NodeBudget(5000)
PERSONA_FLAG = {
    PersonaKind.RUNNER: "runner",
    PersonaKind.TREASURE_COLLECTOR: "treasure_collector",
    PersonaKind.MONSTER_KILLER: "monster_killer",
}


def announce(name):
    print(f"\nACCEPTANCE {name}: PASS")


@pytest.fixture(scope="session")
def levels():
    return {name: load_builtin(name) for name in REFERENCE_MAPS}


@pytest.fixture(scope="session")
def corpus(levels):
    """The full synthetic protocol: 3 personas x 5 maps x 100 runs."""
    return generate_synthetic(list(levels.values()), runs_per_persona=100, budget=BUDGET)


@pytest.fixture(scope="session")
def corpus_aar_labels(corpus):
    labels, _ = label_traces(corpus, "aar", BUDGET)
    return labels


def unique_episodes(corpus):
    by_pair = {}
    for trace in corpus:
        by_pair.setdefault((trace.source.detail, trace.map_name), trace)
    return by_pair


def test_determinism_and_replay(levels):
    """100 random action sequences replay to identical digests, twice."""
    started = time.perf_counter()
    sequences = 0
    for name, level in levels.items():
        for seed in range(20):
            trace = random_walk_trace(level, seed=seed * 31 + 7, max_turns=60)
            sequences += 1
            for _ in range(2):
                state = initial_state(level)
                for record in trace.turns:
                    state, _ = apply_action(state, record.action)
                    assert state.digest() == record.state_hash
            verify_replay(trace)
            counts = mechanic_frequencies(trace).counts
            assert counts[Mechanic.END_TURN] == len(trace.turns)
            assert counts[Mechanic.DIE] <= 1
            assert counts[Mechanic.REACH_STAIRS] <= 1
            assert counts[Mechanic.DIE] + counts[Mechanic.REACH_STAIRS] <= 1
            assert counts.sum() == sum(len(r.events) for r in trace.turns)
    elapsed = time.perf_counter() - started
    assert sequences == 100
    assert elapsed < 10.0, f"determinism harness took {elapsed:.1f}s"
    announce("determinism & replay")


def test_self_aar_oracle(corpus):
    """Every persona agrees with its own trace on every map, exactly."""
    started = time.perf_counter()
    episodes = unique_episodes(corpus)
    assert len(episodes) == 15
    for (persona_name, map_name), trace in episodes.items():
        spec = next(s for s in ALL_PERSONAS if s.kind.value == persona_name)
        agreed, total, ratio = action_agreement(trace, spec, BUDGET)
        assert ratio == 1.0, f"{persona_name} on {map_name}: {ratio}"
        assert total == len(trace.turns)
        labels, report = aar_labels(trace, ALL_PERSONAS, BUDGET)
        assert getattr(labels, PERSONA_FLAG[spec.kind]), (
            f"{persona_name} missing from own labels on {map_name}"
        )
    elapsed = time.perf_counter() - started
    assert elapsed < 300.0, f"self-AAR took {elapsed:.1f}s"
    announce("self-AAR oracle")


def test_synthetic_corpus_shape(corpus):
    """Exactly 1500 traces; runs within a (persona, map) pair are identical."""
    assert len(corpus) == 1500 == 3 * 5 * 100
    by_pair = {}
    for trace in corpus:
        by_pair.setdefault((trace.source.detail, trace.map_name), []).append(trace)
    assert len(by_pair) == 15
    for pair, traces in by_pair.items():
        assert len(traces) == 100
        digests = {t.digest() for t in traces}
        assert len(digests) == 1, f"{pair} produced differing runs"
        assert all(t == traces[0] for t in traces)
    announce("synthetic corpus shape")


def test_synthetic_overfit_direction(levels):
    """Perfect train/validation on lane maps, sharp drop on the arena."""
    lane_levels = [levels[n] for n in REFERENCE_MAPS if n != HELD_OUT_MAP]
    lane_corpus = generate_synthetic(lane_levels, runs_per_persona=100, budget=BUDGET)
    labels = [known_labels(t) for t in lane_corpus]
    train_idx, val_idx = split_dataset(labels, 0.7, seed=0)
    vectors = [mechanic_frequencies(t) for t in lane_corpus]
    normalizer = fit_normalizer([vectors[i] for i in train_idx])
    model = train_svm(
        normalizer.apply_all(vectors[i] for i in train_idx),
        [labels[i] for i in train_idx],
        normalizer,
    )
    train_acc = evaluate(
        model,
        normalizer.apply_all(vectors[i] for i in train_idx),
        [labels[i] for i in train_idx],
        "training",
    ).exact_match_accuracy
    val_acc = evaluate(
        model,
        normalizer.apply_all(vectors[i] for i in val_idx),
        [labels[i] for i in val_idx],
        "validation",
    ).exact_match_accuracy
    assert train_acc >= 0.99
    assert val_acc >= 0.99

    held_traces = generate_synthetic([levels[HELD_OUT_MAP]], runs_per_persona=1, budget=BUDGET)
    held_labels = [known_labels(t) for t in held_traces]
    held_vectors = normalizer.apply_all(mechanic_frequencies(t) for t in held_traces)
    held_acc = evaluate(model, held_vectors, held_labels, "testing").exact_match_accuracy
    assert train_acc - held_acc >= 0.3, (
        f"expected a generalization collapse; train={train_acc}, held-out={held_acc}"
    )
    announce("synthetic overfit direction")


def test_classifier_correctness_properties():
    """Gradient check, separable-SVM behavior, zero-parameter output."""
    # LSTM analytic gradients vs central finite differences (hidden size 4)
    config = LstmConfig(hidden_size=4, input_size=6)
    rng = np.random.default_rng(2024)
    params = init_params(config, rng)
    X = rng.normal(size=(5, 6))
    y = np.array([1.0, 0.0, 1.0])
    _, grads = loss_and_grads(params, 4, X, y)
    eps = 1e-5
    for name, tensor in params.items():
        flat = tensor.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + eps
            up, _ = loss_and_grads(params, 4, X, y)
            flat[k] = orig - eps
            down, _ = loss_and_grads(params, 4, X, y)
            flat[k] = orig
            numeric = (up - down) / (2 * eps)
            analytic = grads[name].reshape(-1)[k]
            scale = max(1e-8, abs(analytic) + abs(numeric))
            if abs(analytic - numeric) >= 1e-9:
                assert abs(analytic - numeric) / scale < 1e-4, (name, k)

    # SVM on a separable 40-point toy set: full accuracy, monotone hinge
    rng = np.random.default_rng(4)
    pos = rng.normal(size=(20, 17)) * 0.4
    pos[:, 0] += 2.0
    neg = rng.normal(size=(20, 17)) * 0.4
    neg[:, 0] -= 2.0
    X40 = np.vstack([pos, neg])
    y40 = np.array([1.0] * 20 + [-1.0] * 20)
    clf = train_binary_svm(X40, y40, SvmConfig())
    margins = X40 @ clf.weights + clf.bias
    assert np.all((margins > 0) == (y40 > 0)), "separable set not fully fit"
    history = clf.hinge_history
    assert all(
        history[i + 1] <= history[i] + 1e-9 for i in range(len(history) - 1)
    ), f"hinge objective increased across passes: {history}"

    # all-zero LSTM outputs (0.5, 0.5, 0.5)
    zero_config = LstmConfig(hidden_size=4, input_size=6)
    zero_model = LstmModel(params=zero_params(zero_config), config=zero_config)
    assert np.allclose(zero_model.forward(np.ones((3, 6))), [0.5, 0.5, 0.5])
    announce("classifier correctness properties")


def test_label_recovery_end_to_end(levels, corpus, corpus_aar_labels):
    """AAR labels -> SVM -> held-out runs from the same maps recover labels."""
    train_idx, _ = split_dataset(corpus_aar_labels, 0.7, seed=0)
    vectors = [mechanic_frequencies(t) for t in corpus]
    normalizer = fit_normalizer([vectors[i] for i in train_idx])
    model = train_svm(
        normalizer.apply_all(vectors[i] for i in train_idx),
        [corpus_aar_labels[i] for i in train_idx],
        normalizer,
    )
    held = generate_synthetic(list(levels.values()), runs_per_persona=2, budget=BUDGET)
    held_labels, _ = label_traces(held, "aar", BUDGET)
    report = evaluate(
        model,
        normalizer.apply_all(mechanic_frequencies(t) for t in held),
        held_labels,
        "held-out",
    )
    assert report.exact_match_accuracy >= 0.9, report.exact_match_accuracy
    announce("label recovery end-to-end")


def test_benchmark_claim_direction(corpus, corpus_aar_labels):
    """Replay labeling with a 0.05 s/move budget vs frequency inference."""
    train_idx, _ = split_dataset(corpus_aar_labels, 0.7, seed=0)
    vectors = [mechanic_frequencies(t) for t in corpus]
    normalizer = fit_normalizer([vectors[i] for i in train_idx])
    model = train_svm(
        normalizer.apply_all(vectors[i] for i in train_idx),
        [corpus_aar_labels[i] for i in train_idx],
        normalizer,
    )
    sample = [corpus[0], corpus[500], corpus[1000]]  # one per persona
    report = bench_aar_vs_inference(sample, model, budget=WallClock(0.05))
    assert report.budget == {"mode": "seconds", "value": 0.05}
    assert report.speedup_ratio >= 50.0, report.as_dict()
    announce("benchmark claim direction")


def test_labeling_boundaries():
    """Exactly-threshold cases never earn a label."""
    # AAR ratio exactly 0.5: the runner agrees with the 5 eastward moves only
    level = load_map("@.........S")
    actions = [Move("E"), Move("W")] * 5
    trace = record_episode(level, scripted_provider(actions), max_turns=10)
    labels, report = aar_labels(trace, ALL_PERSONAS, NodeBudget(500))
    assert report.ratio(PersonaKind.RUNNER) == 0.5
    assert not labels.runner

    # questionnaire score equal to the corpus mean stays unlabeled
    identical = [QuestionnaireResponse(2, (3,) * 9) for _ in range(4)]
    means = questionnaire_means(identical)
    for resp in identical:
        assert questionnaire_labels(questionnaire_scores(resp), means) == LabelSet()

    # mixed corpus: a respondent sitting exactly on the mean gets no flag
    mixed = [
        QuestionnaireResponse(0, (4, 0, 0, 0, 0, 4, 0, 4, 0)),
        QuestionnaireResponse(0, (0, 0, 0, 0, 0, 0, 0, 0, 0)),
        QuestionnaireResponse(0, (2, 0, 0, 0, 0, 2, 0, 2, 0)),
    ]
    means = questionnaire_means(mixed)
    assert means[0] == 2.0
    labels_mid = questionnaire_labels(questionnaire_scores(mixed[2]), means)
    assert not labels_mid.runner
    announce("labeling boundaries")


def test_stats_table_pattern(corpus):
    """Pure runners take strictly the fewest steps on every reference map."""
    labels = [known_labels(t) for t in corpus]
    per_map = stats_by_map(corpus, labels)
    assert set(per_map) == set(REFERENCE_MAPS)
    for map_name, rows in per_map.items():
        by_combo = {row["combo"]: row for row in rows}
        r_steps = by_combo["R"]["steps"]["mean"]
        assert by_combo["R"]["count"] == 100
        assert r_steps < by_combo["TC"]["steps"]["mean"], map_name
        assert r_steps < by_combo["MK"]["steps"]["mean"], map_name
    announce("stats table pattern")


def test_persona_separation_invariant(corpus):
    """On each map the three personas' episodes differ pairwise."""
    episodes = unique_episodes(corpus)
    for map_name in REFERENCE_MAPS:
        signatures = {}
        for kind in PersonaKind:
            trace = episodes[(kind.value, map_name)]
            counts = mechanic_frequencies(trace).counts
            signatures[kind] = (
                len(trace.turns),
                int(counts[Mechanic.COLLECT_TREASURE]),
                int(counts[Mechanic.ENEMY_KILL]),
            )
        values = list(signatures.values())
        assert len(set(values)) == 3, f"personas indistinguishable on {map_name}"
    announce("persona separation")
