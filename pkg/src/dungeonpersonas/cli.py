"""Command-line surface.

Verbs: gen, label, features, train, eval, bench, stats, serve. Most flags
map straight onto ExperimentConfig fields; `train` runs the full protocol
(generate/load, label, split, fit, evaluate, write artifacts).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .labeling import write_labels
from .learn import evaluate, load_lstm, load_svm
from .maps import builtin_map_names, resolve_maps
from .personas import NodeBudget, WallClock
from .pipeline import (
    ExperimentConfig,
    bench_aar_vs_inference,
    generate_synthetic,
    label_traces,
    run_experiment,
    stats_by_map,
    stats_report,
)
from .trace import (
    crop_sequence,
    fit_normalizer,
    mechanic_frequencies,
    read_traces,
    write_feature_csv,
    write_traces,
)


def _budget_from_args(args) -> NodeBudget | WallClock:
    if getattr(args, "budget_seconds", None):
        return WallClock(args.budget_seconds)
    return NodeBudget(args.budget_nodes)


def _add_budget_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--budget-nodes", type=int, default=5000,
                        help="planner expansion budget (default 5000)")
    parser.add_argument("--budget-seconds", type=float, default=None,
                        help="wall-clock planning budget per move (overrides nodes)")
    parser.add_argument("--persona-c", type=float, default=45.0,
                        help="per-target weight in the persona cost (default 45)")
    parser.add_argument("--persona-k", type=float, default=1e9,
                        help="death penalty in the persona cost (default 1e9)")


def _personas_from_args(args):
    from .personas import PersonaKind, PersonaSpec

    return tuple(
        PersonaSpec(kind, args.persona_c, args.persona_k) for kind in PersonaKind
    )


def _load_labels_for(traces, path):
    from .labeling import read_labels

    by_digest = read_labels(path)
    labels = []
    for trace in traces:
        digest = trace.digest()
        if digest not in by_digest:
            raise SystemExit(f"labels file has no entry for trace {digest}")
        labels.append(by_digest[digest])
    return labels


def cmd_gen(args) -> int:
    levels = resolve_maps(args.maps)
    traces = generate_synthetic(
        levels,
        runs_per_persona=args.runs,
        budget=_budget_from_args(args),
        personas=_personas_from_args(args),
        max_turns=args.max_turns,
        warn=lambda msg: print(f"warning: {msg}", file=sys.stderr),
    )
    write_traces(traces, args.out)
    print(f"wrote {len(traces)} traces to {args.out}")
    return 0


def cmd_label(args) -> int:
    traces = read_traces(args.traces)
    budget = _budget_from_args(args)
    personas = _personas_from_args(args)
    labels, reports = label_traces(
        traces, args.labeler, budget, personas, questionnaire_file=args.questionnaires
    )
    write_labels(
        list(zip(traces, labels, reports)), args.out,
        budget=budget, personas=personas, labeler=args.labeler,
    )
    print(f"labeled {len(traces)} traces -> {args.out}")
    return 0


def cmd_features(args) -> int:
    traces = read_traces(args.traces)
    labels = _load_labels_for(traces, args.labels)
    vectors = [mechanic_frequencies(t) for t in traces]
    if args.normalize:
        normalizer = fit_normalizer(vectors)
        vectors = normalizer.apply_all(vectors)
    write_feature_csv(vectors, labels, args.out)
    print(f"wrote {len(vectors)} feature rows -> {args.out}")
    return 0


def cmd_train(args) -> int:
    if args.config:
        config = ExperimentConfig.from_json(args.config)
        if args.out:
            config.output_dir = args.out
    else:
        config = ExperimentConfig(
            output_dir=args.out or "experiment-out",
            maps=args.maps,
            runs_per_persona=args.runs,
            labeler=args.labeler,
            model=args.model,
            budget_nodes=args.budget_nodes,
            budget_seconds=args.budget_seconds,
            seed=args.seed,
            max_turns=args.max_turns,
            traces_file=args.traces,
            holdout_maps=args.holdout_maps or [],
            questionnaire_file=args.questionnaires,
            persona_c=args.persona_c,
            persona_k=args.persona_k,
            lstm_epochs=args.lstm_epochs,
            lstm_hidden=args.lstm_hidden,
            lstm_replicas=args.lstm_replicas,
        )
    report = run_experiment(config)
    for model_name in ("svm", "lstm"):
        if model_name in report:
            for split, numbers in report[model_name].items():
                if isinstance(numbers, dict) and "exactMatchAccuracy" in numbers:
                    print(f"{model_name} {split}: {numbers['exactMatchAccuracy']}")
    print(f"artifacts in {config.output_dir}")
    return 0


def cmd_eval(args) -> int:
    traces = read_traces(args.traces)
    labels = _load_labels_for(traces, args.labels)
    with open(args.model_file, "r", encoding="utf-8") as fh:
        fmt = json.load(fh).get("format")
    if fmt == "svm":
        model = load_svm(args.model_file)
        inputs = model.normalizer.apply_all(mechanic_frequencies(t) for t in traces)
    elif fmt == "lstm":
        model = load_lstm(args.model_file)
        inputs = [crop_sequence(t) for t in traces]
    else:
        raise SystemExit(f"unrecognized model file {args.model_file}")
    report = evaluate(model, inputs, labels, split=args.split)
    output = json.dumps(report.as_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(output + "\n", encoding="utf-8")
    print(output)
    return 0


def cmd_bench(args) -> int:
    traces = read_traces(args.traces)
    if args.limit:
        traces = traces[: args.limit]
    model = load_svm(args.model_file)
    budget = (
        WallClock(args.budget_seconds)
        if args.budget_seconds
        else NodeBudget(args.budget_nodes)
    )
    report = bench_aar_vs_inference(traces, model, budget)
    print(json.dumps(report.as_dict(), indent=2))
    return 0


def cmd_stats(args) -> int:
    traces = read_traces(args.traces)
    labels = _load_labels_for(traces, args.labels)
    result = stats_by_map(traces, labels) if args.by_map else stats_report(traces, labels)
    print(json.dumps(result, indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        model_path=args.model_file,
        data_dir=args.data_dir,
        static_dir=args.static_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dungeon-personas",
        description="Dungeon-crawl persona simulation, labeling, and classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate the synthetic persona corpus")
    p.add_argument("--maps", nargs="+", default=["reference"],
                   help=f"bundled names ({', '.join(builtin_map_names())}), paths, or 'reference'")
    p.add_argument("--runs", type=int, default=100, help="runs per (persona, map)")
    p.add_argument("--max-turns", type=int, default=500)
    p.add_argument("--out", required=True)
    _add_budget_flags(p)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("label", help="label traces (aar or questionnaire)")
    p.add_argument("--traces", required=True)
    p.add_argument("--labeler", choices=["aar", "questionnaire", "known"], default="aar")
    p.add_argument("--questionnaires", default=None)
    p.add_argument("--out", required=True)
    _add_budget_flags(p)
    p.set_defaults(fn=cmd_label)

    p = sub.add_parser("features", help="export the mechanic-frequency CSV")
    p.add_argument("--traces", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_features)

    p = sub.add_parser("train", help="run the full experiment protocol")
    p.add_argument("--config", default=None, help="JSON config file (flags override)")
    p.add_argument("--maps", nargs="+", default=["reference"])
    p.add_argument("--holdout-maps", nargs="+", default=None)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--labeler", choices=["known", "aar", "questionnaire"], default="known")
    p.add_argument("--questionnaires", default=None)
    p.add_argument("--model", choices=["svm", "lstm"], default="svm")
    p.add_argument("--traces", default=None, help="load this corpus instead of generating")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-turns", type=int, default=500)
    p.add_argument("--lstm-epochs", type=int, default=200)
    p.add_argument("--lstm-hidden", type=int, default=100)
    p.add_argument("--lstm-replicas", type=int, default=3)
    p.add_argument("--out", default=None)
    _add_budget_flags(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model on labeled traces")
    p.add_argument("--model-file", required=True)
    p.add_argument("--traces", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--split", default="testing")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("bench", help="AAR labeling vs frequency-model inference")
    p.add_argument("--traces", required=True)
    p.add_argument("--model-file", required=True)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--budget-nodes", type=int, default=5000)
    p.add_argument("--budget-seconds", type=float, default=0.05)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("stats", help="per-label-combination gameplay statistics")
    p.add_argument("--traces", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--by-map", action="store_true")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("serve", help="run the live-play session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--model-file", default=None)
    p.add_argument("--data-dir", default="session-data")
    p.add_argument("--static-dir", default=None,
                   help="serve a built browser client from this directory")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
