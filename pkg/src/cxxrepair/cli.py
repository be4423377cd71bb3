"""Command-line entry point.

Subcommand tree:
  corpus validate|sample|split     dataset hygiene and deterministic selection
  forge seed|generate|verify|filter|review
                                   dataset construction pipeline
  eval run                         actor evaluation over a dataset
  reward serve                     HTTP scoring service
  metrics report|meta              aggregate metrics and agreement analysis
  panel serve                      annotation panel service (+ static UI)

Exit codes: 0 success, 1 domain error (bad data, failed verification,
unreachable tools), 2 usage error. Configuration precedence for shared
settings is flags, then environment variables, then --config JSON file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from cxxrepair import __version__
from cxxrepair.compile_harness import COMPILER_ENV_VAR, CompilerConfig
from cxxrepair.errors import CxxRepairError
from cxxrepair.gateway import (
    ENDPOINT_ENV_VAR,
    TOKEN_ENV_VAR,
    GatewayMode,
    ModelGateway,
)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"config file not found: {config_path}")
    raw = json.loads(config_path.read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ValueError(f"config file must hold a JSON object: {config_path}")
    return raw


def _resolve(flag_value, env_name: str | None, config: dict, config_key: str, default=None):
    """flags > environment > config file > default."""
    if flag_value is not None:
        return flag_value
    if env_name:
        env_value = os.environ.get(env_name)
        if env_value:
            return env_value
    if config_key in config:
        return config[config_key]
    return default


def _add_gateway_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("model gateway")
    group.add_argument(
        "--gateway-mode",
        choices=[mode.value for mode in GatewayMode],
        default=None,
        help="live calls, record (live + save fixtures), or replay from fixtures (default: replay)",
    )
    group.add_argument("--fixtures", default=None, help="fixture directory for record/replay")
    group.add_argument("--endpoint", default=None, help=f"model API URL (env {ENDPOINT_ENV_VAR})")
    group.add_argument("--api-token", default=None, help=f"bearer token (env {TOKEN_ENV_VAR})")


def _add_compiler_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("compiler")
    group.add_argument("--compiler", default=None, help=f"compiler binary (env {COMPILER_ENV_VAR})")
    group.add_argument("--std", default=None, help="language standard (default c++17)")
    group.add_argument("--compile-timeout", type=float, default=None, help="seconds per compile")
    group.add_argument("--max-parallel", type=int, default=None, help="concurrent compiles")


def _add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="JSON file with shared settings")


def _gateway_from(args: argparse.Namespace, config: dict) -> ModelGateway:
    mode = GatewayMode(_resolve(args.gateway_mode, None, config, "gateway_mode", "replay"))
    return ModelGateway(
        mode=mode,
        fixtures_dir=_resolve(args.fixtures, None, config, "fixtures"),
        endpoint=_resolve(args.endpoint, ENDPOINT_ENV_VAR, config, "endpoint"),
        api_token=_resolve(args.api_token, TOKEN_ENV_VAR, config, "api_token"),
    )


def _compiler_from(args: argparse.Namespace, config: dict) -> CompilerConfig:
    kwargs = {}
    timeout = _resolve(args.compile_timeout, None, config, "compile_timeout")
    max_parallel = _resolve(args.max_parallel, None, config, "max_parallel")
    if timeout is not None:
        kwargs["timeout"] = float(timeout)
    if max_parallel is not None:
        kwargs["max_parallel"] = int(max_parallel)
    return CompilerConfig(
        compiler_path=_resolve(args.compiler, COMPILER_ENV_VAR, config, "compiler", "g++"),
        language_standard=_resolve(args.std, None, config, "std", "c++17"),
        **kwargs,
    )


# ------------------------------------------------------------------ corpus


def _cmd_corpus_validate(args: argparse.Namespace) -> int:
    from cxxrepair import corpus

    dataset = corpus.load_dataset(args.dataset)
    counts = dataset.difficulty_counts()
    print(f"{args.dataset}: {len(dataset)} records, all valid")
    for level in corpus.DifficultyLevel:
        if counts.get(level):
            print(f"  {level.value:<12} {counts[level]}")
    return 0


def _cmd_corpus_sample(args: argparse.Namespace) -> int:
    from cxxrepair import corpus

    dataset = corpus.load_dataset(args.dataset)
    sample = corpus.stratified_sample(dataset, n=args.n, seed=args.seed)
    corpus.write_dataset(sample, args.out)
    print(f"wrote {len(sample)} of {len(dataset)} records to {args.out}")
    return 0


def _cmd_corpus_split(args: argparse.Namespace) -> int:
    from cxxrepair import corpus

    dataset = corpus.load_dataset(args.dataset)
    train, evaluation = corpus.split(dataset, train_fraction=args.train_fraction, seed=args.seed)
    corpus.write_dataset(train, args.train_out)
    corpus.write_dataset(evaluation, args.eval_out)
    print(f"wrote {len(train)} train records to {args.train_out}")
    print(f"wrote {len(evaluation)} eval records to {args.eval_out}")
    return 0


# ------------------------------------------------------------------- forge


def _cmd_forge_seed(args: argparse.Namespace) -> int:
    from cxxrepair import corpus, forge
    from cxxrepair.errors import ForgeError

    config = _load_config(args.config)
    compiler = _compiler_from(args, config)
    gateway = _gateway_from(args, config)
    seeds = forge.load_seed_snippets(args.seeds)
    records, failures = [], 0
    for seed in seeds:
        try:
            records.append(forge.augment_snippet(seed, compiler, gateway))
        except ForgeError as exc:
            failures += 1
            print(f"seed rejected: {exc}", file=sys.stderr)
    corpus.write_dataset(corpus.Dataset(records=records), args.out)
    print(f"admitted {len(records)} of {len(seeds)} seeds -> {args.out}")
    return 0 if failures == 0 else 1


def _cmd_forge_generate(args: argparse.Namespace) -> int:
    from cxxrepair import corpus, forge

    config = _load_config(args.config)
    compiler = _compiler_from(args, config)
    gateway = _gateway_from(args, config)
    target = forge.ErrorTarget(
        error_type=args.error_type,
        error_number=args.error_number,
        error_detail=args.error_detail,
    )
    records = forge.build_synthetic_records(target, args.k, compiler, gateway)
    corpus.write_dataset(corpus.Dataset(records=records), args.out)
    print(f"admitted {len(records)} of {args.k} candidates -> {args.out}")
    return 0


def _cmd_forge_verify(args: argparse.Namespace) -> int:
    from cxxrepair import corpus, forge

    config = _load_config(args.config)
    compiler = _compiler_from(args, config)
    gateway = _gateway_from(args, config)
    dataset = corpus.load_dataset(args.dataset)
    rejected = 0
    for record in dataset:
        target = forge.ErrorTarget(
            error_type=record.error_type,
            error_number=record.error_number,
            error_detail=record.error_detail,
        )
        result = forge.verify_candidate(record.buggy_source, target, compiler, gateway)
        print(f"{record.id}: {'accepted' if result.accepted else 'rejected'}")
        if not result.accepted:
            rejected += 1
    print(f"{len(dataset) - rejected} of {len(dataset)} records verified")
    return 0 if rejected == 0 else 1


def _cmd_forge_filter(args: argparse.Namespace) -> int:
    from cxxrepair import corpus, forge

    dataset = corpus.load_dataset(args.dataset)
    evidence = forge.load_msvc_evidence(args.evidence)
    flags = forge.evidence_flags(evidence)
    kept = forge.filter_dataset(dataset, flags)
    corpus.write_dataset(kept, args.out)
    flagged = sorted(error_type for error_type, flag in flags.items() if flag)
    print(f"kept {len(kept)} of {len(dataset)} records -> {args.out}")
    if flagged:
        print("dropped error types: " + ", ".join(flagged))
    return 0


def _cmd_forge_review(args: argparse.Namespace) -> int:
    from cxxrepair import corpus, forge

    dataset = corpus.load_dataset(args.dataset)
    out = forge.export_review_sample(dataset, n=args.n, seed=args.seed, out_path=args.out)
    print(f"wrote review sample of {args.n} records to {out}")
    return 0


# -------------------------------------------------------------------- eval


def _cmd_eval_run(args: argparse.Namespace) -> int:
    from cxxrepair import corpus, metrics, reward

    config = _load_config(args.config)
    compiler = _compiler_from(args, config)
    gateway = _gateway_from(args, config)
    dataset = corpus.load_dataset(args.dataset)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = reward.evaluate_actor(dataset, compiler, gateway, out_path=out_dir / "scores.jsonl")
    if args.format == "records":
        rendered, name = metrics.render_report_records(report), "report.jsonl"
    else:
        rendered, name = metrics.render_report_text(report), "report.txt"
    (out_dir / name).write_text(rendered, encoding="utf-8")
    print(rendered, end="")
    return 0


# ------------------------------------------------------------------ reward


def _cmd_reward_serve(args: argparse.Namespace) -> int:
    from cxxrepair import service

    config = _load_config(args.config)
    service.serve(
        compiler=_compiler_from(args, config),
        gateway=_gateway_from(args, config),
        host=args.host,
        port=args.port,
    )
    return 0


# ----------------------------------------------------------------- metrics


def _cmd_metrics_report(args: argparse.Namespace) -> int:
    from cxxrepair import metrics, reward

    attempts = reward.load_score_records(args.scores)
    report = metrics.build_evaluation_report(attempts)
    if args.format == "records":
        print(metrics.render_report_records(report), end="")
    else:
        print(metrics.render_report_text(report), end="")
    return 0


def _cmd_metrics_meta(args: argparse.Namespace) -> int:
    from cxxrepair import metrics

    annotations = metrics.load_annotations(args.annotations)
    reliability = metrics.inter_rater_reliability(annotations)
    print(f"raters:            {len(annotations.raters)}")
    print(f"items:             {len(annotations.items)}")
    for rater in annotations.raters:
        print(f"  vs {rater:<16} {reliability.per_standard[rater]:.4f}")
    print(f"inter-rater macro F1: {reliability.overall:.4f}")
    print(f"chance baseline:      {metrics.chance_baseline(len(metrics.ALL_CATEGORIES)):.4f}")
    if args.judge_labels:
        judge_labels = {}
        with open(args.judge_labels, encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                raw = json.loads(line)
                judge_labels[str(raw["item"])] = metrics.VerdictCategory(raw["category"])
        meta = metrics.meta_evaluate_judge(judge_labels, annotations, judge_id=args.judge_id)
        print(f"judge {meta.judge_id} vs consensus: {meta.judge_vs_consensus:.4f} "
              f"({meta.n_consensus_items} items, {meta.n_dropped_ties} ties dropped)")
    return 0


# ------------------------------------------------------------------- panel


def _cmd_panel_serve(args: argparse.Namespace) -> int:
    from cxxrepair import panel

    store = panel.PanelStore(args.state_dir)
    panel.serve(store, host=args.host, port=args.port, ui_dir=args.ui_dir)
    return 0


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cxxrepair",
        description="C++ compile-repair dataset forge, reward service, and review panel",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    top = parser.add_subparsers(dest="command", required=True, metavar="command")

    # corpus
    corpus_cmd = top.add_parser("corpus", help="dataset inspection and selection")
    corpus_sub = corpus_cmd.add_subparsers(dest="subcommand", required=True, metavar="op")
    validate = corpus_sub.add_parser("validate", help="check every record in a dataset file")
    validate.add_argument("dataset")
    validate.set_defaults(func=_cmd_corpus_validate)
    sample = corpus_sub.add_parser("sample", help="difficulty-stratified sample")
    sample.add_argument("dataset")
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--out", required=True)
    sample.set_defaults(func=_cmd_corpus_sample)
    split = corpus_sub.add_parser("split", help="seeded train/eval split")
    split.add_argument("dataset")
    split.add_argument("--train-fraction", type=float, default=0.9)
    split.add_argument("--seed", type=int, default=0)
    split.add_argument("--train-out", required=True)
    split.add_argument("--eval-out", required=True)
    split.set_defaults(func=_cmd_corpus_split)

    # forge
    forge_cmd = top.add_parser("forge", help="dataset construction pipeline")
    forge_sub = forge_cmd.add_subparsers(dest="subcommand", required=True, metavar="op")
    seed_p = forge_sub.add_parser("seed", help="augment seed fragments into verified records")
    seed_p.add_argument("--seeds", required=True, help="seed fragment file (line-delimited)")
    seed_p.add_argument("--out", required=True)
    generate = forge_sub.add_parser("generate", help="generate-and-verify synthetic records")
    generate.add_argument("--error-type", required=True)
    generate.add_argument("--error-number", required=True)
    generate.add_argument("--error-detail", required=True)
    generate.add_argument("--k", type=int, required=True, help="candidates to request")
    generate.add_argument("--out", required=True)
    verify = forge_sub.add_parser("verify", help="re-verify every record in a dataset")
    verify.add_argument("dataset")
    filter_p = forge_sub.add_parser("filter", help="drop compiler-specific error types")
    filter_p.add_argument("dataset")
    filter_p.add_argument("--evidence", required=True, help="per-error-type evidence file")
    filter_p.add_argument("--out", required=True)
    review = forge_sub.add_parser("review", help="export a seeded sample for human review")
    review.add_argument("dataset")
    review.add_argument("--n", type=int, required=True)
    review.add_argument("--seed", type=int, default=0)
    review.add_argument("--out", required=True)
    for sub, func in (
        (seed_p, _cmd_forge_seed),
        (generate, _cmd_forge_generate),
        (verify, _cmd_forge_verify),
        (filter_p, _cmd_forge_filter),
        (review, _cmd_forge_review),
    ):
        sub.set_defaults(func=func)
        if func in (_cmd_forge_seed, _cmd_forge_generate, _cmd_forge_verify):
            _add_gateway_flags(sub)
            _add_compiler_flags(sub)
            _add_config_flag(sub)

    # eval
    eval_cmd = top.add_parser("eval", help="run the actor over a dataset and score it")
    eval_sub = eval_cmd.add_subparsers(dest="subcommand", required=True, metavar="op")
    run = eval_sub.add_parser("run", help="propose, judge, compile, aggregate")
    run.add_argument("dataset")
    run.add_argument("--out-dir", required=True)
    run.add_argument("--format", choices=["text", "records"], default="text")
    _add_gateway_flags(run)
    _add_compiler_flags(run)
    _add_config_flag(run)
    run.set_defaults(func=_cmd_eval_run)

    # reward
    reward_cmd = top.add_parser("reward", help="reward scoring service")
    reward_sub = reward_cmd.add_subparsers(dest="subcommand", required=True, metavar="op")
    serve_p = reward_sub.add_parser("serve", help="serve POST /score over HTTP")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8080)
    _add_gateway_flags(serve_p)
    _add_compiler_flags(serve_p)
    _add_config_flag(serve_p)
    serve_p.set_defaults(func=_cmd_reward_serve)

    # metrics
    metrics_cmd = top.add_parser("metrics", help="aggregate metrics and agreement")
    metrics_sub = metrics_cmd.add_subparsers(dest="subcommand", required=True, metavar="op")
    report = metrics_sub.add_parser("report", help="aggregate a score file")
    report.add_argument("scores")
    report.add_argument("--format", choices=["text", "records"], default="text")
    report.set_defaults(func=_cmd_metrics_report)
    meta = metrics_sub.add_parser("meta", help="inter-rater agreement and judge meta-evaluation")
    meta.add_argument("annotations", help="line-delimited rater/item/category file")
    meta.add_argument("--judge-labels", default=None, help="line-delimited item/category file")
    meta.add_argument("--judge-id", default="judge")
    meta.set_defaults(func=_cmd_metrics_meta)

    # panel
    panel_cmd = top.add_parser("panel", help="annotation panel service")
    panel_sub = panel_cmd.add_subparsers(dest="subcommand", required=True, metavar="op")
    panel_serve = panel_sub.add_parser("serve", help="serve the annotation API (+ static UI)")
    panel_serve.add_argument("--state-dir", required=True)
    panel_serve.add_argument("--host", default="127.0.0.1")
    panel_serve.add_argument("--port", type=int, default=8081)
    panel_serve.add_argument("--ui-dir", default=None, help="static assets to serve at /")
    panel_serve.set_defaults(func=_cmd_panel_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse has already printed usage/help
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except (CxxRepairError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
