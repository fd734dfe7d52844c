"""Command-line surface: one subcommand per pipeline stage."""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from fractions import Fraction

from .config import PipelineConfig, load_config
from .errors import CrecError
from . import pipeline


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Path to a config file.")
    parser.add_argument("--out", default="crec-out", help="Artifact directory.")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--delta-threshold", type=int)
    parser.add_argument("--min-tokens", type=int)
    parser.add_argument("--min-lines", type=int)
    parser.add_argument("--theta", type=float)
    parser.add_argument("--link-floor", type=float)
    parser.add_argument("--l-th", type=float)
    parser.add_argument("--window-fraction", help="e.g. 1/10")
    parser.add_argument("--recent-fraction", help="e.g. 1/4")
    parser.add_argument("--boost-rounds", type=int)
    parser.add_argument("--recommend-threshold", type=float)
    parser.add_argument("--aggregation", choices=("mean", "max"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crec",
        description="Mine a repository's clone history and recommend groups to refactor.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def stage(name: str, help_text: str, repo: bool = False) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if repo:
            p.add_argument("--repo", required=True, help="Path to the git repository.")
        return p

    stage("mine", "Enumerate commits and sample versions.", repo=True)
    stage("detect", "Detect clone groups at every sampled version.", repo=True)
    stage("genealogy", "Link clone groups across versions into lineages.", repo=True)
    label = stage("label", "Label lineages as R/NR (Extract Method history).", repo=True)
    label.add_argument(
        "--sweep",
        type=float,
        nargs="+",
        help="Also emit R-label counts for these similarity thresholds.",
    )
    stage("featurize", "Compute the 34-feature vector per lineage.", repo=True)

    train = stage("train", "Train a classifier on labeled vectors.")
    train.add_argument("--rounds", type=int, help="Override boost_rounds.")
    train.add_argument("--algorithm", default="adaboost",
                       choices=("adaboost", "decision_tree", "random_forest", "naive_bayes"))

    stage("recommend", "Rank current clone groups by refactoring likelihood.")

    def eval_stage(name: str, help_text: str) -> argparse.ArgumentParser:
        p = stage(name, help_text)
        p.add_argument("--features", nargs="+", required=True,
                       help="Feature files, one per project.")
        p.add_argument("--setting", choices=("within", "cross"), required=True)
        p.add_argument("--balance", action="store_true",
                       help="Balance classes by seeded NR subsampling.")
        return p

    evaluate = eval_stage("evaluate", "Ten-fold or leave-one-project-out evaluation.")
    evaluate.add_argument("--algorithm", default="adaboost",
                          choices=("adaboost", "decision_tree", "random_forest", "naive_bayes"))
    eval_stage("ablate", "Re-run evaluation with each feature category removed.")
    compare = eval_stage("compare", "Evaluate several learning algorithms on shared folds.")
    compare.add_argument("--algorithms", nargs="+", required=True,
                         choices=("adaboost", "decision_tree", "random_forest", "naive_bayes"))
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    for f in fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value is None:
            continue
        if f.name in ("window_fraction", "recent_fraction"):
            num, _, den = str(value).partition("/")
            value = Fraction(int(num), int(den)) if den else Fraction(int(num))
        setattr(config, f.name, value)
    config.validate()
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        if args.command == "mine":
            summary = pipeline.stage_mine(config, args.repo, args.out)
        elif args.command == "detect":
            summary = pipeline.stage_detect(config, args.repo, args.out)
        elif args.command == "genealogy":
            summary = pipeline.stage_genealogy(config, args.repo, args.out)
        elif args.command == "label":
            summary = pipeline.stage_label(config, args.repo, args.out, args.sweep)
        elif args.command == "featurize":
            summary = pipeline.stage_featurize(config, args.repo, args.out)
        elif args.command == "train":
            if args.rounds is not None:
                config.boost_rounds = args.rounds
            summary = pipeline.stage_train(config, args.out, args.algorithm)
        elif args.command == "recommend":
            summary = pipeline.stage_recommend(config, args.out)
        elif args.command == "evaluate":
            summary = pipeline.stage_evaluate(
                config, args.features, args.setting, args.out, args.algorithm, args.balance
            )
        elif args.command == "ablate":
            summary = pipeline.stage_ablate(
                config, args.features, args.setting, args.out, args.balance
            )
        else:  # compare
            summary = pipeline.stage_compare(
                config, args.features, args.setting, args.algorithms, args.out, args.balance
            )
    except CrecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
