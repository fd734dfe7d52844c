"""Evaluation: balanced datasets, ten-fold and leave-one-project-out runs,
precision/recall/F-score, feature ablation, and learner comparison.

Fold metrics are pooled over test predictions (noted in report headers) rather
than averaged per fold, so tiny folds stay well-defined.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace

from .errors import InsufficientNegatives, TooFewProjects, TooSmall
from .learner import LabeledExample, predict_likelihood, train_alt


@dataclass(frozen=True)
class ConfusionCounts:
    recommended: int
    recommended_and_refactored: int
    known_refactored: int

    def __post_init__(self):
        if self.recommended_and_refactored > min(self.recommended, self.known_refactored):
            raise ValueError("hits exceed recommended or known counts")


def precision(c: ConfusionCounts) -> float:
    if c.recommended == 0:
        return 0.0
    return c.recommended_and_refactored / c.recommended


def recall(c: ConfusionCounts) -> float:
    if c.known_refactored == 0:
        return 0.0
    return c.recommended_and_refactored / c.known_refactored


def fscore(p: float, r: float) -> float:
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


@dataclass(frozen=True)
class LearnerConfig:
    algorithm: str = "adaboost"
    rounds: int = 50
    threshold: float = 0.5
    seed: int = 0
    features: tuple[int, ...] | None = None  # None = all 34

    def digest(self) -> str:
        payload = repr(
            (self.algorithm, self.rounds, self.threshold, self.seed, self.features)
        ).encode()
        return hashlib.sha256(payload).hexdigest()[:12]


@dataclass
class EvalRow:
    name: str
    precision: float
    recall: float
    fscore: float
    flags: list[str] = field(default_factory=list)


@dataclass
class EvalReport:
    setting: str  # within | cross
    rows: list[EvalRow]
    averages: tuple[float, float, float]
    config_digest: str
    metric_mode: str = "pooled"


def _train(config: LearnerConfig, examples: list[LabeledExample]):
    features = list(config.features) if config.features is not None else None
    return train_alt(
        config.algorithm,
        examples,
        seed=config.seed,
        features=features,
        rounds=config.rounds,
    )


def _score(model, examples: list[LabeledExample], threshold: float) -> ConfusionCounts:
    rec = hits = known = 0
    for ex in examples:
        recommended = predict_likelihood(model, ex.vector) >= threshold
        rec += recommended
        hits += recommended and ex.label == 1
        known += ex.label == 1
    return ConfusionCounts(rec, hits, known)


def build_balanced_dataset(
    r_examples: list[LabeledExample],
    nr_pool: list[LabeledExample],
    seed: int,
) -> list[LabeledExample]:
    """R examples plus an equal-size seeded uniform draw from the NR pool."""
    if len(nr_pool) < len(r_examples):
        raise InsufficientNegatives(
            f"need {len(r_examples)} negatives, pool has {len(nr_pool)}"
        )
    rng = random.Random(seed)
    chosen = rng.sample(nr_pool, len(r_examples))
    return list(r_examples) + chosen


def fold_assignment(dataset: list[LabeledExample], seed: int, folds: int = 10) -> list[list[int]]:
    """Stratified shuffle: per-class fold sizes differ by at most one."""
    pos = [i for i, ex in enumerate(dataset) if ex.label == 1]
    neg = [i for i, ex in enumerate(dataset) if ex.label == 0]
    rng = random.Random(seed)
    rng.shuffle(pos)
    rng.shuffle(neg)
    assignment: list[list[int]] = [[] for _ in range(folds)]
    for k, idx in enumerate(pos):
        assignment[k % folds].append(idx)
    for k, idx in enumerate(neg):
        assignment[k % folds].append(idx)
    return assignment


def ten_fold(
    dataset: list[LabeledExample], config: LearnerConfig, seed: int | None = None
) -> EvalRow:
    """Pooled precision/recall/F over rotating train-9/test-1 splits."""
    if len(dataset) < 10:
        raise TooSmall(f"ten-fold needs >= 10 examples, have {len(dataset)}")
    folds = fold_assignment(dataset, config.seed if seed is None else seed)
    rec = hits = known = 0
    for test_idx in folds:
        held = set(test_idx)
        train = [ex for i, ex in enumerate(dataset) if i not in held]
        test = [dataset[i] for i in test_idx]
        model = _train(config, train)
        c = _score(model, test, config.threshold)
        rec += c.recommended
        hits += c.recommended_and_refactored
        known += c.known_refactored
    pooled = ConfusionCounts(rec, hits, known)
    p, r = precision(pooled), recall(pooled)
    return EvalRow("pooled", p, r, fscore(p, r))


def cross_project(
    projects: list[tuple[str, list[LabeledExample]]], config: LearnerConfig
) -> EvalReport:
    """Leave one project out, train on the rest, report per-project metrics."""
    if len(projects) < 2:
        raise TooFewProjects(f"need >= 2 projects, have {len(projects)}")
    rows = []
    for held_name, held_data in projects:
        train: list[LabeledExample] = []
        for name, data in projects:
            if name != held_name:
                train.extend(data)
        model = _train(config, train)
        c = _score(model, held_data, config.threshold)
        p, r = precision(c), recall(c)
        flags = ["no_positives"] if c.known_refactored == 0 else []
        rows.append(EvalRow(held_name, p, r, fscore(p, r), flags))
    return EvalReport(
        setting="cross",
        rows=rows,
        averages=_averages(rows),
        config_digest=config.digest(),
    )


def within_project(
    projects: list[tuple[str, list[LabeledExample]]], config: LearnerConfig
) -> EvalReport:
    """Ten-fold per project; one report row per project plus averages."""
    rows = []
    for name, data in projects:
        row = ten_fold(data, config)
        rows.append(EvalRow(name, row.precision, row.recall, row.fscore))
    return EvalReport(
        setting="within",
        rows=rows,
        averages=_averages(rows),
        config_digest=config.digest(),
    )


def _averages(rows: list[EvalRow]) -> tuple[float, float, float]:
    n = len(rows)
    return (
        sum(r.precision for r in rows) / n,
        sum(r.recall for r in rows) / n,
        sum(r.fscore for r in rows) / n,
    )


FEATURE_CATEGORIES = {
    "Code": tuple(range(1, 12)),
    "History": tuple(range(12, 18)),
    "Location": tuple(range(18, 24)),
    "Diff": tuple(range(24, 30)),
    "CoChange": tuple(range(30, 35)),
}


def _run_setting(
    projects: list[tuple[str, list[LabeledExample]]], setting: str, config: LearnerConfig
) -> EvalReport:
    if setting == "within":
        return within_project(projects, config)
    if setting == "cross":
        return cross_project(projects, config)
    raise ValueError(f"unknown setting: {setting}")


def ablation(
    projects: list[tuple[str, list[LabeledExample]]],
    setting: str,
    config: LearnerConfig,
) -> list[tuple[str, float, float, float]]:
    """All-features run plus one run per feature category masked out."""
    base = config.features if config.features is not None else tuple(range(1, 35))
    rows = []
    report = _run_setting(projects, setting, config)
    rows.append(("AllFeatures", *report.averages))
    for category, masked in FEATURE_CATEGORIES.items():
        kept = tuple(f for f in base if f not in masked)
        report = _run_setting(projects, setting, replace(config, features=kept))
        rows.append((f"Except{category}", *report.averages))
    return rows


def compare_learners(
    projects: list[tuple[str, list[LabeledExample]]],
    setting: str,
    algorithms: list[str],
    config: LearnerConfig,
) -> list[tuple[str, float, float, float]]:
    """One metric triple per algorithm; identical seeds so folds match exactly."""
    rows = []
    for algorithm in algorithms:
        report = _run_setting(projects, setting, replace(config, algorithm=algorithm))
        rows.append((algorithm, *report.averages))
    return rows
