"""Classifiers over 34-feature vectors: AdaBoost on decision stumps by default,
with decision-tree, random-forest, and naive-Bayes alternatives behind the same
likelihood interface. Everything is deterministic for a fixed seed."""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, replace

from .errors import DegenerateData
from .features import FEATURE_NAMES, FeatureVector

NEG_INF = float("-inf")


@dataclass(frozen=True)
class LabeledExample:
    vector: FeatureVector
    label: int  # 1 = historically refactored

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class DecisionStump:
    feature_index: int  # 1-based
    threshold: float
    polarity: str  # "le": predict 1 when value <= threshold; "gt": when value > it
    alpha: float

    def vote(self, values: tuple[float, ...]) -> int:
        v = values[self.feature_index - 1]
        if self.polarity == "le":
            return 1 if v <= self.threshold else 0
        return 1 if v > self.threshold else 0


def dataset_digest(examples: list[LabeledExample]) -> str:
    payload = repr([(e.vector.values, e.label) for e in examples]).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def best_stump(
    examples: list[LabeledExample],
    weights: list[float],
    features: list[int] | None = None,
) -> tuple[DecisionStump, float]:
    """Exhaustive stump search: every feature, every midpoint threshold plus
    -inf, both polarities. Returns (stump with alpha 0, weighted error); ties
    break toward lower feature index, lower threshold, 'le' first."""
    n = len(examples)
    if n == 0:
        raise DegenerateData("no examples")
    labels = [e.label for e in examples]
    total = sum(weights)
    total_pos = sum(w for w, y in zip(weights, labels) if y == 1)
    dim = len(examples[0].vector.values)
    feats = sorted(features) if features is not None else list(range(1, dim + 1))

    best: tuple[float, int, float, str] | None = None

    def consider(err: float, f: int, t: float, pol: str) -> None:
        nonlocal best
        if best is None or err < best[0]:
            best = (err, f, t, pol)

    for f in feats:
        values = [e.vector.values[f - 1] for e in examples]
        order = sorted(range(n), key=lambda i: values[i])
        # threshold -inf: "le" predicts 0 everywhere, missing every positive
        err_le = total_pos
        consider(err_le, f, NEG_INF, "le")
        consider(total - err_le, f, NEG_INF, "gt")
        i = 0
        while i < n:
            v = values[order[i]]
            j = i
            while j < n and values[order[j]] == v:
                idx = order[j]
                err_le += weights[idx] if labels[idx] == 0 else -weights[idx]
                j += 1
            if j < n:  # midpoint between consecutive distinct values
                t = (v + values[order[j]]) / 2
                consider(err_le, f, t, "le")
                consider(total - err_le, f, t, "gt")
            i = j
    err, f, t, pol = best  # type: ignore[misc]
    return DecisionStump(f, t, pol, alpha=0.0), err


@dataclass
class BoostModel:
    stumps: list[DecisionStump]
    feature_names: tuple[str, ...]
    rounds: int
    seed: int
    dataset_digest: str

    def predict_likelihood(self, values: tuple[float, ...]) -> float:
        total = sum(s.alpha for s in self.stumps)
        if total <= 0:
            return 0.5  # uninformative ensemble
        voted = sum(s.alpha for s in self.stumps if s.vote(values) == 1)
        return voted / total

    def to_dict(self) -> dict:
        return {
            "algorithm": "adaboost",
            "rounds": self.rounds,
            "seed": self.seed,
            "dataset_digest": self.dataset_digest,
            "feature_names": list(self.feature_names),
            "stumps": [
                {
                    "feature": s.feature_index,
                    "threshold": s.threshold,
                    "polarity": s.polarity,
                    "alpha": s.alpha,
                }
                for s in self.stumps
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoostModel":
        return cls(
            stumps=[
                DecisionStump(s["feature"], s["threshold"], s["polarity"], s["alpha"])
                for s in d["stumps"]
            ],
            feature_names=tuple(d["feature_names"]),
            rounds=d["rounds"],
            seed=d["seed"],
            dataset_digest=d["dataset_digest"],
        )


def _constant_stump(label: int) -> DecisionStump:
    # gt over -inf fires always; le over -inf never
    return DecisionStump(1, NEG_INF, "gt" if label == 1 else "le", alpha=1.0)


def train_adaboost(
    examples: list[LabeledExample],
    rounds: int = 50,
    seed: int = 0,
    features: list[int] | None = None,
) -> BoostModel:
    """Discrete AdaBoost; stops early once a round's error hits 0 or 0.5."""
    if not examples:
        raise DegenerateData("no examples")
    digest = dataset_digest(examples)
    labels = {e.label for e in examples}
    if len(labels) == 1:
        return BoostModel(
            [_constant_stump(labels.pop())], FEATURE_NAMES, rounds, seed, digest
        )
    n = len(examples)
    weights = [1.0 / n] * n
    stumps = []
    for _ in range(rounds):
        stump, err = best_stump(examples, weights, features)
        e = max(min(err / sum(weights), 1.0 - 1e-10), 1e-10)
        alpha = 0.5 * math.log((1.0 - e) / e)
        stumps.append(replace(stump, alpha=alpha))
        if err == 0.0 or err / sum(weights) >= 0.5:
            break
        norm = 0.0
        for i, ex in enumerate(examples):
            agree = 1 if stump.vote(ex.vector.values) == ex.label else -1
            weights[i] *= math.exp(-alpha * agree)
            norm += weights[i]
        weights = [w / norm for w in weights]
    return BoostModel(stumps, FEATURE_NAMES, rounds, seed, digest)


def predict_likelihood(model, vector) -> float:
    values = vector.values if isinstance(vector, FeatureVector) else tuple(vector)
    return model.predict_likelihood(values)


def recommend(
    model,
    candidates: list[tuple[str, FeatureVector]],
    threshold: float = 0.5,
) -> list[tuple[str, float]]:
    """Ranked (group_id, likelihood) pairs at or above the cutoff."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    scored = [
        (group_id, predict_likelihood(model, vec)) for group_id, vec in candidates
    ]
    kept = [(g, p) for g, p in scored if p >= threshold]
    kept.sort(key=lambda item: (-item[1], item[0]))
    return kept


# -- alternative learners ------------------------------------------------------


@dataclass
class TreeNode:
    prob: float  # positive-class fraction at this node
    feature: int | None = None  # 1-based; None for leaves
    threshold: float | None = None
    left: "TreeNode | None" = None  # value <= threshold
    right: "TreeNode | None" = None

    def predict(self, values: tuple[float, ...]) -> float:
        node = self
        while node.feature is not None:
            node = node.left if values[node.feature - 1] <= node.threshold else node.right
        return node.prob

    def to_dict(self) -> dict:
        if self.feature is None:
            return {"prob": self.prob}
        return {
            "prob": self.prob,
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "feature" not in d:
            return cls(prob=d["prob"])
        return cls(
            prob=d["prob"],
            feature=d["feature"],
            threshold=d["threshold"],
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
        )


def _entropy(pos: int, n: int) -> float:
    if pos == 0 or pos == n:
        return 0.0
    p = pos / n
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def _grow_tree(
    rows: list[tuple[tuple[float, ...], int]],
    features: list[int],
    min_leaf: int,
    rng: random.Random | None,
    subsample: int | None,
) -> TreeNode:
    """Gain-ratio binary tree; both children of any split hold >= min_leaf rows."""
    n = len(rows)
    pos = sum(label for _, label in rows)
    node = TreeNode(prob=pos / n)
    if pos == 0 or pos == n or n < 2 * min_leaf:
        return node
    parent_entropy = _entropy(pos, n)

    pool = features
    if subsample is not None and rng is not None:
        # random order; constant features are skipped without using up the budget
        pool = rng.sample(features, len(features))

    best = None  # ((negated gain ratio, feature, threshold), feature, threshold)
    evaluated = 0
    for f in pool:
        ordered = sorted(rows, key=lambda r: r[0][f - 1])
        if ordered[0][0][f - 1] == ordered[-1][0][f - 1]:
            continue  # constant in this sample
        evaluated += 1
        left_pos = 0
        for i in range(1, n):
            left_pos += ordered[i - 1][1]
            if ordered[i - 1][0][f - 1] == ordered[i][0][f - 1]:
                continue
            if i < min_leaf or n - i < min_leaf:
                continue
            gain = parent_entropy - (
                i / n * _entropy(left_pos, i) + (n - i) / n * _entropy(pos - left_pos, n - i)
            )
            split_info = _entropy(i, n)  # same shape: -(p log p + q log q)
            if split_info <= 0.0 or gain <= 1e-12:
                continue
            ratio = gain / split_info
            threshold = (ordered[i - 1][0][f - 1] + ordered[i][0][f - 1]) / 2
            key = (-ratio, f, threshold)
            if best is None or key < best[0]:
                best = (key, f, threshold)
        if subsample is not None and evaluated >= subsample:
            break
    if best is None:
        return node
    _, f, threshold = best
    left_rows = [r for r in rows if r[0][f - 1] <= threshold]
    right_rows = [r for r in rows if r[0][f - 1] > threshold]
    node.feature = f
    node.threshold = threshold
    node.left = _grow_tree(left_rows, features, min_leaf, rng, subsample)
    node.right = _grow_tree(right_rows, features, min_leaf, rng, subsample)
    return node


@dataclass
class TreeModel:
    root: TreeNode
    seed: int
    dataset_digest: str

    def predict_likelihood(self, values: tuple[float, ...]) -> float:
        return self.root.predict(values)

    def to_dict(self) -> dict:
        return {
            "algorithm": "decision_tree",
            "seed": self.seed,
            "dataset_digest": self.dataset_digest,
            "root": self.root.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeModel":
        return cls(TreeNode.from_dict(d["root"]), d["seed"], d["dataset_digest"])


@dataclass
class ForestModel:
    trees: list[TreeNode]
    seed: int
    dataset_digest: str

    def predict_likelihood(self, values: tuple[float, ...]) -> float:
        votes = sum(1 for t in self.trees if t.predict(values) >= 0.5)
        return votes / len(self.trees)

    def to_dict(self) -> dict:
        return {
            "algorithm": "random_forest",
            "seed": self.seed,
            "dataset_digest": self.dataset_digest,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls([TreeNode.from_dict(t) for t in d["trees"]], d["seed"], d["dataset_digest"])


@dataclass
class NaiveBayesModel:
    priors: tuple[float, float]
    means: tuple[tuple[float, ...], tuple[float, ...]]  # per class, per feature
    variances: tuple[tuple[float, ...], tuple[float, ...]]
    features: tuple[int, ...]
    seed: int
    dataset_digest: str

    def predict_likelihood(self, values: tuple[float, ...]) -> float:
        logs = []
        for cls in (0, 1):
            total = math.log(self.priors[cls])
            for k, f in enumerate(self.features):
                var = self.variances[cls][k]
                diff = values[f - 1] - self.means[cls][k]
                total += -0.5 * math.log(2 * math.pi * var) - diff * diff / (2 * var)
            logs.append(total)
        peak = max(logs)
        odds = [math.exp(l - peak) for l in logs]
        return odds[1] / (odds[0] + odds[1])

    def to_dict(self) -> dict:
        return {
            "algorithm": "naive_bayes",
            "seed": self.seed,
            "dataset_digest": self.dataset_digest,
            "priors": list(self.priors),
            "means": [list(m) for m in self.means],
            "variances": [list(v) for v in self.variances],
            "features": list(self.features),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NaiveBayesModel":
        return cls(
            priors=tuple(d["priors"]),
            means=tuple(tuple(m) for m in d["means"]),
            variances=tuple(tuple(v) for v in d["variances"]),
            features=tuple(d["features"]),
            seed=d["seed"],
            dataset_digest=d["dataset_digest"],
        )


@dataclass
class ConstantModel:
    likelihood: float
    dataset_digest: str

    def predict_likelihood(self, values: tuple[float, ...]) -> float:
        return self.likelihood

    def to_dict(self) -> dict:
        return {
            "algorithm": "constant",
            "likelihood": self.likelihood,
            "dataset_digest": self.dataset_digest,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConstantModel":
        return cls(d["likelihood"], d["dataset_digest"])


ALGORITHMS = ("adaboost", "decision_tree", "random_forest", "naive_bayes")

_VARIANCE_FLOOR = 1e-9
_FOREST_SIZE = 100
_MIN_LEAF = 2


def train_alt(
    algorithm: str,
    examples: list[LabeledExample],
    seed: int = 0,
    features: list[int] | None = None,
    rounds: int = 50,
):
    """Train any supported algorithm; all models expose predict_likelihood."""
    if algorithm == "adaboost":
        return train_adaboost(examples, rounds=rounds, seed=seed, features=features)
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm: {algorithm}")
    if not examples:
        raise DegenerateData("no examples")
    digest = dataset_digest(examples)
    labels = {e.label for e in examples}
    if len(labels) == 1:
        return ConstantModel(float(labels.pop()), digest)

    dim = len(examples[0].vector.values)
    feats = sorted(features) if features is not None else list(range(1, dim + 1))
    rows = [(e.vector.values, e.label) for e in examples]

    if algorithm == "decision_tree":
        root = _grow_tree(rows, feats, _MIN_LEAF, rng=None, subsample=None)
        return TreeModel(root, seed, digest)

    if algorithm == "random_forest":
        rng = random.Random(seed)
        subsample = max(1, math.isqrt(len(feats)))
        trees = []
        for _ in range(_FOREST_SIZE):
            sample = [rows[rng.randrange(len(rows))] for _ in range(len(rows))]
            trees.append(_grow_tree(sample, feats, _MIN_LEAF, rng, subsample))
        return ForestModel(trees, seed, digest)

    # naive_bayes
    means, variances = [], []
    for cls in (0, 1):
        cls_rows = [values for values, label in rows if label == cls]
        m, v = [], []
        for f in feats:
            column = [values[f - 1] for values in cls_rows]
            mu = sum(column) / len(column)
            var = sum((x - mu) ** 2 for x in column) / len(column)
            m.append(mu)
            v.append(max(var, _VARIANCE_FLOOR))
        means.append(tuple(m))
        variances.append(tuple(v))
    n = len(rows)
    pos = sum(label for _, label in rows)
    return NaiveBayesModel(
        priors=((n - pos) / n, pos / n),
        means=(means[0], means[1]),
        variances=(variances[0], variances[1]),
        features=tuple(feats),
        seed=seed,
        dataset_digest=digest,
    )


def model_from_dict(d: dict):
    kind = d["algorithm"]
    if kind == "adaboost":
        return BoostModel.from_dict(d)
    if kind == "decision_tree":
        return TreeModel.from_dict(d)
    if kind == "random_forest":
        return ForestModel.from_dict(d)
    if kind == "naive_bayes":
        return NaiveBayesModel.from_dict(d)
    if kind == "constant":
        return ConstantModel.from_dict(d)
    raise ValueError(f"unknown algorithm: {kind}")
