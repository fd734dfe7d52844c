"""Stage implementations behind the CLI: each reads its predecessor's files
from the output directory, writes its own, and returns a one-line summary.
Token-level detail is re-derived from the repository on demand, so artifact
files stay small and every stage is independently re-runnable."""

from __future__ import annotations

from pathlib import Path

from . import artifacts
from .artifacts import FeatureRow, GroupRecord
from .clone_detector import CloneGroup, detect_clones, extract_blocks
from .config import PipelineConfig
from .errors import DegenerateData, MissingInput
from .eval_harness import (
    LearnerConfig,
    ablation,
    build_balanced_dataset,
    compare_learners,
    cross_project,
    within_project,
)
from .features import (
    FeatureVector,
    FileContext,
    WindowView,
    assemble_vector,
    extract_cochange_features,
    extract_code_features,
    extract_diff_features,
    extract_history_features,
    extract_location_features,
    file_context,
)
from .genealogy import Lineage, build_genealogies
from .labeler import LabelContext, label_lineage, sweep
from .learner import LabeledExample, recommend, train_alt
from .repo_miner import Repository, SOURCE_SUFFIXES, checked_window, sample_versions

FILES = {
    "commits": "commits.txt",
    "samples": "samples.txt",
    "clones": "clones.txt",
    "lineages": "lineages.txt",
    "labels": "labels.txt",
    "sweep": "label_sweep.txt",
    "features": "features.csv",
    "model": "model.txt",
    "recommendations": "recommendations.csv",
    "report": "report.txt",
    "ablation": "ablation.csv",
    "comparison": "comparison.csv",
}


def _path(out_dir: str | Path, name: str) -> Path:
    return Path(out_dir) / FILES[name]


def _require(out_dir: str | Path, name: str, producer: str) -> Path:
    p = _path(out_dir, name)
    if not p.exists():
        raise MissingInput(f"{p} not found (run `{producer}` first)")
    return p


class VersionData:
    """Per-sampled-version caches of file lists, texts, and extracted blocks."""

    def __init__(self, repo: Repository, samples, suffixes=SOURCE_SUFFIXES):
        self.repo = repo
        self.samples = samples
        self.suffixes = suffixes
        self._corpus: dict[int, dict[str, str]] = {}
        self._blocks: dict[int, dict[tuple, object]] = {}
        self._contexts: dict[tuple[int, str], FileContext] = {}

    def corpus(self, version: int) -> dict[str, str]:
        if version not in self._corpus:
            commit = self.samples[version].commit_id
            self._corpus[version] = {
                path: self.repo.file_text(commit, path) or ""
                for path in self.repo.list_files(commit, self.suffixes)
            }
        return self._corpus[version]

    def blocks(self, version: int) -> dict[tuple, object]:
        if version not in self._blocks:
            index = {}
            for path, text in sorted(self.corpus(version).items()):
                for block in extract_blocks(text, path):
                    index.setdefault(block.key, block)
            self._blocks[version] = index
        return self._blocks[version]

    def context(self, version: int, path: str) -> FileContext:
        key = (version, path)
        if key not in self._contexts:
            self._contexts[key] = file_context(path, self.corpus(version).get(path, ""))
        return self._contexts[key]


def materialize_groups(
    vdata: VersionData, records: list[GroupRecord], version_count: int
) -> list[list[CloneGroup]]:
    """Rebuild CloneGroup objects (with token data) from their stored locations."""
    per_version: list[list[CloneGroup]] = [[] for _ in range(version_count)]
    for rec in records:
        if not 0 <= rec.version < version_count:
            raise MissingInput(
                f"clones file references version {rec.version} outside the sample "
                "list; artifacts are stale (re-run mine + detect)"
            )
        members = []
        for path, start, end, _ in rec.members:
            block = vdata.blocks(rec.version).get((path, start, end))
            if block is None:
                raise MissingInput(
                    f"block {path}:{start}-{end} not found at version {rec.version}; "
                    "clones file is stale (re-run detect)"
                )
            members.append(block)
        per_version[rec.version].append(
            CloneGroup(version=rec.version, members=tuple(members), group_id=rec.group_id)
        )
    return per_version


def _rebuild_lineages(
    config: PipelineConfig, vdata: VersionData, out_dir, version_count: int
) -> list[Lineage]:
    records = artifacts.read_groups(_require(out_dir, "clones", "detect"))
    lineage_records = artifacts.read_lineages(_require(out_dir, "lineages", "genealogy"))
    groups = materialize_groups(vdata, records, version_count)
    lineages = build_genealogies(groups, config.link_floor)
    expected = {r.lineage_id: r.groups for r in lineage_records}
    rebuilt = {
        l.lineage_id: tuple((v, g.group_id) for v, g in l.groups) for l in lineages
    }
    if expected != rebuilt:
        raise MissingInput("lineages file does not match clones file (re-run genealogy)")
    return lineages


# -- stages --------------------------------------------------------------------


def stage_mine(config: PipelineConfig, repo_path: str, out_dir: str | Path) -> str:
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    repo = Repository(repo_path)
    commits = repo.commits()
    samples = sample_versions(commits, config.delta_threshold)
    artifacts.write_commits(_path(out_dir, "commits"), commits)
    artifacts.write_samples(_path(out_dir, "samples"), samples)
    return f"mine: {len(commits)} commits, {len(samples)} samples -> {_path(out_dir, 'samples')}"


def stage_detect(config: PipelineConfig, repo_path: str, out_dir: str | Path) -> str:
    samples = artifacts.read_samples(_require(out_dir, "samples", "mine"))
    repo = Repository(repo_path)
    vdata = VersionData(repo, samples)
    all_groups = []
    for s in samples:
        blocks = sorted(vdata.blocks(s.index).values(), key=lambda b: b.key)
        all_groups.extend(
            detect_clones(
                blocks,
                min_tokens=config.min_tokens,
                min_lines=config.min_lines,
                theta=config.theta,
                version=s.index,
            )
        )
    artifacts.write_groups(_path(out_dir, "clones"), all_groups)
    return f"detect: {len(all_groups)} clone groups over {len(samples)} versions -> {_path(out_dir, 'clones')}"


def stage_genealogy(config: PipelineConfig, repo_path: str, out_dir: str | Path) -> str:
    samples = artifacts.read_samples(_require(out_dir, "samples", "mine"))
    records = artifacts.read_groups(_require(out_dir, "clones", "detect"))
    repo = Repository(repo_path)
    vdata = VersionData(repo, samples)
    groups = materialize_groups(vdata, records, len(samples))
    lineages = build_genealogies(groups, config.link_floor)
    artifacts.write_lineages(_path(out_dir, "lineages"), lineages)
    return f"genealogy: {len(lineages)} lineages -> {_path(out_dir, 'lineages')}"


def stage_label(
    config: PipelineConfig,
    repo_path: str,
    out_dir: str | Path,
    sweep_thresholds: list[float] | None = None,
) -> str:
    samples = artifacts.read_samples(_require(out_dir, "samples", "mine"))
    repo = Repository(repo_path)
    vdata = VersionData(repo, samples)
    lineages = _rebuild_lineages(config, vdata, out_dir, len(samples))
    ctx = LabelContext(vdata.corpus)
    decisions = [label_lineage(lin, ctx, config.l_th) for lin in lineages]
    artifacts.write_labels(_path(out_dir, "labels"), decisions)
    summary = (
        f"label: {sum(1 for d in decisions if d.label == 'R')} R / "
        f"{sum(1 for d in decisions if d.label == 'NR')} NR -> {_path(out_dir, 'labels')}"
    )
    if sweep_thresholds:
        rows = sweep(lineages, ctx, sweep_thresholds)
        artifacts.write_sweep(_path(out_dir, "sweep"), rows)
        summary += f"; sweep -> {_path(out_dir, 'sweep')}"
    return summary


def stage_featurize(config: PipelineConfig, repo_path: str, out_dir: str | Path) -> str:
    samples = artifacts.read_samples(_require(out_dir, "samples", "mine"))
    repo = Repository(repo_path)
    vdata = VersionData(repo, samples)
    lineages = _rebuild_lineages(config, vdata, out_dir, len(samples))
    labels_path = _path(out_dir, "labels")
    decisions = (
        {d.lineage_id: d for d in artifacts.read_labels(labels_path)}
        if labels_path.exists()
        else {}
    )
    window_note = ""
    if len(samples) >= 2:
        window = checked_window(samples, config.window_fraction, config.recent_fraction)
    else:
        window = None
        window_note = " (WindowUnavailable: <2 samples; history/co-change features zeroed)"
    view = WindowView(repo, window)
    commits = repo.commits()

    rows = []
    for lineage in lineages:
        decision = decisions.get(lineage.lineage_id)
        if decision is not None and decision.label == "R":
            version = decision.step_version
        else:
            version = lineage.groups[-1][0]
        group = dict(lineage.groups)[version]
        corpus = vdata.corpus(version)
        per_clone = []
        for member in group.members:
            code = extract_code_features(member, vdata.context(version, member.path))
            history = extract_history_features(member.path, view, commits)
            per_clone.append(code + history)
        group_values = (
            extract_location_features(group, corpus)
            + extract_diff_features(group)
            + extract_cochange_features(group, lineage, version, view)
        )
        vector = assemble_vector(
            per_clone, group_values, lineage.lineage_id, version, config.aggregation
        )
        label = None if decision is None else (1 if decision.label == "R" else 0)
        rows.append(FeatureRow(lineage.lineage_id, version, vector.values, label))
    artifacts.write_features(_path(out_dir, "features"), rows)
    return f"featurize: {len(rows)} vectors -> {_path(out_dir, 'features')}{window_note}"


def _labeled_examples(rows: list[FeatureRow]) -> list[LabeledExample]:
    return [
        LabeledExample(FeatureVector(r.values, r.lineage_id, r.version), r.label)
        for r in rows
        if r.label is not None
    ]


def stage_train(
    config: PipelineConfig, out_dir: str | Path, algorithm: str = "adaboost"
) -> str:
    rows = artifacts.read_features(_require(out_dir, "features", "featurize"))
    examples = _labeled_examples(rows)
    if not examples:
        raise DegenerateData("no labeled feature rows to train on (run label + featurize)")
    model = train_alt(
        algorithm, examples, seed=config.seed, rounds=config.boost_rounds
    )
    artifacts.write_model(_path(out_dir, "model"), model)
    return f"train: {algorithm} on {len(examples)} examples -> {_path(out_dir, 'model')}"


def stage_recommend(config: PipelineConfig, out_dir: str | Path) -> str:
    model = artifacts.read_model(_require(out_dir, "model", "train"))
    rows = artifacts.read_features(_require(out_dir, "features", "featurize"))
    samples = artifacts.read_samples(_require(out_dir, "samples", "mine"))
    lineage_records = artifacts.read_lineages(_require(out_dir, "lineages", "genealogy"))
    final = len(samples) - 1
    group_at = {
        rec.lineage_id: dict(rec.groups) for rec in lineage_records
    }
    candidates = []
    for row in rows:
        if row.version != final:
            continue
        group_id = group_at.get(row.lineage_id, {}).get(final)
        if group_id is None:
            continue
        candidates.append((group_id, FeatureVector(row.values, row.lineage_id, row.version)))
    ranked = recommend(model, candidates, config.recommend_threshold)
    artifacts.write_recommendations(_path(out_dir, "recommendations"), ranked)
    return (
        f"recommend: {len(ranked)} of {len(candidates)} current groups "
        f"-> {_path(out_dir, 'recommendations')}"
    )


def _load_projects(
    feature_paths: list[str], balance: bool, seed: int
) -> list[tuple[str, list[LabeledExample]]]:
    projects = []
    for p in feature_paths:
        if not Path(p).exists():
            raise MissingInput(f"feature file not found: {p}")
        examples = _labeled_examples(artifacts.read_features(Path(p)))
        if balance:
            r = [e for e in examples if e.label == 1]
            nr = [e for e in examples if e.label == 0]
            examples = build_balanced_dataset(r, nr, seed)
        projects.append((Path(p).stem, examples))
    return projects


def _learner_config(config: PipelineConfig, algorithm: str) -> LearnerConfig:
    return LearnerConfig(
        algorithm=algorithm,
        rounds=config.boost_rounds,
        threshold=config.recommend_threshold,
        seed=config.seed,
    )


def stage_evaluate(
    config: PipelineConfig,
    feature_paths: list[str],
    setting: str,
    out_dir: str | Path,
    algorithm: str = "adaboost",
    balance: bool = False,
) -> str:
    projects = _load_projects(feature_paths, balance, config.seed)
    lcfg = _learner_config(config, algorithm)
    report = (
        within_project(projects, lcfg) if setting == "within" else cross_project(projects, lcfg)
    )
    artifacts.write_report(_path(out_dir, "report"), report)
    p, r, f = report.averages
    return f"evaluate[{setting}]: avg P={p:.3f} R={r:.3f} F={f:.3f} -> {_path(out_dir, 'report')}"


def stage_ablate(
    config: PipelineConfig,
    feature_paths: list[str],
    setting: str,
    out_dir: str | Path,
    balance: bool = False,
) -> str:
    projects = _load_projects(feature_paths, balance, config.seed)
    rows = ablation(projects, setting, _learner_config(config, "adaboost"))
    artifacts.write_table(
        _path(out_dir, "ablation"), "ablation", "variant,precision,recall,fscore", rows
    )
    return f"ablate[{setting}]: {len(rows)} variants -> {_path(out_dir, 'ablation')}"


def stage_compare(
    config: PipelineConfig,
    feature_paths: list[str],
    setting: str,
    algorithms: list[str],
    out_dir: str | Path,
    balance: bool = False,
) -> str:
    projects = _load_projects(feature_paths, balance, config.seed)
    rows = compare_learners(projects, setting, algorithms, _learner_config(config, "adaboost"))
    artifacts.write_table(
        _path(out_dir, "comparison"), "comparison", "algorithm,precision,recall,fscore", rows
    )
    return f"compare[{setting}]: {len(rows)} algorithms -> {_path(out_dir, 'comparison')}"
