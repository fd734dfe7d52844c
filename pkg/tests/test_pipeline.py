"""Pipeline integration over a three-version repository: multi-step lineages,
earliest-step labeling, pre-refactoring feature vectors, stale-artifact guards."""

from __future__ import annotations

import pytest

from clone_fixtures import (
    EXACT_HELPER,
    PERSISTENT_PAIR,
    _base_version,
    _file,
    _filler,
    _refactored_version,
    commit_corpora,
)
from crec import artifacts, pipeline
from crec.config import PipelineConfig
from crec.errors import MissingInput


def _three_version_corpora() -> list[dict[str, str]]:
    v0 = {**_base_version("exact"), **PERSISTENT_PAIR}
    # v1: a one-token interior edit to the Gamma clone only (same token count)
    gamma_v0 = v0["src/exact/Gamma.java"]
    v1 = dict(v0)
    v1["src/exact/Gamma.java"] = gamma_v0.replace("int scale = 1;", "int scale = 7;")
    # v2: Alpha and Beta are refactored; Gamma keeps its v1 shape
    v2 = {**_refactored_version("exact", EXACT_HELPER), **PERSISTENT_PAIR}
    v2["src/exact/Gamma.java"] = v1["src/exact/Gamma.java"]
    return [v0, v1, v2]


@pytest.fixture
def staged(make_repo, tmp_path):
    rb = make_repo("threever")
    commit_corpora(rb, _three_version_corpora())
    out = tmp_path / "out"
    config = PipelineConfig(delta_threshold=1)
    pipeline.stage_mine(config, rb.path, out)
    pipeline.stage_detect(config, rb.path, out)
    pipeline.stage_genealogy(config, rb.path, out)
    pipeline.stage_label(config, rb.path, out)
    pipeline.stage_featurize(config, rb.path, out)
    return config, rb.path, out


class TestThreeVersionLineage:
    def test_lineage_spans_all_versions(self, staged):
        _, _, out = staged
        records = artifacts.read_lineages(out / "lineages.txt")
        spans = {rec.lineage_id: [v for v, _ in rec.groups] for rec in records}
        assert [0, 1, 2] in spans.values()  # the render-clone lineage
        assert all(spans[lid][0] in (0,) for lid in spans)

    def test_refactoring_found_at_middle_step(self, staged):
        _, _, out = staged
        decisions = artifacts.read_labels(out / "labels.txt")
        r = [d for d in decisions if d.label == "R"]
        assert len(r) == 1
        assert r[0].step_version == 1  # the v1 -> v2 transition, not v0 -> v1
        assert r[0].evidence["method"] == "applyScaling"

    def test_features_taken_at_pre_refactoring_version(self, staged):
        _, _, out = staged
        decisions = {d.lineage_id: d for d in artifacts.read_labels(out / "labels.txt")}
        rows = {r.lineage_id: r for r in artifacts.read_features(out / "features.csv")}
        r_id = next(lid for lid, d in decisions.items() if d.label == "R")
        nr_id = next(lid for lid, d in decisions.items() if d.label == "NR")
        assert rows[r_id].version == 1
        assert rows[nr_id].version == 2  # NR lineages use their latest version

    def test_cochange_step_counts_shrunken_members(self, staged):
        _, _, out = staged
        decisions = {d.lineage_id: d for d in artifacts.read_labels(out / "labels.txt")}
        rows = {r.lineage_id: r for r in artifacts.read_features(out / "features.csv")}
        r_id = next(lid for lid, d in decisions.items() if d.label == "R")
        values = rows[r_id].values
        # window falls back to the last 2 samples -> single step v1 -> v2,
        # where exactly the two refactored members change
        assert values[32] == 1.0  # F33: 2-member-change fraction
        assert values[29] == 0.0 and values[30] == 0.0  # F30, F31
        # F13 (file-change ratio) averages 1, 1, 0 over the three members
        assert values[12] == pytest.approx(2 / 3)

    def test_recommendations_only_consider_final_version(self, staged):
        config, _, out = staged
        pipeline.stage_train(config, out)
        pipeline.stage_recommend(config, out)
        lines = (out / "recommendations.csv").read_text().splitlines()
        assert lines[1] == "group_id,likelihood"
        records = artifacts.read_lineages(out / "lineages.txt")
        final_groups = {dict(rec.groups).get(2) for rec in records}
        for line in lines[2:]:
            assert line.split(",")[0] in final_groups


class TestStaleArtifactGuards:
    def test_out_of_range_version_rejected(self, staged, tmp_path):
        config, repo_path, out = staged
        samples = artifacts.read_samples(out / "samples.txt")
        records = artifacts.read_groups(out / "clones.txt")
        from crec.repo_miner import Repository

        vdata = pipeline.VersionData(Repository(repo_path), samples)
        bad = [
            artifacts.GroupRecord(99, rec.group_id, rec.members) for rec in records
        ]
        with pytest.raises(MissingInput):
            pipeline.materialize_groups(vdata, bad, len(samples))

    def test_moved_block_rejected(self, staged):
        config, repo_path, out = staged
        samples = artifacts.read_samples(out / "samples.txt")
        records = artifacts.read_groups(out / "clones.txt")
        from crec.repo_miner import Repository

        vdata = pipeline.VersionData(Repository(repo_path), samples)
        rec = records[0]
        moved = artifacts.GroupRecord(
            rec.version,
            rec.group_id,
            tuple((p, s + 500, e + 500, t) for p, s, e, t in rec.members),
        )
        with pytest.raises(MissingInput):
            pipeline.materialize_groups(vdata, [moved], len(samples))

    def test_stale_lineages_rejected_by_label_stage(self, staged):
        config, repo_path, out = staged
        path = out / "lineages.txt"
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")  # drop one lineage
        with pytest.raises(MissingInput):
            pipeline.stage_label(config, repo_path, out)
