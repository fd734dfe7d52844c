"""Repository mining: commit enumeration, sampling, diffs, windows, authors."""

from __future__ import annotations

import difflib
import random
from fractions import Fraction

import pytest

from crec.errors import EmptyRepository, NotARepository, TooFewSamples, UnknownCommit
from crec.repo_miner import (
    CommitRecord,
    Repository,
    SampledVersion,
    checked_window,
    distinct_authors,
    line_diff_hunks,
    sample_versions,
)


def _fresh_lines(tag: str, n: int) -> str:
    return "".join(f"{tag} line {i}\n" for i in range(n))


def _difflib_changed_count(a: str, b: str) -> int:
    """Independent added+deleted oracle for small fixture diffs."""
    matcher = difflib.SequenceMatcher(
        None, a.splitlines(), b.splitlines(), autojunk=False
    )
    added = deleted = 0
    for op, i1, i2, j1, j2 in matcher.get_opcodes():
        if op in ("delete", "replace"):
            deleted += i2 - i1
        if op in ("insert", "replace"):
            added += j2 - j1
    return added + deleted


class TestEnumerateCommits:
    def test_single_commit_lists_all_files(self, make_repo):
        rb = make_repo()
        rb.commit({"a.java": "class A {}\n", "b.java": "class B {}\n"})
        commits = Repository(rb.path).commits()
        assert len(commits) == 1
        assert commits[0].changed_files == {"a.java", "b.java"}
        assert commits[0].changed_line_count == 2
        assert commits[0].author == "dev one <dev1@example.com>"

    def test_changed_files_follow_each_commit(self, make_repo):
        rb = make_repo()
        rb.commit({"a.java": "class A {}\n"})
        rb.commit({"b.java": "class B {}\n"})
        rb.commit({"a.java": "class A { int x; }\n"})
        commits = Repository(rb.path).commits()
        assert [sorted(c.changed_files) for c in commits] == [
            ["a.java"],
            ["b.java"],
            ["a.java"],
        ]

    def test_changed_line_count_matches_diff_oracle(self, make_repo):
        rb = make_repo()
        first = _fresh_lines("alpha", 12)
        second = _fresh_lines("alpha", 4) + "kept tail\n"
        rb.commit({"a.java": first})
        rb.commit({"a.java": second})
        commits = Repository(rb.path).commits()
        assert commits[1].changed_line_count == _difflib_changed_count(first, second)

    def test_non_repository_rejected(self, tmp_path):
        plain = tmp_path / "plain"
        plain.mkdir()
        with pytest.raises(NotARepository):
            Repository(plain)

    def test_empty_repository_rejected(self, tmp_path):
        import subprocess

        bare = tmp_path / "empty"
        bare.mkdir()
        subprocess.run(["git", "-C", str(bare), "init", "-q", "."], check=True)
        with pytest.raises(EmptyRepository):
            Repository(bare).commits()


def _record(cid: str, count: int) -> CommitRecord:
    return CommitRecord(cid, 0, "dev <d@e>", frozenset({"a.java"} if count else set()), count)


class TestSampleVersions:
    def test_single_commit(self):
        samples = sample_versions([_record("c0", 3)])
        assert [s.commit_id for s in samples] == ["c0"]
        assert samples[0].index == 0

    def test_all_commits_above_threshold_sampled(self):
        commits = [_record(f"c{i}", 250) for i in range(4)]
        samples = sample_versions(commits, delta_threshold=200)
        assert [s.commit_id for s in samples] == ["c0", "c1", "c2", "c3"]
        assert [s.cumulative_delta for s in samples] == [0, 250, 250, 250]

    def test_accumulation_and_forced_final(self):
        commits = [_record("c0", 5)] + [_record(f"c{i}", 80) for i in range(1, 4)]
        samples = sample_versions(commits, delta_threshold=200)
        assert [s.commit_id for s in samples] == ["c0", "c3"]
        assert samples[1].cumulative_delta == 240  # no duplicate forced final

    def test_small_trailing_delta_still_sampled(self):
        commits = [_record("c0", 0), _record("c1", 300), _record("c2", 10)]
        samples = sample_versions(commits, delta_threshold=200)
        assert [s.commit_id for s in samples] == ["c0", "c1", "c2"]
        assert samples[2].cumulative_delta == 10

    def test_deltas_meet_threshold_except_endpoints(self):
        rng = random.Random(7)
        commits = [_record(f"c{i}", rng.randrange(0, 120)) for i in range(60)]
        samples = sample_versions(commits, delta_threshold=200)
        for s in samples[1:-1]:
            assert s.cumulative_delta >= 200
        assert samples[0].commit_id == "c0"
        assert samples[-1].commit_id == "c59"

    def test_deterministic(self):
        commits = [_record(f"c{i}", (i * 37) % 150) for i in range(40)]
        assert sample_versions(commits) == sample_versions(commits)


class TestFileAccess:
    def test_absent_before_creation(self, make_repo):
        rb = make_repo()
        c1 = rb.commit({"a.java": "class A {}\n"})
        c2 = rb.commit({"b.java": "class B {}\n"})
        repo = Repository(rb.path)
        assert repo.file_at(c1, "b.java") is None
        assert repo.file_at(c2, "b.java") == b"class B {}\n"

    def test_identical_bytes(self, make_repo):
        rb = make_repo()
        content = "class A {\n\tint x = 3;\n}\n"
        c1 = rb.commit({"a.java": content})
        assert Repository(rb.path).file_at(c1, "a.java") == content.encode()

    def test_post_modification_content(self, make_repo):
        rb = make_repo()
        rb.commit({"a.java": "old\n"})
        c2 = rb.commit({"a.java": "new\n"})
        assert Repository(rb.path).file_at(c2, "a.java") == b"new\n"

    def test_unknown_commit(self, make_repo):
        rb = make_repo()
        rb.commit({"a.java": "x\n"})
        repo = Repository(rb.path)
        with pytest.raises(UnknownCommit):
            repo.file_at("0" * 40, "a.java")


class TestDiffLines:
    def test_identical_content_empty(self, make_repo):
        rb = make_repo()
        c1 = rb.commit({"a.java": _fresh_lines("x", 5)})
        c2 = rb.commit({"b.java": "other\n"})
        assert Repository(rb.path).diff_lines(c1, c2, "a.java") == ([], [])

    def test_single_line_replacement(self, make_repo):
        rb = make_repo()
        base = [f"line {i}" for i in range(1, 11)]
        changed = list(base)
        changed[4] = "line five rewritten"
        c1 = rb.commit({"a.java": "\n".join(base) + "\n"})
        c2 = rb.commit({"a.java": "\n".join(changed) + "\n"})
        removed, added = Repository(rb.path).diff_lines(c1, c2, "a.java")
        assert removed == [(5, 5)]
        assert added == [(5, 5)]

    def test_deleted_file(self, make_repo):
        rb = make_repo()
        c1 = rb.commit({"a.java": _fresh_lines("x", 4)})
        c2 = rb.commit({"a.java": None})
        removed, added = Repository(rb.path).diff_lines(c1, c2, "a.java")
        assert removed == [(1, 4)]
        assert added == []

    def test_swap_symmetry_on_random_inputs(self):
        rng = random.Random(11)
        for _ in range(200):
            a = [rng.choice("xyz") for _ in range(rng.randrange(0, 12))]
            b = [rng.choice("xyz") for _ in range(rng.randrange(0, 12))]
            fwd = line_diff_hunks(a, b)
            rev = line_diff_hunks(b, a)
            fwd_removed = [(h.a_start, h.a_end) for h in fwd if h.a_end >= h.a_start]
            fwd_added = [(h.b_start, h.b_end) for h in fwd if h.b_end >= h.b_start]
            rev_removed = [(h.a_start, h.a_end) for h in rev if h.a_end >= h.a_start]
            rev_added = [(h.b_start, h.b_end) for h in rev if h.b_end >= h.b_start]
            assert fwd_removed == rev_added
            assert fwd_added == rev_removed

    def test_edit_script_is_minimal(self):
        rng = random.Random(13)
        for _ in range(100):
            a = [rng.choice("pqrs") for _ in range(rng.randrange(0, 10))]
            b = [rng.choice("pqrs") for _ in range(rng.randrange(0, 10))]
            hunks = line_diff_hunks(a, b)
            removed = sum(h.a_end - h.a_start + 1 for h in hunks if h.a_end >= h.a_start)
            added = sum(h.b_end - h.b_start + 1 for h in hunks if h.b_end >= h.b_start)
            lcs = _lcs_len(a, b)
            assert removed == len(a) - lcs
            assert added == len(b) - lcs


def _lcs_len(a: list, b: list) -> int:
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a)):
        for j in range(len(b)):
            table[i + 1][j + 1] = (
                table[i][j] + 1 if a[i] == b[j] else max(table[i][j + 1], table[i + 1][j])
            )
    return table[len(a)][len(b)]


def _samples(n: int) -> list[SampledVersion]:
    return [SampledVersion(i, f"c{i}", 200) for i in range(n)]


class TestCheckedWindow:
    def test_forty_samples(self):
        window = checked_window(_samples(40))
        assert len(window.steps) == 3  # last ceil(40/10)=4 samples
        assert [s.index for s, _ in window.steps] == [36, 37, 38]
        assert len(window.recent_steps) == 1
        assert window.recent_steps[0][0].index == 38

    def test_two_samples_minimum(self):
        window = checked_window(_samples(2))
        assert len(window.steps) == 1
        assert window.recent_steps == window.steps

    def test_fallback_below_two(self):
        window = checked_window(_samples(10))  # ceil(10/10)=1 -> fallback to 2
        assert len(window.steps) == 1
        assert window.steps[0][0].index == 8

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            checked_window(_samples(1))

    def test_window_is_suffix_of_samples(self):
        for n in range(2, 45):
            samples = _samples(n)
            window = checked_window(samples)
            covered = [window.steps[0][0]] + [b for _, b in window.steps]
            assert covered == samples[-len(covered):]

    def test_fraction_arithmetic_is_exact(self):
        # ceil must not pick up float fuzz: 40 * (1/10) is exactly 4
        window = checked_window(_samples(40), Fraction(1, 10), Fraction(1, 4))
        assert len(window.steps) == 3


class TestDistinctAuthors:
    def test_single_author(self, make_repo):
        rb = make_repo()
        rb.commit({"a.java": "x\n"})
        commits = Repository(rb.path).commits()
        assert distinct_authors("a.java", commits) == (1, 1)

    def test_subset_of_authors(self, make_repo):
        rb = make_repo()
        rb.commit({"a.java": "v1\n"}, author=("Dev One", "dev1@example.com"))
        rb.commit({"a.java": "v2\n"}, author=("Dev Two", "dev2@example.com"))
        rb.commit({"b.java": "w\n"}, author=("Dev Three", "dev3@example.com"))
        commits = Repository(rb.path).commits()
        assert distinct_authors("a.java", commits) == (2, 3)

    def test_absent_file(self, make_repo):
        rb = make_repo()
        rb.commit({"a.java": "x\n"})
        commits = Repository(rb.path).commits()
        assert distinct_authors("missing.java", commits) == (0, 1)
