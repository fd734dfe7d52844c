"""Read-only git mining: commit enumeration, version sampling, file and diff access.

All VCS access is funneled through :class:`Repository` so a different backend
could be substituted. "Changed lines" throughout means added + deleted lines
(line-LCS diff); binary files contribute 0.
"""

from __future__ import annotations

import math
import subprocess
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import EmptyRepository, NotARepository, TooFewSamples, UnknownCommit

SOURCE_SUFFIXES = (".java",)


@dataclass(frozen=True)
class CommitRecord:
    id: str
    timestamp: int
    author: str  # lowercased "name <email>"
    changed_files: frozenset[str]
    changed_line_count: int


@dataclass(frozen=True)
class SampledVersion:
    index: int
    commit_id: str
    cumulative_delta: int


@dataclass(frozen=True)
class CheckedWindow:
    """Trailing portion of the sample list over which history features run."""

    steps: tuple[tuple[SampledVersion, SampledVersion], ...]
    recent_steps: tuple[tuple[SampledVersion, SampledVersion], ...]


@dataclass(frozen=True)
class Hunk:
    """One replacement region of a line diff, 1-based inclusive ranges.

    An empty side has start > end; an empty a-range (s, s-1) denotes an
    insertion between lines s-1 and s of the old file.
    """

    a_start: int
    a_end: int
    b_start: int
    b_end: int


def _git(repo_path: str | Path, *args: str) -> bytes:
    proc = subprocess.run(
        ["git", "-C", str(repo_path), *args],
        capture_output=True,
    )
    if proc.returncode != 0:
        raise subprocess.CalledProcessError(
            proc.returncode, proc.args, proc.stdout, proc.stderr
        )
    return proc.stdout


class Repository:
    """Handle on an on-disk git repository. Read-only after construction."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        try:
            _git(self.path, "rev-parse", "--git-dir")
        except (subprocess.CalledProcessError, FileNotFoundError, NotADirectoryError):
            raise NotARepository(f"not a git repository: {path}") from None
        self._commits: list[CommitRecord] | None = None
        self._known: set[str] | None = None

    # -- commit stream -----------------------------------------------------

    def commits(self) -> list[CommitRecord]:
        """First-parent chain, oldest to newest, with populated metadata."""
        if self._commits is None:
            self._commits = self._enumerate()
            self._known = {c.id for c in self._commits}
        return self._commits

    def _enumerate(self) -> list[CommitRecord]:
        try:
            raw = _git(
                self.path,
                "log",
                "--first-parent",
                "--reverse",
                "--format=%H%x00%ct%x00%an%x00%ae",
                "HEAD",
            )
        except subprocess.CalledProcessError:
            raise EmptyRepository(f"repository has no commits: {self.path}") from None
        empty_tree = (
            subprocess.run(
                ["git", "-C", str(self.path), "hash-object", "-t", "tree", "--stdin"],
                input=b"",
                capture_output=True,
                check=True,
            )
            .stdout.decode()
            .strip()
        )
        records = []
        prev = empty_tree
        for line in raw.decode("utf-8", errors="replace").splitlines():
            commit_id, ts, name, email = line.split("\x00")
            author = f"{name} <{email}>".lower()
            files, lines_changed = self._numstat(prev, commit_id)
            records.append(
                CommitRecord(commit_id, int(ts), author, frozenset(files), lines_changed)
            )
            prev = commit_id
        return records

    def _numstat(self, a: str, b: str) -> tuple[list[str], int]:
        out = _git(self.path, "diff", "--numstat", "--no-renames", a, b)
        files, total = [], 0
        for line in out.decode("utf-8", errors="replace").splitlines():
            added, deleted, path = line.split("\t", 2)
            files.append(path)
            if added != "-":  # binary files report "-" and contribute 0
                total += int(added) + int(deleted)
        return files, total

    # -- content access ----------------------------------------------------

    def _check_commit(self, commit_id: str) -> None:
        if self._known is None:
            self.commits()
        if commit_id not in self._known:  # type: ignore[operator]
            raise UnknownCommit(commit_id)

    def file_at(self, commit_id: str, path: str) -> bytes | None:
        """Exact bytes of *path* at *commit_id*, or None when absent there."""
        self._check_commit(commit_id)
        proc = subprocess.run(
            ["git", "-C", str(self.path), "show", f"{commit_id}:{path}"],
            capture_output=True,
        )
        if proc.returncode != 0:
            return None
        return proc.stdout

    def file_text(self, commit_id: str, path: str) -> str | None:
        data = self.file_at(commit_id, path)
        if data is None:
            return None
        return data.decode("utf-8", errors="replace")

    def list_files(self, commit_id: str, suffixes: tuple[str, ...] | None = None) -> list[str]:
        self._check_commit(commit_id)
        out = _git(self.path, "ls-tree", "-r", "--name-only", commit_id)
        paths = out.decode("utf-8", errors="replace").splitlines()
        if suffixes is not None:
            paths = [p for p in paths if p.endswith(suffixes)]
        return paths

    def changed_paths(self, commit_a: str, commit_b: str) -> list[str]:
        self._check_commit(commit_a)
        self._check_commit(commit_b)
        out = _git(self.path, "diff", "--name-only", "--no-renames", commit_a, commit_b)
        return out.decode("utf-8", errors="replace").splitlines()

    def diff_hunks(self, commit_a: str, commit_b: str, path: str) -> list[Hunk]:
        a = self.file_at(commit_a, path)
        b = self.file_at(commit_b, path)
        return diff_file_hunks(a, b)

    def diff_lines(
        self, commit_a: str, commit_b: str, path: str
    ) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
        """(removed ranges in a, added ranges in b), 1-based inclusive."""
        hunks = self.diff_hunks(commit_a, commit_b, path)
        removed = [(h.a_start, h.a_end) for h in hunks if h.a_end >= h.a_start]
        added = [(h.b_start, h.b_end) for h in hunks if h.b_end >= h.b_start]
        return removed, added


# -- line diff (LCS) -------------------------------------------------------


def diff_file_hunks(a: bytes | None, b: bytes | None) -> list[Hunk]:
    """Diff two file bodies that may be absent (None = file does not exist)."""
    a_lines = a.splitlines() if a is not None else []
    b_lines = b.splitlines() if b is not None else []
    return line_diff_hunks(a_lines, b_lines)


def line_diff_hunks(a_lines: list, b_lines: list) -> list[Hunk]:
    """Minimal LCS edit script as hunks.

    Orientation is canonicalized by line content so that swapping the inputs
    exactly exchanges the removed/added roles.
    """
    if tuple(b_lines) < tuple(a_lines):
        return [Hunk(h.b_start, h.b_end, h.a_start, h.a_end) for h in line_diff_hunks(b_lines, a_lines)]
    pairs = _lcs_pairs(a_lines, b_lines)
    hunks = []
    bounded = [(-1, -1)] + pairs + [(len(a_lines), len(b_lines))]
    for (pi, pj), (ci, cj) in zip(bounded, bounded[1:]):
        a_lo, a_hi = pi + 1, ci - 1
        b_lo, b_hi = pj + 1, cj - 1
        if a_lo <= a_hi or b_lo <= b_hi:
            hunks.append(Hunk(a_lo + 1, a_hi + 1, b_lo + 1, b_hi + 1))
    return hunks


def _lcs_pairs(a: list, b: list) -> list[tuple[int, int]]:
    """Matched (i, j) index pairs of a longest common subsequence, 0-based."""
    pre = 0
    while pre < len(a) and pre < len(b) and a[pre] == b[pre]:
        pre += 1
    suf = 0
    while suf < len(a) - pre and suf < len(b) - pre and a[-1 - suf] == b[-1 - suf]:
        suf += 1
    ca = a[pre : len(a) - suf]
    cb = b[pre : len(b) - suf]
    n, m = len(ca), len(cb)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n):
        row, prev_row = table[i + 1], table[i]
        for j in range(m):
            if ca[i] == cb[j]:
                row[j + 1] = prev_row[j] + 1
            else:
                row[j + 1] = max(row[j], prev_row[j + 1])
    core = []
    i, j = n, m
    while i > 0 and j > 0:
        if ca[i - 1] == cb[j - 1]:
            core.append((pre + i - 1, pre + j - 1))
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    core.reverse()
    head = [(k, k) for k in range(pre)]
    tail = [
        (len(a) - suf + k, len(b) - suf + k) for k in range(suf)
    ]
    return head + core + tail


def hunk_touches(hunk: Hunk, start_line: int, end_line: int) -> bool:
    """Whether a hunk modifies any of lines [start_line, end_line] of the old file.

    A pure insertion counts only when it lands strictly inside the range.
    """
    if hunk.a_end >= hunk.a_start:
        return hunk.a_start <= end_line and hunk.a_end >= start_line
    return hunk.a_start - 1 >= start_line and hunk.a_start <= end_line


# -- sampling and derived views ---------------------------------------------


def enumerate_commits(repo_path: str | Path) -> list[CommitRecord]:
    return Repository(repo_path).commits()


def sample_versions(
    commits: list[CommitRecord], delta_threshold: int = 200
) -> list[SampledVersion]:
    """Sample the commit stream by accumulated change volume.

    The first commit is always sampled; each later sample is the earliest
    commit whose accumulated changed-line count since the previous sample
    reaches *delta_threshold*. The newest commit is always appended even when
    its delta falls short, so the current state is analyzable.
    """
    if not commits:
        raise ValueError("commits must be nonempty")
    if delta_threshold < 1:
        raise ValueError("delta_threshold must be >= 1")
    samples = [SampledVersion(0, commits[0].id, 0)]
    acc = 0
    for commit in commits[1:]:
        acc += commit.changed_line_count
        if acc >= delta_threshold:
            samples.append(SampledVersion(len(samples), commit.id, acc))
            acc = 0
    if samples[-1].commit_id != commits[-1].id:
        samples.append(SampledVersion(len(samples), commits[-1].id, acc))
    return samples


def checked_window(
    samples: list[SampledVersion],
    window_fraction: Fraction = Fraction(1, 10),
    recent_fraction: Fraction = Fraction(1, 4),
) -> CheckedWindow:
    """Window over the last ``ceil(S * window_fraction)`` samples (minimum 2)."""
    if len(samples) < 2:
        raise TooFewSamples(f"need at least 2 samples, have {len(samples)}")
    width = math.ceil(len(samples) * window_fraction)
    if width < 2:
        width = 2
    tail = samples[-width:]
    steps = tuple(zip(tail, tail[1:]))
    recent = steps[len(steps) - math.ceil(len(steps) * recent_fraction) :]
    return CheckedWindow(steps=steps, recent_steps=recent)


def distinct_authors(path: str, commits: list[CommitRecord]) -> tuple[int, int]:
    """(authors that ever touched *path*, all authors), by normalized identity."""
    touching = {c.author for c in commits if path in c.changed_files}
    everyone = {c.author for c in commits}
    return len(touching), len(everyone)
