"""Shared fixtures: deterministic scratch git repositories."""

from __future__ import annotations

import os
import subprocess
from pathlib import Path

import pytest


class RepoBuilder:
    """Builds a throwaway git repo with reproducible commit metadata."""

    def __init__(self, path: Path):
        self.path = path
        self.step = 0
        path.mkdir(parents=True, exist_ok=True)
        self._git("init", "-q", "-b", "main", ".")
        self._git("config", "user.name", "Dev One")
        self._git("config", "user.email", "dev1@example.com")

    def _git(self, *args: str, env: dict | None = None) -> str:
        merged = {**os.environ, **(env or {})}
        proc = subprocess.run(
            ["git", "-C", str(self.path), *args],
            capture_output=True,
            text=True,
            env=merged,
        )
        assert proc.returncode == 0, proc.stderr
        return proc.stdout

    def commit(
        self,
        files: dict[str, str | None],
        message: str = "change",
        author: tuple[str, str] = ("Dev One", "dev1@example.com"),
    ) -> str:
        for rel, content in files.items():
            target = self.path / rel
            if content is None:
                target.unlink()
            else:
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_text(content, encoding="utf-8")
        self._git("add", "-A")
        self.step += 1
        stamp = f"2020-01-{1 + self.step:02d}T00:00:00+0000"
        self._git(
            "commit",
            "-q",
            "--allow-empty",
            "-m",
            message,
            f"--author={author[0]} <{author[1]}>",
            env={"GIT_AUTHOR_DATE": stamp, "GIT_COMMITTER_DATE": stamp},
        )
        return self._git("rev-parse", "HEAD").strip()


@pytest.fixture
def make_repo(tmp_path):
    counter = iter(range(1000))

    def _make(name: str | None = None) -> RepoBuilder:
        return RepoBuilder(tmp_path / (name or f"repo{next(counter)}"))

    return _make
