"""Scripted multi-version corpora with planted Extract Method refactorings.

Each fixture is a list of versions; a version maps file path to source text.
The planted repos refactor two of three clone peers between versions 0 and 1;
the control repos edit clones without extracting anything. Each file carries a
unique filler method so that only the clone methods group together, and the
kept half of each clone is large enough for cross-version links to hold.
"""

from __future__ import annotations

CLONE_BODY = """\
        int total = seed;
        int scale = 2;
        total = total + step;
        scale = scale * total;
        total = total - scale;
        count = count + 1;
        emit(total);
        emit(scale);
        emit(count);
"""

KEPT_TAIL = """\
        int checksum = total + count;
        checksum = checksum * 3;
        record(total);
        record(count);
        record(checksum);
        publish(total, scale, count);
        publish(checksum, checksum, checksum);
"""


def _clone_method(name: str) -> str:
    return (
        f"    void {name}(int seed, int step) {{\n"
        "        int count = 0;\n"
        "        int scale = 1;\n"
        + CLONE_BODY
        + KEPT_TAIL
        + "    }\n"
    )


def _refactored_method(name: str, call: str) -> str:
    return (
        f"    void {name}(int seed, int step) {{\n"
        "        int count = 0;\n"
        "        int scale = 1;\n"
        f"        {call};\n"
        + KEPT_TAIL
        + "    }\n"
    )


def _filler(tag: str) -> str:
    lines = [
        f"    String describe{tag}() {{",
        f'        String banner{tag} = "{tag}";',
    ]
    for i in range(5):
        lines.append(f"        banner{tag} = banner{tag} + part{tag}{i};")
    lines.append(f"        return banner{tag};")
    lines.append("    }")
    return "\n".join(lines) + "\n"


def _file(class_name: str, methods: list[str]) -> str:
    return f"class {class_name} {{\n" + "\n".join(methods) + "}\n"


def _base_version(prefix: str) -> dict[str, str]:
    return {
        f"src/{prefix}/Alpha.java": _file(
            "Alpha", [_clone_method("renderAlpha"), _filler("Alpha")]
        ),
        f"src/{prefix}/Beta.java": _file(
            "Beta", [_clone_method("renderBeta"), _filler("Beta")]
        ),
        f"src/{prefix}/Gamma.java": _file(
            "Gamma", [_clone_method("renderGamma"), _filler("Gamma")]
        ),
    }


EXACT_HELPER = """\
    void applyScaling(int seed, int step, int count) {
        int total = seed;
        int scale = 2;
        total = total + step;
        scale = scale * total;
        total = total - scale;
        count = count + 1;
        emit(total);
        emit(scale);
        emit(count);
    }
"""

# parameterized: one renamed local dilutes the removed-token overlap to ~0.67
PARTIAL_HELPER = """\
    void applyScaling(int seed, int step, int count) {
        int total = seed;
        int factor = 2;
        total = total + step;
        factor = factor * total;
        total = total - factor;
        count = count + 1;
        emit(total);
        emit(factor);
        emit(count);
    }
"""

# heavier rewrite: the shared sliver lands between the 0.4 and 0.5 thresholds
LOOSE_HELPER = """\
    void applyScaling(int seed, int step, int count) {
        int sum = seed;
        int scale = 2;
        sum = sum + step;
        scale = scale * sum;
        sum = sum - scale;
        count = count + 1;
        report(sum);
        report(scale);
        report(count);
    }
"""

UNRELATED_HELPER = """\
    void applyScaling(String label, long stamp) {
        String banner = label;
        banner = banner.trim();
        append(banner, stamp);
        append(banner, banner.length());
        flush(banner);
    }
"""


def _refactored_version(prefix: str, helper: str) -> dict[str, str]:
    call = "applyScaling(seed, step, count)"
    return {
        f"src/{prefix}/Alpha.java": _file(
            "Alpha",
            [_refactored_method("renderAlpha", call), _filler("Alpha"), helper],
        ),
        f"src/{prefix}/Beta.java": _file(
            "Beta", [_refactored_method("renderBeta", call), _filler("Beta")]
        ),
        f"src/{prefix}/Gamma.java": _file(
            "Gamma", [_clone_method("renderGamma"), _filler("Gamma")]
        ),
    }


def planted_exact() -> list[dict[str, str]]:
    """Two of three peers replaced by calls; helper body equals the removed code."""
    return [_base_version("exact"), _refactored_version("exact", EXACT_HELPER)]


def planted_partial() -> list[dict[str, str]]:
    """Extraction with renamed locals; removed/body similarity lands mid-range."""
    return [_base_version("partial"), _refactored_version("partial", PARTIAL_HELPER)]


def planted_loose() -> list[dict[str, str]]:
    """Rewrite during extraction; similarity sits between 0.4 and 0.5."""
    return [_base_version("loose"), _refactored_version("loose", LOOSE_HELPER)]


def control_consistent_edit() -> list[dict[str, str]]:
    """Clones shrink by plain deletion; nothing is extracted."""
    base = _base_version("steady")
    trimmed_body = "".join(
        line + "\n" for line in CLONE_BODY.splitlines() if "emit" not in line
    )

    def trimmed(name: str) -> str:
        return (
            f"    void {name}(int seed, int step) {{\n"
            "        int count = 0;\n"
            "        int scale = 1;\n"
            + trimmed_body
            + KEPT_TAIL
            + "    }\n"
        )

    after = {
        "src/steady/Alpha.java": _file("Alpha", [trimmed("renderAlpha"), _filler("Alpha")]),
        "src/steady/Beta.java": _file("Beta", [trimmed("renderBeta"), _filler("Beta")]),
        "src/steady/Gamma.java": _file(
            "Gamma", [_clone_method("renderGamma"), _filler("Gamma")]
        ),
    }
    return [base, after]


def control_unrelated_call() -> list[dict[str, str]]:
    """Clones shrink and gain a call, but the new method shares almost nothing
    with the removed code."""
    return [_base_version("noisy"), _refactored_version("noisy", UNRELATED_HELPER)]


PLANTED = {
    "exact": planted_exact,
    "partial": planted_partial,
    "loose": planted_loose,
}
CONTROLS = {
    "steady": control_consistent_edit,
    "noisy": control_unrelated_call,
}

PERSISTENT_PAIR = {
    "src/keep/Keep1.java": (
        "class Keep1 {\n"
        "    int tally(int[] xs) {\n"
        "        int acc = 9;\n"
        "        for (int v : xs) {\n"
        "            acc = acc ^ v;\n"
        "            acc = acc << 1;\n"
        "        }\n"
        "        return acc;\n"
        "    }\n"
        "}\n"
    ),
    "src/keep/Keep2.java": (
        "class Keep2 {\n"
        "    int tally(int[] xs) {\n"
        "        int acc = 9;\n"
        "        for (int v : xs) {\n"
        "            acc = acc ^ v;\n"
        "            acc = acc << 1;\n"
        "        }\n"
        "        return acc;\n"
        "    }\n"
        "}\n"
    ),
}


def end_to_end_corpora() -> list[dict[str, str]]:
    """One planted refactoring plus a clone pair that persists unchanged, so the
    pipeline sees both an R and an NR lineage."""
    versions = planted_exact()
    return [{**v, **PERSISTENT_PAIR} for v in versions]


def commit_corpora(rb, corpora: list[dict[str, str]]) -> None:
    """Commit each version of a corpus into a RepoBuilder, deleting stale files."""
    seen: set[str] = set()
    for i, version in enumerate(corpora):
        files: dict[str, str | None] = dict(version)
        for stale in seen - set(version):
            files[stale] = None
        rb.commit(files, message=f"version {i}")
        seen = set(version)
