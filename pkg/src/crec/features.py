"""The 34 numeric features describing a clone group at one version.

Per-clone features (F1-F17) cover code shape and file history and are
mean-aggregated over group members; group features (F18-F34) cover relative
location, token-level differences, and co-change behavior. All classification
of identifiers is lexical, not type-resolved.
"""

from __future__ import annotations

import posixpath
from collections import Counter
from dataclasses import dataclass

from .clone_detector import CodeBlock, Token, scan
from .errors import RangeViolation
from .genealogy import Lineage
from .repo_miner import CheckedWindow, Hunk, hunk_touches, distinct_authors
from .repo_miner import _lcs_pairs  # shared LCS core

FEATURE_NAMES = (
    "lines_of_code",
    "token_count",
    "cyclomatic_complexity",
    "field_accesses",
    "invocation_stmt_ratio",
    "method_line_ratio",
    "arithmetic_stmt_ratio",
    "complete_block",
    "starts_with_control",
    "follows_control",
    "is_test_code",
    "file_existence_ratio",
    "file_change_ratio",
    "dir_change_ratio",
    "recent_file_change_ratio",
    "recent_dir_change_ratio",
    "author_ratio",
    "same_directory",
    "same_file",
    "same_class_hierarchy",
    "same_method",
    "method_name_distance",
    "copied_dir_score",
    "group_size",
    "diff_count",
    "partial_diff_ratio",
    "variable_diff_ratio",
    "method_diff_ratio",
    "type_diff_ratio",
    "all_change_ratio",
    "no_change_ratio",
    "one_change_ratio",
    "two_change_ratio",
    "three_change_ratio",
)

_DECISION_POINTS = frozenset({"if", "for", "while", "case", "catch", "&&", "||", "?"})
_ARITHMETIC_OPS = frozenset({"+", "-", "*", "/", "%"})
_CONTROL_STARTERS = frozenset({"if", "for", "while", "switch", "do", "try"})
_CONTROL_KEYWORDS = _CONTROL_STARTERS | {"else", "catch", "finally"}
_INCOMPLETE_STARTERS = frozenset({"else", "catch", "finally", "case"})
_PRIMITIVES = frozenset({"int", "long", "short", "byte", "float", "double", "boolean", "char", "var"})

# 1-based feature numbers by validated range; F8-F11 are boolean per clone but
# mean aggregation puts the group value in [0,1]
_UNIT_RANGE = frozenset(
    {5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 23, 26, 27, 28, 29, 30, 31, 32, 33, 34}
)
_EXACT_BOOL = frozenset({18, 19, 20, 21})
_NONNEGATIVE = frozenset({1, 2, 3, 4, 22, 24, 25})


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]  # index 0 holds F1
    lineage_id: str
    version: int


@dataclass(frozen=True)
class AlignedToken:
    text: str
    category: str  # variable | method | type | none


@dataclass(frozen=True)
class DifferentialMultiset:
    entries: tuple[AlignedToken | None, ...]  # one slot per member, None = gap
    partially_same: bool
    contains_variable: bool
    contains_method: bool
    contains_type: bool


@dataclass(frozen=True)
class TokenMultisetDiff:
    matched: tuple[tuple[AlignedToken | None, ...], ...]
    differential: tuple[DifferentialMultiset, ...]


@dataclass(frozen=True)
class FileContext:
    path: str
    lines: tuple[str, ...]
    field_names: frozenset[str]


def file_context(path: str, text: str) -> FileContext:
    return FileContext(
        path=path,
        lines=tuple(text.splitlines()),
        field_names=frozenset(_field_names(scan(text))),
    )


def _field_names(lex: list[Token]) -> set[str]:
    """Shallow scan for names declared directly inside the outermost type body."""
    names: set[str] = set()
    depth = 0
    segment: list[Token] = []
    for t in lex:
        if t.kind == "punct" and t.text == "{":
            depth += 1
            segment = []
        elif t.kind == "punct" and t.text == "}":
            depth -= 1
            segment = []
        elif depth == 1:
            if t.kind == "punct" and t.text == ";":
                names |= _declared_names(segment)
                segment = []
            else:
                segment.append(t)
    return names


def _declared_names(segment: list[Token]) -> set[str]:
    if any(t.kind == "punct" and t.text == "(" for t in segment):
        return set()  # abstract/native method declaration, not a field
    names = set()
    for i, t in enumerate(segment):
        if t.kind != "identifier":
            continue
        prev = segment[i - 1] if i > 0 else None
        nxt = segment[i + 1] if i + 1 < len(segment) else None
        prev_ok = prev is not None and (
            prev.kind == "identifier"
            or (prev.kind == "keyword" and prev.text in _PRIMITIVES)
            or (prev.kind == "punct" and prev.text in ("]", ">", ","))
        )
        nxt_ok = nxt is None or (nxt.kind == "punct" and nxt.text in ("=", ",", "["))
        if prev_ok and nxt_ok:
            names.add(t.text)
    return names


# -- per-clone code features (F1-F11) ----------------------------------------


def _statements(raw: tuple[Token, ...]) -> list[list[Token]]:
    """Semicolon-terminated token runs, leading braces stripped."""
    statements = []
    current: list[Token] = []
    for t in raw:
        if t.kind == "punct" and t.text == ";":
            if current:
                statements.append(current)
            current = []
        elif t.kind == "punct" and t.text in ("{", "}") and not current:
            continue
        else:
            current.append(t)
    return statements


def _is_invocation(stmt: list[Token]) -> bool:
    i = 0
    if i >= len(stmt) or stmt[i].kind != "identifier":
        return False
    i += 1
    while i + 1 < len(stmt) and stmt[i].text == "." and stmt[i + 1].kind == "identifier":
        i += 2
    return i < len(stmt) and stmt[i].kind == "punct" and stmt[i].text == "("


def _is_arithmetic(stmt: list[Token]) -> bool:
    for i, t in enumerate(stmt):
        if t.kind == "punct" and t.text in _ARITHMETIC_OPS:
            prev = stmt[i - 1] if i > 0 else None
            nxt = stmt[i + 1] if i + 1 < len(stmt) else None
            if prev is not None and prev.kind == "literal" and prev.text[:1] in "\"'":
                continue  # string concatenation, not arithmetic
            if nxt is not None and nxt.kind == "literal" and nxt.text[:1] in "\"'":
                continue
            return True
    return False


def _braces_balanced(raw: tuple[Token, ...]) -> bool:
    depth = 0
    for t in raw:
        if t.kind == "punct" and t.text == "{":
            depth += 1
        elif t.kind == "punct" and t.text == "}":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def _is_test_path(path: str) -> bool:
    parts = path.split("/")
    if any(p.lower() in ("test", "tests") for p in parts[:-1]):
        return True
    stem = posixpath.splitext(parts[-1])[0]
    return stem.endswith("Test") or stem.endswith("Tests")


def extract_code_features(clone: CodeBlock, fctx: FileContext) -> tuple[float, ...]:
    raw = clone.raw_tokens
    f1 = float(clone.line_span)
    f2 = float(len(clone.tokens))
    f3 = 1.0 + sum(1 for t in raw if t.text in _DECISION_POINTS)

    f4 = 0.0
    for i, t in enumerate(raw):
        if t.kind != "identifier":
            continue
        after_this = (
            i >= 2
            and raw[i - 1].kind == "punct"
            and raw[i - 1].text == "."
            and raw[i - 2].text == "this"
        )
        if after_this or t.text in fctx.field_names:
            f4 += 1.0

    stmts = _statements(raw)
    f5 = sum(1 for s in stmts if _is_invocation(s)) / len(stmts) if stmts else 0.0
    f6 = (
        clone.line_span / clone.enclosing_method_line_count
        if clone.enclosing_method_line_count
        else 1.0
    )
    f7 = sum(1 for s in stmts if _is_arithmetic(s)) / len(stmts) if stmts else 0.0

    first = clone.tokens[0].text if clone.tokens else ""
    f8 = 1.0 if _braces_balanced(raw) and first not in _INCOMPLETE_STARTERS else 0.0
    f9 = 1.0 if first in _CONTROL_STARTERS else 0.0

    f10 = 0.0
    for line in reversed(fctx.lines[: clone.start_line - 1]):
        if not line.strip():
            continue
        lead = scan(line)
        f10 = 1.0 if lead and lead[0].kind == "keyword" and lead[0].text in _CONTROL_KEYWORDS else 0.0
        break

    f11 = 1.0 if _is_test_path(clone.path) else 0.0
    return (f1, f2, f3, f4, f5, f6, f7, f8, f9, f10, f11)


# -- per-clone history features (F12-F17) -------------------------------------


class WindowView:
    """Cached per-step diff state over a checked window. window=None means the
    history is too short; history and co-change features then fall back to 0."""

    def __init__(self, repo, window: CheckedWindow | None):
        self.repo = repo
        self.window = window
        self.steps = window.steps if window is not None else ()
        recent = len(window.recent_steps) if window is not None else 0
        self.recent_indices = range(len(self.steps) - recent, len(self.steps))
        self._changed: dict[int, set[str]] = {}
        self._hunks: dict[tuple[int, str], list[Hunk]] = {}
        self._exists: dict[tuple[int, str], bool] = {}

    def changed_paths(self, step: int) -> set[str]:
        if step not in self._changed:
            a, b = self.steps[step]
            self._changed[step] = set(self.repo.changed_paths(a.commit_id, b.commit_id))
        return self._changed[step]

    def hunks(self, step: int, path: str) -> list[Hunk]:
        key = (step, path)
        if key not in self._hunks:
            a, b = self.steps[step]
            self._hunks[key] = self.repo.diff_hunks(a.commit_id, b.commit_id, path)
        return self._hunks[key]

    def exists_at_end(self, step: int, path: str) -> bool:
        key = (step, path)
        if key not in self._exists:
            _, b = self.steps[step]
            self._exists[key] = self.repo.file_at(b.commit_id, path) is not None
        return self._exists[key]


def extract_history_features(path: str, view: WindowView, commits) -> tuple[float, ...]:
    if view.window is None or not view.steps:
        return (0.0,) * 6
    n = len(view.steps)
    directory = posixpath.dirname(path)
    exists = changed = dir_changed = recent_changed = recent_dir = 0
    for i in range(n):
        if view.exists_at_end(i, path):
            exists += 1
        touched = path in view.changed_paths(i)
        dir_touched = any(
            posixpath.dirname(p) == directory for p in view.changed_paths(i)
        )
        changed += touched
        dir_changed += dir_touched
        if i in view.recent_indices:
            recent_changed += touched
            recent_dir += dir_touched
    recent_n = len(view.recent_indices)
    touching, everyone = distinct_authors(path, commits)
    return (
        exists / n,
        changed / n,
        dir_changed / n,
        recent_changed / recent_n if recent_n else 0.0,
        recent_dir / recent_n if recent_n else 0.0,
        touching / everyone if everyone else 0.0,
    )


# -- group location features (F18-F23) ----------------------------------------


def _top_level_classes(path: str, text: str) -> list[tuple[str, int, int, list[str]]]:
    """(name, start_line, end_line, related names) for each top-level type."""
    lex = scan(text)
    classes = []
    depth = 0
    i = 0
    while i < len(lex):
        t = lex[i]
        if t.kind == "punct" and t.text == "{":
            depth += 1
        elif t.kind == "punct" and t.text == "}":
            depth -= 1
        elif (
            depth == 0
            and t.kind == "keyword"
            and t.text in ("class", "interface", "enum")
            and i + 1 < len(lex)
            and lex[i + 1].kind == "identifier"
        ):
            name = lex[i + 1].text
            start = t.line
            related = []
            j = i + 2
            in_generics = 0
            collecting = False
            while j < len(lex) and not (lex[j].kind == "punct" and lex[j].text == "{"):
                tj = lex[j]
                if tj.kind == "punct" and tj.text == "<":
                    in_generics += 1
                elif tj.kind == "punct" and tj.text == ">":
                    in_generics -= 1
                elif tj.kind == "keyword" and tj.text in ("extends", "implements"):
                    collecting = True
                elif collecting and not in_generics and tj.kind == "identifier":
                    related.append(tj.text)
                j += 1
            body_depth = 0
            end = start
            while j < len(lex):
                if lex[j].kind == "punct" and lex[j].text == "{":
                    body_depth += 1
                elif lex[j].kind == "punct" and lex[j].text == "}":
                    body_depth -= 1
                    if body_depth == 0:
                        end = lex[j].line
                        break
                j += 1
            classes.append((name, start, end, related))
            i = j
        i += 1
    return classes


def _hierarchy_components(corpus: dict[str, str]) -> dict[str, int]:
    """Connected components of the shallow extends/implements graph."""
    adjacency: dict[str, set[str]] = {}
    for path in sorted(corpus):
        for name, _, _, related in _top_level_classes(path, corpus[path]):
            adjacency.setdefault(name, set())
            for other in related:
                adjacency.setdefault(other, set())
                adjacency[name].add(other)
                adjacency[other].add(name)
    component: dict[str, int] = {}
    for idx, root in enumerate(sorted(adjacency)):
        if root in component:
            continue
        stack = [root]
        while stack:
            node = stack.pop()
            if node in component:
                continue
            component[node] = idx
            stack.extend(adjacency[node])
    return component


def _member_class(member: CodeBlock, corpus: dict[str, str]) -> str | None:
    text = corpus.get(member.path)
    if text is None:
        return None
    for name, start, end, _ in _top_level_classes(member.path, text):
        if start <= member.start_line and member.end_line <= end:
            return name
    return None


def path_copy_score(dir_a: str, dir_b: str, corpus_paths: list[str]) -> float:
    """Shared-suffix ratio of two directories scaled by sibling-file overlap."""
    seg_a = [s for s in dir_a.split("/") if s]
    seg_b = [s for s in dir_b.split("/") if s]
    if not seg_a or not seg_b:
        return 0.0
    suffix = 0
    while (
        suffix < len(seg_a)
        and suffix < len(seg_b)
        and seg_a[-1 - suffix] == seg_b[-1 - suffix]
    ):
        suffix += 1
    ratio = suffix / min(len(seg_a), len(seg_b))
    names_a = {posixpath.basename(p) for p in corpus_paths if posixpath.dirname(p) == dir_a}
    names_b = {posixpath.basename(p) for p in corpus_paths if posixpath.dirname(p) == dir_b}
    union = names_a | names_b
    overlap = len(names_a & names_b) / len(union) if union else 0.0
    return ratio * overlap


def extract_location_features(group, corpus: dict[str, str]) -> tuple[float, ...]:
    members = group.members
    dirs = [posixpath.dirname(m.path) for m in members]
    f18 = 1.0 if len(set(dirs)) == 1 else 0.0
    f19 = 1.0 if len({m.path for m in members}) == 1 else 0.0

    classes = [_member_class(m, corpus) for m in members]
    if all(c is not None for c in classes):
        component = _hierarchy_components(corpus)
        ids = {component.get(c) for c in classes}
        f20 = 1.0 if len(ids) == 1 and None not in ids else 0.0
    else:
        f20 = 0.0

    methods = {
        (m.path, m.enclosing_method_start, m.enclosing_method_name) for m in members
    }
    f21 = (
        1.0
        if len(methods) == 1 and members[0].enclosing_method_name is not None
        else 0.0
    )

    names = [m.enclosing_method_name or "" for m in members]
    f22 = float(
        min(
            levenshtein(names[i], names[j])
            for i in range(len(names))
            for j in range(i + 1, len(names))
        )
    )

    paths = sorted(corpus)
    f23 = max(
        path_copy_score(dirs[i], dirs[j], paths)
        for i in range(len(dirs))
        for j in range(i + 1, len(dirs))
    )
    return (f18, f19, f20, f21, f22, f23)


# -- token alignment and diff features (F24-F29) -------------------------------


def classify_identifier(raw_tokens: tuple[Token, ...], i: int) -> str:
    """Lexical role of raw_tokens[i]: variable, method, type, or none."""
    t = raw_tokens[i]
    if t.kind != "identifier":
        return "none"
    prev = raw_tokens[i - 1] if i > 0 else None
    nxt = raw_tokens[i + 1] if i + 1 < len(raw_tokens) else None
    nxt2 = raw_tokens[i + 2] if i + 2 < len(raw_tokens) else None
    if prev is not None and prev.kind == "keyword" and prev.text == "new":
        return "type"
    if nxt is not None and nxt.kind == "punct" and nxt.text == "(":
        return "method"
    if prev is not None and prev.kind == "keyword" and prev.text in (
        "extends",
        "implements",
        "instanceof",
    ):
        return "type"
    if nxt is not None and nxt.kind == "identifier":
        return "type"  # declaration pattern: first of an identifier pair
    if (
        prev is not None
        and prev.kind == "punct"
        and prev.text == "("
        and nxt is not None
        and nxt.kind == "punct"
        and nxt.text == ")"
        and nxt2 is not None
        and (nxt2.kind in ("identifier", "literal") or nxt2.text == "(")
    ):
        return "type"  # cast
    return "variable"


def classified_sequence(block: CodeBlock) -> list[AlignedToken]:
    """The block's token sequence with each identifier's lexical role attached."""
    out = []
    for i, t in enumerate(block.raw_tokens):
        if t.kind == "punct":
            continue
        category = classify_identifier(block.raw_tokens, i) if t.kind == "identifier" else "none"
        out.append(AlignedToken(t.text, category))
    return out


def _majority_text(column: list[AlignedToken | None]) -> str:
    counts = Counter(e.text for e in column if e is not None)
    return min(counts, key=lambda text: (-counts[text], text))


def multiset_diff(sequences: list[list[AlignedToken]]) -> TokenMultisetDiff:
    """Progressively align token sequences by text LCS into per-column multisets.

    Columns where every member holds the same text are matched; all others are
    differential. Gaps are explicit so token occurrences are conserved.
    """
    if len(sequences) < 2:
        raise ValueError("need at least 2 sequences")
    columns: list[list[AlignedToken | None]] = [[tok] for tok in sequences[0]]
    for width, seq in enumerate(sequences[1:], 1):
        consensus = [_majority_text(col) for col in columns]
        pairs = _lcs_pairs(consensus, [t.text for t in seq])
        merged: list[list[AlignedToken | None]] = []
        ci = si = 0
        for pc, ps in pairs + [(len(columns), len(seq))]:
            run = max(pc - ci, ps - si)
            for k in range(run):
                col = columns[ci + k] if ci + k < pc else [None] * width
                tok = seq[si + k] if si + k < ps else None
                merged.append(col + [tok])
            if pc < len(columns):
                merged.append(columns[pc] + [seq[ps]])
            ci, si = pc + 1, ps + 1
        columns = merged

    matched = []
    differential = []
    for col in columns:
        texts = [e.text for e in col if e is not None]
        if len(texts) == len(col) and len(set(texts)) == 1:
            matched.append(tuple(col))
            continue
        multiplicity = max(Counter(texts).values())
        categories = {e.category for e in col if e is not None}
        differential.append(
            DifferentialMultiset(
                entries=tuple(col),
                partially_same=multiplicity >= 2,
                contains_variable="variable" in categories,
                contains_method="method" in categories,
                contains_type="type" in categories,
            )
        )
    return TokenMultisetDiff(matched=tuple(matched), differential=tuple(differential))


def extract_diff_features(group) -> tuple[float, ...]:
    sequences = [classified_sequence(m) for m in group.members]
    diff = multiset_diff(sequences)
    f24 = float(len(group.members))
    f25 = float(len(diff.differential))
    if not diff.differential:
        return (f24, 0.0, 0.0, 0.0, 0.0, 0.0)
    total = len(diff.differential)
    f26 = sum(1 for d in diff.differential if d.partially_same) / total
    f27 = sum(1 for d in diff.differential if d.contains_variable) / total
    f28 = sum(1 for d in diff.differential if d.contains_method) / total
    f29 = sum(1 for d in diff.differential if d.contains_type) / total
    return (f24, f25, f26, f27, f28, f29)


# -- group co-change features (F30-F34) ---------------------------------------


def _chain_positions(lineage: Lineage) -> dict[tuple[int, int], CodeBlock]:
    """(version, chain id) -> the chain's block there; chains follow member links."""
    chain_of: dict[tuple[int, tuple], int] = {}
    positions: dict[tuple[int, int], CodeBlock] = {}
    counter = 0
    v0, g0 = lineage.groups[0]
    for b in g0.members:
        chain_of[(v0, b.key)] = counter
        positions[(v0, counter)] = b
        counter += 1
    for k in range(1, len(lineage.groups)):
        v_prev = lineage.groups[k - 1][0]
        v, g = lineage.groups[k]
        for link in lineage.links[k - 1]:
            cid = chain_of.get((v_prev, link.source.key))
            if cid is not None:
                chain_of[(v, link.target.key)] = cid
                positions[(v, cid)] = link.target
        for b in g.members:
            if (v, b.key) not in chain_of:
                chain_of[(v, b.key)] = counter
                positions[(v, counter)] = b
                counter += 1
    return positions


def extract_cochange_features(
    group, lineage: Lineage, version: int, view: WindowView
) -> tuple[float, ...]:
    if view.window is None or not view.steps:
        return (0.0,) * 5
    positions = _chain_positions(lineage)
    chain_by_pos = {(v, blk.key): cid for (v, cid), blk in positions.items()}
    member_chains = [chain_by_pos.get((version, m.key)) for m in group.members]

    n = len(view.steps)
    members = len(group.members)
    all_changed = none_changed = 0
    partial = Counter()  # exactly-k buckets, disjoint from the all-changed case
    for i, (sample_a, _) in enumerate(view.steps):
        v = sample_a.index
        changed = 0
        for cid in member_chains:
            if cid is None:
                continue  # untracked members count as unchanged
            block = positions.get((v, cid))
            if block is None:
                continue
            hunks = view.hunks(i, block.path)
            if any(hunk_touches(h, block.start_line, block.end_line) for h in hunks):
                changed += 1
        if changed == members:
            all_changed += 1
        elif changed == 0:
            none_changed += 1
        elif changed <= 3:
            partial[changed] += 1

    return (
        all_changed / n,
        none_changed / n,
        partial[1] / n,
        partial[2] / n,
        partial[3] / n,
    )


# -- assembly ------------------------------------------------------------------


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[len(b)]


def validate_values(values: tuple[float, ...]) -> None:
    if len(values) != 34:
        raise RangeViolation(f"expected 34 features, got {len(values)}")
    for num, value in enumerate(values, 1):
        if num in _EXACT_BOOL and value not in (0.0, 1.0):
            raise RangeViolation(f"F{num}={value} not boolean")
        if num in _UNIT_RANGE and not 0.0 <= value <= 1.0:
            raise RangeViolation(f"F{num}={value} outside [0,1]")
        if num in _NONNEGATIVE and value < 0:
            raise RangeViolation(f"F{num}={value} negative")


def assemble_vector(
    per_clone_rows: list[tuple[float, ...]],
    group_values: tuple[float, ...],
    lineage_id: str,
    version: int,
    aggregation: str = "mean",
) -> FeatureVector:
    """Aggregate per-clone F1-F17 rows, append group F18-F34, and validate."""
    if not per_clone_rows or any(len(r) != 17 for r in per_clone_rows):
        raise ValueError("need one 17-value row per member")
    if len(group_values) != 17:
        raise ValueError("need 17 group-level values")
    if aggregation == "mean":
        agg = tuple(
            sum(row[i] for row in per_clone_rows) / len(per_clone_rows) for i in range(17)
        )
    elif aggregation == "max":
        agg = tuple(max(row[i] for row in per_clone_rows) for i in range(17))
    else:
        raise ValueError(f"unknown aggregation: {aggregation}")
    values = agg + tuple(group_values)
    validate_values(values)
    return FeatureVector(values=values, lineage_id=lineage_id, version=version)
