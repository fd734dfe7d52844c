"""Links clones and clone groups across consecutive sampled versions."""

from __future__ import annotations

from dataclasses import dataclass

from .clone_detector import CloneGroup, CodeBlock, similarity


@dataclass(frozen=True)
class CloneLink:
    source: CodeBlock  # at version i
    target: CodeBlock  # at version i+1
    score: float


@dataclass
class Lineage:
    lineage_id: str
    groups: list[tuple[int, CloneGroup]]  # strictly increasing version indices
    links: list[list[CloneLink]]  # links[k] joins groups[k] to groups[k+1]
    end_state: str  # alive_at_last_version | dissolved


def link_clones(
    groups_i: list[CloneGroup], groups_i1: list[CloneGroup], link_floor: float = 0.5
) -> list[CloneLink]:
    """One-to-one successor links between the clones of two consecutive versions.

    Candidates are restricted to the same file path; assignment is greedy by
    descending similarity with deterministic tie-breaks (closest start line,
    then location order). Scores below *link_floor* are discarded.
    """
    sources = _distinct_members(groups_i)
    targets = _distinct_members(groups_i1)
    by_path: dict[str, list[CodeBlock]] = {}
    for b in targets:
        by_path.setdefault(b.path, []).append(b)

    candidates = []
    for a in sources:
        for b in by_path.get(a.path, ()):
            score = similarity(a, b)
            if score >= link_floor:
                candidates.append((a, b, score))
    candidates.sort(
        key=lambda c: (
            -c[2],
            abs(c[0].start_line - c[1].start_line),
            c[0].key,
            c[1].key,
        )
    )
    used_a: set[tuple] = set()
    used_b: set[tuple] = set()
    links = []
    for a, b, score in candidates:
        if a.key in used_a or b.key in used_b:
            continue
        used_a.add(a.key)
        used_b.add(b.key)
        links.append(CloneLink(a, b, score))
    return links


def _distinct_members(groups: list[CloneGroup]) -> list[CodeBlock]:
    seen: dict[tuple, CodeBlock] = {}
    for g in groups:
        for b in g.members:
            seen.setdefault(b.key, b)
    return [seen[k] for k in sorted(seen)]


def link_groups(
    group_a: CloneGroup, group_b: CloneGroup, member_links: list[CloneLink]
) -> bool:
    """True when the majority (ceil of half) of group_a's members match into group_b."""
    a_keys = {b.key for b in group_a.members}
    b_keys = {b.key for b in group_b.members}
    matched = sum(
        1 for l in member_links if l.source.key in a_keys and l.target.key in b_keys
    )
    return matched >= (len(group_a.members) + 1) // 2


def _match_groups(
    groups_a: list[CloneGroup], groups_b: list[CloneGroup], links: list[CloneLink]
) -> dict[str, tuple[CloneGroup, list[CloneLink]]]:
    """Best one-to-one group successor map for one version step."""
    owner_a = {b.key: g for g in groups_a for b in g.members}
    owner_b = {b.key: g for g in groups_b for b in g.members}
    by_id_b = {g.group_id: g for g in groups_b}
    pair_links: dict[tuple[str, str], list[CloneLink]] = {}
    for l in links:
        ga = owner_a.get(l.source.key)
        gb = owner_b.get(l.target.key)
        if ga is not None and gb is not None:
            pair_links.setdefault((ga.group_id, gb.group_id), []).append(l)

    by_id_a = {g.group_id: g for g in groups_a}
    candidates = [
        (-len(ls), ida, idb)
        for (ida, idb), ls in pair_links.items()
        if len(ls) >= (len(by_id_a[ida].members) + 1) // 2
    ]
    candidates.sort()
    used_a: set[str] = set()
    used_b: set[str] = set()
    successor: dict[str, tuple[CloneGroup, list[CloneLink]]] = {}
    for _, ida, idb in candidates:
        if ida in used_a or idb in used_b:
            continue
        used_a.add(ida)
        used_b.add(idb)
        successor[ida] = (by_id_b[idb], pair_links[(ida, idb)])
    return successor


def build_genealogies(
    all_versions_groups: list[list[CloneGroup]], link_floor: float = 0.5
) -> list[Lineage]:
    """Stitch step-wise group links into maximal lineages.

    Every (version, group) occurrence lands in exactly one lineage; a group
    without a predecessor starts a new one.
    """
    last_version = len(all_versions_groups) - 1
    lineages: list[Lineage] = []
    tips: dict[str, Lineage] = {}  # group_id at current version -> lineage

    for v, groups in enumerate(all_versions_groups):
        for g in sorted(groups, key=lambda g: g.group_id):
            if g.group_id not in tips:
                lin = Lineage(
                    lineage_id=f"lin-{v}-{g.group_id}",
                    groups=[(v, g)],
                    links=[],
                    end_state="dissolved",
                )
                lineages.append(lin)
                tips[g.group_id] = lin
        if v == last_version:
            break
        step_links = link_clones(groups, all_versions_groups[v + 1], link_floor)
        successor = _match_groups(groups, all_versions_groups[v + 1], step_links)
        next_tips: dict[str, Lineage] = {}
        for group_id, lin in tips.items():
            if group_id in successor:
                gb, ls = successor[group_id]
                lin.groups.append((v + 1, gb))
                lin.links.append(sorted(ls, key=lambda l: l.source.key))
                next_tips[gb.group_id] = lin
        tips = next_tips

    for lin in lineages:
        if lin.groups[-1][0] == last_version:
            lin.end_state = "alive_at_last_version"
    lineages.sort(key=lambda l: (l.groups[0][0], l.groups[0][1].group_id))
    return lineages
