"""On-disk artifact formats: line-delimited structured text, one versioned
header line per file (`crec-format v1 <kind>`), JSON or CSV rows after it.
Round-trips are lossless and byte-deterministic."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import FormatVersionMismatch, ParseError
from .genealogy import Lineage
from .labeler import LabelDecision
from .repo_miner import CommitRecord, SampledVersion

FORMAT_PREFIX = "crec-format"
FORMAT_VERSION = "v1"


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_artifact(path: str | Path, kind: str, lines: list[str]) -> None:
    body = [f"{FORMAT_PREFIX} {FORMAT_VERSION} {kind}"] + lines
    Path(path).write_text("\n".join(body) + "\n", encoding="utf-8")


def read_artifact(path: str | Path, kind: str) -> list[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty artifact file", 1)
    head = lines[0].split()
    if len(head) != 3 or head[0] != FORMAT_PREFIX:
        raise ParseError(f"bad header: {lines[0]!r}", 1)
    if head[1] != FORMAT_VERSION:
        raise FormatVersionMismatch(f"unsupported format version {head[1]}")
    if head[2] != kind:
        raise ParseError(f"expected {kind} artifact, found {head[2]}", 1)
    return lines[1:]


def _parse_json_rows(lines: list[str]) -> list[tuple[int, dict]]:
    rows = []
    for lineno, line in enumerate(lines, 2):
        if not line.strip():
            continue
        try:
            rows.append((lineno, json.loads(line)))
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", lineno) from None
    return rows


# -- commits / samples --------------------------------------------------------


def write_commits(path, commits: list[CommitRecord]) -> None:
    lines = [
        _dumps(
            {
                "id": c.id,
                "timestamp": c.timestamp,
                "author": c.author,
                "changed_files": sorted(c.changed_files),
                "changed_line_count": c.changed_line_count,
            }
        )
        for c in commits
    ]
    write_artifact(path, "commits", lines)


def read_commits(path) -> list[CommitRecord]:
    out = []
    for lineno, d in _parse_json_rows(read_artifact(path, "commits")):
        try:
            out.append(
                CommitRecord(
                    d["id"],
                    d["timestamp"],
                    d["author"],
                    frozenset(d["changed_files"]),
                    d["changed_line_count"],
                )
            )
        except KeyError as exc:
            raise ParseError(f"missing field {exc}", lineno) from None
    return out


def write_samples(path, samples: list[SampledVersion]) -> None:
    lines = [
        _dumps({"index": s.index, "commit_id": s.commit_id, "cumulative_delta": s.cumulative_delta})
        for s in samples
    ]
    write_artifact(path, "samples", lines)


def read_samples(path) -> list[SampledVersion]:
    out = []
    for lineno, d in _parse_json_rows(read_artifact(path, "samples")):
        try:
            out.append(SampledVersion(d["index"], d["commit_id"], d["cumulative_delta"]))
        except KeyError as exc:
            raise ParseError(f"missing field {exc}", lineno) from None
    return out


# -- clone groups -------------------------------------------------------------


@dataclass(frozen=True)
class GroupRecord:
    version: int
    group_id: str
    members: tuple[tuple[str, int, int, int], ...]  # (path, start, end, token count)


def write_groups(path, groups) -> None:
    lines = []
    for g in groups:
        lines.append(
            _dumps(
                {
                    "version": g.version,
                    "group_id": g.group_id,
                    "members": [
                        {
                            "path": b.path,
                            "start": b.start_line,
                            "end": b.end_line,
                            "tokens": len(b.tokens),
                        }
                        for b in g.members
                    ],
                }
            )
        )
    write_artifact(path, "clones", lines)


def read_groups(path) -> list[GroupRecord]:
    out = []
    for lineno, d in _parse_json_rows(read_artifact(path, "clones")):
        try:
            members = tuple(
                (m["path"], m["start"], m["end"], m["tokens"]) for m in d["members"]
            )
            out.append(GroupRecord(d["version"], d["group_id"], members))
        except KeyError as exc:
            raise ParseError(f"missing field {exc}", lineno) from None
    return out


# -- lineages -----------------------------------------------------------------


@dataclass(frozen=True)
class LineageRecord:
    lineage_id: str
    end_state: str
    groups: tuple[tuple[int, str], ...]  # (version, group_id)


def write_lineages(path, lineages: list[Lineage]) -> None:
    lines = [
        _dumps(
            {
                "lineage_id": lin.lineage_id,
                "end_state": lin.end_state,
                "groups": [[v, g.group_id] for v, g in lin.groups],
            }
        )
        for lin in lineages
    ]
    write_artifact(path, "lineages", lines)


def read_lineages(path) -> list[LineageRecord]:
    out = []
    for lineno, d in _parse_json_rows(read_artifact(path, "lineages")):
        try:
            out.append(
                LineageRecord(
                    d["lineage_id"],
                    d["end_state"],
                    tuple((v, gid) for v, gid in d["groups"]),
                )
            )
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad lineage row: {exc}", lineno) from None
    return out


# -- labels and the threshold sweep -------------------------------------------


def write_labels(path, decisions: list[LabelDecision]) -> None:
    lines = [
        _dumps(
            {
                "lineage_id": d.lineage_id,
                "label": d.label,
                "step": d.step_version,
                "evidence": d.evidence,
            }
        )
        for d in decisions
    ]
    write_artifact(path, "labels", lines)


def read_labels(path) -> list[LabelDecision]:
    out = []
    for lineno, d in _parse_json_rows(read_artifact(path, "labels")):
        try:
            out.append(LabelDecision(d["lineage_id"], d["step"], d["label"], d["evidence"]))
        except KeyError as exc:
            raise ParseError(f"missing field {exc}", lineno) from None
    return out


def write_sweep(path, rows: list[tuple[float, int]]) -> None:
    lines = [_dumps({"threshold": th, "reported": count}) for th, count in rows]
    write_artifact(path, "label-sweep", lines)


def read_sweep(path) -> list[tuple[float, int]]:
    return [
        (d["threshold"], d["reported"])
        for _, d in _parse_json_rows(read_artifact(path, "label-sweep"))
    ]


# -- feature table ------------------------------------------------------------


@dataclass(frozen=True)
class FeatureRow:
    lineage_id: str
    version: int
    values: tuple[float, ...]
    label: int | None


FEATURE_CSV_HEADER = "lineage_id,version," + ",".join(f"F{i}" for i in range(1, 35)) + ",label"


def write_features(path, rows: list[FeatureRow]) -> None:
    lines = [FEATURE_CSV_HEADER]
    for row in rows:
        label = "" if row.label is None else str(row.label)
        lines.append(
            ",".join(
                [row.lineage_id, str(row.version)]
                + [repr(v) for v in row.values]
                + [label]
            )
        )
    write_artifact(path, "features", lines)


def read_features(path) -> list[FeatureRow]:
    lines = read_artifact(path, "features")
    if not lines or lines[0] != FEATURE_CSV_HEADER:
        raise ParseError("missing or wrong feature header row", 2)
    out = []
    for lineno, line in enumerate(lines[1:], 3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 37:
            raise ParseError(f"expected 37 columns, found {len(parts)}", lineno)
        try:
            values = tuple(float(v) for v in parts[2:36])
            label = int(parts[36]) if parts[36] != "" else None
            out.append(FeatureRow(parts[0], int(parts[1]), values, label))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    return out


# -- model / recommendations / reports ----------------------------------------


def write_model(path, model) -> None:
    write_artifact(path, "model", [_dumps(model.to_dict())])


def read_model(path):
    from .learner import model_from_dict

    rows = _parse_json_rows(read_artifact(path, "model"))
    if not rows:
        raise ParseError("empty model artifact", 2)
    return model_from_dict(rows[0][1])


def write_recommendations(path, ranked: list[tuple[str, float]]) -> None:
    lines = ["group_id,likelihood"] + [f"{gid},{repr(lik)}" for gid, lik in ranked]
    write_artifact(path, "recommendations", lines)


def read_recommendations(path) -> list[tuple[str, float]]:
    lines = read_artifact(path, "recommendations")
    if not lines or lines[0] != "group_id,likelihood":
        raise ParseError("missing recommendations header row", 2)
    out = []
    for lineno, line in enumerate(lines[1:], 3):
        if not line.strip():
            continue
        gid, _, lik = line.partition(",")
        try:
            out.append((gid, float(lik)))
        except ValueError:
            raise ParseError(f"bad likelihood: {lik!r}", lineno) from None
    return out


def write_report(path, report) -> None:
    meta = _dumps(
        {
            "setting": report.setting,
            "metric_mode": report.metric_mode,
            "config_digest": report.config_digest,
        }
    )
    lines = [meta, "name,precision,recall,fscore,flags"]
    for row in report.rows:
        flags = ";".join(row.flags)
        lines.append(
            f"{row.name},{repr(row.precision)},{repr(row.recall)},{repr(row.fscore)},{flags}"
        )
    avg_p, avg_r, avg_f = report.averages
    lines.append(f"Average,{repr(avg_p)},{repr(avg_r)},{repr(avg_f)},")
    write_artifact(path, "report", lines)


def write_table(path, kind: str, header: str, rows: list[tuple]) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    write_artifact(path, kind, lines)
