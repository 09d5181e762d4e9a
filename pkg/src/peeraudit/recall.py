"""Recall matrices: binary children x reports incidence data.

A recall matrix holds peer-report data for one classroom: one row per
child, one column per (anonymous) report, and a 1 wherever a child was
named in a report. Two on-disk formats are supported: a report-list text
file (one comma-separated report per line) and a 0/1 matrix CSV.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

# Input limits enforced by the classic DOS-era SCM tooling. Violations
# are warned about, never rejected.
SCM_MAX_REPORTS = 2000
SCM_MAX_CHILDREN = 400
SCM_MAX_REPORT_SIZE = 20


class DataError(ValueError):
    """Raised for malformed or unanalyzable peer-report data."""


@dataclass(frozen=True)
class RecallMatrix:
    """Immutable binary incidence matrix of children (rows) x reports (columns)."""

    children: tuple[str, ...]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=np.int8)
        if entries.ndim != 2:
            raise DataError("entries must be a 2-d matrix")
        if entries.shape[0] != len(self.children):
            raise DataError(
                f"{len(self.children)} children but {entries.shape[0]} matrix rows"
            )
        if not np.isin(entries, (0, 1)).all():
            raise DataError("matrix cells must be 0 or 1")
        if entries.shape[1] == 0:
            raise DataError("no reports")
        empty = np.flatnonzero(entries.sum(axis=0) == 0)
        if empty.size:
            raise DataError(f"report column(s) {empty.tolist()} name nobody")
        seen = set()
        for child in self.children:
            if not child:
                raise DataError("empty child id")
            if child in seen:
                raise DataError(f"duplicate child id {child!r}")
            seen.add(child)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n_children(self) -> int:
        return self.entries.shape[0]

    @property
    def n_reports(self) -> int:
        return self.entries.shape[1]

    def index_of(self, child: str) -> int:
        return self.children.index(child)


def parse_reports(text: str) -> RecallMatrix:
    """Parse report-list text: one report per line, members comma-separated.

    ``#`` starts a comment; blank (or comment-only) lines are skipped.
    Children are ordered by first appearance.
    """
    children: list[str] = []
    index: dict[str, int] = {}
    reports: list[list[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = [t.strip() for t in line.split(",")]
        if any(not t for t in tokens):
            raise DataError(f"line {lineno}: empty member token")
        seen_here = set()
        cols = []
        for tok in tokens:
            if tok in seen_here:
                raise DataError(f"line {lineno}: duplicate member {tok!r}")
            seen_here.add(tok)
            if tok not in index:
                index[tok] = len(children)
                children.append(tok)
            cols.append(index[tok])
        reports.append(cols)
    if not reports:
        raise DataError("no reports in input")
    entries = np.zeros((len(children), len(reports)), dtype=np.int8)
    for j, members in enumerate(reports):
        entries[members, j] = 1
    return RecallMatrix(tuple(children), entries)


def to_report_lines(rm: RecallMatrix) -> str:
    """Serialize to report-list text (inverse of :func:`parse_reports`)."""
    lines = []
    for j in range(rm.n_reports):
        members = [rm.children[i] for i in np.flatnonzero(rm.entries[:, j])]
        lines.append(",".join(members))
    return "\n".join(lines) + "\n"


def load_reports(path) -> RecallMatrix:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return parse_reports(text)


def parse_matrix_csv(text: str) -> RecallMatrix:
    """Parse matrix CSV: header row of report ids, first column child ids, cells "0"/"1"."""
    rows = [line for line in io.StringIO(text) if line.strip()]
    if len(rows) < 2:
        raise DataError("matrix CSV needs a header row and at least one child row")
    children = []
    cells = []
    for raw in rows[1:]:
        parts = [p.strip() for p in raw.rstrip("\n").split(",")]
        children.append(parts[0])
        for cell in parts[1:]:
            if cell not in ("0", "1"):
                raise DataError(f"matrix cell must be 0 or 1, got {cell!r}")
        cells.append([int(c) for c in parts[1:]])
    widths = {len(r) for r in cells}
    if len(widths) != 1:
        raise DataError("ragged matrix CSV")
    return RecallMatrix(tuple(children), np.array(cells, dtype=np.int8))


def load_matrix_csv(path) -> RecallMatrix:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return parse_matrix_csv(text)


def to_matrix_csv(rm: RecallMatrix) -> str:
    header = "child," + ",".join(f"r{j}" for j in range(rm.n_reports))
    lines = [header]
    for i, child in enumerate(rm.children):
        lines.append(child + "," + ",".join(str(int(v)) for v in rm.entries[i]))
    return "\n".join(lines) + "\n"


def validate_scm_limits(rm: RecallMatrix) -> list[str]:
    """Warnings for data exceeding the classic SCM 4.0 input limits."""
    warnings = []
    if rm.n_reports > SCM_MAX_REPORTS:
        warnings.append(
            f"{rm.n_reports} reports exceeds the SCM 4.0 limit of {SCM_MAX_REPORTS}"
        )
    if rm.n_children > SCM_MAX_CHILDREN:
        warnings.append(
            f"{rm.n_children} children exceeds the SCM 4.0 limit of {SCM_MAX_CHILDREN}"
        )
    oversized = int((rm.entries.sum(axis=0) > SCM_MAX_REPORT_SIZE).sum())
    if oversized:
        warnings.append(
            f"{oversized} report(s) name more than {SCM_MAX_REPORT_SIZE} children"
        )
    return warnings


def drop_never_named(rm: RecallMatrix) -> tuple[RecallMatrix, list[str]]:
    """Remove children whose row is all zero (never named in any report)."""
    row_sums = rm.entries.sum(axis=1)
    keep = row_sums > 0
    if not keep.any():
        raise DataError("every child has an all-zero row; nothing to analyze")
    dropped = [c for c, k in zip(rm.children, keep) if not k]
    if not dropped:
        return rm, []
    kept = tuple(c for c, k in zip(rm.children, keep) if k)
    return RecallMatrix(kept, rm.entries[keep]), dropped


def margins(rm: RecallMatrix) -> tuple[np.ndarray, np.ndarray]:
    """(row sums, column sums) as int64 vectors."""
    return (
        rm.entries.sum(axis=1, dtype=np.int64),
        rm.entries.sum(axis=0, dtype=np.int64),
    )
