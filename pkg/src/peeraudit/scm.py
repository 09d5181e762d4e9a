"""The classic five-step peer-group pipeline (SCM).

Steps: co-occurrence projection of the recall matrix, a single pass of
column correlations, thresholding into a binary peer network, group
identification, and the membership proportion statistic P.

Two published group-identification rules are implemented (a "connected to
at least half the group" rule and an incremental correlation-profile
rule), plus a connected-components baseline. The original software's own
extraction step is undocumented, so these rules can only approximate it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .recall import RecallMatrix

DEFAULT_THRESHOLD = 0.4


@dataclass(frozen=True)
class GroupAssignment:
    """Peer groups over a fixed child roster; membership may overlap."""

    children: tuple[str, ...]
    groups: tuple[frozenset[str], ...]

    def __post_init__(self):
        roster = set(self.children)
        for g in self.groups:
            if not g <= roster:
                raise ValueError(f"group {sorted(g)} contains unknown children")

    @property
    def membership(self) -> dict[str, list[int]]:
        """child -> indices of the groups it belongs to (possibly empty)."""
        out: dict[str, list[int]] = {c: [] for c in self.children}
        for gi, g in enumerate(self.groups):
            for c in g:
                out[c].append(gi)
        return out


def cooccurrence(rm: RecallMatrix) -> np.ndarray:
    """C = R R^T: shared-report counts per dyad; diagonal = total appearances."""
    r = rm.entries.astype(np.int64)
    return r @ r.T


def similarity(cooc: np.ndarray, exclude_pair_entries: bool = False) -> np.ndarray:
    """Pearson correlation between columns of the co-occurrence matrix.

    Applied once (not iterated to convergence as CONCOR would). Columns
    with zero variance get similarity 0 against everything, so a child
    with a constant profile can never acquire edges.

    With ``exclude_pair_entries`` the correlation for pair (i, j) drops
    rows i and j from both columns — a sensitivity-analysis variant; the
    default correlates whole columns, diagonal included.
    """
    c = np.asarray(cooc, dtype=np.float64)
    n = c.shape[0]
    if not exclude_pair_entries:
        sd = c.std(axis=0)
        ok = sd > 0
        s = np.zeros((n, n))
        if ok.any():
            sub = np.corrcoef(c[:, ok], rowvar=False)
            sub = np.atleast_2d(sub)
            idx = np.flatnonzero(ok)
            s[np.ix_(idx, idx)] = sub
        np.fill_diagonal(s, np.where(ok, 1.0, 0.0))
        return s
    s = np.zeros((n, n))
    for i in range(n):
        s[i, i] = 1.0 if c[:, i].std() > 0 else 0.0
        for j in range(i + 1, n):
            keep = np.ones(n, dtype=bool)
            keep[[i, j]] = False
            a, b = c[keep, i], c[keep, j]
            if a.std() == 0 or b.std() == 0 or keep.sum() < 2:
                continue
            s[i, j] = s[j, i] = float(np.corrcoef(a, b)[0, 1])
    return s


def threshold_network(sim: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Binary peer network: edge iff similarity >= threshold (inclusive)."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    net = (np.asarray(sim) >= threshold).astype(np.int8)
    np.fill_diagonal(net, 0)
    return net


def _as_index_groups(groups: list[set[int]]) -> list[set[int]]:
    """Deduplicate, preserving first-seen order."""
    seen = {}
    for g in groups:
        seen.setdefault(frozenset(g), None)
    return [set(g) for g in seen]


def _finish(children: tuple[str, ...], groups: list[set[int]]) -> GroupAssignment:
    named = tuple(
        frozenset(children[i] for i in g) for g in _as_index_groups(groups)
    )
    return GroupAssignment(children, named)


def identify_groups_fifty_percent(
    net: np.ndarray, children: tuple[str, ...]
) -> GroupAssignment:
    """Groups in which every member is tied to at least half the other members.

    Deterministic greedy construction: every edge seeds a candidate
    group (seeds visited in descending-degree order, ties by roster
    order); candidates join whenever they are connected to at least 50%
    of the current members; finally members that fall below the 50% rule
    are pruned (lowest within-group degree first). Groups of fewer than
    2 children are dropped, duplicates merged.
    """
    net = np.asarray(net, dtype=np.int64)
    n = net.shape[0]
    deg = net.sum(axis=1)
    order = sorted(range(n), key=lambda i: (-deg[i], i))
    groups: list[set[int]] = []
    for u in order:
        for v in sorted(np.flatnonzero(net[u]), key=lambda i: (-deg[i], i)):
            v = int(v)
            member = np.zeros(n, dtype=bool)
            member[[u, v]] = True
            links = net[:, u] + net[:, v]  # ties into the current group
            size = 2
            grown = True
            while grown:
                grown = False
                for cand in order:
                    if not member[cand] and 2 * links[cand] >= size:
                        member[cand] = True
                        links = links + net[:, cand]
                        size += 1
                        grown = True
            # prune members no longer tied to half the rest of the group
            while size >= 2:
                members = np.flatnonzero(member)
                violators = [m for m in members if 2 * links[m] < size - 1]
                if not violators:
                    break
                worst = min(violators, key=lambda m: (links[m], m))
                member[worst] = False
                links = links - net[:, worst]
                size -= 1
            if size >= 2:
                groups.append(set(np.flatnonzero(member).tolist()))
    return _finish(children, groups)


def identify_groups_profile(
    sim: np.ndarray,
    threshold: float,
    children: tuple[str, ...],
    salience: np.ndarray | None = None,
) -> GroupAssignment:
    """Incremental rule: grow a group by adding anyone whose similarity with
    some current member reaches the threshold.

    Founders are taken in descending-salience order (ties by roster
    order) among children not yet part of any finished group; children
    may still join multiple groups. Salience defaults to the thresholded
    degree when report counts are not supplied.
    """
    sim = np.asarray(sim)
    n = sim.shape[0]
    if salience is None:
        salience = (sim >= threshold).sum(axis=1)
    salience = np.asarray(salience)
    order = sorted(range(n), key=lambda i: (-salience[i], i))
    processed: set[int] = set()
    groups: list[set[int]] = []
    for founder in order:
        if founder in processed:
            continue
        group = {founder}
        grown = True
        while grown:
            grown = False
            for cand in order:
                if cand in group:
                    continue
                if any(sim[cand, member] >= threshold for member in group):
                    group.add(cand)
                    grown = True
        processed |= group
        if len(group) >= 2:
            groups.append(group)
    return _finish(children, groups)


def identify_groups_components(
    net: np.ndarray, children: tuple[str, ...]
) -> GroupAssignment:
    """Baseline rule: connected components of size >= 2."""
    net = np.asarray(net)
    n = net.shape[0]
    unseen = set(range(n))
    groups = []
    while unseen:
        start = min(unseen)
        comp = {start}
        frontier = [start]
        while frontier:
            v = frontier.pop()
            for w in np.flatnonzero(net[v]):
                w = int(w)
                if w not in comp:
                    comp.add(w)
                    frontier.append(w)
        unseen -= comp
        if len(comp) >= 2:
            groups.append(comp)
    return _finish(children, groups)


def membership_statistic(
    assignment: GroupAssignment, n_children: int, min_group_size: int = 3
) -> float:
    """P: proportion of children belonging to at least one group of
    ``min_group_size`` or more members."""
    if n_children < 1:
        raise ValueError("n_children must be >= 1")
    counted = set()
    for g in assignment.groups:
        if len(g) >= min_group_size:
            counted |= g
    return len(counted) / n_children


def scm_groups(
    rm: RecallMatrix,
    threshold: float = DEFAULT_THRESHOLD,
    rule: str = "fifty",
    exclude_pair_entries: bool = False,
) -> tuple[np.ndarray, GroupAssignment]:
    """Run the full pipeline; returns (peer network, group assignment)."""
    cooc = cooccurrence(rm)
    sim = similarity(cooc, exclude_pair_entries=exclude_pair_entries)
    net = threshold_network(sim, threshold)
    if rule == "fifty":
        assignment = identify_groups_fifty_percent(net, rm.children)
    elif rule == "profile":
        assignment = identify_groups_profile(
            sim, threshold, rm.children, salience=np.diagonal(cooc)
        )
    elif rule == "components":
        assignment = identify_groups_components(net, rm.children)
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return net, assignment
