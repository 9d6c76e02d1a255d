"""DataTables: the search plan compiled from guide-level evaluation.

A DataTable belongs to one JP.  Each record names one guide node per
slot (branch end or nested child JP) plus the guide node and depth of
the JP occurrence that dominates them all; at evaluation time the
record means "merge these extent lists on equality of their
jp_level-prefixes".  A DTSchema chains the tables deepest-JP-first.

A record (ends, level, g) is emitted only when all three hold:

(a) g's root path matches the twig's root-to-JP pattern;
(b) g is a guide-ancestor-or-self of every end;
(c) for each end, the part of its root path below depth(g) matches
    that slot's steps below the JP.

Without (c) a branch end reachable through some other embedding of the
JP step could pair with a witness it does not actually sit under,
producing tuples the twig never matches; prefix merging at the data
level never re-checks tags, so the plan must be exact here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product
from typing import Sequence

from .path_guide import PathGuide
from .twig import (
    Decomposition,
    JPDescriptor,
    Step,
    jp_order,
    steps_match,
    steps_to_str,
)


@dataclass(frozen=True)
class DTRecord:
    ends: tuple[int, ...]  # one GuideId per slot
    jp_level: int  # document depth of the JP occurrence
    jp_guide: int  # GuideId of the matched JP guide node


@dataclass(frozen=True)
class SlotSpec:
    kind: str  # "leaf" | "nested"
    steps: tuple[Step, ...]  # steps below the JP down to the slot target
    leaf_id: int | None = None  # branch id for leaf slots
    child_table: int | None = None  # DTSchema table index for nested slots


@dataclass
class DataTable:
    jp: JPDescriptor
    slots: tuple[SlotSpec, ...]
    records: list[DTRecord]

    @property
    def slot_kinds(self) -> tuple[str, ...]:
        return tuple(s.kind for s in self.slots)

    @property
    def arity(self) -> int:
        return len(self.slots)


@dataclass
class DTSchema:
    tables: list[DataTable]  # deepest JP first; last table is the top JP

    @property
    def is_empty(self) -> bool:
        return any(not t.records for t in self.tables)

    def linkage(self) -> dict[tuple[int, int], int]:
        """(table index, slot index) -> index of the consumed table."""
        out: dict[tuple[int, int], int] = {}
        for ti, table in enumerate(self.tables):
            for si, slot in enumerate(table.slots):
                if slot.kind == "nested":
                    out[(ti, si)] = slot.child_table
        return out


def _admissible_depths(pg: PathGuide, gid: int, tail: tuple[Step, ...]) -> set[int]:
    """JP depths d such that gid's path below d matches the tail steps."""
    path = pg.path_tags(gid)
    return {d for d in range(len(path)) if steps_match(tail, path[d + 1 :])}


def build_dt(
    pg: PathGuide,
    branch_results: Sequence[Sequence[int]],
    jp: JPDescriptor,
) -> DataTable:
    """Cross branch end candidates under every matching JP guide node.

    branch_results[i] holds the candidate GuideIds for slot i, in the
    order of jp.groups.  Candidates are filtered per JP guide node
    before the cross product, so disjoint subtrees never multiply.
    """
    if len(branch_results) != len(jp.groups):
        raise ValueError("one candidate list per JP child group required")
    # group kind "jp" becomes slot kind "nested": the slot consumes a
    # table, not the twig node itself
    slots = tuple(
        SlotSpec(
            kind="leaf" if g.kind == "leaf" else "nested",
            steps=g.steps,
            leaf_id=g.leaf_id,
        )
        for g in jp.groups
    )
    jp_set = set(pg.eval_single_branch(jp.trunk_steps))
    # Group ends by the JP guide node they fit under instead of testing
    # every (candidate, end) pair; an end fits g at exactly one depth,
    # so no duplicates can arise.
    m = len(jp.groups)
    fits: dict[int, list[list[int]]] = {}
    for i, (group, ends) in enumerate(zip(jp.groups, branch_results)):
        for e in ends:
            anc = pg.nodes[e].ancestors
            for d in _admissible_depths(pg, e, group.steps):
                g = anc[d]
                if g in jp_set:
                    fits.setdefault(g, [[] for _ in range(m)])[i].append(e)
    records: list[DTRecord] = []
    for g in sorted(fits):
        lists = fits[g]
        if all(lists):
            level = pg.nodes[g].depth
            for combo in product(*lists):
                records.append(DTRecord(tuple(combo), level, g))
    return DataTable(jp, slots, records)


def build_dt_schema(pg: PathGuide, d: Decomposition) -> DTSchema:
    """One DataTable per JP, deepest first, nested slots linked.

    A nested slot's candidates are the distinct jp_guide values of the
    child JP's table, which is always built first because a child JP
    sits strictly deeper in the twig.
    """
    if not d.jps:
        raise ValueError("zero-JP query: no DT required")
    tables: list[DataTable] = []
    table_of: dict[int, int] = {}  # id(twig node) -> table index
    for jp in jp_order(d):
        results: list[Sequence[int]] = []
        links: list[int | None] = []
        for group in jp.groups:
            if group.kind == "leaf":
                results.append(pg.eval_single_branch(d.branches[group.leaf_id]))
                links.append(None)
            else:
                child_idx = table_of[id(group.jp_node)]
                results.append(sorted({r.jp_guide for r in tables[child_idx].records}))
                links.append(child_idx)
        table = build_dt(pg, results, jp)
        table.slots = tuple(
            replace(slot, child_table=link) for slot, link in zip(table.slots, links)
        )
        table_of[id(jp.node)] = len(tables)
        tables.append(table)
    return DTSchema(tables)


def explain(schema: DTSchema, pg: PathGuide, max_records: int = 50) -> str:
    """Human-readable plan: tables, slots, records, linkage."""

    def path_str(gid: int) -> str:
        return "/".join(pg.path_tags(gid))

    lines: list[str] = []
    for ti, table in enumerate(schema.tables):
        jp = table.jp
        lines.append(
            f"DT {ti + 1} @ {jp.node.test} "
            f"(twig depth {jp.depth}, pattern {steps_to_str(jp.trunk_steps)})"
        )
        for si, slot in enumerate(table.slots):
            if slot.kind == "leaf":
                target = f"branch {slot.leaf_id}"
            else:
                target = f"DT {slot.child_table + 1}"
            lines.append(f"  slot {si}: {slot.kind} -> {target}, tail {steps_to_str(slot.steps)}")
        lines.append(f"  records: {len(table.records)}")
        for rec in table.records[:max_records]:
            ends = ", ".join(path_str(e) for e in rec.ends)
            lines.append(f"    ({ends}) level={rec.jp_level} jp={path_str(rec.jp_guide)}")
        hidden = len(table.records) - max_records
        if hidden > 0:
            lines.append(f"    ... {hidden} more")
    return "\n".join(lines)
