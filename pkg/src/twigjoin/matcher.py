"""Execution of the DTSchema: prefix merge joins over extent lists.

Tables run deepest-JP-first.  Each DTRecord turns into one multiway
merge: leaf slots contribute their guide node's extent, nested slots
contribute the distinct JP-prefixes the child table produced under the
recorded child guide node.  Matched rows fan out into (leaf label,
JP witness) entries, grouped by (jp_guide, prefix) so the next table
up can consume them as sorted prefix streams.

Deduplication is per (jp_guide, prefix) group, keyed by the leaf-label
assignment.  Deduplicating across groups would be wrong: the same leaf
assignment under two different witnesses must stay visible to a parent
record that references only one of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence, Union

import numpy as np

from .dewey import DeweyLabel
from .dt import DTSchema, build_dt_schema
from .kernels import Backend, get_backend
from .metrics import Metrics
from .path_guide import ExtentList, PathGuide
from .twig import TwigPattern, parse, split


@dataclass(frozen=True)
class MatchTuple:
    """One query answer: a data label per twig leaf, in leaf_id order.

    jp_labels carries one witness label per schema table (deepest JP
    first) for the embedding that produced the tuple; empty for
    zero-JP queries.
    """

    leaf_labels: tuple[DeweyLabel, ...]
    jp_labels: tuple[DeweyLabel, ...] = ()


@dataclass
class ResultSet:
    matches: list[MatchTuple]  # sorted by leaf_labels, duplicate-free
    top_jp_labels: list[DeweyLabel]  # distinct top-JP witnesses, sorted

    def __len__(self) -> int:
        return len(self.matches)

    def lines(self) -> list[str]:
        return [
            "\t".join(str(lab) for lab in mt.leaf_labels) for mt in self.matches
        ]


@dataclass
class NodeList:
    """A sorted label list the merge kernels can read.

    Extent-backed lists are metered (bytes and reads attributed to
    their guide node); plain label lists count reads only.  Rows are
    zero-padded to a common width, which preserves label order because
    real components are >= 1.
    """

    rows: np.ndarray
    labels: list[DeweyLabel] | None = None
    extent: ExtentList | None = None

    def __len__(self) -> int:
        return len(self.rows)

    def label_at(self, i: int) -> DeweyLabel:
        if self.labels is not None:
            return self.labels[i]
        return DeweyLabel(tuple(int(c) for c in self.rows[i]))


def as_node_list(src: ExtentList | NodeList | Sequence[DeweyLabel]) -> NodeList:
    if isinstance(src, NodeList):
        return src
    if isinstance(src, ExtentList):
        return NodeList(src.rows, None, src)
    labels = list(src)
    for prev, cur in zip(labels, labels[1:]):
        if not prev < cur:
            raise ValueError("label list must be strictly sorted")
    width = max((lab.level for lab in labels), default=0)
    rows = np.zeros((len(labels), width), dtype=np.int64)
    for i, lab in enumerate(labels):
        rows[i, : lab.level] = lab.components
    return NodeList(rows, labels, None)


@dataclass
class Cursor:
    list: NodeList
    position: int = 0


def _resolve_backend(backend: Backend | str | None) -> Backend:
    if isinstance(backend, Backend):
        return backend
    return get_backend(backend)


def jump(
    cursor: Cursor,
    level: int,
    bound: DeweyLabel | Sequence[int],
    metrics: Metrics | None = None,
    backend: Backend | str | None = None,
) -> Cursor:
    """Smallest position past cursor whose level-prefix exceeds bound.

    Galloping plus binary search; counts one jump and every probed row
    as a read.
    """
    comps = bound.components if isinstance(bound, DeweyLabel) else tuple(bound)
    if len(comps) != level:
        raise ValueError(f"bound must have exactly {level} components")
    rows = cursor.list.rows
    if level > rows.shape[1]:
        raise ValueError("level exceeds the list's label level")
    be = _resolve_backend(backend)
    touched = np.zeros(len(rows), dtype=np.uint8)
    bound_arr = np.asarray(comps, dtype=np.int64)
    pos, reads = be.jump_scan(rows, cursor.position, len(rows), bound_arr, level, touched)
    if metrics is not None:
        metrics.jumps += 1
        metrics.count_reads(int(reads))
        ext = cursor.list.extent
        if ext is not None:
            metrics.touch_mask(ext.gid, touched.astype(bool), ext.byte_lens)
    return Cursor(cursor.list, int(pos))


def _run_merge(
    arrays: list[np.ndarray],
    plen: int,
    use_jump: bool,
    backend: Backend,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int, int]:
    """Stack the input lists and run the merge kernel.

    Returns (local_indices, touched, reads, offsets, comps, jumps);
    local_indices has one row per output tuple, one column per list,
    holding positions local to that list.
    """
    k = len(arrays)
    width = max([plen] + [a.shape[1] for a in arrays])
    total = sum(len(a) for a in arrays)
    stacked = np.zeros((total, width), dtype=np.int64)
    offsets = np.empty(k + 1, dtype=np.int64)
    pos = 0
    for j, a in enumerate(arrays):
        offsets[j] = pos
        if len(a):
            stacked[pos : pos + len(a), : a.shape[1]] = a
        pos += len(a)
    offsets[k] = pos
    touched = np.zeros(max(total, 1), dtype=np.uint8)
    reads = np.zeros(k, dtype=np.int64)
    out, count, comps, jumps = backend.multiway_merge(
        stacked, offsets, plen, use_jump, touched, reads
    )
    local = out[:count] - offsets[:k][None, :]
    return local, touched, reads, offsets, int(comps), int(jumps)


_ListLike = Union[ExtentList, NodeList, Sequence[DeweyLabel]]


def _eligible(rows: np.ndarray, level: int) -> np.ndarray:
    """Positions whose label is at least `level` deep.

    A shorter label has no prefix at that level, and its zero padding
    must not be allowed to pose as one.
    """
    if level == 0:
        return np.arange(len(rows), dtype=np.int64)
    if rows.shape[1] < level:
        return np.empty(0, dtype=np.int64)
    return np.flatnonzero((rows[:, :level] > 0).all(axis=1))


def match_multiway(
    lists: Sequence[_ListLike],
    level: int,
    metrics: Metrics | None = None,
    use_jump: bool = True,
    backend: Backend | str | None = None,
) -> list[tuple[DeweyLabel, ...]]:
    """All tuples (one label per list) with pairwise-equal level-prefixes.

    Sorted by first component (in fact lexicographically), no
    duplicates.
    """
    be = _resolve_backend(backend)
    nls = [as_node_list(src) for src in lists]
    keeps = [_eligible(nl.rows, level) for nl in nls]
    arrays = [nl.rows[keep] for nl, keep in zip(nls, keeps)]
    local, touched, reads, offsets, comps, jumps = _run_merge(arrays, level, use_jump, be)
    if metrics is not None:
        metrics.prefix_comparisons += comps
        metrics.jumps += jumps
        for j, nl in enumerate(nls):
            metrics.count_reads(int(reads[j]))
            if nl.extent is not None:
                mask = np.zeros(len(nl.rows), dtype=bool)
                kept_touched = touched[offsets[j] : offsets[j + 1]].astype(bool)
                mask[keeps[j][kept_touched]] = True
                metrics.touch_mask(nl.extent.gid, mask, nl.extent.byte_lens)
    out: list[tuple[DeweyLabel, ...]] = []
    for row in local:
        out.append(
            tuple(nls[j].label_at(int(keeps[j][row[j]])) for j in range(len(nls)))
        )
    return out


def match_pair(
    a: _ListLike,
    b: _ListLike,
    level: int,
    metrics: Metrics | None = None,
    use_jump: bool = True,
    backend: Backend | str | None = None,
) -> list[tuple[DeweyLabel, DeweyLabel]]:
    """Two-list case of match_multiway."""
    return [
        (t[0], t[1])
        for t in match_multiway([a, b], level, metrics, use_jump, backend)
    ]


@dataclass
class _Entry:
    leaves: dict[int, tuple[int, ...]]  # leaf_id -> label components
    jps: dict[int, tuple[int, ...]]  # table index -> witness components


@dataclass
class _Stream:
    prefixes: np.ndarray  # (n, level) distinct witness prefixes, sorted
    entries: list[list[_Entry]]  # per prefix, the entries beneath it


def match_proc(
    schema: DTSchema,
    pg: PathGuide,
    metrics: Metrics | None = None,
    use_jump: bool = True,
    backend: Backend | str | None = None,
) -> tuple[list[MatchTuple], list[DeweyLabel]]:
    """Evaluate the schema; returns (match tuples, top-JP witnesses).

    Tuples are deduplicated by leaf assignment and sorted; witnesses
    are the distinct JP prefixes of the top table that joined at least
    one tuple.
    """
    be = _resolve_backend(backend)
    if schema.is_empty:
        return [], []
    outs: list[dict[int, _Stream]] = []
    groups: dict[tuple[int, tuple[int, ...]], dict] = {}
    for ti, table in enumerate(schema.tables):
        groups = {}
        for rec in table.records:
            arrays: list[np.ndarray] = []
            metas: list[ExtentList | None] = []
            payloads: list[list[list[_Entry]] | None] = []
            skip = False
            for si, slot in enumerate(table.slots):
                if slot.kind == "leaf":
                    ext = pg.read_extent(rec.ends[si])
                    arrays.append(ext.rows)
                    metas.append(ext)
                    payloads.append(None)
                else:
                    stream = outs[slot.child_table].get(rec.ends[si])
                    if stream is None:
                        skip = True
                        break
                    arrays.append(stream.prefixes)
                    metas.append(None)
                    payloads.append(stream.entries)
            if skip:
                continue
            local, touched, reads, offsets, comps, jumps = _run_merge(
                arrays, rec.jp_level, use_jump, be
            )
            if metrics is not None:
                metrics.prefix_comparisons += comps
                metrics.jumps += jumps
                for j, ext in enumerate(metas):
                    if ext is None:
                        continue
                    metrics.count_reads(int(reads[j]))
                    mask = touched[offsets[j] : offsets[j + 1]].astype(bool)
                    metrics.touch_mask(ext.gid, mask, ext.byte_lens)
            plen = rec.jp_level
            for row in local:
                prefix = tuple(int(c) for c in arrays[0][row[0], :plen])
                leaf_part: list[tuple[int, tuple[int, ...]]] = []
                nested: list[list[_Entry]] = []
                for si, slot in enumerate(table.slots):
                    pay = payloads[si]
                    if pay is None:
                        label = tuple(int(c) for c in arrays[si][row[si]])
                        leaf_part.append((slot.leaf_id, label))
                    else:
                        nested.append(pay[row[si]])
                bucket = groups.setdefault((rec.jp_guide, prefix), {})
                for combo in product(*nested):
                    leaves = dict(leaf_part)
                    jps = {ti: prefix}
                    for entry in combo:
                        leaves.update(entry.leaves)
                        jps.update(entry.jps)
                    key = tuple(sorted(leaves.items()))
                    if key not in bucket:
                        bucket[key] = _Entry(leaves, jps)
        by_guide: dict[int, list[tuple[tuple[int, ...], list[_Entry]]]] = {}
        for (g, prefix), bucket in groups.items():
            by_guide.setdefault(g, []).append((prefix, list(bucket.values())))
        streams: dict[int, _Stream] = {}
        for g, items in by_guide.items():
            items.sort(key=lambda it: it[0])
            level = pg.nodes[g].depth
            prefixes = np.array([p for p, _ in items], dtype=np.int64).reshape(
                len(items), level
            )
            streams[g] = _Stream(prefixes, [ents for _, ents in items])
        outs.append(streams)

    n_tables = len(schema.tables)
    final: dict[tuple, MatchTuple] = {}
    witnesses: set[tuple[int, ...]] = set()
    for (g, prefix), bucket in groups.items():
        witnesses.add(prefix)
        for key, entry in bucket.items():
            if key in final:
                continue
            leaf_labels = tuple(
                DeweyLabel(entry.leaves[i]) for i in sorted(entry.leaves)
            )
            jp_labels = tuple(
                DeweyLabel(entry.jps[t]) for t in range(n_tables)
            )
            final[key] = MatchTuple(leaf_labels, jp_labels)
    matches = sorted(final.values(), key=lambda mt: mt.leaf_labels)
    top = sorted(DeweyLabel(w) for w in witnesses)
    return matches, top


def evaluate(
    pg: PathGuide,
    query: str | TwigPattern,
    *,
    use_jump: bool = True,
    backend: Backend | str | None = None,
    metrics: Metrics | None = None,
) -> tuple[ResultSet, Metrics]:
    """Full pipeline: parse, split, plan on the guide, merge extents.

    Zero-JP queries skip planning entirely and stream the matched
    extents; an empty plan short-circuits before any extent is
    touched.
    """
    if metrics is None:
        metrics = Metrics()
    twig = parse(query) if isinstance(query, str) else query
    d = split(twig)
    with metrics.timed():
        if not d.jps:
            matched = pg.eval_single_branch(d.branches[0])
            matches: list[MatchTuple] = []
            for g in matched:
                ext = pg.read_extent(g)
                metrics.read_full_extent(g, ext.byte_lens)
                for row in ext.rows:
                    matches.append(
                        MatchTuple((DeweyLabel(tuple(int(c) for c in row)),), ())
                    )
            matches.sort(key=lambda mt: mt.leaf_labels)
            return ResultSet(matches, []), metrics
        schema = build_dt_schema(pg, d)
        if schema.is_empty:
            return ResultSet([], []), metrics
        matches, top = match_proc(
            schema, pg, metrics=metrics, use_jump=use_jump, backend=backend
        )
        return ResultSet(matches, top), metrics
