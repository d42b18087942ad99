"""Space-optimized index: every vertex stored once, lower levels replayed.

A tree node at level k+1 sits inside a single node at level k: the node that
holds its own vertices at level k, all of which keep the node's threshold
(raising the threshold of one would put it in a smaller level-(k+1) community). Chaining nodes this way
across levels gives *lineages*. A lineage keeps one threshold for its whole
life; it is born at some level ``k_hi`` and lives down to level 1 unless it
is absorbed at ``k_lo`` by a lineage it merges with, after which it hangs
under that absorber as a virtual child holding no new vertices.

Per lineage the index keeps its parent lineage per level range and a list of
(vertex, level) entries. A vertex gets one stored entry at its core number
(the level it first appears at) and a boundary entry at every level where it
leaves the lineage its previous entry resolves to. The community of q at
level k is the union, over the lineage subtree at level k, of every entry
with level at least k.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..metapath import MetaPath
from ..online import NO_INDEX_ENTRY, CommunityResult, empty_result
from . import kernels
from .ihsc import IHSC, OIHSC, IndexError_, IndexForest, MetaPathIndex


@dataclass
class LineageIndex:
    """Compressed index for one meta-path.

    ``pieces`` rows are (lineage, lo, hi, parent lineage or -1), grouped by
    lineage. Entries of lineage L are ``ent_vert/ent_level[ent_ptr[L]:ent_ptr[L+1]]``,
    ordered by level descending then vertex id. ``kmap_ids``/``kmap_k`` give
    each anchor vertex's storage level (0 when it lies in no 1-core).
    """

    metapath: MetaPath
    k_max: int
    theta: np.ndarray
    k_hi: np.ndarray
    k_lo: np.ndarray
    absorber: np.ndarray
    pieces: np.ndarray
    ent_ptr: np.ndarray
    ent_vert: np.ndarray
    ent_level: np.ndarray
    kmap_ids: np.ndarray
    kmap_k: np.ndarray

    @property
    def lineage_count(self) -> int:
        return int(self.theta.size)

    @property
    def virtual_count(self) -> int:
        return int(np.count_nonzero(self.absorber >= 0))

    @property
    def stored_vertex_count(self) -> int:
        return int(np.count_nonzero(self.kmap_k > 0))

    @property
    def boundary_count(self) -> int:
        return int(self.ent_vert.size) - self.stored_vertex_count

    def storage_level(self, v: int) -> int | None:
        i = int(np.searchsorted(self.kmap_ids, v))
        if i < self.kmap_ids.size and self.kmap_ids[i] == v:
            return int(self.kmap_k[i])
        return None

    # -- structures derived at load time -------------------------------------

    @cached_property
    def _children(self) -> tuple[np.ndarray, np.ndarray]:
        """Pieces with a parent, grouped by parent: (row pointer, piece rows)."""
        par = self.pieces[:, 3]
        rows = np.flatnonzero(par >= 0)
        rows = rows[np.argsort(par[rows], kind="stable")]
        ptr = np.zeros(self.lineage_count + 1, np.int64)
        np.add.at(ptr, par[rows] + 1, 1)
        return np.cumsum(ptr), rows

    @cached_property
    def _by_vertex(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Entries sorted by (vertex, level): (vertex, level, lineage)."""
        lin = np.repeat(np.arange(self.lineage_count, dtype=np.int64), np.diff(self.ent_ptr))
        order = np.lexsort((self.ent_level, self.ent_vert))
        return self.ent_vert[order], self.ent_level[order], lin[order]

    def resolve(self, lin: int, k: int) -> int:
        while k < self.k_lo[lin]:
            lin = int(self.absorber[lin])
        return lin

    def lineage_of(self, v: int, k: int) -> int:
        """Lineage holding v at level k, or -1 when v is not in the k-core."""
        verts, levels, lins = self._by_vertex
        lo = int(np.searchsorted(verts, v, "left"))
        hi = int(np.searchsorted(verts, v, "right"))
        if lo == hi or levels[hi - 1] < k:
            return -1
        j = lo + int(np.searchsorted(levels[lo:hi], k, "left"))
        return self.resolve(int(lins[j]), k)

    def subtree(self, lin: int, k: int) -> list[int]:
        ptr, rows = self._children
        pieces = self.pieces
        out, stack = [], [lin]
        while stack:
            x = stack.pop()
            out.append(x)
            for r in rows[ptr[x] : ptr[x + 1]].tolist():
                if pieces[r, 1] <= k <= pieces[r, 2]:
                    stack.append(int(pieces[r, 0]))
        return out

    def members(self, lin: int, k: int) -> np.ndarray:
        ptr, rows = self._children
        p = self._piece_cols
        return kernels.lineage_members(
            lin, k, ptr, rows, p[0], p[1], p[2], self.ent_ptr, self.ent_vert, self.ent_level, self._below
        )

    @cached_property
    def _below(self) -> np.ndarray:
        """Per entry (lineage order): level of the same vertex's next lower entry, or 0."""
        order = np.lexsort((self.ent_level, self.ent_vert))
        v, lvl = self.ent_vert[order], self.ent_level[order]
        below = np.zeros(v.size, np.int64)
        same = v[1:] == v[:-1]
        below[1:][same] = lvl[:-1][same]
        out = np.empty_like(below)
        out[order] = below
        return out

    @cached_property
    def _piece_cols(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(np.ascontiguousarray(self.pieces[:, i]) for i in range(3))

    def prepare(self) -> "LineageIndex":
        """Build the lookup structures up front instead of on the first query."""
        for name in ("_children", "_by_vertex", "_piece_cols", "_below"):
            getattr(self, name)
        return self

    def live_maximal(self, k: int, w: float) -> list[int]:
        """Live lineages at level k with threshold >= w whose parent falls below w."""
        p = self.pieces
        lin = p[:, 0]
        live = (p[:, 1] <= k) & (k <= p[:, 2]) & (self.k_lo[lin] <= k)
        rows = p[live]
        th = self.theta
        ok = th[rows[:, 0]] >= w
        par = rows[:, 3]
        top = np.ones(rows.shape[0], bool)
        top[par >= 0] = th[par[par >= 0]] < w
        return sorted(rows[ok & top, 0].tolist())


def _level_arrays(entry: MetaPathIndex, ids: np.ndarray):
    """Per level: (local vertex index, node id) of every stored vertex."""
    out = []
    for lv in entry.levels:
        node = np.repeat(np.arange(lv.node_count, dtype=np.int64), lv.own)
        out.append((np.searchsorted(ids, lv.verts), node))
    return out


def _find_all(alias: np.ndarray, x: np.ndarray) -> np.ndarray:
    while True:
        nxt = alias[x]
        if np.array_equal(nxt, x):
            return x
        alias[x] = alias[nxt]
        x = nxt


def compress_metapath(entry: MetaPathIndex) -> LineageIndex:
    ids = np.array(sorted(entry.core), dtype=np.int64)
    core = np.array([entry.core[v] for v in ids.tolist()], dtype=np.int64)
    n, kmax = ids.size, entry.k_max
    per_level = _level_arrays(entry, ids)

    cap = sum(lv.node_count for lv in entry.levels) + 1
    theta = np.empty(cap)
    k_hi = np.zeros(cap, np.int64)
    k_lo = np.ones(cap, np.int64)
    absorber = np.full(cap, -1, np.int64)
    alias = np.arange(cap, dtype=np.int64)  # lineage -> lineage that absorbed it
    cur_par = np.full(cap, -2, np.int64)
    cur_top = np.zeros(cap, np.int64)
    pieces: list[tuple[int, int, int, int]] = []
    ent_lin: list[np.ndarray] = []
    ent_v: list[np.ndarray] = []
    ent_k: list[np.ndarray] = []
    count = 0

    prev_lin = np.full(n, -1, np.int64)  # lineage of each vertex's latest entry
    lin_above = np.zeros(0, np.int64)
    node_here = np.full(n, -1, np.int64)
    for k in range(kmax, 0, -1):
        lv = entry.level(k)
        local, node = per_level[k - 1]
        node_here[:] = -1
        node_here[local] = node
        nn = lv.node_count
        lin = np.full(nn, -1, np.int64)
        if k < kmax:
            up_lv = entry.level(k + 1)
            u_local, u_node = per_level[k]
            # an own vertex whose threshold does not move links the two nodes
            target = node_here[u_local]
            same = lv.theta[target] == up_lv.theta[u_node]
            first = np.unique(u_node[same], return_index=True)
            if first[0].size != up_lv.node_count:
                raise IndexError_(f"{entry.metapath}: level {k + 1} has a node with no anchor at level {k}")
            up = np.empty(up_lv.node_count, np.int64)
            up[first[0]] = target[same][first[1]]
            cont = np.full(nn, np.iinfo(np.int64).max, np.int64)
            np.minimum.at(cont, up, lin_above)
            has = cont < np.iinfo(np.int64).max
            lin[has] = cont[has]
            gone = lin_above != cont[up]
            for a, host in zip(lin_above[gone].tolist(), cont[up[gone]].tolist()):
                pieces.append((a, k + 1, int(cur_top[a]), int(cur_par[a])))
                pieces.append((a, 1, k, host))
                k_lo[a] = k + 1
                absorber[a] = host
                alias[a] = host
        born = np.flatnonzero(lin < 0)
        lin[born] = np.arange(count, count + born.size)
        count += born.size
        theta[lin] = lv.theta
        k_hi[lin[born]] = k
        par = np.where(lv.parent >= 0, lin[np.maximum(lv.parent, 0)], -1)
        changed = np.flatnonzero(cur_par[lin] != par)
        for i in changed.tolist():
            x = int(lin[i])
            if cur_par[x] != -2:
                pieces.append((x, k + 1, int(cur_top[x]), int(cur_par[x])))
            cur_par[x] = par[i]
            cur_top[x] = k
        # entries: stored at the core level, boundary when the lineage moves
        actual = lin[node]
        fresh = core[local] == k
        expected = np.full(local.size, -1, np.int64)
        old = ~fresh
        expected[old] = _find_all(alias, prev_lin[local[old]])
        moved = fresh | (expected != actual)
        ent_lin.append(actual[moved])
        ent_v.append(ids[local[moved]])
        ent_k.append(np.full(int(moved.sum()), k, np.int64))
        prev_lin[local] = actual
        lin_above = lin
    for x in lin_above.tolist():
        pieces.append((x, 1, int(cur_top[x]), int(cur_par[x])))

    pc = np.array(pieces, dtype=np.int64).reshape(-1, 4)
    pc = pc[np.lexsort((-pc[:, 2], pc[:, 0]))]
    el = np.concatenate(ent_lin) if ent_lin else np.zeros(0, np.int64)
    ev = np.concatenate(ent_v) if ent_v else np.zeros(0, np.int64)
    ek = np.concatenate(ent_k) if ent_k else np.zeros(0, np.int64)
    order = np.lexsort((ev, -ek, el))
    ptr = np.zeros(count + 1, np.int64)
    np.add.at(ptr, el + 1, 1)
    return LineageIndex(
        metapath=entry.metapath,
        k_max=kmax,
        theta=theta[:count].copy(),
        k_hi=k_hi[:count].copy(),
        k_lo=k_lo[:count].copy(),
        absorber=absorber[:count].copy(),
        pieces=pc,
        ent_ptr=np.cumsum(ptr),
        ent_vert=ev[order],
        ent_level=ek[order],
        kmap_ids=ids,
        kmap_k=core,
    )


def build_oihsc(idx: IndexForest) -> IndexForest:
    if idx.kind != IHSC:
        raise IndexError_(f"expected an IHSC index, got {idx.kind}")
    entries = {key: compress_metapath(e).prepare() for key, e in idx.entries.items()}
    return IndexForest(OIHSC, entries, idx.fingerprint)


def query_oihsc(idx: IndexForest, p: MetaPath | str, k: int, q: int) -> CommunityResult:
    if idx.kind != OIHSC:
        raise IndexError_(f"expected an OIHSC index, got {idx.kind}")
    entry: LineageIndex = idx.entry(p)
    mp = str(entry.metapath)
    khat = entry.storage_level(q)
    if khat is None:
        return empty_result(q, k, mp, "oihsc", NO_INDEX_ENTRY)
    if k < 1 or khat < k:
        return empty_result(q, k, mp, "oihsc")
    lin = entry.lineage_of(q, k)
    return CommunityResult(entry.members(lin, k), float(entry.theta[lin]), q, k, mp, "oihsc")


def query_oihsc_threshold(idx: IndexForest, p: MetaPath | str, k: int, w: float) -> list[CommunityResult]:
    if idx.kind != OIHSC:
        raise IndexError_(f"expected an OIHSC index, got {idx.kind}")
    entry: LineageIndex = idx.entry(p)
    if not 1 <= k <= entry.k_max:
        return []
    mp = str(entry.metapath)
    return [
        CommunityResult(entry.members(x, k), float(entry.theta[x]), None, k, mp, "oihsc")
        for x in entry.live_maximal(k, w)
    ]


def storage_duplicates(entry: LineageIndex) -> list[int]:
    """Vertices with other than exactly one stored entry (should be empty)."""
    verts, levels, _ = entry._by_vertex
    want = dict(zip(entry.kmap_ids.tolist(), entry.kmap_k.tolist()))
    stored: dict[int, int] = {}
    for v, lvl in zip(verts.tolist(), levels.tolist()):
        if lvl == want.get(v):
            stored[v] = stored.get(v, 0) + 1
    bad = [v for v, c in stored.items() if c != 1]
    bad += [v for v, kk in want.items() if kk > 0 and v not in stored]
    return sorted(bad)
