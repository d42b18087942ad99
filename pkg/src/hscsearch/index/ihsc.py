"""Per-meta-path, per-k community trees (the uncompressed index).

Each level k stores a forest whose nodes are peel batches: the vertices that
leave the k-core together when significance rises past the node's threshold.
A node plus its descendants is exactly the community of any vertex stored in
the node. Levels are laid out in depth-first preorder so every subtree is one
contiguous slice of the level's vertex array.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..hin import HIN
from ..metapath import MetaPath, homo_csr
from ..online import NO_INDEX_ENTRY, CommunityResult, empty_result
from . import kernels

IHSC = "IHSC"
OIHSC = "OIHSC"


class IndexError_(LookupError):
    """Unregistered meta-path, wrong index kind, or malformed index data."""


@dataclass
class LevelTree:
    """One k-level forest in preorder.

    ``verts[start[i]:start[i]+own[i]]`` are node i's own vertices and
    ``verts[start[i]:end[i]]`` its whole community. ``parent`` indexes into
    the same preorder (-1 for roots).
    """

    k: int
    verts: np.ndarray
    start: np.ndarray
    own: np.ndarray
    end: np.ndarray
    theta: np.ndarray
    parent: np.ndarray

    @property
    def node_count(self) -> int:
        return int(self.start.size)

    @cached_property
    def depth(self) -> np.ndarray:
        d = np.empty(self.node_count, np.int64)
        for i, p in enumerate(self.parent.tolist()):
            d[i] = 1 if p < 0 else d[p] + 1
        return d

    @cached_property
    def _lookup(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(self.verts, kind="stable")
        node = np.repeat(np.arange(self.node_count, dtype=np.int64), self.own)
        return self.verts[order], node[order]

    def node_of(self, v: int) -> int:
        """Preorder index of the node storing ``v``, or -1."""
        keys, node = self._lookup
        i = int(np.searchsorted(keys, v))
        if i < keys.size and keys[i] == v:
            return int(node[i])
        return -1

    def community(self, node: int) -> np.ndarray:
        return self.verts[self.start[node] : self.end[node]]

    def own_vertices(self, node: int) -> np.ndarray:
        s = self.start[node]
        return self.verts[s : s + self.own[node]]

    def children(self, node: int) -> list[int]:
        return np.flatnonzero(self.parent == node).tolist()

    def roots(self) -> list[int]:
        return np.flatnonzero(self.parent < 0).tolist()

    def fit_nodes(self, w: float) -> list[int]:
        """Maximal nodes whose threshold is at least ``w``."""
        ok = self.theta >= w
        par = self.parent
        up_ok = np.zeros_like(ok)
        has_parent = par >= 0
        up_ok[has_parent] = ok[par[has_parent]]
        return np.flatnonzero(ok & ~up_ok).tolist()


@dataclass
class MetaPathIndex:
    metapath: MetaPath
    levels: list[LevelTree]
    core: dict[int, int] = field(default_factory=dict)

    @property
    def k_max(self) -> int:
        return len(self.levels)

    def level(self, k: int) -> LevelTree | None:
        if 1 <= k <= len(self.levels):
            return self.levels[k - 1]
        return None

    def prepare(self) -> "MetaPathIndex":
        """Build the vertex lookups up front instead of on the first query."""
        for lv in self.levels:
            lv._lookup
        return self


@dataclass
class IndexForest:
    kind: str
    entries: dict[str, object]
    fingerprint: bytes = b"\0" * 16

    def entry(self, p: MetaPath | str):
        key = str(p)
        try:
            return self.entries[key]
        except KeyError:
            raise IndexError_(f"meta-path {key} is not registered in this index") from None

    @property
    def metapaths(self) -> list[str]:
        return list(self.entries)


def build_levels(
    ids: np.ndarray, indptr: np.ndarray, indices: np.ndarray, sig: np.ndarray
) -> tuple[list[LevelTree], np.ndarray]:
    """Build every level for a CSR graph whose vertex i has global id ``ids[i]``.

    ``ids`` must be ascending so local order matches global order.
    """
    n = ids.size
    if n == 0:
        return [], np.zeros(0, np.int64)
    core = kernels.core_numbers(indptr, indices)
    local = np.arange(n, dtype=np.int64)
    order = np.lexsort((local, sig))
    levels = []
    for k in range(1, int(core.max()) + 1):
        tau = kernels.level_thresholds(indptr, indices, core, k, order, sig)
        members = np.flatnonzero(core >= k)
        lorder = members[np.lexsort((members, -tau[members]))]
        vnode, theta, parent = kernels.merge_tree(indptr, indices, tau, lorder)
        levels.append(_layout(k, ids, members, vnode, theta, parent))
    return levels, core


def _layout(k, ids, members, vnode, theta, parent) -> LevelTree:
    nn = theta.size
    own = np.bincount(vnode[members], minlength=nn).astype(np.int64)
    minv = np.full(nn, np.iinfo(np.int64).max, np.int64)
    np.minimum.at(minv, vnode[members], members)
    size, low = kernels.subtree_stats(parent, own, minv)
    # children (and roots) ordered by descending size, then smallest vertex
    by = np.lexsort((low, -size, parent))
    is_root = parent[by] < 0
    roots = by[is_root]
    kids = by[~is_root]
    child_ptr = np.zeros(nn + 1, np.int64)
    np.add.at(child_ptr, parent[kids] + 1, 1)
    child_ptr = np.cumsum(child_ptr)
    seq, start, end, _ = kernels.preorder_layout(parent, own, child_ptr, kids, roots)
    rank = np.empty(nn, np.int64)
    rank[seq] = np.arange(nn)
    placed = members[np.lexsort((members, start[vnode[members]]))]
    par = parent[seq]
    return LevelTree(
        k=k,
        verts=ids[placed].astype(np.int64),
        start=start[seq],
        own=own[seq],
        end=end[seq],
        theta=theta[seq],
        parent=np.where(par < 0, -1, rank[np.maximum(par, 0)]),
    )


def build_metapath_index(g: HIN, p: MetaPath) -> MetaPathIndex:
    ids, indptr, indices = homo_csr(g, p)
    sig = np.asarray(g.sig, dtype=np.float64)[ids] if ids.size else np.zeros(0)
    levels, core = build_levels(ids, indptr, indices, sig)
    return MetaPathIndex(p, levels, dict(zip(ids.tolist(), core.tolist()))).prepare()


def build_ihsc(g: HIN, metapaths: list[MetaPath]) -> IndexForest:
    entries: dict[str, object] = {}
    for p in metapaths:
        if str(p) in entries:
            continue
        entries[str(p)] = build_metapath_index(g, p)
    return IndexForest(IHSC, entries, g.fingerprint)


def query_ihsc(idx: IndexForest, p: MetaPath | str, k: int, q: int) -> CommunityResult:
    """Community of ``q`` at cohesion ``k``: q's node plus all descendants."""
    if idx.kind != IHSC:
        raise IndexError_(f"expected an IHSC index, got {idx.kind}")
    entry = idx.entry(p)
    if q not in entry.core:
        return empty_result(q, k, entry.metapath, "ihsc", NO_INDEX_ENTRY)
    level = entry.level(k)
    node = level.node_of(q) if level is not None else -1
    if node < 0:
        return empty_result(q, k, entry.metapath, "ihsc")
    return CommunityResult(
        level.community(node), float(level.theta[node]), q, k, str(entry.metapath), "ihsc"
    )


def query_ihsc_threshold(idx: IndexForest, p: MetaPath | str, k: int, w: float) -> list[CommunityResult]:
    """Every maximal community at cohesion ``k`` whose significance is at least ``w``."""
    if idx.kind != IHSC:
        raise IndexError_(f"expected an IHSC index, got {idx.kind}")
    entry = idx.entry(p)
    level = entry.level(k)
    if level is None:
        return []
    return [
        CommunityResult(level.community(i), float(level.theta[i]), None, k, str(entry.metapath), "ihsc")
        for i in level.fit_nodes(w)
    ]


def depth_violations(entry: MetaPathIndex) -> list[tuple[int, int, int, int]]:
    """(vertex, k, depth at k, depth at k-1) wherever depth grows with k."""
    out = []
    for k in range(2, entry.k_max + 1):
        hi, lo = entry.level(k), entry.level(k - 1)
        d_hi = dict(zip(hi.verts.tolist(), np.repeat(hi.depth, hi.own).tolist()))
        d_lo = dict(zip(lo.verts.tolist(), np.repeat(lo.depth, lo.own).tolist()))
        out += [(v, k, d, d_lo[v]) for v, d in d_hi.items() if d > d_lo[v]]
    return out
