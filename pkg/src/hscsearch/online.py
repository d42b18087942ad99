"""Online HSC search: reference peel, QHSC, AQHSC and solution-space reuse."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cores import component_of, core_component
from .hin import HIN
from .metapath import (
    MetaPath,
    MetaPathError,
    _check_anchor,
    compute_homo_with_cache,
    full_homo_graph,
    get_homo_graph,
    is_sub_metapath,
    nesting_certified,
)

NO_CORE = "no-k-core"
NO_INDEX_ENTRY = "not-indexed"


@dataclass(frozen=True, eq=False)
class CommunityResult:
    """A community (or an empty answer with a reason).

    ``members`` may be any iterable of vertex ids, including a numpy array;
    index lookups hand back array slices and the set is built on first use.
    """

    members: object
    f_value: float | None
    q: int | None
    k: int
    metapath: str
    algorithm: str = ""
    empty_reason: str | None = None

    @cached_property
    def vertices(self) -> frozenset[int]:
        m = self.members
        if isinstance(m, frozenset):
            return m
        if isinstance(m, np.ndarray):
            return frozenset(m.tolist())
        return frozenset(m)

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def __len__(self) -> int:
        m = self.members
        return int(m.size) if isinstance(m, np.ndarray) else len(self.vertices)

    def key(self) -> tuple[frozenset[int], float | None]:
        return self.vertices, self.f_value

    def __eq__(self, other) -> bool:
        if not isinstance(other, CommunityResult):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return (
            f"CommunityResult(size={len(self)}, f={self.f_value}, q={self.q}, k={self.k}, "
            f"metapath={self.metapath!r}, algorithm={self.algorithm!r}, reason={self.empty_reason!r})"
        )

    def to_dict(self, g: HIN | None = None) -> dict:
        verts = sorted(self.vertices)
        return {
            "algorithm": self.algorithm,
            "metapath": self.metapath,
            "k": self.k,
            "q": g.names[self.q] if g is not None and self.q is not None else self.q,
            "f": self.f_value,
            "size": len(verts),
            "vertices": [g.names[v] for v in verts] if g is not None else verts,
            "empty_reason": self.empty_reason,
        }


def empty_result(q, k, p, algorithm, reason=NO_CORE) -> CommunityResult:
    return CommunityResult(frozenset(), None, q, k, str(p), algorithm, reason)


def peel_for_query(
    adj: Mapping[int, Sequence[int]],
    sig: Mapping[int, float] | Sequence[float],
    k: int,
    q: int,
    start: Iterable[int],
) -> tuple[set[int], float]:
    """Batch-peel a connected k-core ``start`` containing q until q is removed.

    Every round removes all vertices at the current minimum significance and
    cascades away vertices whose degree fell below k. The community is q's
    component of the graph as it stood at the start of the round that removed q.
    """
    alive = set(start)
    deg = {v: len(alive.intersection(adj[v])) for v in alive}
    order = sorted(alive, key=sig.__getitem__)
    i, n = 0, len(order)
    while True:
        while order[i] not in alive:
            i += 1
        theta = sig[order[i]]
        batch = []
        while i < n and sig[order[i]] == theta:
            if order[i] in alive:
                batch.append(order[i])
            i += 1
        alive.difference_update(batch)
        removed = list(batch)
        stack = list(batch)
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w in alive:
                    deg[w] -= 1
                    if deg[w] < k:
                        alive.discard(w)
                        removed.append(w)
                        stack.append(w)
        if q not in alive:
            alive.update(removed)
            return component_of(adj, q, alive), theta


def _finish(h, k, q, p, algorithm, space=None) -> CommunityResult:
    comp = core_component(h.adj, k, q) if space is None else space
    if not comp:
        return empty_result(q, k, p, algorithm)
    members, f = peel_for_query(h.adj, h.sig, k, q, comp)
    return CommunityResult(frozenset(members), f, q, k, str(p), algorithm)


def _check_k(k: int) -> None:
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")


def basic_peel(g: HIN, k: int, p: MetaPath, q: int | str) -> CommunityResult:
    """Reference search over the homogeneous graph of every anchor vertex."""
    q = g.vid(q)
    _check_anchor(g, p, q)
    _check_k(k)
    return _finish(full_homo_graph(g, p), k, q, p, "basic")


def qhsc(
    g: HIN, k: int, p: MetaPath, q: int | str, cache: "SolutionCache | None" = None
) -> CommunityResult:
    """Search on the homogeneous graph of q's P-connected closure only."""
    q = g.vid(q)
    _check_k(k)
    h = get_homo_graph(g, p, q)
    comp = core_component(h.adj, k, q)
    if cache is not None and comp:
        cache.put(p, k, comp)
    return _finish(h, k, q, p, "qhsc", comp)


def aqhsc(
    g: HIN,
    k: int,
    p_parent: MetaPath,
    p_child: MetaPath,
    q: int | str,
    cache: "SolutionCache | None" = None,
) -> CommunityResult:
    """Child-path search restricted to the parent's k-core component of q.

    The restriction is exact only when every child P-neighbor pair is also a
    parent P-neighbor pair. When that cannot be certified on ``g`` the search
    falls back to :func:`qhsc` on the child path and counts a skipped reuse.
    """
    q = g.vid(q)
    _check_k(k)
    rel = is_sub_metapath(p_child, p_parent)
    if rel is None:
        raise MetaPathError(f"{p_child} is not a sub-meta-path of {p_parent}")
    cache = cache if cache is not None else SolutionCache()
    if not nesting_certified(g, rel):
        cache.bump("reuse_skipped")
        r = qhsc(g, k, p_child, q)
        return CommunityResult(r.vertices, r.f_value, q, k, str(p_child), "aqhsc", r.empty_reason)
    _check_anchor(g, p_parent, q)
    hit = cache.find(p_parent, k, q, same_path=True)
    space = hit[2] if hit else None
    if space is None:
        cache.bump("misses")
        space = core_component(get_homo_graph(g, p_parent, q).adj, k, q)
        if not space:
            return empty_result(q, k, p_child, "aqhsc")
        cache.put(p_parent, k, space)
    else:
        cache.bump("hits")
    h = compute_homo_with_cache(g, p_child, q, space)
    return _finish(h, k, q, p_child, "aqhsc")


def qhsc_with_k_reuse(
    g: HIN, k_high: int, p: MetaPath, q: int | str, cache: "SolutionCache"
) -> CommunityResult:
    """QHSC at ``k_high`` searching only inside a cached lower-k solution space."""
    q = g.vid(q)
    _check_k(k_high)
    hit = cache.find(p, k_high, q, same_path=True)
    if hit is None:
        cache.bump("misses")
        return qhsc(g, k_high, p, q, cache)
    cache.bump("hits")
    h = compute_homo_with_cache(g, p, q, hit[2])
    r = _finish(h, k_high, q, p, "qhsc")
    if r.vertices:
        cache.put(p, k_high, core_component(h.adj, k_high, q))
    return r


@dataclass
class SolutionCache:
    """Vertex supersets of earlier searches keyed by (meta-path, k, component).

    Each stored set is q's connected k-core component in that meta-path's
    homogeneous graph, so it is shared by every vertex inside it. Reads are
    lock-free; inserts take a lock. Concurrent misses may duplicate work.
    """

    entries: dict[tuple[MetaPath, int, int], frozenset[int]] = field(default_factory=dict)
    stats: dict[str, int] = field(default_factory=dict)
    _by_vertex: dict[tuple[MetaPath, int], dict[int, frozenset[int]]] = field(
        default_factory=dict, repr=False
    )
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def bump(self, name: str) -> None:
        with self._lock:
            self.stats[name] = self.stats.get(name, 0) + 1

    def put(self, p: MetaPath, k: int, space: Iterable[int]) -> frozenset[int]:
        space = frozenset(space)
        key = (p, k, min(space))
        with self._lock:
            if key in self.entries:
                return self.entries[key]
            self.entries[key] = space
            index = self._by_vertex.setdefault((p, k), {})
            for v in space:
                index[v] = space
        return space

    def get(self, p: MetaPath, k: int, q: int) -> frozenset[int] | None:
        index = self._by_vertex.get((p, k))
        return None if index is None else index.get(q)

    def find(
        self, p: MetaPath, k: int, q: int, same_path: bool = False
    ) -> tuple[MetaPath, int, frozenset[int]] | None:
        """Smallest cached space usable for (p, k, q).

        An entry (p2, k2) qualifies when k2 <= k and either p2 == p or, unless
        ``same_path`` is set, p is a sub-meta-path of p2.
        """
        best = None
        for (p2, k2), index in list(self._by_vertex.items()):
            if k2 > k:
                continue
            if p2 != p and (same_path or is_sub_metapath(p, p2) is None):
                continue
            space = index.get(q)
            if space is not None and (best is None or len(space) < len(best[2])):
                best = (p2, k2, space)
        return best

    def __len__(self) -> int:
        return len(self.entries)
