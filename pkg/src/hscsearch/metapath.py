"""Meta-paths and meta-path induced homogeneous graphs.

A symmetric meta-path ``t1-t2-...-tl`` is split at its central ("lead") type.
Two anchor vertices are P-neighbors when they share a lead-type ancestor
reachable along the first half of the path; the second half mirrors the first,
so the anchors below an ancestor are found by walking the first half backwards.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np
from scipy import sparse

from .hin import HIN, HINError, Schema, TypeId


class MetaPathError(ValueError):
    pass


@dataclass(frozen=True)
class MetaPath:
    types: tuple[TypeId, ...]

    @property
    def anchor(self) -> TypeId:
        return self.types[0]

    @property
    def segments(self) -> tuple[tuple[TypeId, TypeId], ...]:
        return tuple(zip(self.types, self.types[1:]))

    @property
    def mid_index(self) -> int:
        return len(self.types) // 2

    @property
    def lead(self) -> TypeId:
        return self.types[self.mid_index]

    @cached_property
    def upward(self) -> tuple[int, ...]:
        """Type ordinals visited when climbing from an anchor to the lead type."""
        return tuple(t.ordinal for t in self.types[1 : self.mid_index + 1])

    @cached_property
    def downward(self) -> tuple[int, ...]:
        """Type ordinals visited when descending from the lead type to anchors."""
        return tuple(t.ordinal for t in self.types[self.mid_index + 1 :])

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.types)

    def __str__(self) -> str:
        return "-".join(self.names)

    def __len__(self) -> int:
        return len(self.types)


def parse_metapath(text: str, schema: Schema) -> MetaPath:
    """Parse ``A-M-D-M-A`` (or ``AMDMA`` for single-letter types)."""
    text = text.strip()
    if "-" in text:
        parts = [p.strip() for p in text.split("-")]
    elif schema.has_type(text):
        parts = [text]
    else:
        parts = list(text)
    if any(not p for p in parts):
        raise MetaPathError(f"empty type name in meta-path {text!r}")
    try:
        types = tuple(schema.type(p) for p in parts)
    except HINError as exc:
        raise MetaPathError(f"{exc} in meta-path {text!r}") from None
    if len(types) < 3:
        raise MetaPathError(f"meta-path {text!r} needs at least 3 types")
    if types != types[::-1]:
        raise MetaPathError(f"meta-path {text!r} is asymmetric")
    for a, b in zip(types, types[1:]):
        if not schema.allows(a, b):
            raise MetaPathError(f"meta-path {text!r}: {a.name}-{b.name} is not an edge type pair")
    return MetaPath(types)


# -- sub-meta-path relation --------------------------------------------------

@dataclass(frozen=True)
class SubPathRelation:
    parent: MetaPath
    child: MetaPath
    embedding: tuple[int, ...]


def _embeddings(child: MetaPath, parent: MetaPath) -> Iterator[tuple[int, ...]]:
    c, p = child.types, parent.types
    if c[0] != p[0] or c[-1] != p[-1] or len(c) > len(p):
        return
    last = len(p) - 1

    def rec(i: int, start: int, acc: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if i == len(c) - 1:
            yield acc + (last,)
            return
        # leave room for the remaining child positions before the last slot
        for j in range(start, last - (len(c) - 1 - i) + 1):
            if p[j] == c[i]:
                yield from rec(i + 1, j + 1, acc + (j,))

    yield from rec(1, 1, (0,))


def is_sub_metapath(child: MetaPath, parent: MetaPath) -> SubPathRelation | None:
    """Leftmost endpoint-preserving subsequence embedding of child into parent."""
    if child.types != child.types[::-1] or child.anchor != parent.anchor:
        return None
    for emb in _embeddings(child, parent):
        return SubPathRelation(parent, child, emb)
    return None


def _gap_requirements(seq: tuple[int, ...]) -> set[tuple[int, int]] | None:
    """Backtrack-cancel ``x y x -> x`` until only the two endpoint types remain.

    Each cancellation is an out-and-back excursion from an ``x`` vertex to a
    ``y`` neighbour; it is realisable whenever every ``x`` vertex has some
    ``y`` neighbour. Returns those ``(x, y)`` requirements, or None when the
    gap cannot be reduced to a single step.
    """
    stack: list[int] = []
    need: set[tuple[int, int]] = set()
    for t in seq:
        stack.append(t)
        while len(stack) >= 3 and stack[-1] == stack[-3]:
            need.add((stack[-3], stack[-2]))
            del stack[-2:]
    return need if len(stack) == 2 else None


def nesting_requirements(rel: SubPathRelation) -> list[set[tuple[int, int]]]:
    """Completeness requirements, one alternative per reducible embedding."""
    ptypes = tuple(t.ordinal for t in rel.parent.types)
    options = []
    for emb in _embeddings(rel.child, rel.parent):
        need: set[tuple[int, int]] = set()
        for a, b in zip(emb, emb[1:]):
            gap = _gap_requirements(ptypes[a : b + 1])
            if gap is None:
                break
            need |= gap
        else:
            options.append(need)
    return options


def nesting_certified(g: HIN, rel: SubPathRelation) -> bool:
    """True when every child P-neighbour pair is provably a parent P-neighbour pair.

    Holds if some embedding's excursions are all realisable on ``g``: every
    vertex of each required type ``x`` has at least one neighbour of type ``y``.
    """
    for need in nesting_requirements(rel):
        if all(
            all(g.neighbors_of_type(v, y) for v in g.vertices_of_type(x)) for x, y in need
        ):
            return True
    return False


# -- P-neighbors -------------------------------------------------------------

def _walk(g: HIN, start: Iterable[int], steps: Iterable[int]) -> set[int]:
    frontier = set(start)
    nbrs = g._nbrs
    for t in steps:
        nxt: set[int] = set()
        for x in frontier:
            ws = nbrs[x].get(t)
            if ws:
                nxt.update(ws)
        frontier = nxt
        if not frontier:
            break
    return frontier


def _check_anchor(g: HIN, p: MetaPath, v: int) -> None:
    if g.vtype[g.vid(v)] != p.anchor.ordinal:
        raise MetaPathError(
            f"vertex {g.names[v]!r} has type {g.type_of(v).name}, "
            f"meta-path {p} is anchored at {p.anchor.name}"
        )


def ancestors(g: HIN, p: MetaPath, v: int) -> set[int]:
    """Lead-type vertices reachable from ``v`` along the first half of ``p``."""
    return _walk(g, (v,), p.upward)


def subordinates(g: HIN, p: MetaPath, a: int) -> set[int]:
    """Anchor vertices reachable from lead vertex ``a`` along the second half."""
    return _walk(g, (a,), p.downward)


def p_neighbors(g: HIN, p: MetaPath, v: int) -> set[int]:
    _check_anchor(g, p, v)
    out: set[int] = set()
    for a in ancestors(g, p, v):
        out |= subordinates(g, p, a)
    out.discard(v)
    return out


# -- homogeneous graphs ------------------------------------------------------

@dataclass
class HomoGraph:
    """Simple graph over anchor-type vertices; edges are P-neighbor pairs."""

    adj: dict[int, tuple[int, ...]]
    sig: dict[int, float]
    metapath: MetaPath | None = None
    stats: dict[str, int] = field(default_factory=dict)

    @property
    def vertices(self) -> set[int]:
        return set(self.adj)

    def __len__(self) -> int:
        return len(self.adj)

    def __contains__(self, v: int) -> bool:
        return v in self.adj

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def edge_count(self) -> int:
        return sum(len(ws) for ws in self.adj.values()) // 2

    def edges(self) -> set[tuple[int, int]]:
        return {(u, w) for u, ws in self.adj.items() for w in ws if u < w}

    def induced(self, keep: Iterable[int]) -> "HomoGraph":
        keep = set(keep) & self.adj.keys()
        adj = {v: tuple(w for w in self.adj[v] if w in keep) for v in keep}
        return HomoGraph(adj, {v: self.sig[v] for v in keep}, self.metapath)

    @classmethod
    def from_edges(
        cls, vertices: Iterable[int], edges: Iterable[tuple[int, int]], sig, metapath=None
    ) -> "HomoGraph":
        nb: dict[int, set[int]] = {v: set() for v in vertices}
        for u, w in edges:
            if u == w:
                continue
            nb[u].add(w)
            nb[w].add(u)
        return cls(
            {v: tuple(sorted(ws)) for v, ws in nb.items()},
            {v: float(sig[v]) for v in nb},
            metapath,
        )


def _closure(
    g: HIN, p: MetaPath, q: int, allowed: set[int] | frozenset[int] | None
) -> HomoGraph:
    # Queue-driven expansion from q: climb to lead ancestors, collect their
    # subordinate anchors, link, and enqueue unseen anchors. Subordinate sets
    # are cached per ancestor for the lifetime of the call.
    sub_cache: dict[int, set[int]] = {}
    adj: dict[int, tuple[int, ...]] = {}
    seen = {q}
    queue = deque([q])
    rejected = 0
    while queue:
        cur = queue.popleft()
        nb: set[int] = set()
        for a in _walk(g, (cur,), p.upward):
            s = sub_cache.get(a)
            if s is None:
                s = _walk(g, (a,), p.downward)
                if allowed is not None:
                    before = len(s)
                    s &= allowed
                    rejected += before - len(s)
                sub_cache[a] = s
            nb |= s
        nb.discard(cur)
        adj[cur] = tuple(sorted(nb))
        for w in nb:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    sig = g.sig
    return HomoGraph(
        adj,
        {v: sig[v] for v in adj},
        p,
        {"ancestors": len(sub_cache), "rejected": rejected},
    )


def get_homo_graph(g: HIN, p: MetaPath, q: int) -> HomoGraph:
    """Homogeneous graph over every anchor vertex P-connected to ``q``."""
    q = g.vid(q)
    _check_anchor(g, p, q)
    return _closure(g, p, q, None)


def compute_homo_with_cache(
    g: HIN, p_child: MetaPath, q: int, solution_space: Iterable[int]
) -> HomoGraph:
    """As :func:`get_homo_graph`, but every expansion is intersected with
    ``solution_space``; vertices outside it are never linked or enqueued."""
    q = g.vid(q)
    _check_anchor(g, p_child, q)
    space = solution_space if isinstance(solution_space, (set, frozenset)) else set(solution_space)
    if q not in space:
        raise MetaPathError(f"query vertex {g.names[q]!r} is outside the solution space")
    return _closure(g, p_child, q, space)


def lead_incidence(g: HIN, p: MetaPath) -> sparse.csr_matrix:
    """0/1 matrix: anchor (local index) x lead vertex (local index) reachability."""
    types = p.types
    m = None
    for a, b in zip(types[: p.mid_index], types[1 : p.mid_index + 1]):
        blk = g.type_block(a, b).astype(np.int32)
        m = blk if m is None else (m @ blk).tocsr()
        m.data[:] = 1
        m.eliminate_zeros()
    return m


def homo_csr(g: HIN, p: MetaPath) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Homogeneous graph over every anchor vertex as CSR arrays.

    Returns (anchor ids ascending, indptr, indices); neighbor positions index
    into the anchor array, sorted, without self-loops.
    """
    members = np.asarray(g.vertices_of_type(p.anchor), dtype=np.int64)
    if members.size == 0:
        return members, np.zeros(1, np.int64), np.zeros(0, np.int64)
    inc = lead_incidence(g, p)
    h = (inc @ inc.T).tocsr()
    h.setdiag(0)
    h.eliminate_zeros()
    h.sort_indices()
    return members, h.indptr.astype(np.int64), h.indices.astype(np.int64)


def full_homo_graph(g: HIN, p: MetaPath) -> HomoGraph:
    """Homogeneous graph over all anchor vertices (not only one component).

    Memoized on ``g``; callers must not mutate the result.
    """
    key = ("full_homo_graph", p)
    if key in g.derived:
        return g.derived[key]
    members, indptr, indices = homo_csr(g, p)
    nbr_global = members[indices].tolist()
    ids = members.tolist()
    adj = {v: tuple(nbr_global[indptr[i] : indptr[i + 1]]) for i, v in enumerate(ids)}
    sig = g.sig
    g.derived[key] = HomoGraph(adj, {v: sig[v] for v in ids}, p)
    return g.derived[key]


def all_metapaths(schema: Schema, max_len: int = 5) -> list[MetaPath]:
    """Every symmetric schema-valid meta-path up to ``max_len`` types."""
    out: list[MetaPath] = []
    types = schema.vertex_types

    def grow(prefix: tuple[TypeId, ...]) -> None:
        half = len(prefix)
        full_len = 2 * half - 1
        if full_len >= 3:
            out.append(MetaPath(prefix + prefix[-2::-1]))
        if 2 * (half + 1) - 1 > max_len:
            return
        for t in types:
            if schema.allows(prefix[-1], t):
                grow(prefix + (t,))

    for t in types:
        grow((t,))
    return out


__all__ = [
    "MetaPath",
    "MetaPathError",
    "SubPathRelation",
    "HomoGraph",
    "parse_metapath",
    "is_sub_metapath",
    "nesting_certified",
    "nesting_requirements",
    "p_neighbors",
    "ancestors",
    "subordinates",
    "get_homo_graph",
    "compute_homo_with_cache",
    "full_homo_graph",
    "homo_csr",
    "lead_incidence",
    "all_metapaths",
]
