"""Slow, independent reference implementations used by tests and ``verify``.

Nothing here shares code with the production search paths beyond plain
graph-reading helpers, so agreement between the two is meaningful.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations
from typing import Mapping, Sequence

from .hin import HIN
from .metapath import MetaPath

Adjacency = Mapping[int, Sequence[int]]


def walk_p_neighbors(g: HIN, p: MetaPath, v: int) -> set[int]:
    """Endpoints of every walk from ``v`` whose type sequence matches ``p``."""
    types = [t.ordinal for t in p.types]
    frontier = {v}
    for t in types[1:]:
        frontier = {w for x in frontier for w in g.neighbors(x) if g.vtype[w] == t}
    frontier.discard(v)
    return frontier


def walk_homo_graph(g: HIN, p: MetaPath, q: int) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {}
    queue = deque([q])
    seen = {q}
    while queue:
        v = queue.popleft()
        adj[v] = walk_p_neighbors(g, p, v)
        for w in adj[v] - seen:
            seen.add(w)
            queue.append(w)
    return adj


def walk_full_homo_graph(g: HIN, p: MetaPath) -> dict[int, set[int]]:
    return {v: walk_p_neighbors(g, p, v) for v in g.vertices_of_type(p.anchor)}


def _delete_below(adj: Adjacency, k: int, keep: set[int]) -> set[int]:
    keep = set(keep)
    changed = True
    while changed:
        changed = False
        for v in list(keep):
            if sum(1 for w in adj[v] if w in keep) < k:
                keep.discard(v)
                changed = True
    return keep


def _reach(adj: Adjacency, q: int, keep: set[int]) -> set[int]:
    seen = {q}
    stack = [q]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w in keep and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def core_numbers_by_deletion(adj: Adjacency) -> dict[int, int]:
    out = {v: 0 for v in adj}
    k = 1
    while True:
        core = _delete_below(adj, k, set(adj))
        if not core:
            return out
        for v in core:
            out[v] = k
        k += 1


def threshold_hsc(
    adj: Adjacency, sig: Mapping[int, float], k: int, q: int
) -> tuple[frozenset[int], float | None]:
    """Try thresholds from Sig(q) downward; the first whose k-core holds q wins."""
    for theta in sorted({s for v, s in sig.items() if v in adj and s <= sig[q]}, reverse=True):
        keep = _delete_below(adj, k, {v for v in adj if sig[v] >= theta})
        if q in keep:
            return frozenset(_reach(adj, q, keep)), theta
    return frozenset(), None


def exhaustive_hsc(
    adj: Adjacency, sig: Mapping[int, float], k: int, q: int, limit: int = 14
) -> tuple[frozenset[int], float | None]:
    """Enumerate every vertex set containing q (small graphs only)."""
    others = sorted(v for v in adj if v != q)
    if len(others) > limit:
        raise ValueError(f"exhaustive search limited to {limit + 1} vertices")
    best: tuple[float, int] | None = None
    best_set: frozenset[int] = frozenset()
    for r in range(len(others) + 1):
        for extra in combinations(others, r):
            s = set(extra) | {q}
            if any(sum(1 for w in adj[v] if w in s) < k for v in s):
                continue
            if _reach(adj, q, s) != s:
                continue
            key = (min(sig[v] for v in s), len(s))
            if best is None or key > best:
                best, best_set = key, frozenset(s)
    return (best_set, best[0]) if best else (frozenset(), None)


def check_community(
    adj: Adjacency, sig: Mapping[int, float], k: int, q: int, members, f
) -> list[str]:
    """Problems with a claimed community; an empty list means it is valid."""
    members = set(members)
    if not members:
        ok = q not in _delete_below(adj, k, _reach(adj, q, set(adj)))
        return [] if ok else ["empty result but q lies in a k-core"]
    problems = []
    if q not in members:
        problems.append("q missing")
    if _reach(adj, q, members) != members:
        problems.append("not connected")
    low = [v for v in members if sum(1 for w in adj[v] if w in members) < k]
    if low:
        problems.append(f"degree below k at {sorted(low)[:5]}")
    if f != min(sig[v] for v in members):
        problems.append("f is not the minimum significance")
    relaxed = _delete_below(adj, k, {v for v in adj if sig[v] >= f})
    if q in relaxed and _reach(adj, q, relaxed) != members:
        problems.append("not maximal at its own threshold")
    higher = _delete_below(adj, k, {v for v in adj if sig[v] > f})
    if q in higher:
        problems.append("a community with larger f exists")
    return problems
