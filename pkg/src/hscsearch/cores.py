"""k-core utilities over a HomoGraph or a plain adjacency mapping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

Adjacency = Mapping[int, Sequence[int]]


@dataclass(frozen=True)
class CoreResult:
    vertices: frozenset[int]
    k: int
    anchored_at: int | None = None

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class CoreDecomposition:
    core_number: dict[int, int]
    k_max: int


def _adj(h) -> Adjacency:
    return h.adj if hasattr(h, "adj") else h


def peel_to_k_core(adj: Adjacency, k: int, alive: Iterable[int] | None = None) -> set[int]:
    """Vertices of the k-core of the subgraph induced by ``alive`` (default: all)."""
    alive = set(adj) if alive is None else set(alive)
    deg = {v: len(alive.intersection(adj[v])) for v in alive}
    stack = [v for v, d in deg.items() if d < k]
    dead = set(stack)
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w in alive and w not in dead:
                deg[w] -= 1
                if deg[w] < k:
                    dead.add(w)
                    stack.append(w)
    return alive - dead


def component_of(adj: Adjacency, q: int, alive: set[int] | frozenset[int] | None = None) -> set[int]:
    if alive is not None and q not in alive:
        return set()
    seen = {q}
    frontier: Iterable[int] = (q,)
    while frontier:
        nxt: set[int] = set()
        for v in frontier:
            nxt.update(adj[v])
        nxt -= seen
        if alive is not None:
            nxt &= alive
        seen |= nxt
        frontier = nxt
    return seen


def core_component(adj: Adjacency, k: int, q: int) -> set[int]:
    """q's connected component of the k-core (empty set when q is peeled)."""
    core = peel_to_k_core(adj, k, component_of(adj, q))
    return component_of(adj, q, core)


def k_core_containing(h, k: int, q: int) -> CoreResult | None:
    adj = _adj(h)
    if q not in adj:
        raise KeyError(f"vertex {q} is not in the graph")
    if k < 0:
        raise ValueError("k must be non-negative")
    comp = core_component(adj, k, q)
    return CoreResult(frozenset(comp), k, q) if comp else None


def components(adj: Adjacency, alive: Iterable[int] | None = None) -> list[set[int]]:
    alive = set(adj) if alive is None else set(alive)
    out = []
    left = set(alive)
    while left:
        comp = component_of(adj, min(left), alive)
        left -= comp
        out.append(comp)
    return out


def k_components(h, k: int) -> list[CoreResult]:
    adj = _adj(h)
    comps = components(adj, peel_to_k_core(adj, k))
    comps.sort(key=min)
    return [CoreResult(frozenset(c), k) for c in comps]


def core_numbers(adj: Adjacency) -> dict[int, int]:
    """Core number of every vertex (bucket-queue peeling, linear time)."""
    deg = {v: len(ws) for v, ws in adj.items()}
    if not deg:
        return {}
    buckets: list[set[int]] = [set() for _ in range(max(deg.values()) + 1)]
    for v, d in deg.items():
        buckets[d].add(v)
    core: dict[int, int] = {}
    d = 0
    for _ in range(len(deg)):
        while not buckets[d]:
            d += 1
        v = buckets[d].pop()
        core[v] = d
        for w in adj[v]:
            dw = deg[w]
            if w not in core and dw > d:
                buckets[dw].discard(w)
                deg[w] = dw - 1
                buckets[dw - 1].add(w)
    return core


def core_decomposition(h) -> CoreDecomposition:
    core = core_numbers(_adj(h))
    return CoreDecomposition(core, max(core.values(), default=0))
