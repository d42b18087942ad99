import pytest
from hypothesis import given
from hypothesis import strategies as st

from hscsearch.cores import (
    core_decomposition,
    core_numbers,
    k_components,
    k_core_containing,
    peel_to_k_core,
)
from hscsearch.metapath import full_homo_graph
from hscsearch.oracle import core_numbers_by_deletion


def graph(edges, vertices=()):
    adj = {v: set() for v in vertices}
    for u, w in edges:
        adj.setdefault(u, set()).add(w)
        adj.setdefault(w, set()).add(u)
    return {v: tuple(sorted(ws)) for v, ws in adj.items()}


random_graphs = st.integers(1, 14).flatmap(
    lambda n: st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n).map(
        lambda es: graph([(u, w) for u, w in es if u != w], range(n))
    )
)


def deletion_core(adj, k):
    return {v for v, c in core_numbers_by_deletion(adj).items() if c >= k}


def test_triangle():
    tri = graph([(0, 1), (1, 2), (0, 2)])
    assert k_core_containing(tri, 2, 0).vertices == {0, 1, 2}
    assert k_core_containing(tri, 3, 0) is None


def test_k_zero_is_component():
    adj = graph([(0, 1)], range(3))
    assert k_core_containing(adj, 0, 0).vertices == {0, 1}
    assert k_core_containing(adj, 0, 2).vertices == {2}


def test_errors():
    adj = graph([(0, 1)])
    with pytest.raises(KeyError):
        k_core_containing(adj, 1, 5)
    with pytest.raises(ValueError):
        k_core_containing(adj, -1, 0)


def test_decomposition_small_cases():
    empty = core_decomposition({})
    assert empty.core_number == {} and empty.k_max == 0
    path = core_decomposition(graph([(0, 1), (1, 2)]))
    assert path.core_number == {0: 1, 1: 1, 2: 1} and path.k_max == 1


def test_two_triangles():
    adj = graph([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    comps = k_components(adj, 2)
    assert [sorted(c.vertices) for c in comps] == [[0, 1, 2], [3, 4, 5]]


def test_fix1_cores(fix1, mp):
    names = lambda ids: {fix1.names[v] for v in ids}  # noqa: E731
    amdma = full_homo_graph(fix1, mp(fix1, "A-M-D-M-A"))
    got = k_core_containing(amdma, 4, fix1.vid("a1"))
    assert names(got.vertices) == {"a1", "a3", "a4", "a5", "a6", "a7"}
    ama = full_homo_graph(fix1, mp(fix1, "A-M-A"))
    assert all(k_core_containing(ama, 3, q) is None for q in ama.adj)
    amwma = full_homo_graph(fix1, mp(fix1, "A-M-W-M-A"))
    comps = k_components(amwma, 3)
    assert len(comps) == 1 and "a2" not in names(comps[0].vertices)
    assert core_decomposition(amwma).k_max == 5


@given(random_graphs)
def test_core_numbers_match_deletion_oracle(adj):
    assert core_numbers(adj) == core_numbers_by_deletion(adj)


@given(random_graphs, st.integers(0, 5))
def test_k_components_cover_the_k_core(adj, k):
    comps = k_components(adj, k)
    union = set().union(*(c.vertices for c in comps)) if comps else set()
    assert union == deletion_core(adj, k) == peel_to_k_core(adj, k)
    seen = set()
    for c in comps:
        assert not (seen & c.vertices)
        seen |= c.vertices
        for v in c.vertices:
            assert sum(1 for w in adj[v] if w in c.vertices) >= k


@given(random_graphs, st.integers(1, 5))
def test_nesting_across_k(adj, k):
    higher = k_components(adj, k + 1)
    lower = k_components(adj, k)
    for h in higher:
        assert sum(1 for c in lower if h.vertices <= c.vertices) == 1
    for i in range(1, k + 1):
        assert deletion_core(adj, k) <= deletion_core(adj, i)


@given(random_graphs, st.integers(0, 5))
def test_anchored_core_is_closed_and_maximal(adj, k):
    for q in adj:
        got = k_core_containing(adj, k, q)
        core = deletion_core(adj, k)
        if q not in core:
            assert got is None
            continue
        comp = next(c.vertices for c in k_components(adj, k) if q in c.vertices)
        assert got.vertices == comp
